#include "glottal/classifier.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iterator>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "glottal/error.hpp"
#include "json.hpp"

namespace glottal::clf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxRedraws = 10;

bool folds_ok(const std::vector<std::vector<std::size_t>>& folds, const std::vector<int>& y) {
  std::size_t pos = 0, neg = 0;
  for (int v : y) (v == 1 ? pos : neg)++;
  for (const auto& f : folds) {
    if (f.empty()) return false;
    std::size_t fp = 0, fn = 0;
    for (std::size_t i : f) (y[i] == 1 ? fp : fn)++;
    if (fp == pos || fn == neg) return false;  // training part would lose a class
  }
  return true;
}

std::vector<std::vector<std::size_t>> draw(const std::vector<int>& y,
                                           const std::vector<std::string>& speakers, int k,
                                           std::mt19937_64& rng, bool by_speaker) {
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  if (!by_speaker) {
    // Shuffle each class and deal round robin, continuing the rotation across classes.
    std::size_t next = 0;
    for (int label : {1, -1}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == label) idx.push_back(i);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i : idx) folds[next++ % folds.size()].push_back(i);
    }
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < y.size(); ++i) groups[speakers[i]].push_back(i);
    for (int label : {1, -1}) {
      // A speaker is dealt with the class of its first recording.
      std::vector<const std::vector<std::size_t>*> g;
      for (const auto& [name, rows] : groups)
        if (y[rows.front()] == label) g.push_back(&rows);
      std::shuffle(g.begin(), g.end(), rng);
      for (const auto* rows : g) {
        auto smallest = std::min_element(folds.begin(), folds.end(), [](const auto& a, const auto& b) {
          return a.size() < b.size();
        });
        smallest->insert(smallest->end(), rows->begin(), rows->end());
      }
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Eigen::MatrixXd rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

Eigen::MatrixXd block(const Eigen::MatrixXd& d, const std::vector<std::size_t>& r,
                      const std::vector<std::size_t>& c) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          d(static_cast<Eigen::Index>(r[i]), static_cast<Eigen::Index>(c[j]));
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

// Mixes the run seed with a stream index so that folds draw independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Inner-CV accuracy per (C, gamma) cell on already scaled data; returns the best pair.
std::pair<double, double> select_hyper(const Eigen::MatrixXd& xz, const std::vector<int>& y,
                                       const CvConfig& cfg, std::uint64_t seed) {
  const double d = static_cast<double>(std::max<Eigen::Index>(1, xz.cols()));
  std::vector<std::vector<std::size_t>> inner;
  try {
    inner = make_folds(y, std::vector<std::string>(y.size()), cfg.inner_folds, seed, false);
  } catch (const Error&) {
    return {1.0, 1.0 / d};  // too few rows for an inner split
  }
  const Eigen::MatrixXd dist = svm::squared_distances(xz, xz);
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), 0);

  double best_acc = -1.0, best_c = cfg.c_grid.front(), best_g = cfg.gamma_grid.front() / d;
  for (double c : cfg.c_grid) {
    for (double g0 : cfg.gamma_grid) {
      const double g = g0 / d;
      std::size_t correct = 0, total = 0;
      for (const auto& test : inner) {
        std::vector<std::size_t> train;
        std::set_difference(all.begin(), all.end(), test.begin(), test.end(), std::back_inserter(train));
        const auto ytr = pick(y, train);
        const Eigen::MatrixXd ktr = (-g * block(dist, train, train)).array().exp().matrix();
        const auto sol = svm::smo_solve(ktr, ytr, {c, g});
        const Eigen::MatrixXd kte = (-g * block(dist, test, train)).array().exp().matrix();
        for (std::size_t t = 0; t < test.size(); ++t) {
          double s = -sol.rho;
          for (std::size_t j = 0; j < train.size(); ++j)
            s += sol.alpha[j] * ytr[j] * kte(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
          if ((s >= 0.0 ? 1 : -1) == y[test[t]]) ++correct;
          ++total;
        }
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(total);
      if (acc > best_acc) {
        best_acc = acc;
        best_c = c;
        best_g = g;
      }
    }
  }
  return {best_c, best_g};
}

}  // namespace

std::map<std::string, Stat> aggregate(const FrameTracks& tracks) {
  std::map<std::string, Stat> out;
  for (const auto& [name, values] : tracks) {
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (double v : values)
      if (std::isfinite(v)) {
        s += v;
        ++n;
      }
    if (n == 0) {
      out[name] = {kNaN, kNaN};
      continue;
    }
    const double m = s / static_cast<double>(n);
    for (double v : values)
      if (std::isfinite(v)) s2 += (v - m) * (v - m);
    out[name] = {m, std::sqrt(s2 / static_cast<double>(n))};
  }
  return out;
}

Scaling zscore_fit(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw Error(ErrorKind::kInvalidArgument, "empty training matrix");
  Scaling s;
  s.mean = Eigen::VectorXd::Zero(train.cols());
  s.std = Eigen::VectorXd::Ones(train.cols());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      if (std::isfinite(train(i, j))) {
        sum += train(i, j);
        ++n;
      }
    if (n == 0) continue;
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      if (std::isfinite(train(i, j))) ss += (train(i, j) - m) * (train(i, j) - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean(j) = m;
    s.std(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd zscore_apply(const Scaling& scaling, const Eigen::MatrixXd& x) {
  if (x.cols() != scaling.mean.size())
    throw Error(ErrorKind::kDimensionMismatch, "scaling dimension differs from data");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out(i, j) = std::isfinite(x(i, j)) ? (x(i, j) - scaling.mean(j)) / scaling.std(j) : 0.0;
  return out;
}

std::vector<std::vector<std::size_t>> make_folds(const std::vector<int>& y,
                                                 const std::vector<std::string>& speakers,
                                                 int folds, std::uint64_t seed,
                                                 bool speaker_disjoint) {
  if (folds < 2) throw Error(ErrorKind::kConfig, "need at least 2 folds");
  if (y.size() < static_cast<std::size_t>(folds))
    throw Error(ErrorKind::kDegenerateFolds, "fewer recordings than folds");
  if (speaker_disjoint && speakers.size() != y.size())
    throw Error(ErrorKind::kDimensionMismatch, "speaker list differs from labels");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    auto f = draw(y, speakers, folds, rng, speaker_disjoint);
    if (folds_ok(f, y)) return f;
  }
  throw Error(ErrorKind::kDegenerateFolds, "no valid partition after 10 draws");
}

Detector train_detector(const Eigen::MatrixXd& x, const std::vector<int>& y, const CvConfig& config,
                        std::uint64_t seed) {
  Detector det;
  det.scaling = zscore_fit(x);
  const Eigen::MatrixXd xz = zscore_apply(det.scaling, x);
  const auto [c, g] = select_hyper(xz, y, config, seed);
  det.model = svm::svm_train(xz, y, {c, g});
  return det;
}

std::vector<double> score(const Detector& detector, const Eigen::MatrixXd& x) {
  return svm::svm_score(detector.model, zscore_apply(detector.scaling, x));
}

MetricsReport cross_validate(const Dataset& data, const CvConfig& config,
                             const std::string& feature_set) {
  const std::size_t n = data.y.size();
  if (static_cast<std::size_t>(data.x.rows()) != n)
    throw Error(ErrorKind::kDimensionMismatch, "feature rows differ from labels");
  const auto folds = make_folds(data.y, data.speakers, config.folds, config.seed, config.speaker_disjoint);

  MetricsReport rep;
  rep.feature_set = feature_set;
  rep.folds.resize(folds.size());
  rep.pooled_scores.assign(n, kNaN);
  rep.pooled_labels = data.y;

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  auto run_fold = [&](std::size_t f) {
    const auto& test = folds[f];
    std::vector<std::size_t> train;
    std::set_difference(all.begin(), all.end(), test.begin(), test.end(), std::back_inserter(train));
    const auto ytr = pick(data.y, train);
    const Detector det = train_detector(rows(data.x, train), ytr, config, derive_seed(config.seed, f + 1));
    const auto s = score(det, rows(data.x, test));

    FoldResult r;
    r.fold = f;
    r.n_test = test.size();
    r.c = det.model.c;
    r.gamma = det.model.gamma;
    std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
    for (std::size_t t = 0; t < test.size(); ++t) {
      const int lab = data.y[test[t]];
      const int pred = s[t] >= 0.0 ? 1 : -1;
      (lab == 1 ? pos : neg)++;
      if (pred == lab) (lab == 1 ? tp : tn)++;
      rep.pooled_scores[test[t]] = s[t];
    }
    r.acc = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(test.size());
    r.se = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : kNaN;
    r.sp = neg > 0 ? static_cast<double>(tn) / static_cast<double>(neg) : kNaN;
    rep.folds[f] = r;
  };

  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(folds.size())));
  if (jobs == 1) {
    for (std::size_t f = 0; f < folds.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t f; (f = next++) < folds.size();) {
          try {
            run_fold(f);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  auto mean_finite = [](const std::vector<double>& v) {
    double s = 0.0;
    std::size_t k = 0;
    for (double x : v)
      if (std::isfinite(x)) {
        s += x;
        ++k;
      }
    return k ? s / static_cast<double>(k) : kNaN;
  };
  std::vector<double> acc, se, sp;
  for (const auto& r : rep.folds) {
    acc.push_back(r.acc);
    se.push_back(r.se);
    sp.push_back(r.sp);
  }
  rep.acc = mean_finite(acc);
  double ss = 0.0;
  for (double a : acc) ss += (a - rep.acc) * (a - rep.acc);
  rep.acc_std = acc.size() > 1 ? std::sqrt(ss / static_cast<double>(acc.size() - 1)) : 0.0;
  rep.se = mean_finite(se);
  rep.sp = mean_finite(sp);
  const auto m = metrics::compute_metrics(rep.pooled_scores, rep.pooled_labels);
  rep.auc = m.auc;
  rep.eer = m.eer;
  return rep;
}

std::string model_to_json(const Detector& det) {
  using nlohmann::json;
  json j;
  j["version"] = kModelVersion;
  j["gamma"] = det.model.gamma;
  j["C"] = det.model.c;
  j["bias"] = det.model.bias;
  j["scaling"] = {{"mean", std::vector<double>(det.scaling.mean.data(), det.scaling.mean.data() + det.scaling.mean.size())},
                  {"std", std::vector<double>(det.scaling.std.data(), det.scaling.std.data() + det.scaling.std.size())}};
  json sv = json::array();
  for (Eigen::Index i = 0; i < det.model.support_vectors.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(det.model.support_vectors.cols()));
    for (Eigen::Index c = 0; c < det.model.support_vectors.cols(); ++c) row[static_cast<std::size_t>(c)] = det.model.support_vectors(i, c);
    sv.push_back(row);
  }
  j["support_vectors"] = sv;
  j["alphas"] = det.model.dual_coef;
  return j.dump(1);
}

Detector model_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model JSON: ") + e.what());
  }
  if (j.value("version", 0) != kModelVersion) throw Error(ErrorKind::kFormat, "unsupported model version");
  try {
    Detector d;
    d.model.gamma = j.at("gamma").get<double>();
    d.model.c = j.at("C").get<double>();
    d.model.bias = j.at("bias").get<double>();
    const auto mean = j.at("scaling").at("mean").get<std::vector<double>>();
    const auto sd = j.at("scaling").at("std").get<std::vector<double>>();
    if (mean.size() != sd.size()) throw Error(ErrorKind::kFormat, "scaling vectors differ in length");
    d.scaling.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    d.scaling.std = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    const auto sv = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    d.model.dual_coef = j.at("alphas").get<std::vector<double>>();
    if (sv.size() != d.model.dual_coef.size()) throw Error(ErrorKind::kFormat, "alphas differ from support vectors");
    d.model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i].size() != mean.size()) throw Error(ErrorKind::kFormat, "support vector dimension");
      for (std::size_t c = 0; c < mean.size(); ++c)
        d.model.support_vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = sv[i][c];
    }
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model JSON: ") + e.what());
  }
}

}  // namespace glottal::clf
