#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<double> dft_magnitude(std::span<const double> x, std::size_t n) {
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < x.size() && t < n; ++t) {
      const double ph = -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n);
      re += x[t] * std::cos(ph);
      im += x[t] * std::sin(ph);
    }
    out[k] = std::hypot(re, im);
  }
  return out;
}

DualOptimum svm_dual_bruteforce(const Eigen::MatrixXd& kernel, std::span<const int> y, double c) {
  const int n = static_cast<int>(y.size());
  if (n > 12) throw std::invalid_argument("brute force limited to 12 points");
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = y[i] * y[j] * kernel(i, j);
  auto objective = [&](const Eigen::VectorXd& a) { return a.sum() - 0.5 * a.dot(q * a); };

  DualOptimum best;
  best.objective = -std::numeric_limits<double>::infinity();
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  std::vector<int> state(n);
  for (long code = 0; code < total; ++code) {
    long v = code;
    std::vector<int> free_idx;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[i] = static_cast<int>(v % 3);
      v /= 3;
      if (state[i] == 1) a(i) = c;
      if (state[i] == 2) free_idx.push_back(i);
    }
    const int m = static_cast<int>(free_idx.size());
    if (m == 0) {
      double eq = 0.0;
      for (int i = 0; i < n; ++i) eq += y[i] * a(i);
      if (std::abs(eq) > 1e-9) continue;
    } else {
      // Stationarity on the free block with multiplier b for sum(y a) = 0:
      //   Q_FF a_F + b y_F = 1 - Q_FB a_B,   y_F' a_F = -y_B' a_B
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      double fixed_eq = 0.0;
      for (int i = 0; i < n; ++i)
        if (state[i] != 2) fixed_eq += y[i] * a(i);
      for (int r = 0; r < m; ++r) {
        const int i = free_idx[r];
        double s = 1.0;
        for (int j = 0; j < n; ++j)
          if (state[j] != 2) s -= q(i, j) * a(j);
        rhs(r) = s;
        for (int cc = 0; cc < m; ++cc) sys(r, cc) = q(i, free_idx[cc]);
        sys(r, m) = y[i];
        sys(m, r) = y[i];
      }
      rhs(m) = -fixed_eq;
      const Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
      if (!((sys * sol - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()))) continue;
      bool feasible = true;
      for (int r = 0; r < m; ++r) {
        if (sol(r) < -1e-9 || sol(r) > c + 1e-9) {
          feasible = false;
          break;
        }
        a(free_idx[r]) = std::clamp(sol(r), 0.0, c);
      }
      if (!feasible) continue;
    }
    const double obj = objective(a);
    if (obj > best.objective) {
      best.objective = obj;
      best.alpha.assign(a.data(), a.data() + n);
    }
  }
  return best;
}

double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != -1) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

double threshold_eer(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> thr(scores.begin(), scores.end());
  std::sort(thr.begin(), thr.end(), std::greater<>());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  thr.insert(thr.begin(), std::numeric_limits<double>::infinity());
  double pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg) += 1.0;

  std::vector<double> fpr, fnr;
  for (double t : thr) {
    double fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (labels[i] == -1 && scores[i] >= t) fp += 1.0;
      if (labels[i] == 1 && scores[i] < t) fn += 1.0;
    }
    fpr.push_back(fp / neg);
    fnr.push_back(fn / pos);
  }
  for (std::size_t i = 1; i < thr.size(); ++i) {
    const double d0 = fnr[i - 1] - fpr[i - 1];
    const double d1 = fnr[i] - fpr[i];
    if (d0 >= 0.0 && d1 <= 0.0) {
      if (d0 == d1) return fpr[i];
      const double lam = d0 / (d0 - d1);
      return fpr[i - 1] + lam * (fpr[i] - fpr[i - 1]);
    }
  }
  return 0.5;
}

double sign_test_p(std::span<const double> a, std::span<const double> b) {
  int plus = 0, minus = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++plus;
    else if (a[i] < b[i]) ++minus;
  }
  const int n = plus + minus;
  if (n == 0) return 1.0;
  const int k = std::min(plus, minus);
  double tail = 0.0;
  for (int i = 0; i <= k; ++i)
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                     n * std::log(2.0));
  return std::min(1.0, 2.0 * tail);
}

namespace {
std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double mel_c0(std::span<const double> frame, double fs, std::size_t n_dft, int n_filters) {
  const std::size_t len = frame.size();
  std::vector<double> xw(len);
  for (std::size_t i = 0; i < len; ++i)
    xw[i] = frame[i] * (0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                               static_cast<double>(len - 1)));
  const auto mag = dft_magnitude(xw, n_dft);

  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = mel(fs / 2.0);
  double sum_log = 0.0;
  for (int m = 0; m < n_filters; ++m) {
    const double lo = hz(top * m / (n_filters + 1.0));
    const double mid = hz(top * (m + 1) / (n_filters + 1.0));
    const double hi = hz(top * (m + 2) / (n_filters + 1.0));
    double e = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(n_dft);
      if (f > lo && f <= mid) e += mag[k] * (f - lo) / (mid - lo);
      else if (f > mid && f < hi) e += mag[k] * (hi - f) / (hi - mid);
    }
    sum_log += std::log(std::max(e, 1e-10));
  }
  return sum_log / std::sqrt(static_cast<double>(n_filters));
}

FineFlow lf_fine_flow(double rd, double ee, std::size_t period, double fs, int oversample) {
  // Fant '95 regression; te on the sample grid, as the synthesizer places it.
  const double ra = (-1.0 + 4.8 * rd) / 100.0;
  const double rk = (22.4 + 11.8 * rd) / 100.0;
  const double rg = 0.25 * rk / (0.11 * rd / (0.5 + 1.2 * rk) - ra);
  const double t0 = static_cast<double>(period) / fs;
  const double tp = t0 / (2.0 * rg), ta = ra * t0;
  const double te = std::round(tp * (1.0 + rk) * fs) / fs, tb = t0 - te;
  const double wg = kPi / tp;

  // eps * ta = 1 - exp(-eps * tb)
  double lo = 1e-6 / ta, hi = 1.0 / ta;
  auto g = [&](double e) { return e * ta - 1.0 + std::exp(-e * tb); };
  while (g(lo) >= 0.0) lo *= 0.5;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double eps = 0.5 * (lo + hi);

  const std::size_t n = period * static_cast<std::size_t>(oversample);
  const double dt = t0 / static_cast<double>(n);
  auto ret = [&](double t) { return -ee / (eps * ta) * (std::exp(-eps * (t - te)) - std::exp(-eps * tb)); };
  auto open = [&](double a, double t) {
    return -ee * std::exp(a * (t - te)) * std::sin(wg * t) / std::sin(wg * te);
  };
  // Simpson on each phase; return-phase area is fixed, alpha balances it.
  auto simpson = [](auto f, double a, double b, int m) {
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  const double ret_area = simpson(ret, te, t0, 20000);
  double alo = -5.0 / te, ahi = 60.0 / te;
  auto area = [&](double a) { return simpson([&](double t) { return open(a, t); }, 0.0, te, 20000) + ret_area; };
  const bool lo_positive = area(alo) > 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (alo + ahi);
    if ((area(mid) > 0.0) == lo_positive) alo = mid;
    else ahi = mid;
  }
  const double alpha = 0.5 * (alo + ahi);

  FineFlow out;
  out.dt = dt;
  out.derivative.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    out.derivative[i] = t <= te ? open(alpha, t) : ret(t);
  }
  // Rotate so the cycle starts at closure (te), then integrate.
  const auto te_i = static_cast<std::size_t>(std::lround(te / dt));
  std::rotate(out.derivative.begin(), out.derivative.begin() + static_cast<long>(te_i),
              out.derivative.end());
  out.flow.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    out.flow[i] = out.flow[i - 1] + 0.5 * (out.derivative[i] + out.derivative[i - 1]) * dt;
  return out;
}

double naq_of_cycle(std::span<const double> flow, std::span<const double> derivative, double dt) {
  const auto [lo, hi] = std::minmax_element(flow.begin(), flow.end());
  const double dmin = *std::min_element(derivative.begin(), derivative.end());
  const double t = static_cast<double>(flow.size()) * dt;
  return (*hi - *lo) / (std::abs(dmin) * t);
}

double open_quotient_at(std::span<const double> flow, double frac) {
  const auto [lo, hi] = std::minmax_element(flow.begin(), flow.end());
  const double level = *lo + frac * (*hi - *lo);
  const auto peak = static_cast<std::size_t>(hi - flow.begin());
  double cross = 0.0;
  for (std::size_t i = peak; i >= 1; --i) {
    if (flow[i - 1] < level && flow[i] >= level) {
      cross = static_cast<double>(i - 1) + (level - flow[i - 1]) / (flow[i] - flow[i - 1]);
      break;
    }
  }
  const double t = static_cast<double>(flow.size());
  return (t - cross) / t;
}

std::vector<double> formants_from_roots(const std::vector<double>& poly, double fs, double min_radius) {
  const int p = static_cast<int>(poly.size()) - 1;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) comp(0, j) = -poly[j + 1] / poly[0];
  for (int i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
  const Eigen::VectorXcd roots = comp.eigenvalues();
  std::vector<double> f;
  for (int i = 0; i < p; ++i) {
    const auto r = roots(i);
    if (r.imag() > 1e-9 && std::abs(r) > min_radius) f.push_back(std::arg(r) * fs / (2.0 * kPi));
  }
  std::sort(f.begin(), f.end());
  return f;
}

double formant_error(const glottal::lp::LpModel& model, const std::vector<glottal::lf::Formant>& truth,
                     double fs, std::size_t count) {
  constexpr int kGrid = 4096;
  std::vector<double> mag(kGrid + 1);
  for (int g = 0; g <= kGrid; ++g) {
    const double w = kPi * g / kGrid;
    std::complex<double> a = 1.0;
    for (std::size_t k = 0; k < model.coefficients.size(); ++k)
      a -= model.coefficients[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
    mag[g] = 1.0 / std::norm(a);
  }
  std::vector<double> peaks;
  for (int g = 1; g < kGrid; ++g)
    if (mag[g] > mag[g - 1] && mag[g] > mag[g + 1]) peaks.push_back(g * fs / 2.0 / kGrid);
  double e = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    double best = 1e9;
    for (double p : peaks) best = std::min(best, std::abs(p - truth[j].frequency) / truth[j].frequency);
    e += best;
  }
  return e / static_cast<double>(count);
}

double median_naq(std::span<const double> flow, std::span<const std::size_t> gcis, double fs) {
  std::vector<double> v;
  for (std::size_t k = 1; k + 2 < gcis.size(); ++k) {
    const std::size_t a = gcis[k], b = gcis[k + 1];
    double mx = -1e300, mn = 1e300, dmin = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      mx = std::max(mx, flow[i]);
      mn = std::min(mn, flow[i]);
    }
    // Steepest fall of the pulse closing at b.
    for (std::size_t i = a + 1; i <= b + (b - a) / 10 && i < flow.size(); ++i)
      dmin = std::min(dmin, (flow[i] - flow[i - 1]) * fs);
    v.push_back((mx - mn) / (std::abs(dmin) * static_cast<double>(b - a) / fs));
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace oracle
