#include "glottal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "glottal/linear_prediction.hpp"
#include "glottal/source_features.hpp"
#include "json.hpp"

namespace glottal::pipe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kConfig, "parameter " + key + " expects a number, got '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ';')) out.push_back(parse_double(key, tok));
  if (out.empty()) throw Error(ErrorKind::kConfig, "parameter " + key + " expects a ';' list");
  return out;
}

// Median F0 of the epochs inside [s, e), or NaN.
double local_f0(const std::vector<zff::InstantF0>& f0s, const zff::GciSequence& g, std::size_t s,
                std::size_t e) {
  std::vector<double> v;
  for (const auto& f : f0s) {
    const std::size_t at = g.epochs[f.epoch];
    if (at >= s && at < e) v.push_back(f.f0);
  }
  return v.empty() ? kNaN : dsp::median(v);
}

bool has_epoch(const zff::GciSequence& g, std::size_t s, std::size_t e) {
  const auto it = std::lower_bound(g.epochs.begin(), g.epochs.end(), s);
  return it != g.epochs.end() && *it < e;
}

void add_cepstral(clf::FrameTracks& tracks, const std::string& prefix,
                  const cep::FeatureFrameSeries& series, bool voiced_only) {
  char name[64];
  for (std::size_t d = 0; d < series.width; ++d) {
    std::snprintf(name, sizeof name, "%s_%02zu", prefix.c_str(), d);
    auto& t = tracks[name];
    for (std::size_t f = 0; f < series.n_frames; ++f)
      if (!voiced_only || series.voiced_mask[f]) t.push_back(series.vectors[f * series.width + d]);
  }
}

}  // namespace

void apply_param(ExtractConfig& x, clf::CvConfig& cv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::kConfig, "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), v = assignment.substr(eq + 1);
  auto num = [&] { return parse_double(key, v); };
  if (key == "qcp.order") x.qcp.order = static_cast<int>(num());
  else if (key == "qcp.dq") x.qcp.ame.dq = num();
  else if (key == "qcp.pq") x.qcp.ame.pq = num();
  else if (key == "qcp.d_w") x.qcp.ame.d_w = num();
  else if (key == "qcp.rho") x.qcp.rho = num();
  else if (key == "qcp.preemphasis") x.qcp.preemphasis = num();
  else if (key == "qcp.frame_ms") x.qcp.frame_ms = num();
  else if (key == "zff.trend_window_periods") x.zff.trend_window_periods = num();
  else if (key == "zff.trend_passes") x.zff.trend_passes = static_cast<int>(num());
  else if (key == "cep.n_mel_filters") x.cep.n_mel_filters = static_cast<int>(num());
  else if (key == "cep.n_dft") x.cep.n_dft = static_cast<std::size_t>(num());
  else if (key == "levels.primary") x.levels.primary = num();
  else if (key == "levels.secondary") x.levels.secondary = num();
  else if (key == "fd.min_frame_ms") x.fd_min_frame_ms = num();
  else if (key == "fd.periods") x.fd_periods = num();
  else if (key == "cpp.frame_ms") x.cpp_frame_ms = num();
  else if (key == "cpp.shift_ms") x.cpp_shift_ms = num();
  else if (key == "ps.frame_ms") x.ps_frame_ms = num();
  else if (key == "rd.source") {
    if (v == "signal") x.rd_from_signal = true;
    else if (v == "flow") x.rd_from_signal = false;
    else throw Error(ErrorKind::kConfig, "rd.source must be 'signal' or 'flow'");
  } else if (key == "cv.c_grid") cv.c_grid = parse_list(key, v);
  else if (key == "cv.gamma_grid") cv.gamma_grid = parse_list(key, v);
  else if (key == "cv.inner_folds") cv.inner_folds = static_cast<int>(num());
  else throw Error(ErrorKind::kConfig, "unknown parameter '" + key + "'");
  x.qcp.ame.validate();
  x.cep.validate();
}

std::string config_json(const ExtractConfig& c) {
  nlohmann::ordered_json j;
  j["module_version"] = kModuleVersion;
  j["qcp"] = {{"order", c.qcp.order}, {"dq", c.qcp.ame.dq}, {"pq", c.qcp.ame.pq},
              {"d_w", c.qcp.ame.d_w}, {"rho", c.qcp.rho}, {"preemphasis", c.qcp.preemphasis},
              {"frame_ms", c.qcp.frame_ms}, {"shift_ms", c.qcp.shift_ms}};
  j["zff"] = {{"trend_window_periods", c.zff.trend_window_periods},
              {"trend_passes", c.zff.trend_passes}, {"f0_min", c.zff.f0_min}, {"f0_max", c.zff.f0_max}};
  j["cep"] = {{"n_dft", c.cep.n_dft}, {"n_mel_filters", c.cep.n_mel_filters}, {"n_ceps", c.cep.n_ceps},
              {"frame_ms", c.cep.frame_ms}, {"shift_ms", c.cep.shift_ms}, {"delta_window", c.cep.delta_window}};
  j["levels"] = {{"primary", c.levels.primary}, {"secondary", c.levels.secondary}, {"guard", c.levels.guard}};
  j["residual_order"] = c.residual_order;
  j["fd"] = {{"min_frame_ms", c.fd_min_frame_ms}, {"periods", c.fd_periods}, {"shift_ms", c.fd_shift_ms}};
  j["ps_frame_ms"] = c.ps_frame_ms;
  j["cpp"] = {{"frame_ms", c.cpp_frame_ms}, {"shift_ms", c.cpp_shift_ms}};
  j["rd_from_signal"] = c.rd_from_signal;
  return j.dump();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string params_hash(const ExtractConfig& config) { return fnv1a_hex(config_json(config)); }

clf::FrameTracks extract_tracks(const SampledSignal& signal, Task task, const ExtractConfig& cfg) {
  validate(signal);
  const double fs = signal.fs;
  const bool voiced_only = task != Task::kSentence;

  const auto lp12 = lp::fit_frames(signal, cfg.residual_order);
  const auto residual = lp::lp_residual(signal, lp12);
  const auto zsig = zff::zff_filter(signal, cfg.zff);
  const auto gcis = zff::detect_gcis(zsig, zff::Polarity::kAuto, cfg.zff, residual);
  if (gcis.epochs.size() < clf::kMinUsable)
    throw Error(ErrorKind::kInsufficientEpochs,
                "only " + std::to_string(gcis.epochs.size()) + " GCIs (need 5)");
  const auto f0s = zff::instantaneous_f0(gcis, fs);
  std::vector<double> t0s;
  for (const auto& f : f0s) t0s.push_back(f.t0 * fs);
  const double median_t0 = dsp::median(t0s);

  clf::FrameTracks tr;

  // Excitation features at every epoch.
  const auto env = dsp::hilbert_envelope(residual);
  const auto zf = zff::zff_features(zsig, gcis, env);
  for (const auto& e : zf.epochs) {
    tr["SoE"].push_back(e.soe);
    tr["EoE"].push_back(e.eoe);
    tr["Loudness"].push_back(e.loudness);
    tr["ZFF_energy"].push_back(e.zff_energy);
  }

  // QCP flow: frequency-domain features and Rd per frame, then per-cycle quotients.
  const auto wave = qcp::estimate_glottal_flow(signal, gcis, cfg.qcp);
  const auto fd_len = static_cast<std::size_t>(
      std::lround(std::max(cfg.fd_min_frame_ms * fs / 1000.0, cfg.fd_periods * median_t0)));
  const auto fd_hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.fd_shift_ms * fs / 1000.0)));
  const auto& rd_source = cfg.rd_from_signal ? signal.samples : wave.flow_derivative;
  std::vector<std::pair<std::size_t, double>> rd_at;  // frame centre, Rd
  for (std::size_t s : dsp::frame_starts(signal.size(), fd_len, fd_hop)) {
    const double f0 = local_f0(f0s, gcis, s, s + fd_len);
    if (!std::isfinite(f0)) continue;
    const auto fd = gp::frequency_domain_features(std::span(wave.flow).subspan(s, fd_len), f0, fs);
    tr["H1H2"].push_back(fd.h2_missing ? kNaN : fd.h1h2);
    tr["HRF"].push_back(fd.h2_missing ? kNaN : fd.hrf);
    tr["PSP"].push_back(fd.psp_missing ? kNaN : fd.psp);
    const auto rd = sf::rd_estimate(std::span(rd_source).subspan(s, fd_len), f0, fs);
    tr["Rd"].push_back(rd ? *rd : kNaN);
    if (rd) rd_at.emplace_back(s + fd_len / 2, *rd);
  }

  const auto seg = gp::segment_cycles(wave.flow, gcis, fs, cfg.levels);
  for (const auto& cyc : seg.cycles) {
    std::optional<double> rd;
    if (!rd_at.empty()) {
      const std::size_t mid = cyc.start + cyc.period / 2;
      auto it = std::min_element(rd_at.begin(), rd_at.end(), [&](const auto& a, const auto& b) {
        const auto da = a.first > mid ? a.first - mid : mid - a.first;
        const auto db = b.first > mid ? b.first - mid : mid - b.first;
        return da < db;
      });
      rd = it->second;
    }
    gp::TimeDomainGlottal td;
    try {
      td = gp::time_domain_features(cyc, rd);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kAmplitudeQuotient) throw;
      continue;
    }
    tr["OQ1"].push_back(td.oq1);
    tr["OQ2"].push_back(td.oq2);
    tr["NAQ"].push_back(td.naq);
    tr["ClQ"].push_back(td.clq);
    tr["SQ1"].push_back(td.sq1);
    tr["SQ2"].push_back(td.sq2);
    tr["AQ"].push_back(td.aq);
    tr["QoQ"].push_back(td.qoq);
    tr["OQa"].push_back(td.oqa);
  }

  for (const auto& m : sf::mdq(residual, gcis, fs)) tr["MDQ"].push_back(m.mdq);

  const auto [ps_len, ps_hop] = dsp::frame_geometry(fs, cfg.ps_frame_ms, cfg.qcp.shift_ms);
  for (std::size_t s : dsp::frame_starts(signal.size(), ps_len, ps_hop)) {
    if (voiced_only && !has_epoch(gcis, s, s + ps_len)) continue;
    const auto ps = sf::peak_slope(std::span(signal.samples).subspan(s, ps_len), fs);
    tr["PS"].push_back(ps ? *ps : kNaN);
  }
  const auto [cpp_len, cpp_hop] = dsp::frame_geometry(fs, cfg.cpp_frame_ms, cfg.cpp_shift_ms);
  for (std::size_t s : dsp::frame_starts(signal.size(), cpp_len, cpp_hop)) {
    if (voiced_only && !has_epoch(gcis, s, s + cpp_len)) continue;
    tr["CPP"].push_back(sf::cpp(std::span(signal.samples).subspan(s, cpp_len), fs, cfg.zff.f0_min, cfg.zff.f0_max));
  }

  auto series = [&](std::span<const double> x, cep::CepstralKind kind) {
    auto s = kind == cep::CepstralKind::kPlp ? cep::plp(x, fs, cfg.cep) : cep::mfcc(x, fs, cfg.cep, kind);
    cep::set_voicing(s, gcis);
    return s;
  };
  add_cepstral(tr, "MFCC", series(signal.samples, cep::CepstralKind::kMfcc), voiced_only);
  add_cepstral(tr, "MFCC_QCP", series(wave.flow, cep::CepstralKind::kMfccQcp), voiced_only);
  add_cepstral(tr, "MFCC_ZFF", series(zsig.y, cep::CepstralKind::kMfccZff), voiced_only);
  add_cepstral(tr, "PLP", series(signal.samples, cep::CepstralKind::kPlp), voiced_only);
  return tr;
}

std::string recording_id(const ManifestEntry& entry) {
  return std::filesystem::path(entry.path).stem().string();
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<RecordingResult> extract_manifest(const DatasetManifest& manifest,
                                              const ExtractConfig& config, int jobs,
                                              const Logger& log) {
  std::vector<RecordingResult> out(manifest.entries.size());
  std::mutex log_mutex;
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    auto& r = out[i];
    r.entry = manifest.entries[i];
    r.id = recording_id(r.entry);
    try {
      const auto sig = io::load_wav(r.entry.path);
      r.stats = clf::aggregate(extract_tracks(sig, r.entry.task, config));
      r.ok = true;
    } catch (const Error& e) {
      r.reason = e.what();
    } catch (const std::exception& e) {
      r.reason = std::string("unexpected: ") + e.what();
    }
    if (!r.ok && log) {
      std::lock_guard lock(log_mutex);
      log("excluded " + r.id + ": " + r.reason);
    }
  });
  return out;
}

std::vector<CorpusItem> oracle_corpus(const CorpusSpec& spec) {
  if (spec.pairs == 0 || !(spec.duration > 0.0) || !(spec.fs > 0.0))
    throw Error(ErrorKind::kConfig, "corpus needs pairs > 0, duration > 0 and fs > 0");
  // Reference /a/ tract; each pair scales the formant frequencies by up to +-5%.
  const std::vector<lf::Formant> tract{{700, 80}, {1220, 90}, {2600, 120}, {3500, 150}, {4500, 200}};
  lf::Rng rng(spec.seed);
  std::vector<CorpusItem> items;
  char id[32];
  for (std::size_t p = 0; p < spec.pairs; ++p) {
    const double f0 = rng.uniform(100.0, 220.0);
    const double scale = rng.uniform(0.95, 1.05);
    std::vector<lf::Formant> formants;
    for (auto f : tract) {
      f.frequency *= scale;
      if (f.frequency < spec.fs / 2.0 - f.bandwidth) formants.push_back(f);
    }
    const double rd_normal = rng.uniform(0.7, 1.2);
    const double rd_path = rng.uniform(1.6, 2.5);
    const std::uint64_t seed_n = rng.engine()(), seed_p = rng.engine()();

    CorpusItem n;
    std::snprintf(id, sizeof id, "oracle_n%03zu", p);
    n.id = id;
    n.label = VoiceLabel::kNormal;
    n.spec.lf = {f0, 1.0, rd_normal};
    n.spec.formants = formants;
    n.spec.duration = spec.duration;
    n.spec.fs = spec.fs;
    n.spec.jitter_pct = 0.3;
    n.spec.shimmer_pct = 1.0;
    n.spec.aspiration_snr_db = 30.0;
    n.spec.seed = seed_n;

    CorpusItem q = n;
    std::snprintf(id, sizeof id, "oracle_p%03zu", p);
    q.id = id;
    q.label = VoiceLabel::kPathological;
    q.spec.lf = {f0, 0.35, rd_path};
    q.spec.jitter_pct = 2.0;
    q.spec.shimmer_pct = 8.0;
    q.spec.aspiration_snr_db = 10.0;
    q.spec.seed = seed_p;
    items.push_back(std::move(n));
    items.push_back(std::move(q));
  }
  return items;
}

DatasetManifest write_corpus(const std::filesystem::path& dir, const std::vector<CorpusItem>& items,
                             int jobs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  DatasetManifest manifest;
  manifest.entries.resize(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& it = items[i];
    const auto syn = lf::synthesize(it.spec);
    const auto wav = dir / (it.id + ".wav");
    io::write_wav(wav, syn.signal.samples, syn.signal.fs, io::WavEncoding::kFloat32);

    nlohmann::ordered_json j;
    j["id"] = it.id;
    j["label"] = to_string(it.label);
    j["params"] = {{"f0", it.spec.lf.f0}, {"ee", it.spec.lf.ee}, {"rd", it.spec.lf.rd},
                   {"duration", it.spec.duration}, {"fs", it.spec.fs},
                   {"jitter_pct", it.spec.jitter_pct}, {"shimmer_pct", it.spec.shimmer_pct},
                   {"aspiration_snr_db", it.spec.aspiration_snr_db}, {"seed", it.spec.seed}};
    auto fj = nlohmann::ordered_json::array();
    for (const auto& f : it.spec.formants) fj.push_back({f.frequency, f.bandwidth});
    j["params"]["formants"] = fj;
    j["gcis"] = syn.truth.true_gcis;
    std::ofstream os(dir / (it.id + ".json"));
    if (!os) throw Error(ErrorKind::kIo, "cannot write sidecar for " + it.id);
    os << j.dump(1) << '\n';
    manifest.entries[i] = {wav.filename().string(), it.label, it.id, Task::kVowelA};
  });
  io::write_manifest(dir / "manifest.csv", manifest);
  for (auto& e : manifest.entries) e.path = (dir / e.path).string();
  return manifest;
}

Sidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    nlohmann::json j;
    is >> j;
    Sidecar s;
    s.item.id = j.at("id").get<std::string>();
    s.item.label = parse_label(j.at("label").get<std::string>());
    const auto& p = j.at("params");
    s.item.spec.lf = {p.at("f0").get<double>(), p.at("ee").get<double>(), p.at("rd").get<double>()};
    s.item.spec.duration = p.at("duration").get<double>();
    s.item.spec.fs = p.at("fs").get<double>();
    s.item.spec.jitter_pct = p.at("jitter_pct").get<double>();
    s.item.spec.shimmer_pct = p.at("shimmer_pct").get<double>();
    s.item.spec.aspiration_snr_db = p.at("aspiration_snr_db").get<double>();
    s.item.spec.seed = p.at("seed").get<std::uint64_t>();
    for (const auto& f : p.at("formants")) s.item.spec.formants.push_back({f.at(0).get<double>(), f.at(1).get<double>()});
    s.gcis = j.at("gcis").get<std::vector<std::size_t>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

CorpusSpec load_corpus_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
    CorpusSpec s;
    s.pairs = j.value("pairs", s.pairs);
    s.seed = j.value("seed", s.seed);
    s.duration = j.value("duration", s.duration);
    s.fs = j.value("fs", s.fs);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, "corpus spec: " + std::string(e.what()));
  }
}

}  // namespace glottal::pipe
