#include "glottal/source_features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "glottal/fft.hpp"
#include "glottal/glottal_params.hpp"
#include "glottal/lf_synth.hpp"

namespace glottal::sf {

double band_center(int i, double fs) { return fs / std::pow(2.0, i + 1); }

std::vector<std::vector<double>> octave_decompose(std::span<const double> x, double fs,
                                                  int n_bands) {
  if (x.empty()) throw Error(ErrorKind::kEmptySignal, "nothing to decompose");
  if (n_bands < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one band");
  // Zero padding to twice the length keeps the circular filtering from wrapping.
  const std::size_t n = fft::next_pow2(2 * x.size());
  const auto spec = fft::rfft(x, n);
  const double bin = fs / static_cast<double>(n);

  std::vector<std::vector<double>> bands;
  for (int i = n_bands; i >= 1; --i) {
    const double c = band_center(i, fs);
    std::vector<double> h(spec.size(), 0.0);
    double energy = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
      const double d = std::log2(static_cast<double>(k) * bin / c);
      if (std::abs(d) >= 1.0) continue;
      const double v = std::cos(std::numbers::pi / 2.0 * d);
      h[k] = v * v;
      energy += h[k] * h[k];
    }
    if (energy <= 0.0) throw Error(ErrorKind::kInvalidArgument, "octave band below DFT resolution");
    const double g = 1.0 / std::sqrt(energy);
    std::vector<fft::Complex> y(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) y[k] = spec[k] * (h[k] * g);
    auto out = fft::irfft(y, n);
    out.resize(x.size());
    bands.push_back(std::move(out));
  }
  return bands;
}

double dispersion(std::span<const double> locations, double gci, double t0) {
  if (locations.empty() || !(t0 > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "dispersion needs locations and a positive period");
  double s = 0.0;
  for (double l : locations) s += std::abs(l - gci);
  return s / static_cast<double>(locations.size()) / t0;
}

std::vector<MdqValue> mdq(std::span<const double> residual, const zff::GciSequence& gcis, double fs) {
  const auto& e = gcis.epochs;
  if (e.empty()) throw Error(ErrorKind::kInsufficientEpochs, "no GCIs");
  const auto bands = octave_decompose(residual, fs);
  std::vector<MdqValue> out;
  for (std::size_t k = 0; k < e.size(); ++k) {
    double t0;
    if (k + 1 < e.size()) t0 = static_cast<double>(e[k + 1] - e[k]);
    else if (k > 0) t0 = static_cast<double>(e[k] - e[k - 1]);
    else continue;
    const auto half = static_cast<std::size_t>(std::lround(t0 / 4.0));
    if (e[k] < half || e[k] + half >= residual.size()) continue;
    std::array<double, kOctaveBands> loc{};
    for (std::size_t b = 0; b < bands.size(); ++b) {
      std::size_t best = e[k] - half;
      for (std::size_t n = e[k] - half; n <= e[k] + half; ++n)
        if (std::abs(bands[b][n]) > std::abs(bands[b][best])) best = n;
      loc[b] = static_cast<double>(best);
    }
    out.push_back({e[k], dispersion(loc, static_cast<double>(e[k]), t0)});
  }
  return out;
}

std::optional<double> peak_slope(std::span<const double> frame, double fs) {
  if (static_cast<double>(frame.size()) < std::floor(0.025 * fs))
    throw Error(ErrorKind::kTooShort, "peak slope needs a 25 ms frame");
  const auto bands = octave_decompose(frame, fs);
  std::vector<double> idx, lvl;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    double m = 0.0;
    for (double v : bands[b]) m = std::max(m, std::abs(v));
    if (!(m > 0.0)) return std::nullopt;
    idx.push_back(static_cast<double>(b));
    lvl.push_back(std::log10(m));
  }
  return dsp::fit_line(idx, lvl).slope;
}

double cpp(std::span<const double> frame, double fs, double f_lo, double f_hi) {
  if (!(f_lo > 0.0 && f_hi > f_lo)) throw Error(ErrorKind::kInvalidArgument, "bad F0 range");
  if (static_cast<double>(frame.size()) < 2.0 * fs / f_lo)
    throw Error(ErrorKind::kTooShort, "CPP frame must hold two periods of the lowest F0");
  const std::size_t n = fft::next_pow2(frame.size());
  const auto w = dsp::hamming(frame.size());
  std::vector<double> x(frame.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = frame[i] * w[i];
  const auto spec = fft::rfft(x, n);
  std::vector<fft::Complex> logp(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k)
    logp[k] = 10.0 * std::log10(std::norm(spec[k]) + dsp::kLogFloor);
  const auto ceps = fft::irfft(logp, n);

  const std::size_t q_max = n / 2;
  // Cosine amplitude of quefrency q in the dB spectrum: the even log spectrum
  // puts c(q) at both q and n - q.
  auto db = [&](std::size_t q) { return 2.0 * ceps[q]; };
  const auto r_lo = static_cast<std::size_t>(std::lround(0.001 * fs));
  const auto r_hi = std::min(q_max, static_cast<std::size_t>(std::lround(0.020 * fs)));
  std::vector<double> qs, cs;
  for (std::size_t q = std::max<std::size_t>(1, r_lo); q <= r_hi; ++q) {
    qs.push_back(static_cast<double>(q));
    cs.push_back(db(q));
  }
  const auto line = dsp::fit_line(qs, cs);

  const auto p_lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fs / f_hi)));
  const auto p_hi = std::min(q_max, static_cast<std::size_t>(std::floor(fs / f_lo)));
  std::size_t best = p_lo;
  for (std::size_t q = p_lo; q <= p_hi; ++q)
    if (db(q) > db(best)) best = q;
  return db(best) - (line.slope * static_cast<double>(best) + line.intercept);
}

std::vector<double> rd_grid() {
  std::vector<double> g;
  const int steps = static_cast<int>(std::lround((lf::kRdMax - lf::kRdMin) / kRdStep));
  for (int i = 0; i <= steps; ++i) g.push_back(lf::kRdMin + kRdStep * i);
  return g;
}

namespace {

using Levels = std::array<double, kRdHarmonics>;

// H1-relative dB harmonic levels of one LF derivative period, per grid Rd.
const std::vector<Levels>& templates(std::size_t period, double fs) {
  thread_local std::unordered_map<std::size_t, std::vector<Levels>> cache;
  thread_local double cache_fs = 0.0;
  if (cache_fs != fs) {
    cache.clear();
    cache_fs = fs;
  }
  auto it = cache.find(period);
  if (it != cache.end()) return it->second;

  std::vector<Levels> out;
  for (double rd : rd_grid()) {
    const auto pulse = lf::lf_pulse_samples(rd, 1.0, period, fs);
    Levels lv{};
    double h1 = 0.0;
    for (int k = 1; k <= kRdHarmonics; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t n = 0; n < period; ++n)
        acc += pulse.derivative[n] *
               std::polar(1.0, -2.0 * std::numbers::pi * k * static_cast<double>(n) /
                                   static_cast<double>(period));
      const double a = std::abs(acc);
      if (k == 1) h1 = a;
      lv[k - 1] = 20.0 * std::log10(std::max(a, 1e-12 * h1) / h1);
    }
    out.push_back(lv);
  }
  return cache.emplace(period, std::move(out)).first->second;
}

}  // namespace

std::optional<double> rd_estimate(std::span<const double> flow_derivative_frame, double f0,
                                  double fs) {
  const auto h = gp::harmonic_amplitudes(flow_derivative_frame, f0, fs);
  if (!(h[0] > 0.0)) return std::nullopt;
  std::vector<double> obs;
  for (int k = 0; k < kRdHarmonics; ++k) {
    if (!(h[k] >= gp::kHarmonicFloor * h[0])) break;
    obs.push_back(20.0 * std::log10(h[k] / h[0]));
  }
  if (obs.size() < 3) return std::nullopt;

  const auto period = static_cast<std::size_t>(std::lround(fs / f0));
  const auto& tmpl = templates(period, fs);
  const auto grid = rd_grid();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < tmpl.size(); ++g) {
    double d = 0.0;
    for (std::size_t k = 1; k < obs.size(); ++k) {
      const double e = obs[k] - tmpl[g][k];
      d += e * e;
    }
    if (d < best_d) {
      best_d = d;
      best = g;
    }
  }
  return grid[best];
}

}  // namespace glottal::sf
