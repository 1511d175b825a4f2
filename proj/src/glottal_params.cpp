#include "glottal/glottal_params.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "glottal/fft.hpp"
#include "glottal/lf_synth.hpp"

namespace glottal::gp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Last upward crossing of `level` before index `peak` (fractional), or 0.
double rising_crossing(std::span<const double> x, std::size_t peak, double level) {
  for (std::size_t i = peak; i >= 1; --i) {
    if (x[i - 1] < level && x[i] >= level)
      return static_cast<double>(i - 1) + (level - x[i - 1]) / (x[i] - x[i - 1]);
  }
  return 0.0;
}

// First downward crossing of `level` after `peak` (fractional), or the last index.
double falling_crossing(std::span<const double> x, std::size_t peak, double level) {
  for (std::size_t i = peak; i + 1 < x.size(); ++i) {
    if (x[i] >= level && x[i + 1] < level)
      return static_cast<double>(i) + (x[i] - level) / (x[i] - x[i + 1]);
  }
  return static_cast<double>(x.size() - 1);
}

}  // namespace

std::optional<GlottalCycle> measure_cycle(std::span<const double> flow, std::size_t period,
                                          double fs, const LevelConfig& levels) {
  if (period < 2 || flow.size() < period)
    throw Error(ErrorKind::kInvalidArgument, "cycle window shorter than its period");
  const auto [lo_it, hi_it] = std::minmax_element(flow.begin(), flow.end());
  const double f_min = *lo_it;
  const double f_ac = *hi_it - f_min;
  if (!(f_ac > 0.0)) return std::nullopt;

  GlottalCycle c;
  c.flow.assign(flow.begin(), flow.end());
  c.period = period;
  c.fs = fs;
  c.t0 = static_cast<double>(period) / fs;
  c.f_ac = f_ac;
  auto& lm = c.landmarks;
  lm.peak_flow_index = static_cast<std::size_t>(hi_it - flow.begin());

  // Steepest fall after the peak; past the end of the window there is nothing to search.
  double d_min = 0.0;
  std::size_t d_idx = lm.peak_flow_index;
  for (std::size_t i = lm.peak_flow_index + 1; i < flow.size(); ++i) {
    const double d = (flow[i] - flow[i - 1]) * fs;
    if (d < d_min) {
      d_min = d;
      d_idx = i;
    }
  }
  c.d_min = d_min;
  lm.min_derivative_index = d_idx;

  const double l1 = f_min + levels.primary * f_ac;
  const double l2 = f_min + levels.secondary * f_ac;
  lm.primary_opening = rising_crossing(flow, lm.peak_flow_index, l1);
  lm.secondary_opening = rising_crossing(flow, lm.peak_flow_index, l2);
  lm.primary_closing = falling_crossing(flow, lm.peak_flow_index, l1);
  lm.secondary_closing = falling_crossing(flow, lm.peak_flow_index, l2);
  return c;
}

Segmentation segment_cycles(std::span<const double> flow, const zff::GciSequence& gcis, double fs,
                            const LevelConfig& levels) {
  if (gcis.epochs.size() < 2) throw Error(ErrorKind::kInsufficientEpochs, "need at least 2 GCIs");
  double global = 0.0;
  for (double v : flow) global = std::max(global, std::abs(v));
  const double min_gap = fs / 500.0, max_gap = fs / 50.0;

  Segmentation out;
  const auto& e = gcis.epochs;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    const std::size_t period = e[k + 1] - e[k];
    const auto guard = static_cast<std::size_t>(std::lround(levels.guard * static_cast<double>(period)));
    const std::size_t end = std::min(flow.size(), e[k + 1] + guard);
    if (static_cast<double>(period) < min_gap || static_cast<double>(period) > max_gap ||
        end <= e[k] || end - e[k] < period) {
      ++out.unusable;
      continue;
    }
    auto c = measure_cycle(flow.subspan(e[k], end - e[k]), period, fs, levels);
    if (!c || c->f_ac < 1e-6 * global || !(c->d_min < 0.0)) {
      ++out.unusable;
      continue;
    }
    c->start = e[k];
    out.cycles.push_back(std::move(*c));
  }
  return out;
}

TimeDomainGlottal time_domain_features(const GlottalCycle& cycle, std::optional<double> rd) {
  const auto& lm = cycle.landmarks;
  const double t = static_cast<double>(cycle.period);
  if (std::abs(cycle.d_min) < 1e-9 * cycle.f_ac / cycle.t0)
    throw Error(ErrorKind::kAmplitudeQuotient, "flow derivative has no negative peak");

  TimeDomainGlottal f;
  const double peak = static_cast<double>(lm.peak_flow_index);
  f.oq1 = (t - lm.primary_opening) / t;
  f.oq2 = (t - lm.secondary_opening) / t;
  f.clq = (t - peak) / t;
  f.qoq = (lm.secondary_closing - lm.secondary_opening) / t;
  const double close1 = lm.primary_closing - peak;
  const double close2 = lm.secondary_closing - peak;
  f.sq1 = close1 > 0.0 ? (peak - lm.primary_opening) / close1 : kNaN;
  f.sq2 = close2 > 0.0 ? (peak - lm.secondary_opening) / close2 : kNaN;
  f.aq = cycle.f_ac / std::abs(cycle.d_min);
  f.naq = f.aq / cycle.t0;
  f.oqa = rd ? lf::timing_from_rd(std::clamp(*rd, lf::kRdMin, lf::kRdMax)).open_quotient() : kNaN;
  return f;
}

std::vector<double> harmonic_amplitudes(std::span<const double> frame, double f0, double fs) {
  if (!(f0 > 0.0) || !(fs > 0.0)) throw Error(ErrorKind::kInvalidArgument, "f0 and fs must be positive");
  const std::size_t rule = fs <= 25000.0 ? 1024 : 2048;
  const std::size_t n_dft = std::max(rule, fft::next_pow2(frame.size()));
  const auto w = dsp::hamming(frame.size());
  std::vector<double> x(frame.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = frame[i] * w[i];
  const dsp::Spectrum s = dsp::magnitude_spectrum(x, n_dft, fs);
  const double bin = s.bin_hz();
  const std::size_t last = s.magnitudes.size() - 1;

  std::vector<double> h(kMaxHarmonics, 0.0);
  for (int k = 1; k <= kMaxHarmonics; ++k) {
    const double centre = k * f0;
    if (centre > fs / 2.0) break;
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil((centre - f0 / 4.0) / bin)));
    const auto hi = std::min(last, static_cast<std::size_t>(std::floor((centre + f0 / 4.0) / bin)));
    double best = 0.0;
    for (std::size_t b = lo; b <= hi; ++b) best = std::max(best, s.magnitudes[b]);
    h[k - 1] = best;
  }
  return h;
}

double parabola_curvature(std::span<const double> db_levels) {
  const auto k = static_cast<Eigen::Index>(db_levels.size());
  if (k < 3) throw Error(ErrorKind::kInvalidArgument, "parabola fit needs 3 points");
  Eigen::MatrixXd a(k, 3);
  Eigen::VectorXd y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(k);
    a(i, 0) = x * x;
    a(i, 1) = x;
    a(i, 2) = 1.0;
    y(i) = db_levels[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  return c(0);
}

FreqDomainGlottal features_from_harmonics(std::span<const double> harmonics) {
  FreqDomainGlottal f;
  f.h1h2 = f.hrf = f.psp = kNaN;
  f.h2_missing = f.psp_missing = true;
  if (harmonics.empty() || !(harmonics[0] > 0.0)) return f;
  const double h1 = harmonics[0];

  if (harmonics.size() >= 2 && harmonics[1] >= kHarmonicFloor * h1) {
    f.h2_missing = false;
    f.h1h2 = 20.0 * std::log10(h1 / harmonics[1]);
    double upper = 0.0;
    for (std::size_t k = 1; k < harmonics.size(); ++k) upper += harmonics[k];
    f.hrf = 20.0 * std::log10(upper / h1);
  }

  // Consecutive resolvable harmonics from H1, at most kPspHarmonics.
  std::vector<double> levels, reference;
  for (std::size_t k = 0; k < harmonics.size() && k < static_cast<std::size_t>(kPspHarmonics); ++k) {
    if (!(harmonics[k] >= kHarmonicFloor * h1)) break;
    levels.push_back(20.0 * std::log10(harmonics[k] / h1));
    reference.push_back(-40.0 * std::log10(static_cast<double>(k + 1)));
  }
  if (levels.size() >= 3) {
    f.psp = parabola_curvature(levels) / parabola_curvature(reference);
    f.psp_missing = false;
  }
  return f;
}

FreqDomainGlottal frequency_domain_features(std::span<const double> frame, double f0, double fs) {
  return features_from_harmonics(harmonic_amplitudes(frame, f0, fs));
}

}  // namespace glottal::gp
