#include "glottal/zff.hpp"

#include <algorithm>
#include <cmath>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"

namespace glottal::zff {

namespace {

// Local-mean subtraction with a centred window of 2*half+1 samples, truncated at
// the edges. The running sum is re-anchored periodically; the first pass works
// on values that grow polynomially with n.
void subtract_local_mean(std::vector<long double>& v, std::size_t half) {
  const std::size_t n = v.size();
  if (n == 0) return;
  std::vector<long double> out(n);
  constexpr std::size_t kReanchor = 512;
  long double sum = 0.0L;
  std::size_t lo = 0, hi = 0;  // current window [lo, hi)
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t want_lo = i >= half ? i - half : 0;
    const std::size_t want_hi = std::min(n, i + half + 1);
    if (i % kReanchor == 0) {
      sum = 0.0L;
      for (std::size_t j = want_lo; j < want_hi; ++j) sum += v[j];
    } else {
      while (hi < want_hi) sum += v[hi++];
      while (lo < want_lo) sum -= v[lo++];
    }
    lo = want_lo;
    hi = want_hi;
    out[i] = v[i] - sum / static_cast<long double>(want_hi - want_lo);
  }
  v.swap(out);
}

}  // namespace

ZffSignal zff_filter_with_window(const SampledSignal& signal, std::size_t window, int passes) {
  validate(signal);
  if (window < 3) throw Error(ErrorKind::kInvalidArgument, "trend window too short");
  if (window % 2 == 0) ++window;
  const std::size_t half = (window - 1) / 2;
  const std::size_t n = signal.samples.size();

  // Reflect-pad so the truncated-window region at each end falls outside the
  // returned span.
  const std::size_t pad = std::min(n > 1 ? n - 1 : 0, static_cast<std::size_t>(passes + 1) * window);
  std::vector<double> s;
  s.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) s.push_back(signal.samples[i]);
  s.insert(s.end(), signal.samples.begin(), signal.samples.end());
  for (std::size_t i = 1; i <= pad; ++i) s.push_back(signal.samples[n - 1 - i]);

  const std::size_t m = s.size();
  std::vector<long double> y(m, 0.0L);
  long double y1 = 0, y2 = 0, y3 = 0, y4 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const long double x = static_cast<long double>(s[i]) - (i > 0 ? s[i - 1] : s[0]);
    const long double v = kResonator[0] * y1 + kResonator[1] * y2 + kResonator[2] * y3 +
                          kResonator[3] * y4 + x;
    y4 = y3;
    y3 = y2;
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  for (int p = 0; p < passes; ++p) subtract_local_mean(y, half);

  ZffSignal out;
  out.fs = signal.fs;
  out.trend_window = window;
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.y[i] = static_cast<double>(y[pad + i]);
  return out;
}

ZffSignal zff_filter(const SampledSignal& signal, const ZffConfig& config) {
  const double period = dsp::mean_pitch_period(signal, config.f0_min, config.f0_max);
  if (signal.samples.size() < static_cast<std::size_t>(3.0 * period))
    throw Error(ErrorKind::kTooShort, "signal shorter than three pitch periods");
  auto window = static_cast<std::size_t>(std::lround(config.trend_window_periods * period));
  return zff_filter_with_window(signal, std::max<std::size_t>(window, 3), config.trend_passes);
}

namespace {

GciSequence crossings(const std::vector<double>& y, int polarity, std::size_t edge) {
  GciSequence g;
  g.polarity = polarity;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = polarity * y[i], b = polarity * y[i + 1];
    if (!(a >= 0.0 && b < 0.0)) continue;
    const double frac = a / (a - b);
    const std::size_t e = frac < 0.5 ? i : i + 1;
    if (e < std::max<std::size_t>(edge, 1) || e + std::max<std::size_t>(edge, 1) >= n) continue;
    g.epochs.push_back(e);
    g.slopes.push_back(std::abs(y[e + 1] - y[e - 1]));
  }
  return g;
}

double mean_slope(const GciSequence& g) {
  if (g.slopes.empty()) return 0.0;
  double s = 0.0;
  for (double v : g.slopes) s += v;
  return s / static_cast<double>(g.slopes.size());
}

// Mean over crossings of the largest |residual| within +-reach samples.
double residual_score(const GciSequence& g, std::span<const double> residual, std::size_t reach) {
  if (g.epochs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t e : g.epochs) {
    const std::size_t lo = e > reach ? e - reach : 0;
    const std::size_t hi = std::min(residual.size(), e + reach + 1);
    double peak = 0.0;
    for (std::size_t i = lo; i < hi; ++i) peak = std::max(peak, std::abs(residual[i]));
    total += peak;
  }
  return total / static_cast<double>(g.epochs.size());
}

}  // namespace

GciSequence detect_gcis(const ZffSignal& zff, Polarity polarity, const ZffConfig& config,
                        std::span<const double> residual) {
  const auto edge = static_cast<std::size_t>(std::ceil(0.002 * zff.fs));
  GciSequence g;
  if (polarity == Polarity::kAuto) {
    GciSequence pos = crossings(zff.y, +1, edge);
    GciSequence neg = crossings(zff.y, -1, edge);
    bool take_pos;
    if (!residual.empty()) {
      const auto reach = static_cast<std::size_t>(std::lround(0.001 * zff.fs));
      take_pos = residual_score(pos, residual, reach) >= residual_score(neg, residual, reach);
    } else {
      take_pos = mean_slope(pos) >= mean_slope(neg);
    }
    g = take_pos ? std::move(pos) : std::move(neg);
  } else {
    g = crossings(zff.y, static_cast<int>(polarity), edge);
  }

  // Gaps shorter than the F0 ceiling allows: drop the weaker-slope epoch.
  const double min_gap = zff.fs / config.f0_max;
  bool changed = true;
  while (changed && g.epochs.size() > 1) {
    changed = false;
    for (std::size_t i = 1; i < g.epochs.size(); ++i) {
      if (static_cast<double>(g.epochs[i] - g.epochs[i - 1]) < min_gap) {
        const std::size_t drop = g.slopes[i] < g.slopes[i - 1] ? i : i - 1;
        g.epochs.erase(g.epochs.begin() + static_cast<std::ptrdiff_t>(drop));
        g.slopes.erase(g.slopes.begin() + static_cast<std::ptrdiff_t>(drop));
        changed = true;
        break;
      }
    }
  }
  if (g.epochs.size() < 3) throw Error(ErrorKind::kInsufficientEpochs, "fewer than 3 epochs");
  return g;
}

std::vector<InstantF0> instantaneous_f0(const GciSequence& gcis, double fs) {
  if (gcis.epochs.size() < 2) throw Error(ErrorKind::kInsufficientEpochs, "need at least 2 epochs");
  std::vector<InstantF0> out;
  out.reserve(gcis.epochs.size() - 1);
  for (std::size_t k = 1; k < gcis.epochs.size(); ++k) {
    InstantF0 v;
    v.epoch = k;
    v.t0 = static_cast<double>(gcis.epochs[k] - gcis.epochs[k - 1]) / fs;
    v.f0 = 1.0 / v.t0;
    out.push_back(v);
  }
  return out;
}

std::pair<double, double> envelope_energy_and_loudness(std::span<const double> window) {
  if (window.empty()) return {0.0, 0.0};
  double sum = 0.0, sum_sq = 0.0;
  for (double h : window) {
    sum += h;
    sum_sq += h * h;
  }
  const double n = static_cast<double>(window.size());
  const double mu = sum / n;
  const double eoe = sum_sq / n;
  const double var = std::max(0.0, eoe - mu * mu);
  const double loudness = mu > 0.0 ? std::sqrt(var) / mu : 0.0;
  return {eoe, loudness};
}

ZffFeatures zff_features(const ZffSignal& zff, const GciSequence& gcis,
                         std::span<const double> envelope) {
  if (envelope.size() != zff.y.size())
    throw Error(ErrorKind::kDimensionMismatch, "envelope and ZFF signal lengths differ");
  const std::size_t n = zff.y.size();
  const auto k_half = static_cast<std::size_t>(std::lround((0.001 * zff.fs - 1.0) / 2.0));
  const auto l_half = static_cast<std::size_t>(std::lround(0.002 * zff.fs)) / 2;
  const std::size_t reach = std::max({k_half, l_half, std::size_t{1}});

  ZffFeatures out;
  const auto& e = gcis.epochs;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const std::size_t c = e[k];
    if (c < reach || c + reach >= n || e.size() < 2) {
      ++out.skipped;
      continue;
    }
    EpochFeatures f;
    f.epoch = c;
    f.soe = std::abs(zff.y[c + 1] - zff.y[c - 1]);
    const auto [eoe, loud] = envelope_energy_and_loudness(envelope.subspan(c - k_half, 2 * k_half + 1));
    f.eoe = eoe;
    f.loudness = loud;
    double energy = 0.0;
    for (std::size_t i = c - l_half; i <= c + l_half; ++i) energy += zff.y[i] * zff.y[i];
    f.zff_energy = energy / static_cast<double>(2 * l_half + 1);
    const std::size_t gap = k > 0 ? e[k] - e[k - 1] : e[1] - e[0];
    f.t0 = static_cast<double>(gap) / zff.fs;
    f.f0 = 1.0 / f.t0;
    out.epochs.push_back(f);
  }
  return out;
}

}  // namespace glottal::zff
