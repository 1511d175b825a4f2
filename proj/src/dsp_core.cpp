#include "glottal/dsp_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "glottal/error.hpp"
#include "glottal/fft.hpp"

namespace glottal::dsp {

std::vector<double> hamming(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t k = 0; k < length; ++k)
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
  return w;
}

std::pair<std::size_t, std::size_t> frame_geometry(double fs, double frame_ms, double shift_ms) {
  const auto len = static_cast<std::size_t>(std::lround(frame_ms * fs / 1000.0));
  const auto hop = static_cast<std::size_t>(std::max(1L, std::lround(shift_ms * fs / 1000.0)));
  return {len, hop};
}

std::vector<std::size_t> frame_starts(std::size_t n, std::size_t frame_len, std::size_t hop) {
  std::vector<std::size_t> starts;
  if (frame_len == 0 || n < frame_len) return starts;
  for (std::size_t s = 0; s + frame_len <= n; s += hop) starts.push_back(s);
  return starts;
}

FrameSeries frame_signal(const SampledSignal& signal, double frame_ms, double shift_ms,
                         Window window) {
  FrameSeries out;
  out.frame_ms = frame_ms;
  out.shift_ms = shift_ms;
  std::tie(out.frame_len, out.hop) = frame_geometry(signal.fs, frame_ms, shift_ms);
  if (out.frame_len == 0 || signal.samples.size() < out.frame_len)
    throw Error(ErrorKind::kTooShort, "signal shorter than one frame");
  out.starts = frame_starts(signal.samples.size(), out.frame_len, out.hop);
  const std::vector<double> w = window == Window::kHamming
                                    ? hamming(out.frame_len)
                                    : std::vector<double>(out.frame_len, 1.0);
  out.data.resize(out.starts.size() * out.frame_len);
  out.centers.reserve(out.starts.size());
  for (std::size_t f = 0; f < out.starts.size(); ++f) {
    const std::size_t s = out.starts[f];
    for (std::size_t k = 0; k < out.frame_len; ++k)
      out.data[f * out.frame_len + k] = signal.samples[s + k] * w[k];
    out.centers.push_back(s + out.frame_len / 2);
  }
  return out;
}

Spectrum magnitude_spectrum(std::span<const double> frame, std::size_t n_dft, double fs) {
  if (n_dft < frame.size())
    throw Error(ErrorKind::kInvalidArgument, "n_dft smaller than frame length");
  if (n_dft == 0 || (n_dft & (n_dft - 1)) != 0)
    throw Error(ErrorKind::kInvalidArgument, "n_dft must be a power of two");
  const auto bins = fft::rfft(frame, n_dft);
  Spectrum s;
  s.n_dft = n_dft;
  s.fs = fs;
  s.magnitudes.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) s.magnitudes[k] = std::abs(bins[k]);
  return s;
}

std::vector<double> real_cepstrum(std::span<const double> frame, std::size_t n_dft) {
  const Spectrum s = magnitude_spectrum(frame, n_dft);
  std::vector<fft::Complex> log_mag(s.magnitudes.size());
  for (std::size_t k = 0; k < log_mag.size(); ++k)
    log_mag[k] = std::log(s.magnitudes[k] + kLogFloor);
  return fft::irfft(log_mag, n_dft);
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<fft::Complex> buf(x.begin(), x.end());
  auto spec = fft::forward(buf);
  // Analytic signal: keep DC (and Nyquist for even n), double positive bins, zero the rest.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) spec[k] *= 2.0;
    else if (!(n % 2 == 0 && k == half)) spec[k] = 0.0;
  }
  const auto analytic = fft::inverse(spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
  return env;
}

double mean_pitch_period(const SampledSignal& signal, double f_lo, double f_hi) {
  if (!(f_lo > 0.0) || !(f_lo < f_hi))
    throw Error(ErrorKind::kInvalidArgument, "pitch range must satisfy 0 < f_lo < f_hi");
  validate(signal);
  const auto& x = signal.samples;
  const std::size_t n = x.size();
  const auto lag_min = static_cast<std::size_t>(std::ceil(signal.fs / f_hi));
  auto lag_max = static_cast<std::size_t>(std::floor(signal.fs / f_lo));
  if (lag_min + 2 >= n) throw Error(ErrorKind::kTooShort, "signal too short for pitch analysis");
  lag_max = std::min(lag_max, n - 2);

  const std::size_t nfft = fft::next_pow2(2 * n);
  auto spec = fft::rfft(x, nfft);
  for (auto& v : spec) v = std::norm(v);
  const std::vector<double> acf = fft::irfft(spec, nfft);

  // prefix energies for the overlapping-segment normalization
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + x[i] * x[i];

  auto normalized = [&](std::size_t lag) {
    const double e1 = cum[n - lag];            // x[0 .. n-lag)
    const double e2 = cum[n] - cum[lag];       // x[lag .. n)
    const double d = std::sqrt(e1 * e2);
    return d > 0.0 ? acf[lag] / d : 0.0;
  };

  std::vector<double> r(lag_max + 2, 0.0);
  double best = -2.0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    r[lag] = normalized(lag);
    best = std::max(best, r[lag]);
  }
  if (best < kVoicingThreshold)
    throw Error(ErrorKind::kUnvoiced, "normalized autocorrelation peak " + std::to_string(best));
  // Multiples of the period score almost as high as the period itself; take
  // the shortest local maximum close to the global one.
  std::size_t best_lag = lag_min;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    const bool local_max = (lag == lag_min || r[lag] >= r[lag - 1]) &&
                           (lag == lag_max || r[lag] >= r[lag + 1]);
    if (local_max && r[lag] >= kOctaveRatio * best) {
      best_lag = lag;
      best = r[lag];
      break;
    }
  }

  double period = static_cast<double>(best_lag);
  if (best_lag > lag_min && best_lag < lag_max) {
    const double a = r[best_lag - 1], b = best, c = r[best_lag + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) period += 0.5 * (a - c) / denom;
  }
  return period;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return {};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double quantile(std::vector<double> x, double q) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

}  // namespace glottal::dsp
