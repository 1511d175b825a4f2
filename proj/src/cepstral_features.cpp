#include "glottal/cepstral_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "glottal/fft.hpp"
#include "glottal/linear_prediction.hpp"

namespace glottal::cep {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_dft) {
  const auto w = dsp::hamming(frame.size());
  std::vector<double> x(frame.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = frame[i] * w[i];
  const auto s = fft::rfft(x, n_dft);
  std::vector<double> p(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) p[k] = std::norm(s[k]);
  return p;
}

template <typename FrameFn>
FeatureFrameSeries frame_features(std::span<const double> x, double fs, const CepstralConfig& cfg,
                                  CepstralKind kind, FrameFn fn) {
  cfg.validate();
  if (x.empty()) throw Error(ErrorKind::kEmptySignal, "empty input");
  const auto [len, hop] = dsp::frame_geometry(fs, cfg.frame_ms, cfg.shift_ms);
  const auto starts = dsp::frame_starts(x.size(), len, hop);
  if (starts.empty()) throw Error(ErrorKind::kTooShort, "input shorter than one frame");
  const auto width = static_cast<std::size_t>(cfg.n_ceps);
  std::vector<double> statics;
  statics.reserve(starts.size() * width);
  for (std::size_t s : starts) {
    const auto c = fn(x.subspan(s, len));
    statics.insert(statics.end(), c.begin(), c.end());
  }
  FeatureFrameSeries out;
  out.n_frames = starts.size();
  out.width = 3 * width;
  out.vectors = append_dynamics(statics, starts.size(), width, cfg.delta_window);
  out.kind = kind;
  out.starts = starts;
  out.frame_len = len;
  return out;
}

}  // namespace

void CepstralConfig::validate() const {
  if (n_dft == 0 || (n_dft & (n_dft - 1)) != 0)
    throw Error(ErrorKind::kInvalidArgument, "n_dft must be a power of two");
  if (n_ceps < 1 || n_ceps > n_mel_filters)
    throw Error(ErrorKind::kInvalidArgument, "n_ceps must be in [1, n_mel_filters]");
  if (!(frame_ms > 0.0) || !(shift_ms > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "frame and shift must be positive");
  if (delta_window < 1) throw Error(ErrorKind::kInvalidArgument, "delta window must be >= 1");
}

const char* to_string(CepstralKind kind) {
  switch (kind) {
    case CepstralKind::kMfcc: return "mfcc";
    case CepstralKind::kMfccQcp: return "mfcc_qcp";
    case CepstralKind::kMfccZff: return "mfcc_zff";
    case CepstralKind::kPlp: return "plp";
  }
  return "?";
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(int n_filters, std::size_t n_dft, double fs) {
  if (n_filters < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one mel filter");
  const double top = hz_to_mel(fs / 2.0);
  std::vector<double> edge(static_cast<std::size_t>(n_filters) + 2);
  for (std::size_t i = 0; i < edge.size(); ++i)
    edge[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_filters + 1));

  const std::size_t bins = n_dft / 2 + 1;
  std::vector<std::vector<double>> bank(static_cast<std::size_t>(n_filters),
                                        std::vector<double>(bins, 0.0));
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edge[m], mid = edge[m + 1], hi = edge[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(n_dft);
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      bank[m][k] = v;
    }
  }
  return bank;
}

std::vector<double> dct2(std::span<const double> x, int n_keep) {
  const auto n = x.size();
  std::vector<double> c(static_cast<std::size_t>(n_keep), 0.0);
  for (int k = 0; k < n_keep; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += x[i] * std::cos(kPi * k * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    c[k] = s * scale;
  }
  return c;
}

std::size_t dft_size(std::size_t frame_len, const CepstralConfig& cfg) {
  return std::max(cfg.n_dft, fft::next_pow2(frame_len));
}

namespace {

std::vector<double> mel_cepstrum(const std::vector<double>& power,
                                 const std::vector<std::vector<double>>& bank, int n_ceps) {
  std::vector<double> logmel(bank.size());
  for (std::size_t m = 0; m < bank.size(); ++m) {
    double e = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) e += bank[m][k] * std::sqrt(power[k]);
    logmel[m] = std::log(std::max(e, dsp::kLogFloor));
  }
  return dct2(logmel, n_ceps);
}

}  // namespace

std::vector<double> mfcc_frame(std::span<const double> frame, double fs, const CepstralConfig& cfg) {
  cfg.validate();
  const std::size_t n_dft = dft_size(frame.size(), cfg);
  return mel_cepstrum(power_spectrum(frame, n_dft), mel_filterbank(cfg.n_mel_filters, n_dft, fs),
                      cfg.n_ceps);
}

FeatureFrameSeries mfcc(std::span<const double> x, double fs, const CepstralConfig& cfg,
                        CepstralKind kind) {
  if (kind == CepstralKind::kPlp) throw Error(ErrorKind::kInvalidArgument, "use plp() for PLP");
  cfg.validate();
  const std::size_t len = dsp::frame_geometry(fs, cfg.frame_ms, cfg.shift_ms).first;
  const std::size_t n_dft = dft_size(len, cfg);
  const auto bank = mel_filterbank(cfg.n_mel_filters, n_dft, fs);
  return frame_features(x, fs, cfg, kind, [&](std::span<const double> f) {
    return mel_cepstrum(power_spectrum(f, n_dft), bank, cfg.n_ceps);
  });
}

double hz_to_bark(double f) { return 6.0 * std::asinh(f / 600.0); }

double equal_loudness(double f_hz) {
  const double w2 = std::pow(2.0 * kPi * f_hz, 2);
  return (w2 + 56.8e6) * w2 * w2 / (std::pow(w2 + 6.3e6, 2) * (w2 + 0.38e9));
}

BarkBank bark_filterbank(std::size_t n_dft, double fs) {
  const double z_max = hz_to_bark(fs / 2.0);
  const auto n_bands = static_cast<std::size_t>(std::ceil(z_max)) + 1;
  const double step = z_max / static_cast<double>(n_bands - 1);
  const std::size_t bins = n_dft / 2 + 1;
  BarkBank bank;
  for (std::size_t j = 0; j < n_bands; ++j) {
    const double zc = step * static_cast<double>(j);
    std::vector<double> w(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
      const double dz = hz_to_bark(static_cast<double>(k) * fs / static_cast<double>(n_dft)) - zc;
      double v = 0.0;
      if (dz >= -1.3 && dz < -0.5) v = std::pow(10.0, 2.5 * (dz + 0.5));
      else if (dz >= -0.5 && dz <= 0.5) v = 1.0;
      else if (dz > 0.5 && dz <= 2.5) v = std::pow(10.0, -(dz - 0.5));
      w[k] = v;
    }
    bank.filters.push_back(std::move(w));
    bank.centers_hz.push_back(600.0 * std::sinh(zc / 6.0));
  }
  return bank;
}

namespace {

std::vector<double> auditory(std::span<const double> frame, std::size_t n_dft,
                             const BarkBank& bank) {
  const auto p = power_spectrum(frame, n_dft);
  std::vector<double> out(bank.filters.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double e = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) e += bank.filters[j][k] * p[k];
    out[j] = e * equal_loudness(bank.centers_hz[j]);
  }
  return out;
}

std::vector<double> plp_from_auditory(std::vector<double> a, int n_ceps) {
  // Intensity-to-loudness, then the band values are read as samples of an
  // even power spectrum on [0, pi] and cosine-transformed to autocorrelation.
  for (double& v : a) v = std::cbrt(v + dsp::kLogFloor);
  const std::size_t nb = a.size();
  const double span = static_cast<double>(nb - 1);
  std::vector<double> r(kPlpOrder + 1, 0.0);
  for (int m = 0; m <= kPlpOrder; ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double wj = (j == 0 || j + 1 == nb) ? 1.0 : 2.0;
      s += wj * a[j] * std::cos(kPi * m * static_cast<double>(j) / span);
    }
    r[m] = s / (2.0 * span);
  }
  const auto lev = lp::levinson(r, kPlpOrder);
  const auto& c_a = lev.model.coefficients;

  std::vector<double> c(static_cast<std::size_t>(n_ceps), 0.0);
  c[0] = std::log(std::max(lev.error_power, dsp::kLogFloor));
  for (int n = 1; n < n_ceps; ++n) {
    double v = n <= kPlpOrder ? c_a[n - 1] : 0.0;
    for (int k = 1; k < n; ++k)
      if (n - k <= kPlpOrder) v += (static_cast<double>(k) / n) * c[k] * c_a[n - k - 1];
    c[n] = v;
  }
  return c;
}

}  // namespace

std::vector<double> plp_auditory_spectrum(std::span<const double> frame, double fs,
                                          const CepstralConfig& cfg) {
  const std::size_t n_dft = dft_size(frame.size(), cfg);
  return auditory(frame, n_dft, bark_filterbank(n_dft, fs));
}

std::vector<double> plp_frame(std::span<const double> frame, double fs, const CepstralConfig& cfg) {
  return plp_from_auditory(plp_auditory_spectrum(frame, fs, cfg), cfg.n_ceps);
}

FeatureFrameSeries plp(std::span<const double> x, double fs, const CepstralConfig& cfg) {
  cfg.validate();
  const std::size_t len = dsp::frame_geometry(fs, cfg.frame_ms, cfg.shift_ms).first;
  const std::size_t n_dft = dft_size(len, cfg);
  const auto bank = bark_filterbank(n_dft, fs);
  if (bank.filters.size() <= static_cast<std::size_t>(kPlpOrder))
    throw Error(ErrorKind::kInvalidArgument, "sampling rate too low for order-12 PLP");
  return frame_features(x, fs, cfg, CepstralKind::kPlp, [&](std::span<const double> f) {
    return plp_from_auditory(auditory(f, n_dft, bank), cfg.n_ceps);
  });
}

std::vector<double> append_dynamics(std::span<const double> statics, std::size_t n_frames,
                                    std::size_t width, int window) {
  if (n_frames == 0 || statics.size() != n_frames * width)
    throw Error(ErrorKind::kDimensionMismatch, "statics do not match n_frames x width");
  double norm = 0.0;
  for (int k = 1; k <= window; ++k) norm += 2.0 * k * k;
  auto delta = [&](const std::vector<double>& in) {
    std::vector<double> out(in.size(), 0.0);
    const auto last = static_cast<long>(n_frames) - 1;
    for (long t = 0; t <= last; ++t) {
      for (std::size_t d = 0; d < width; ++d) {
        double s = 0.0;
        for (int k = 1; k <= window; ++k) {
          const long ahead = std::min(last, t + k), behind = std::max(0L, t - k);
          s += k * (in[static_cast<std::size_t>(ahead) * width + d] -
                    in[static_cast<std::size_t>(behind) * width + d]);
        }
        out[static_cast<std::size_t>(t) * width + d] = s / norm;
      }
    }
    return out;
  };
  const std::vector<double> c(statics.begin(), statics.end());
  const auto d1 = delta(c);
  const auto d2 = delta(d1);
  std::vector<double> out;
  out.reserve(3 * c.size());
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (const auto* src : {&c, &d1, &d2})
      out.insert(out.end(), src->begin() + static_cast<long>(t * width),
                 src->begin() + static_cast<long>((t + 1) * width));
  }
  return out;
}

void set_voicing(FeatureFrameSeries& series, const zff::GciSequence& gcis) {
  series.voiced_mask.assign(series.n_frames, 0);
  for (std::size_t i = 0; i < series.n_frames; ++i) {
    const std::size_t s = series.starts[i], e = s + series.frame_len;
    const auto it = std::lower_bound(gcis.epochs.begin(), gcis.epochs.end(), s);
    series.voiced_mask[i] = (it != gcis.epochs.end() && *it < e) ? 1 : 0;
  }
}

}  // namespace glottal::cep
