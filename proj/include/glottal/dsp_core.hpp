#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "glottal/signal_io.hpp"

namespace glottal::dsp {

enum class Window { kHamming, kRectangular };

std::vector<double> hamming(std::size_t length);

/// Row-major matrix of windowed frames.
struct FrameSeries {
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  double frame_ms = 25.0;
  double shift_ms = 5.0;
  std::vector<double> data;          // n_frames * frame_len
  std::vector<std::size_t> starts;   // first sample of each frame
  std::vector<std::size_t> centers;  // start + frame_len / 2

  std::size_t size() const { return starts.size(); }
  std::span<const double> frame(std::size_t i) const {
    return {data.data() + i * frame_len, frame_len};
  }
};

/// frame_len = round(frame_ms*fs/1000), hop = max(1, round(shift_ms*fs/1000)).
std::pair<std::size_t, std::size_t> frame_geometry(double fs, double frame_ms, double shift_ms);

/// Start indices of all complete frames; empty when the signal is shorter than a frame.
std::vector<std::size_t> frame_starts(std::size_t n, std::size_t frame_len, std::size_t hop);

FrameSeries frame_signal(const SampledSignal& signal, double frame_ms = 25.0,
                         double shift_ms = 5.0, Window window = Window::kHamming);

struct Spectrum {
  std::vector<double> magnitudes;  // n_dft/2 + 1 bins
  std::size_t n_dft = 0;
  double fs = 0.0;

  double bin_hz() const { return fs / static_cast<double>(n_dft); }
};

/// Zero-padded DFT magnitude. n_dft must be a power of two >= frame length.
Spectrum magnitude_spectrum(std::span<const double> frame, std::size_t n_dft, double fs = 0.0);

inline constexpr double kLogFloor = 1e-10;

/// Inverse DFT of log(|X| + 1e-10); n_dft real values.
std::vector<double> real_cepstrum(std::span<const double> frame, std::size_t n_dft);

/// Magnitude of the analytic signal. Edges are left untreated.
std::vector<double> hilbert_envelope(std::span<const double> x);

inline constexpr double kVoicingThreshold = 0.3;
inline constexpr double kOctaveRatio = 0.9;

/// Mean pitch period in samples from the normalized autocorrelation peak
/// inside [fs/f_hi, fs/f_lo]. Throws kUnvoiced when the peak is below 0.3.
double mean_pitch_period(const SampledSignal& signal, double f_lo = 50.0, double f_hi = 500.0);

// Small numeric helpers shared across feature modules.

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
double stddev(std::span<const double> x);  // population
double median(std::vector<double> x);

/// Linear-interpolated quantile (q in [0, 1]) of unsorted data.
double quantile(std::vector<double> x, double q);

}  // namespace glottal::dsp
