#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "glottal/signal_io.hpp"

namespace glottal::zff {

/// Resonator recursion coefficients of the cascaded zero-frequency resonators.
inline constexpr double kResonator[4] = {4.0, -6.0, 4.0, -1.0};

struct ZffSignal {
  std::vector<double> y;
  std::size_t trend_window = 0;  // 2N + 1 samples
  double fs = 0.0;
};

struct ZffConfig {
  double trend_window_periods = 1.5;
  int trend_passes = 3;
  double f0_min = 50.0;
  double f0_max = 500.0;
};

/// Difference, double zero-frequency resonator, then repeated local-mean
/// subtraction over a window of ~1.5 mean pitch periods.
ZffSignal zff_filter(const SampledSignal& signal, const ZffConfig& config = {});

/// Same, with the trend window given directly in samples (odd).
ZffSignal zff_filter_with_window(const SampledSignal& signal, std::size_t window, int passes = 3);

enum class Polarity { kPositive = 1, kNegative = -1, kAuto = 0 };

struct GciSequence {
  std::vector<std::size_t> epochs;
  int polarity = 1;  // sign applied to y before picking positive-to-negative crossings
  std::vector<double> slopes;  // |y[e+1] - y[e-1]| after polarity, per epoch
};

/// Positive-to-negative zero crossings of polarity * y. In auto mode, with an
/// LP residual of the same signal, the orientation whose crossings sit on
/// larger residual peaks (+-1 ms) wins; without one, the larger mean slope.
GciSequence detect_gcis(const ZffSignal& zff, Polarity polarity = Polarity::kAuto,
                        const ZffConfig& config = {}, std::span<const double> residual = {});


struct InstantF0 {
  std::size_t epoch = 0;  // index k of e_k (k >= 1)
  double t0 = 0.0;        // s
  double f0 = 0.0;        // Hz
};

/// T0[k] = (e_k - e_{k-1})/fs for k = 1..M-1.
std::vector<InstantF0> instantaneous_f0(const GciSequence& gcis, double fs);

struct EpochFeatures {
  std::size_t epoch = 0;
  double soe = 0.0;
  double eoe = 0.0;
  double loudness = 0.0;
  double zff_energy = 0.0;
  double t0 = 0.0;
  double f0 = 0.0;
};

struct ZffFeatures {
  std::vector<EpochFeatures> epochs;  // edge-skipped epochs are absent
  std::size_t skipped = 0;
};

/// SoE, EoE, loudness and ZFF energy at every epoch. `envelope` is the Hilbert
/// envelope of the order-12 LP residual.
ZffFeatures zff_features(const ZffSignal& zff, const GciSequence& gcis,
                         std::span<const double> envelope);

/// EoE and loudness from one envelope window (exposed for direct testing).
std::pair<double, double> envelope_energy_and_loudness(std::span<const double> window);

}  // namespace glottal::zff
