#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "glottal/zff.hpp"

namespace glottal::gp {

/// Sample offsets within a cycle. The cycle starts at a GCI (closure of the
/// previous pulse) and the pulse being measured closes at the next GCI, T
/// samples later.
struct Landmarks {
  double primary_opening = 0.0;    // rising crossing of the primary level
  double secondary_opening = 0.0;  // rising crossing of the secondary level
  std::size_t peak_flow_index = 0;
  std::size_t closure_index = 0;   // always 0: the cycle begins at closure
  std::size_t min_derivative_index = 0;
  double primary_closing = 0.0;    // falling crossing of the primary level
  double secondary_closing = 0.0;  // falling crossing of the secondary level
};

struct GlottalCycle {
  std::vector<double> flow;  // T samples plus a short guard past the next GCI
  std::size_t start = 0;     // absolute index of the opening GCI
  std::size_t period = 0;    // T in samples
  double fs = 0.0;
  double t0 = 0.0;           // s
  Landmarks landmarks;
  double d_min = 0.0;        // most negative flow derivative after the peak, flow units per s
  double f_ac = 0.0;         // max - min flow
};

struct LevelConfig {
  double primary = 0.10;    // fraction of f_ac above the cycle minimum
  double secondary = 0.50;
  double guard = 0.10;      // fraction of T searched past the next GCI
};

struct Segmentation {
  std::vector<GlottalCycle> cycles;
  std::size_t unusable = 0;
};

/// One cycle per consecutive GCI pair. Cycles whose AC amplitude is below
/// 1e-6 of the largest |flow| are counted as unusable and left out.
Segmentation segment_cycles(std::span<const double> flow, const zff::GciSequence& gcis, double fs,
                            const LevelConfig& levels = {});

/// Landmark extraction on an explicit cycle (flow over at least `period`
/// samples, starting at closure). Returns nullopt for a flat cycle.
std::optional<GlottalCycle> measure_cycle(std::span<const double> flow, std::size_t period,
                                          double fs, const LevelConfig& levels = {});

struct TimeDomainGlottal {
  double oq1 = 0.0, oq2 = 0.0, naq = 0.0, aq = 0.0, clq = 0.0, oqa = 0.0, qoq = 0.0,
         sq1 = 0.0, sq2 = 0.0;
};

/// Quotients of one cycle. `rd` (from the Rd estimator) supplies OQa through
/// the LF regression; without it OQa is NaN.
TimeDomainGlottal time_domain_features(const GlottalCycle& cycle,
                                       std::optional<double> rd = std::nullopt);

struct FreqDomainGlottal {
  double h1h2 = 0.0;  // dB
  double psp = 0.0;
  double hrf = 0.0;   // dB
  bool h2_missing = false;   // h1h2 and hrf unavailable
  bool psp_missing = false;  // fewer than 3 harmonics
};

inline constexpr int kMaxHarmonics = 10;
inline constexpr int kPspHarmonics = 8;
inline constexpr double kHarmonicFloor = 1e-4;

/// Harmonic amplitudes H_1..H_10: spectral maxima within +-f0/4 of k*f0 (0
/// above Nyquist).
std::vector<double> harmonic_amplitudes(std::span<const double> frame, double f0, double fs);

/// Same from an already computed amplitude list; exposed for direct testing.
FreqDomainGlottal features_from_harmonics(std::span<const double> harmonics);

/// Hamming-windowed flow frame and its F0.
FreqDomainGlottal frequency_domain_features(std::span<const double> frame, double f0, double fs);

/// Parabola coefficient a of y = a x^2 + b x + c fitted to H1-relative dB
/// levels over x = k/K, k = 1..K.
double parabola_curvature(std::span<const double> db_levels);

}  // namespace glottal::gp
