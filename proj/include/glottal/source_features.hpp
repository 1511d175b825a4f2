#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "glottal/zff.hpp"

namespace glottal::sf {

inline constexpr int kOctaveBands = 5;

/// Centre of octave band i (1-based): fs / 2^(i+1).
double band_center(int i, double fs);

/// Zero-phase octave band-pass decomposition. Each band has a cos^2 response
/// over log2(f / centre) in (-1, 1) and unit energy, so adjacent bands overlap
/// by half an octave. Bands are returned in ascending centre frequency.
std::vector<std::vector<double>> octave_decompose(std::span<const double> x, double fs,
                                                  int n_bands = kOctaveBands);

/// Mean |location - gci| / t0 over per-band maximum locations.
double dispersion(std::span<const double> locations, double gci, double t0);

struct MdqValue {
  std::size_t gci = 0;
  double mdq = 0.0;
};

/// Maxima dispersion quotient per GCI on the LP residual. GCIs whose +-T0/4
/// window leaves the signal are skipped.
std::vector<MdqValue> mdq(std::span<const double> residual, const zff::GciSequence& gcis, double fs);

/// Slope of log10(band maximum) against band index (low to high). nullopt on
/// a silent frame. Frames shorter than 25 ms are rejected.
std::optional<double> peak_slope(std::span<const double> frame, double fs);

/// Cepstral peak prominence in dB. The frame must hold two periods of f_lo.
double cpp(std::span<const double> frame, double fs, double f_lo = 50.0, double f_hi = 500.0);

inline constexpr double kRdStep = 0.05;
inline constexpr int kRdHarmonics = 8;

/// Grid value of Rd whose LF derivative pulse best matches the frame's
/// H1-relative dB harmonic levels 1..8 (squared distance). nullopt when fewer
/// than 3 harmonics are resolvable.
std::optional<double> rd_estimate(std::span<const double> flow_derivative_frame, double f0,
                                  double fs);

/// The Rd grid 0.30, 0.35, ..., 2.70.
std::vector<double> rd_grid();

}  // namespace glottal::sf
