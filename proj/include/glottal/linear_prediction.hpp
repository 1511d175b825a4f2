#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glottal/signal_io.hpp"

namespace glottal::lp {

/// All-pole model 1/A(z) with A(z) = 1 - sum_k a_k z^-k.
struct LpModel {
  std::vector<double> coefficients;  // a_1 .. a_p
  double gain = 0.0;

  std::size_t order() const { return coefficients.size(); }

  /// Prediction error e[n] = x[n] - sum_k a_k x[n-k] at index n (samples before 0 read as zero).
  double error_at(std::span<const double> x, std::size_t n) const;
};

/// Vocal-tract LP order rule: round(fs/1000) + 2.
int vocal_tract_order(double fs);

struct LevinsonResult {
  LpModel model;
  std::vector<double> reflection;  // k_1 .. k_p
  double error_power = 0.0;
};

/// Levinson-Durbin on autocorrelation lags r[0..p].
LevinsonResult levinson(std::span<const double> r, int order);

/// Autocorrelation lags 0..max_lag of x.
std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

/// Autocorrelation-method LP on an already windowed frame.
LpModel lp_autocorrelation(std::span<const double> frame, int order);

/// Weighted LP with autocorrelation-style (zero-extended) normal equations:
///   R[i][j] = sum_n w[n] x[n-i] x[n-j],  r[i] = sum_n w[n] x[n] x[n-i],
/// n = 0 .. N+p-1. Weights past the frame end repeat the last weight.
LpModel wlp(std::span<const double> frame, int order, std::span<const double> weights);

/// Models fitted on consecutive frames, each tagged with its frame centre.
struct FrameModels {
  std::vector<LpModel> models;
  std::vector<std::size_t> centers;

  /// Index of the model whose frame centre is nearest to sample n.
  std::size_t nearest(std::size_t n) const;
};

/// Hamming-windowed autocorrelation LP over 25/5 ms frames.
FrameModels fit_frames(const SampledSignal& signal, int order, double frame_ms = 25.0,
                       double shift_ms = 5.0);

/// Applies A(z) of the nearest-centre model at every sample; first p samples are zero.
std::vector<double> lp_residual(std::span<const double> x, const FrameModels& models);
std::vector<double> lp_residual(const SampledSignal& signal, const FrameModels& models);

/// Inverse filter, cancel lip radiation with a leaky integrator 1/(1 - rho z^-1),
/// then remove the local (frame-length) mean.
std::vector<double> inverse_filter_integrate(const SampledSignal& signal,
                                             const FrameModels& models, double rho = 0.99,
                                             double frame_ms = 25.0);

/// Leaky integration alone; rho = 0 returns the input unchanged.
std::vector<double> leaky_integrate(std::span<const double> x, double rho);

/// Centred moving-average removal with the given window length.
std::vector<double> remove_local_mean(std::span<const double> x, std::size_t window);

/// Power response 1/|A(e^jw)|^2 evaluated at n_points frequencies in [0, fs/2].
std::vector<double> envelope_response(const LpModel& model, std::size_t n_points);

}  // namespace glottal::lp
