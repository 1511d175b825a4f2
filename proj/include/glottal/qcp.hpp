#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glottal/linear_prediction.hpp"
#include "glottal/signal_io.hpp"
#include "glottal/zff.hpp"

namespace glottal::qcp {

/// Attenuated-main-excitation weighting. Within each glottal cycle the weight
/// is 1 from pq*T0 to (pq + dq)*T0 after the GCI and d_w elsewhere, joined by
/// linear ramps of pq*T0 samples centred on both boundaries.
struct AmeParams {
  double dq = 0.7;
  double pq = 0.05;
  double d_w = 1e-5;

  void validate() const;
};

struct AmeWeights {
  std::vector<double> w;
  bool no_gcis = false;  // no cycle touched the span; w is all ones
};

/// Weights for samples [start, end) given GCIs as absolute sample indices.
/// T0 of a cycle is the gap to the next GCI (previous gap for the last one);
/// `fallback_t0` (samples) is used when the sequence holds a single GCI.
AmeWeights build_ame_weights(std::size_t start, std::size_t end,
                             std::span<const std::size_t> gcis, const AmeParams& params,
                             double fallback_t0 = 0.0);

/// WLP of the Hamming-windowed frame with the given per-sample weights. With
/// `preemphasis` > 0 the frame is filtered by 1 - preemphasis*z^-1 first; the
/// returned model is applied to the unfiltered signal.
lp::LpModel qcp_analyze_frame(std::span<const double> frame, std::span<const double> weights,
                              int order, double preemphasis = 0.0);

/// Same, building AME weights from frame-relative GCIs.
lp::LpModel qcp_analyze_frame(std::span<const double> frame,
                              std::span<const std::size_t> local_gcis, int order,
                              const AmeParams& params, double fallback_t0 = 0.0,
                              double preemphasis = 0.0);

enum class SourceKind { kQcp, kZff };

struct GlottalWaveform {
  std::vector<double> flow;
  std::vector<double> flow_derivative;  // flow[n] - flow[n-1], first sample 0
  SourceKind source_kind = SourceKind::kQcp;
  std::vector<char> fallback;           // per analysis frame: plain LP was used
  std::vector<std::size_t> frame_centers;

  double fallback_fraction() const;
};

struct QcpConfig {
  AmeParams ame;
  int order = 0;  // 0 selects lp::vocal_tract_order(fs)
  double frame_ms = 25.0;
  double shift_ms = 5.0;
  double rho = 0.99;
  // Differencing the analysis frame keeps the slow open-phase flow out of the
  // fit; without it the weighted system tends to place a real root near z = 1.
  double preemphasis = 1.0;
};

/// Frame-wise QCP vocal-tract models. Frames without any weighted cycle, or
/// whose weighted system is singular, fall back to autocorrelation LP.
lp::FrameModels qcp_frame_models(const SampledSignal& signal, const zff::GciSequence& gcis,
                                 const QcpConfig& config, std::vector<char>* fallback = nullptr);

GlottalWaveform estimate_glottal_flow(const SampledSignal& signal, const zff::GciSequence& gcis,
                                      const QcpConfig& config = {});

}  // namespace glottal::qcp
