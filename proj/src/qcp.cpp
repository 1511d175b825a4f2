#include "glottal/qcp.hpp"

#include <algorithm>
#include <cmath>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"

namespace glottal::qcp {

void AmeParams::validate() const {
  if (!(pq > 0.0 && pq < dq && dq < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "AME quotients must satisfy 0 < pq < dq < 1");
  if (!(d_w > 0.0 && d_w <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "AME attenuation must be in (0, 1]");
}

AmeWeights build_ame_weights(std::size_t start, std::size_t end,
                             std::span<const std::size_t> gcis, const AmeParams& params,
                             double fallback_t0) {
  params.validate();
  if (end < start) throw Error(ErrorKind::kInvalidArgument, "span end before start");
  const std::size_t len = end - start;
  AmeWeights out;
  out.w.assign(len, params.d_w);
  if (params.d_w == 1.0) return out;

  bool touched = false;
  const double lo_level = params.d_w;
  auto raise = [&](long n, double v) {
    if (n < static_cast<long>(start) || n >= static_cast<long>(end)) return;
    double& w = out.w[static_cast<std::size_t>(n) - start];
    w = std::max(w, v);
    touched = true;
  };

  for (std::size_t k = 0; k < gcis.size(); ++k) {
    double t0;
    if (k + 1 < gcis.size()) t0 = static_cast<double>(gcis[k + 1] - gcis[k]);
    else if (k > 0) t0 = static_cast<double>(gcis[k] - gcis[k - 1]);
    else t0 = fallback_t0;
    if (!(t0 > 0.0)) continue;

    const auto e = static_cast<long>(gcis[k]);
    const long ramp = std::lround(params.pq * t0);
    const long a = e + ramp;
    const long b = e + std::lround((params.pq + params.dq) * t0);
    const long rise = a - ramp / 2;
    const long fall = b - ramp / 2;
    if (fall + ramp < static_cast<long>(start) || rise >= static_cast<long>(end)) continue;
    const double step = (1.0 - lo_level) / static_cast<double>(ramp + 1);
    for (long i = 0; i < ramp; ++i) {
      raise(rise + i, lo_level + step * static_cast<double>(i + 1));
      raise(fall + i, 1.0 - step * static_cast<double>(i + 1));
    }
    for (long n = rise + ramp; n < fall; ++n) raise(n, 1.0);
  }
  if (!touched) {
    out.w.assign(len, 1.0);
    out.no_gcis = true;
  }
  return out;
}

lp::LpModel qcp_analyze_frame(std::span<const double> frame, std::span<const double> weights,
                              int order, double preemphasis) {
  const std::vector<double> window = dsp::hamming(frame.size());
  std::vector<double> x(frame.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double prev = frame[i > 0 ? i - 1 : 0];
    x[i] = (frame[i] - preemphasis * prev) * window[i];
  }
  return lp::wlp(x, order, weights);
}

lp::LpModel qcp_analyze_frame(std::span<const double> frame,
                              std::span<const std::size_t> local_gcis, int order,
                              const AmeParams& params, double fallback_t0, double preemphasis) {
  const AmeWeights w = build_ame_weights(0, frame.size(), local_gcis, params, fallback_t0);
  return qcp_analyze_frame(frame, w.w, order, preemphasis);
}

double GlottalWaveform::fallback_fraction() const {
  if (fallback.empty()) return 0.0;
  const auto n = std::count(fallback.begin(), fallback.end(), char{1});
  return static_cast<double>(n) / static_cast<double>(fallback.size());
}

lp::FrameModels qcp_frame_models(const SampledSignal& signal, const zff::GciSequence& gcis,
                                 const QcpConfig& config, std::vector<char>* fallback) {
  validate(signal);
  config.ame.validate();
  const int order = config.order > 0 ? config.order : lp::vocal_tract_order(signal.fs);
  const auto [len, hop] = dsp::frame_geometry(signal.fs, config.frame_ms, config.shift_ms);
  const auto starts = dsp::frame_starts(signal.samples.size(), len, hop);
  if (starts.empty()) throw Error(ErrorKind::kTooShort, "signal shorter than one frame");

  const AmeWeights global =
      build_ame_weights(0, signal.samples.size(), gcis.epochs, config.ame);
  const std::vector<double> window = dsp::hamming(len);

  lp::FrameModels out;
  out.models.reserve(starts.size());
  if (fallback) fallback->assign(starts.size(), 0);
  for (std::size_t f = 0; f < starts.size(); ++f) {
    const std::size_t s = starts[f];
    const std::span<const double> frame(signal.samples.data() + s, len);
    const std::span<const double> w(global.w.data() + s, len);
    // A frame is covered when some sample carries full weight; otherwise the
    // weighting would only rescale an open-phase fit.
    const bool covered =
        !global.no_gcis && std::any_of(w.begin(), w.end(), [](double v) { return v >= 1.0; });
    lp::LpModel m;
    bool used_fallback = !covered;
    if (covered) {
      try {
        m = qcp_analyze_frame(frame, w, order, config.preemphasis);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kSingularSystem) throw;
        used_fallback = true;
      }
    }
    if (used_fallback) {
      std::vector<double> x(len);
      for (std::size_t i = 0; i < len; ++i) {
        const double prev = frame[i > 0 ? i - 1 : 0];
        x[i] = (frame[i] - config.preemphasis * prev) * window[i];
      }
      try {
        m = lp::lp_autocorrelation(x, order);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerateFrame) throw;
        m = lp::LpModel{std::vector<double>(static_cast<std::size_t>(order), 0.0), 0.0};
      }
    }
    if (fallback) (*fallback)[f] = used_fallback ? 1 : 0;
    out.models.push_back(std::move(m));
    out.centers.push_back(s + len / 2);
  }
  return out;
}

GlottalWaveform estimate_glottal_flow(const SampledSignal& signal, const zff::GciSequence& gcis,
                                      const QcpConfig& config) {
  GlottalWaveform out;
  const lp::FrameModels models = qcp_frame_models(signal, gcis, config, &out.fallback);
  out.frame_centers = models.centers;
  out.flow = lp::inverse_filter_integrate(signal, models, config.rho, config.frame_ms);
  out.flow_derivative.assign(out.flow.size(), 0.0);
  for (std::size_t n = 1; n < out.flow.size(); ++n)
    out.flow_derivative[n] = out.flow[n] - out.flow[n - 1];
  out.source_kind = SourceKind::kQcp;
  return out;
}

}  // namespace glottal::qcp
