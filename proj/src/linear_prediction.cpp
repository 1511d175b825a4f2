#include "glottal/linear_prediction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"

namespace glottal::lp {

double LpModel::error_at(std::span<const double> x, std::size_t n) const {
  double e = n < x.size() ? x[n] : 0.0;
  for (std::size_t k = 1; k <= coefficients.size(); ++k) {
    if (n >= k && n - k < x.size()) e -= coefficients[k - 1] * x[n - k];
  }
  return e;
}

int vocal_tract_order(double fs) { return static_cast<int>(std::lround(fs / 1000.0)) + 2; }

LevinsonResult levinson(std::span<const double> r, int order) {
  if (order < 1 || static_cast<int>(r.size()) <= order)
    throw Error(ErrorKind::kInvalidArgument, "levinson needs r[0..order]");
  if (!(r[0] > 0.0)) throw Error(ErrorKind::kDegenerateFrame, "zero-energy frame");
  LevinsonResult out;
  std::vector<double> a(order, 0.0), prev(order, 0.0);
  out.reflection.assign(order, 0.0);
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc -= a[j - 1] * r[i - j];
    // A vanishing error power means the frame is perfectly predictable; the
    // remaining coefficients stay zero.
    if (err <= r[0] * 1e-15) break;
    const double k = acc / err;
    prev = a;
    a[i - 1] = k;
    for (int j = 1; j < i; ++j) a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    err *= (1.0 - k * k);
    out.reflection[i - 1] = k;
  }
  out.model.coefficients = std::move(a);
  out.error_power = std::max(err, 0.0);
  out.model.gain = std::sqrt(out.error_power);
  return out;
}

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = x.size();
  for (int lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i) s += x[i] * x[i - lag];
    r[lag] = s;
  }
  return r;
}

LpModel lp_autocorrelation(std::span<const double> frame, int order) {
  if (order < 1 || frame.size() <= static_cast<std::size_t>(order))
    throw Error(ErrorKind::kInvalidArgument, "frame length must exceed LP order");
  const auto r = autocorrelation(frame, order);
  return levinson(r, order).model;
}

LpModel wlp(std::span<const double> frame, int order, std::span<const double> weights) {
  const std::size_t n = frame.size();
  const std::size_t p = static_cast<std::size_t>(order);
  if (order < 1 || n <= p) throw Error(ErrorKind::kInvalidArgument, "frame length must exceed order");
  if (weights.size() != n) throw Error(ErrorKind::kDimensionMismatch, "weights length != frame length");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorKind::kInvalidArgument, "weights must be finite and non-negative");

  // Z(n, j) = x[n - j], j = 0..p, over the zero-extended prediction range.
  const std::size_t rows = n + p;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd sw(static_cast<Eigen::Index>(rows));
  for (std::size_t row = 0; row < rows; ++row) {
    const double w = row < n ? weights[row] : weights[n - 1];
    sw(static_cast<Eigen::Index>(row)) = std::sqrt(w);
    for (std::size_t j = 0; j <= p; ++j) {
      if (row >= j && row - j < n) z(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = frame[row - j];
    }
  }
  const Eigen::MatrixXd zw = sw.asDiagonal() * z;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + 1),
                                               static_cast<Eigen::Index>(p + 1));
  full.selfadjointView<Eigen::Lower>().rankUpdate(zw.transpose());
  full = full.selfadjointView<Eigen::Lower>();

  const Eigen::Index pi = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd r_mat = full.block(1, 1, pi, pi);
  const Eigen::VectorXd r_vec = full.block(1, 0, pi, 1);
  if (!(r_mat.trace() > 0.0))
    throw Error(ErrorKind::kSingularSystem, "weighted frame has no energy");

  Eigen::LLT<Eigen::MatrixXd> llt(r_mat);
  if (llt.info() != Eigen::Success) {
    const double lambda = 1e-9 * r_mat.trace() / static_cast<double>(p);
    r_mat.diagonal().array() += lambda;
    llt.compute(r_mat);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::kSingularSystem, "weighted normal equations are rank deficient");
  }
  const Eigen::VectorXd a = llt.solve(r_vec);
  if (!a.allFinite()) throw Error(ErrorKind::kSingularSystem, "non-finite WLP solution");

  LpModel model;
  model.coefficients.assign(a.data(), a.data() + a.size());
  // weighted prediction error power: e = Z * [1, -a]
  Eigen::VectorXd coeff(pi + 1);
  coeff(0) = 1.0;
  coeff.tail(pi) = -a;
  const double energy = (zw * coeff).squaredNorm();
  const double wsum = sw.squaredNorm();
  model.gain = wsum > 0 ? std::sqrt(energy / wsum) : 0.0;
  return model;
}

std::size_t FrameModels::nearest(std::size_t n) const {
  if (centers.empty()) throw Error(ErrorKind::kInvalidArgument, "no frame models");
  auto it = std::lower_bound(centers.begin(), centers.end(), n);
  if (it == centers.end()) return centers.size() - 1;
  const auto idx = static_cast<std::size_t>(it - centers.begin());
  if (idx == 0) return 0;
  return (n - centers[idx - 1] <= *it - n) ? idx - 1 : idx;
}

FrameModels fit_frames(const SampledSignal& signal, int order, double frame_ms, double shift_ms) {
  const dsp::FrameSeries frames = dsp::frame_signal(signal, frame_ms, shift_ms, dsp::Window::kHamming);
  FrameModels out;
  out.models.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    LpModel m;
    try {
      m = lp_autocorrelation(frames.frame(f), order);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateFrame) throw;
      m.coefficients.assign(order, 0.0);  // silence: pass-through
    }
    out.models.push_back(std::move(m));
    out.centers.push_back(frames.centers[f]);
  }
  return out;
}

std::vector<double> lp_residual(std::span<const double> x, const FrameModels& models) {
  std::vector<double> e(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const LpModel& m = models.models[models.nearest(n)];
    if (n < m.order()) continue;
    e[n] = m.error_at(x, n);
  }
  return e;
}

std::vector<double> lp_residual(const SampledSignal& signal, const FrameModels& models) {
  return lp_residual(signal.samples, models);
}

std::vector<double> leaky_integrate(std::span<const double> x, double rho) {
  std::vector<double> y(x.size());
  double state = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    state = x[n] + rho * state;
    y[n] = state;
  }
  return y;
}

std::vector<double> remove_local_mean(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  std::vector<double> y(x.begin(), x.end());
  if (n == 0 || window < 2) return y;
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + x[i];
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    y[i] = x[i] - (cum[hi] - cum[lo]) / static_cast<double>(hi - lo);
  }
  return y;
}

std::vector<double> inverse_filter_integrate(const SampledSignal& signal, const FrameModels& models,
                                             double rho, double frame_ms) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "lip radiation rho must be in [0, 1)");
  std::vector<double> residual = lp_residual(signal, models);
  // Drift removal only accompanies integration; rho = 0 is the plain residual.
  if (rho == 0.0) return residual;
  const std::vector<double> flow = leaky_integrate(residual, rho);
  const auto window = static_cast<std::size_t>(std::lround(frame_ms * signal.fs / 1000.0));
  return remove_local_mean(flow, window);
}

std::vector<double> envelope_response(const LpModel& model, std::size_t n_points) {
  std::vector<double> out(n_points, 0.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double w = n_points > 1 ? std::numbers::pi * static_cast<double>(i) / (n_points - 1) : 0.0;
    std::complex<double> a(1.0, 0.0);
    for (std::size_t k = 1; k <= model.order(); ++k)
      a -= model.coefficients[k - 1] * std::polar(1.0, -w * static_cast<double>(k));
    out[i] = 1.0 / std::max(std::norm(a), 1e-300);
  }
  return out;
}

}  // namespace glottal::lp
