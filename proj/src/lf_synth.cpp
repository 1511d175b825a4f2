#include "glottal/lf_synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "glottal/error.hpp"

namespace glottal::lf {

RdTiming timing_from_rd(double rd) {
  if (!(rd >= kRdMin - 1e-12 && rd <= kRdMax + 1e-12))
    throw Error(ErrorKind::kInvalidArgument, "Rd outside [0.3, 2.7]");
  RdTiming t;
  t.ra = (-1.0 + 4.8 * rd) / 100.0;
  t.rk = (22.4 + 11.8 * rd) / 100.0;
  t.rg = 0.25 * t.rk / (0.11 * rd / (0.5 + 1.2 * t.rk) - t.ra);
  return t;
}

namespace {

template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol, int max_iter = 400) {
  double flo = f(lo);
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (std::abs(hi - lo) <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LfPulse lf_pulse_samples(double rd, double ee, std::size_t period, double fs) {
  if (!(fs > 0.0) || period < 8) throw Error(ErrorKind::kSynthesis, "period too short");
  if (!(ee > 0.0)) throw Error(ErrorKind::kSynthesis, "ee must be positive");
  const RdTiming timing = timing_from_rd(rd);
  if (!(timing.rg > 0.0)) throw Error(ErrorKind::kSynthesis, "degenerate Rd timing");

  const double t0 = static_cast<double>(period) / fs;
  const double tp = t0 / (2.0 * timing.rg);
  const double ta = timing.ra * t0;
  const auto te_index = static_cast<std::size_t>(std::lround(tp * (1.0 + timing.rk) * fs));
  const double te = static_cast<double>(te_index) / fs;
  const double tb = t0 - te;
  if (te <= tp || te_index + 1 >= period || !(ta > 0.0) || ta >= tb)
    throw Error(ErrorKind::kSynthesis, "LF timing leaves no valid return phase");

  // Return phase: epsilon * ta = 1 - exp(-epsilon * (tc - te)), positive root.
  auto g = [&](double eps) { return eps * ta - 1.0 + std::exp(-eps * tb); };
  double lo = 0.5 * (tb - ta) / (tb * tb);
  while (g(lo) >= 0.0 && lo > 1e-300) lo *= 0.5;
  double hi = 1.0 / ta;
  while (g(hi) <= 0.0) hi *= 2.0;
  const double epsilon = bisect(g, lo, hi, 1e-12);
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw Error(ErrorKind::kSynthesis, "return-phase constant did not converge");

  const double wg = std::numbers::pi / tp;
  const double sin_te = std::sin(wg * te);
  const double tail = std::exp(-epsilon * tb);
  auto return_value = [&](double t) {
    return -ee / (epsilon * ta) * (std::exp(-epsilon * (t - te)) - tail);
  };
  double return_sum = 0.0;
  for (std::size_t n = te_index + 1; n < period; ++n) return_sum += return_value(n / fs);

  // Open phase written relative to te so E(te) = -ee for every alpha.
  auto open_value = [&](double alpha, double t) {
    return -ee * std::exp(alpha * (t - te)) * std::sin(wg * t) / sin_te;
  };
  auto area = [&](double alpha) {
    double s = return_sum;
    for (std::size_t n = 0; n <= te_index; ++n) s += open_value(alpha, n / fs);
    return s;
  };
  double a_lo = -10.0 / t0, a_hi = 10.0 / t0;
  for (int i = 0; i < 200 && area(a_lo) <= 0.0; ++i) a_lo *= 2.0;
  for (int i = 0; i < 200 && area(a_hi) >= 0.0; ++i) a_hi *= 2.0;
  if (area(a_lo) <= 0.0 || area(a_hi) >= 0.0)
    throw Error(ErrorKind::kSynthesis, "area balance not bracketed");
  const double alpha = bisect(area, a_lo, a_hi, 1e-14, 600);

  LfPulse pulse;
  pulse.alpha = alpha;
  pulse.epsilon = epsilon;
  pulse.te_index = te_index;
  pulse.derivative.resize(period);
  for (std::size_t n = 0; n < period; ++n) {
    const double t = n / fs;
    pulse.derivative[n] = n <= te_index ? open_value(alpha, t) : return_value(t);
  }
  pulse.derivative[te_index] = -ee;
  return pulse;
}

LfPulse lf_pulse(const LfParams& params, double fs) {
  if (!(params.f0 > 0.0)) throw Error(ErrorKind::kSynthesis, "f0 must be positive");
  const auto period = static_cast<std::size_t>(std::lround(fs / params.f0));
  return lf_pulse_samples(params.rd, params.ee, period, fs);
}

void validate(const SynthSpec& spec) {
  if (!(spec.fs > 0.0)) throw Error(ErrorKind::kInvalidArgument, "fs must be positive");
  if (!(spec.duration > 0.0)) throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
  if (!(spec.lf.f0 > 0.0) || spec.lf.f0 >= spec.fs / 8)
    throw Error(ErrorKind::kInvalidArgument, "f0 out of range");
  if (spec.lf.rd < kRdMin || spec.lf.rd > kRdMax)
    throw Error(ErrorKind::kInvalidArgument, "rd outside [0.3, 2.7]");
  for (const auto& f : spec.formants)
    if (!(f.frequency > 0.0 && f.frequency < spec.fs / 2 && f.bandwidth > 0.0))
      throw Error(ErrorKind::kInvalidArgument, "formant outside (0, fs/2) or non-positive bandwidth");
  if (spec.jitter_pct < 0 || spec.shimmer_pct < 0)
    throw Error(ErrorKind::kInvalidArgument, "jitter/shimmer must be non-negative");
}

std::vector<double> resonator_polynomial(const Formant& formant, double fs) {
  const double r = std::exp(-std::numbers::pi * formant.bandwidth / fs);
  const double theta = 2.0 * std::numbers::pi * formant.frequency / fs;
  return {1.0, -2.0 * r * std::cos(theta), r * r};
}

std::vector<double> all_pole_filter(const std::vector<double>& x,
                                    const std::vector<double>& denominator) {
  double dc = 0.0;
  for (double c : denominator) dc += c;
  std::vector<double> y(x.size(), 0.0);
  const std::size_t p = denominator.size();
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = dc * x[n];
    for (std::size_t k = 1; k < p && k <= n; ++k) acc -= denominator[k] * y[n - k];
    y[n] = acc / denominator[0];
  }
  return y;
}

namespace {

// Second-order Butterworth high-pass (bilinear transform).
std::vector<double> highpass(const std::vector<double>& x, double cutoff, double fs) {
  const double w0 = 2.0 * std::numbers::pi * cutoff / fs;
  const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 + cw) / 2.0 / a0, b1 = -(1.0 + cw) / a0, b2 = b0;
  const double a1 = -2.0 * cw / a0, a2 = (1.0 - alpha) / a0;
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double v = b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = v;
    y[n] = v;
  }
  return y;
}

std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

Synthesis synthesize(const SynthSpec& spec) {
  validate(spec);
  const auto total = static_cast<std::size_t>(std::lround(spec.duration * spec.fs));
  Rng rng(spec.seed);

  std::vector<double> derivative;
  derivative.reserve(total + 4096);
  std::vector<char> open_phase;
  open_phase.reserve(total + 4096);
  GroundTruth truth;
  std::map<std::size_t, LfPulse> pulses;  // unit-ee pulse per integer period

  const double jitter = spec.jitter_pct / 100.0;
  const double shimmer = spec.shimmer_pct / 100.0;
  while (derivative.size() < total) {
    const double f0 = spec.lf.f0 * (1.0 + jitter * rng.uniform(-1.0, 1.0));
    const double ee = spec.lf.ee * (1.0 + shimmer * rng.uniform(-1.0, 1.0));
    const auto period = static_cast<std::size_t>(std::lround(spec.fs / f0));
    auto it = pulses.find(period);
    if (it == pulses.end())
      it = pulses.emplace(period, lf_pulse_samples(spec.lf.rd, 1.0, period, spec.fs)).first;
    const LfPulse& pulse = it->second;
    const std::size_t start = derivative.size();
    truth.period_starts.push_back(start);
    if (start + pulse.te_index < total) truth.true_gcis.push_back(start + pulse.te_index);
    for (std::size_t n = 0; n < period; ++n) {
      derivative.push_back(ee * pulse.derivative[n]);
      open_phase.push_back(n <= pulse.te_index ? 1 : 0);
    }
  }
  derivative.resize(total);
  open_phase.resize(total);
  while (!truth.period_starts.empty() && truth.period_starts.back() >= total)
    truth.period_starts.pop_back();

  std::vector<double> excitation = derivative;
  if (std::isfinite(spec.aspiration_snr_db)) {
    std::vector<double> noise(total);
    for (double& v : noise) v = rng.gaussian();
    noise = highpass(noise, 2000.0, spec.fs);
    for (std::size_t n = 0; n < total; ++n) noise[n] *= open_phase[n];
    double ps = 0.0, pn = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
      ps += derivative[n] * derivative[n];
      pn += noise[n] * noise[n];
    }
    if (pn > 0.0) {
      const double scale = std::sqrt(ps / (pn * std::pow(10.0, spec.aspiration_snr_db / 10.0)));
      for (std::size_t n = 0; n < total; ++n) excitation[n] += scale * noise[n];
    }
  }

  // Vocal tract on the flow derivative: lip radiation (a first difference of
  // the radiated flow) commutes with the tract, so filtering the derivative
  // is the same as differencing the filtered flow.
  std::vector<double> tract{1.0};
  std::vector<double> speech = excitation;
  for (const auto& f : spec.formants) {
    const auto poly = resonator_polynomial(f, spec.fs);
    speech = all_pole_filter(speech, poly);
    tract = poly_multiply(tract, poly);
  }
  for (double& v : speech) v *= spec.output_gain;

  truth.true_flow_derivative = derivative;
  truth.true_flow.resize(total);
  double acc = 0.0;
  for (std::size_t n = 0; n < total; ++n) {
    acc += derivative[n] / spec.fs;
    truth.true_flow[n] = acc;
  }
  truth.tract_polynomial = std::move(tract);

  Synthesis out;
  out.signal.fs = spec.fs;
  out.signal.samples = std::move(speech);
  out.truth = std::move(truth);
  return out;
}

}  // namespace glottal::lf
