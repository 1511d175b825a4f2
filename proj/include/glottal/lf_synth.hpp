#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "glottal/signal_io.hpp"

namespace glottal::lf {

inline constexpr double kRdMin = 0.3;
inline constexpr double kRdMax = 2.7;

/// LF timing ratios derived from Rd through Fant's 1995 regression.
struct RdTiming {
  double ra = 0.0;  // ta / T0
  double rk = 0.0;  // (te - tp) / tp
  double rg = 0.0;  // T0 / (2 tp)

  /// Open quotient te/T0 = (1 + rk) / (2 rg).
  double open_quotient() const { return (1.0 + rk) / (2.0 * rg); }
};

RdTiming timing_from_rd(double rd);

struct LfParams {
  double f0 = 100.0;  // Hz
  double ee = 1.0;    // magnitude of the negative derivative peak
  double rd = 1.0;

  RdTiming timing() const { return timing_from_rd(rd); }
};

/// One sampled period of the LF flow derivative.
struct LfPulse {
  std::vector<double> derivative;  // length round(fs / f0)
  std::size_t te_index = 0;        // sample of the main excitation (-ee)
  double alpha = 0.0;              // open-phase growth rate (1/s)
  double epsilon = 0.0;            // return-phase rate (1/s)
};

/// Samples one pulse at t = n/fs over an integer-length period. te is placed on
/// the sample grid, epsilon solves the return-phase constraint and alpha makes
/// the sampled pulse integrate to zero; both by bisection.
LfPulse lf_pulse(const LfParams& params, double fs);

/// Pulse with an explicit integer period (used for jittered trains).
LfPulse lf_pulse_samples(double rd, double ee, std::size_t period, double fs);

struct Formant {
  double frequency = 0.0;  // Hz
  double bandwidth = 0.0;  // Hz
};

struct SynthSpec {
  LfParams lf;
  std::vector<Formant> formants;
  double duration = 1.0;  // s
  double fs = 25000.0;
  double jitter_pct = 0.0;
  double shimmer_pct = 0.0;
  double aspiration_snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 42;
  double output_gain = 0.2;
};

void validate(const SynthSpec& spec);

struct GroundTruth {
  std::vector<double> true_flow;
  std::vector<double> true_flow_derivative;
  std::vector<std::size_t> true_gcis;
  std::vector<std::size_t> period_starts;
  std::vector<double> tract_polynomial;  // [1, c1, c2, ...] of the all-pole denominator
};

struct Synthesis {
  SampledSignal signal;
  GroundTruth truth;
};

Synthesis synthesize(const SynthSpec& spec);

/// Denominator polynomial of one unit-DC-gain two-pole resonator.
std::vector<double> resonator_polynomial(const Formant& formant, double fs);

/// Filters x through 1/D(z) scaled so the cascade has unit gain at DC.
std::vector<double> all_pole_filter(const std::vector<double>& x,
                                    const std::vector<double>& denominator);

/// Seeded generator shared by the synthesizer and the oracle corpus.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace glottal::lf
