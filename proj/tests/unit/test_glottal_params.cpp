#include <gtest/gtest.h>

#include <cmath>

#include "glottal/error.hpp"
#include "glottal/glottal_params.hpp"
#include "glottal/lf_synth.hpp"
#include "oracles.hpp"
#include "signals.hpp"

using namespace glottal;

namespace {

constexpr double kFs = 25000.0;

// Flow of one LF period starting at closure, by cumulative sum, plus a guard.
std::vector<double> lf_cycle(double rd, std::size_t period, std::size_t guard = 25) {
  const auto pulse = lf::lf_pulse_samples(rd, 1.0, period, kFs);
  std::vector<double> flow(period + guard);
  double acc = 0.0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    acc += pulse.derivative[(pulse.te_index + 1 + i) % period] / kFs;
    flow[i] = acc;
  }
  return flow;
}

std::vector<double> triangle_cycle(std::size_t period, double open_frac, double scale = 1.0) {
  std::vector<double> f(period + period / 10, 0.0);
  const double start = period * (1.0 - open_frac), peak = period * (1.0 - open_frac / 2.0);
  for (std::size_t i = 0; i < period; ++i) {
    const double t = static_cast<double>(i);
    if (t > start && t <= peak) f[i] = scale * (t - start) / (peak - start);
    else if (t > peak) f[i] = scale * (period - t) / (period - peak);
  }
  return f;
}

gp::TimeDomainGlottal measure(const std::vector<double>& flow, std::size_t period) {
  const auto c = gp::measure_cycle(flow, period, kFs);
  EXPECT_TRUE(c.has_value());
  return gp::time_domain_features(*c);
}

}  // namespace

TEST(GlottalParams, TriangleOpenQuotientAndSymmetry) {
  const auto f = measure(triangle_cycle(250, 0.6), 250);
  EXPECT_NEAR(f.oq1, 0.56, 0.02);
  EXPECT_NEAR(f.sq1, 1.0, 0.02);
  EXPECT_NEAR(f.sq2, 1.0, 0.02);
  EXPECT_GE(f.oq1, f.oq2);
  EXPECT_NEAR(f.clq, 0.3, 0.01);
}

TEST(GlottalParams, ZeroCycleUnusable) {
  std::vector<double> flow(2000, 0.0);
  zff::GciSequence g;
  g.epochs = {200, 450, 700, 950};
  const auto seg = gp::segment_cycles(flow, g, kFs);
  EXPECT_TRUE(seg.cycles.empty());
  EXPECT_EQ(seg.unusable, 3u);
  EXPECT_FALSE(gp::measure_cycle(std::vector<double>(300, 1.0), 250, kFs).has_value());
}

TEST(GlottalParams, NaqArithmetic) {
  gp::GlottalCycle c;
  c.period = 250;
  c.fs = kFs;
  c.t0 = 0.010;
  c.f_ac = 0.2;
  c.d_min = -250.0;
  c.landmarks.peak_flow_index = 150;
  c.landmarks.primary_closing = 200;
  c.landmarks.secondary_closing = 180;
  const auto f = gp::time_domain_features(c);
  EXPECT_NEAR(f.aq, 0.0008, 1e-15);
  EXPECT_NEAR(f.naq, 0.08, 1e-12);
  EXPECT_TRUE(std::isnan(f.oqa));
  EXPECT_NEAR(gp::time_domain_features(c, 1.0).oqa, lf::timing_from_rd(1.0).open_quotient(), 1e-12);

  c.d_min = -1e-12;
  try {
    gp::time_domain_features(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAmplitudeQuotient);
  }
}

TEST(GlottalParams, LfSweepNaqRisesHrfFalls) {
  const std::vector<double> rds{0.5, 0.8, 1.2, 1.8, 2.5};
  double last_naq = 0.0, last_hrf = 1e9;
  for (double rd : rds) {
    const auto f = measure(lf_cycle(rd, 250), 250);
    EXPECT_GT(f.naq, last_naq) << rd;
    last_naq = f.naq;
    EXPECT_GE(f.oq1, f.oq2);

    // Spectral measures on a 4-period derivative frame.
    const auto pulse = lf::lf_pulse_samples(rd, 1.0, 250, kFs);
    std::vector<double> frame;
    for (int k = 0; k < 4; ++k) frame.insert(frame.end(), pulse.derivative.begin(), pulse.derivative.end());
    const auto fd = gp::frequency_domain_features(frame, 100.0, kFs);
    ASSERT_FALSE(fd.h2_missing);
    EXPECT_LT(fd.hrf, last_hrf) << rd;
    last_hrf = fd.hrf;
  }
}

TEST(GlottalParams, SecondaryOpeningAgainstContinuousOracle) {
  // OQ2 is read at the 50% level, so it is compared with the same crossing on
  // the finely integrated continuous pulse rather than with the LF Oq.
  for (double rd : {0.6, 0.8, 1.0, 1.5, 2.2}) {
    const auto f = measure(lf_cycle(rd, 250), 250);
    const auto fine = oracle::lf_fine_flow(rd, 1.0, 250, kFs, 32);
    EXPECT_NEAR(f.oq2, oracle::open_quotient_at(fine.flow, 0.5), 0.01) << rd;
    EXPECT_NEAR(f.oq1, oracle::open_quotient_at(fine.flow, 0.1), 0.01) << rd;
  }
}

TEST(GlottalParams, QuotientsScaleInvariant) {
  const auto flow = lf_cycle(1.3, 200);
  auto flow3 = flow;
  for (auto& v : flow3) v *= 3.0;
  const auto a = measure(flow, 200), b = measure(flow3, 200);
  EXPECT_NEAR(a.oq1, b.oq1, 1e-12);
  EXPECT_NEAR(a.oq2, b.oq2, 1e-12);
  EXPECT_NEAR(a.naq, b.naq, 1e-12);
  EXPECT_NEAR(a.clq, b.clq, 1e-12);
  EXPECT_NEAR(a.qoq, b.qoq, 1e-12);
  EXPECT_NEAR(a.sq1, b.sq1, 1e-9);
  EXPECT_NEAR(a.sq2, b.sq2, 1e-9);
  EXPECT_NEAR(b.aq, a.aq, 1e-15);
  for (double q : {a.oq1, a.oq2, a.qoq, a.clq}) {
    EXPECT_GT(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(GlottalParams, HarmonicArithmetic) {
  const std::vector<double> two{1.0, 0.5};
  const auto a = gp::features_from_harmonics(two);
  EXPECT_NEAR(a.h1h2, 6.0206, 1e-4);
  EXPECT_NEAR(a.hrf, -6.0206, 1e-4);
  EXPECT_TRUE(a.psp_missing);

  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  const auto b = gp::features_from_harmonics(flat);
  EXPECT_NEAR(b.hrf, 20.0 * std::log10(3.0), 1e-12);
  EXPECT_NEAR(b.psp, 0.0, 1e-9);

  const std::vector<double> weak{1.0, 1e-6};
  EXPECT_TRUE(gp::features_from_harmonics(weak).h2_missing);
}

TEST(GlottalParams, PspReferenceIsOne) {
  std::vector<double> h;
  for (int k = 1; k <= 8; ++k) h.push_back(1.0 / (k * k));  // -12 dB/oct
  EXPECT_NEAR(gp::features_from_harmonics(h).psp, 1.0, 1e-9);
}

TEST(GlottalParams, SpectralMeasuresScaleInvariant) {
  const auto pulse = lf::lf_pulse_samples(1.0, 1.0, 200, kFs);
  std::vector<double> frame;
  for (int k = 0; k < 4; ++k) frame.insert(frame.end(), pulse.derivative.begin(), pulse.derivative.end());
  auto frame3 = frame;
  for (auto& v : frame3) v *= 3.0;
  const auto a = gp::frequency_domain_features(frame, 125.0, kFs);
  const auto b = gp::frequency_domain_features(frame3, 125.0, kFs);
  EXPECT_NEAR(a.h1h2, b.h1h2, 1e-9);
  EXPECT_NEAR(a.hrf, b.hrf, 1e-9);
  EXPECT_NEAR(a.psp, b.psp, 1e-9);
  EXPECT_FALSE(a.psp_missing);
}

TEST(GlottalParams, SegmentsLfTrain) {
  const auto syn = testsig::vowel(125.0, 1.0, testsig::vowel_a(), 0.3);
  zff::GciSequence g;
  g.epochs = syn.truth.true_gcis;
  const auto seg = gp::segment_cycles(syn.truth.true_flow, g, kFs);
  EXPECT_EQ(seg.cycles.size() + seg.unusable, g.epochs.size() - 1);
  EXPECT_GE(seg.cycles.size(), g.epochs.size() - 3);
  for (const auto& c : seg.cycles) {
    EXPECT_LT(c.d_min, 0.0);
    EXPECT_LT(c.landmarks.peak_flow_index, c.period);
    EXPECT_EQ(c.landmarks.closure_index, 0u);
  }
}
