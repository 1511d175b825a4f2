#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "glottal/cepstral_features.hpp"
#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "oracles.hpp"
#include "signals.hpp"

using namespace glottal;

namespace {
constexpr double kFs = 25000.0;
}

TEST(Dct, ConstantInputHasOnlyC0) {
  const std::vector<double> flat(26, 1.7);
  const auto c = cep::dct2(flat, 13);
  ASSERT_EQ(c.size(), 13u);
  EXPECT_NEAR(c[0], 1.7 * std::sqrt(26.0), 1e-12);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_NEAR(c[k], 0.0, 1e-12);
}

TEST(Dct, MatchesDirectSum) {
  const auto x = testsig::white_noise(20, 3);
  const auto c = cep::dct2(x, 20);
  for (int k : {0, 1, 7, 19}) {
    double s = 0.0;
    for (int n = 0; n < 20; ++n) s += x[n] * std::cos(std::numbers::pi * k * (n + 0.5) / 20.0);
    s *= std::sqrt((k == 0 ? 1.0 : 2.0) / 20.0);
    EXPECT_NEAR(c[k], s, 1e-12) << k;
  }
  // Orthonormal: energy preserved when all coefficients are kept.
  double ex = 0.0, ec = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    ex += x[i] * x[i];
    ec += c[i] * c[i];
  }
  EXPECT_NEAR(ex, ec, 1e-10);
}

TEST(Mfcc, C0AgainstHandRolledPipeline) {
  const auto x = testsig::sine(1000.0, kFs, 625, 0.3, 0.4);
  cep::CepstralConfig cfg;
  const auto c = cep::mfcc_frame(x, kFs, cfg);
  ASSERT_EQ(c.size(), 13u);
  EXPECT_NEAR(c[0], oracle::mel_c0(x, kFs, cep::dft_size(625, cfg), cfg.n_mel_filters), 1e-6);
}

TEST(Mfcc, ScalingShiftsOnlyC0) {
  const auto x = testsig::white_noise(625, 11);
  auto y = x;
  for (auto& v : y) v *= 5.0;
  const auto a = cep::mfcc_frame(x, kFs, {}), b = cep::mfcc_frame(y, kFs, {});
  EXPECT_NEAR(b[0] - a[0], std::log(5.0) * std::sqrt(26.0), 1e-9);
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
}

TEST(Mfcc, SeriesShapeAndFrameCount) {
  const auto x = testsig::white_noise(25000, 2);
  const auto s = cep::mfcc(x, kFs);
  EXPECT_EQ(s.n_frames, 196u);
  EXPECT_EQ(s.width, 39u);
  EXPECT_EQ(s.vectors.size(), s.n_frames * s.width);
  const auto p = cep::plp(x, kFs);
  EXPECT_EQ(p.n_frames, s.n_frames);
  EXPECT_EQ(p.width, 39u);
  EXPECT_THROW(cep::mfcc(std::vector<double>(100, 1.0), kFs), Error);
}

TEST(Mfcc, FilterbankPartitionsTheBand) {
  const auto bank = cep::mel_filterbank(26, 1024, kFs);
  ASSERT_EQ(bank.size(), 26u);
  // Adjacent triangles sum to one between the first and last centre.
  const double lo = cep::mel_to_hz(cep::hz_to_mel(kFs / 2) / 27.0);
  const double hi = cep::mel_to_hz(26.0 * cep::hz_to_mel(kFs / 2) / 27.0);
  for (std::size_t k = 0; k < 513; ++k) {
    const double f = k * kFs / 1024.0;
    if (f <= lo || f >= hi) continue;
    double s = 0.0;
    for (const auto& row : bank) s += row[k];
    EXPECT_NEAR(s, 1.0, 1e-9) << f;
  }
  EXPECT_NEAR(cep::mel_to_hz(cep::hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(Plp, StaticsAndSilentFrames) {
  const auto c = cep::plp_frame(testsig::white_noise(625, 4), kFs, {});
  ASSERT_EQ(c.size(), 13u);
  for (double v : c) EXPECT_TRUE(std::isfinite(v));
  const std::vector<double> zeros(625, 0.0);
  const auto z1 = cep::plp_frame(zeros, kFs, {}), z2 = cep::plp_frame(zeros, kFs, {});
  EXPECT_EQ(z1, z2);
  for (double v : z1) EXPECT_TRUE(std::isfinite(v));
}

TEST(Plp, AuditorySpectrumOfNoiseFollowsEqualLoudness) {
  cep::CepstralConfig cfg;
  const std::size_t n_dft = cep::dft_size(625, cfg);
  const auto bank = cep::bark_filterbank(n_dft, kFs);
  std::vector<double> mean(bank.filters.size(), 0.0);
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto a = cep::plp_auditory_spectrum(testsig::white_noise(625, 500 + t), kFs, cfg);
    for (std::size_t j = 0; j < a.size(); ++j) mean[j] += a[j] / trials;
  }
  // Expected periodogram of windowed unit white noise is flat: sum of w^2.
  const auto w = dsp::hamming(625);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;
  for (std::size_t j = 1; j + 1 < mean.size(); ++j) {
    double wsum = 0.0;
    for (double v : bank.filters[j]) wsum += v;
    const double expect = w2 * wsum * cep::equal_loudness(bank.centers_hz[j]);
    EXPECT_NEAR(mean[j] / expect, 1.0, 0.2) << j;
  }
}

TEST(Plp, EqualLoudnessShape) {
  // Monotone rise towards 1 with no high-frequency roll-off term.
  double last = 0.0;
  for (double f = 50.0; f < 12500.0; f *= 1.5) {
    EXPECT_GT(cep::equal_loudness(f), last) << f;
    last = cep::equal_loudness(f);
  }
  EXPECT_NEAR(cep::equal_loudness(1e7), 1.0, 1e-3);
}

TEST(Dynamics, ConstantAndRamp) {
  const std::size_t n = 20, w = 3;
  std::vector<double> constant(n * w, 2.5), ramp(n * w);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t d = 0; d < w; ++d) ramp[t * w + d] = static_cast<double>(t) * (d + 1);
  const auto a = cep::append_dynamics(constant, n, w);
  ASSERT_EQ(a.size(), n * 3 * w);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t d = 0; d < w; ++d) {
      EXPECT_EQ(a[t * 3 * w + d], 2.5);
      EXPECT_EQ(a[t * 3 * w + w + d], 0.0);
      EXPECT_EQ(a[t * 3 * w + 2 * w + d], 0.0);
    }
  const auto b = cep::append_dynamics(ramp, n, w);
  for (std::size_t t = 4; t + 4 < n; ++t)
    for (std::size_t d = 0; d < w; ++d) {
      EXPECT_NEAR(b[t * 3 * w + w + d], static_cast<double>(d + 1), 1e-12);
      EXPECT_NEAR(b[t * 3 * w + 2 * w + d], 0.0, 1e-12);
    }
  const std::vector<double> one{1.0, 2.0};
  const auto c = cep::append_dynamics(one, 1, 2);
  EXPECT_EQ(c, (std::vector<double>{1.0, 2.0, 0.0, 0.0, 0.0, 0.0}));
  EXPECT_THROW(cep::append_dynamics(one, 3, 2), Error);
}

TEST(Voicing, FramesWithEpochs) {
  auto s = cep::mfcc(testsig::white_noise(5000, 1), kFs);
  zff::GciSequence g;
  g.epochs = {10, 2000};
  cep::set_voicing(s, g);
  ASSERT_EQ(s.voiced_mask.size(), s.n_frames);
  for (std::size_t i = 0; i < s.n_frames; ++i) {
    const bool expect = (s.starts[i] <= 10 && 10 < s.starts[i] + s.frame_len) ||
                        (s.starts[i] <= 2000 && 2000 < s.starts[i] + s.frame_len);
    EXPECT_EQ(s.voiced_mask[i] != 0, expect) << i;
  }
}

TEST(Config, Validation) {
  cep::CepstralConfig c;
  c.n_dft = 1000;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_ceps = 30;
  EXPECT_THROW(c.validate(), Error);
}
