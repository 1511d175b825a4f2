#include <gtest/gtest.h>

#include <random>

#include "glottal/metrics.hpp"
#include "oracles.hpp"

using namespace glottal;

namespace {

struct Scored {
  std::vector<double> s;
  std::vector<int> y;
};

Scored random_scored(std::size_t n, std::uint64_t seed, double shift, bool quantise = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::bernoulli_distribution b(0.4);
  Scored r;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = b(rng) ? 1 : -1;
    double s = g(rng) + (y == 1 ? shift : 0.0);
    if (quantise) s = std::round(s * 4.0) / 4.0;  // plenty of ties
    r.s.push_back(s);
    r.y.push_back(y);
  }
  return r;
}

}  // namespace

TEST(Metrics, PerfectSeparation) {
  const std::vector<double> s{-3, -2, -1, 1, 2, 3};
  const std::vector<int> y{-1, -1, -1, 1, 1, 1};
  const auto m = metrics::compute_metrics(s, y);
  EXPECT_EQ(m.acc, 100.0);
  EXPECT_EQ(m.se, 1.0);
  EXPECT_EQ(m.sp, 1.0);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.eer, 0.0);
}

TEST(Metrics, RandomLabelsAreChance) {
  const auto r = random_scored(10000, 3, 0.0);
  EXPECT_NEAR(metrics::auc(r.s, r.y), 0.5, 0.02);
  EXPECT_NEAR(metrics::eer(r.s, r.y), 0.5, 0.03);
}

TEST(Metrics, MatchBruteForceOracles) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto r = random_scored(20 + 30 * seed, seed, 0.8, seed % 3 == 0);
    EXPECT_NEAR(metrics::auc(r.s, r.y), oracle::pairwise_auc(r.s, r.y), 1e-12) << seed;
    EXPECT_NEAR(metrics::eer(r.s, r.y), oracle::threshold_eer(r.s, r.y), 1e-12) << seed;
  }
}

TEST(Metrics, AntisymmetryAndScaling) {
  const auto r = random_scored(500, 9, 1.0, true);
  auto neg = r.s;
  for (auto& v : neg) v = -v;
  const double a = metrics::auc(r.s, r.y);
  EXPECT_NEAR(metrics::auc(neg, r.y), 1.0 - a, 1e-12);
  auto scaled = r.s;
  for (auto& v : scaled) v = 3.0 * v + 7.0;
  EXPECT_NEAR(metrics::auc(scaled, r.y), a, 1e-12);
  EXPECT_NEAR(metrics::eer(scaled, r.y), metrics::eer(r.s, r.y), 1e-12);
  const double e = metrics::eer(r.s, r.y);
  EXPECT_GE(e, 0.0);
  EXPECT_LE(e, 0.5);
}

TEST(Metrics, ThresholdCounts) {
  const std::vector<double> s{-1.0, 0.0, 0.5, -0.5, 2.0};
  const std::vector<int> y{-1, -1, 1, 1, 1};
  const auto m = metrics::compute_metrics(s, y);
  // Predictions: -, +, +, -, +  -> 3 correct of 5.
  EXPECT_NEAR(m.acc, 60.0, 1e-12);
  EXPECT_NEAR(m.se, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.sp, 0.5, 1e-12);
}
