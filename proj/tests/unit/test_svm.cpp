#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glottal/error.hpp"
#include "glottal/svm.hpp"
#include "oracles.hpp"

using namespace glottal;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Problem random_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Problem p;
  p.x.resize(static_cast<long>(n), static_cast<long>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    p.y.push_back(label);
    for (std::size_t j = 0; j < d; ++j) p.x(static_cast<long>(i), static_cast<long>(j)) = g(rng) + 0.7 * label;
  }
  return p;
}

std::vector<double> row_of(const Eigen::MatrixXd& m, long i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (long j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
  return r;
}

}  // namespace

TEST(Svm, KernelBasics) {
  const std::vector<double> u{1.0, 2.0}, v{2.0, 0.0};
  EXPECT_NEAR(svm::rbf(u, v, 0.5), std::exp(-0.5 * 5.0), 1e-15);
  EXPECT_EQ(svm::rbf(u, u, 3.0), 1.0);
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 0;
  const auto d = svm::squared_distances(a, a);
  EXPECT_NEAR(d(0, 1), 5.0, 1e-12);
  EXPECT_NEAR(d(0, 0), 0.0, 1e-12);
  const auto k = svm::rbf_kernel(a, a, 0.5);
  EXPECT_NEAR(k(1, 0), std::exp(-2.5), 1e-12);
}

TEST(Svm, TwoPointsMidpointIsBoundary) {
  Eigen::MatrixXd x(2, 2);
  x << -1.0, 0.5, 1.0, 2.5;
  const std::vector<int> y{-1, 1};
  const auto m = svm::svm_train(x, y, {.c = 10.0, .gamma = 0.5});
  const std::vector<double> mid{0.0, 1.5};
  EXPECT_NEAR(svm::svm_score(m, mid), 0.0, 1e-6);
  EXPECT_EQ(svm::svm_predict(m, row_of(x, 1)), 1);
  EXPECT_EQ(svm::svm_predict(m, row_of(x, 0)), -1);
}

TEST(Svm, Xor) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> y{-1, -1, 1, 1};
  const auto m = svm::svm_train(x, y, {.c = 10.0, .gamma = 1.0});
  for (long i = 0; i < 4; ++i) EXPECT_EQ(svm::svm_predict(m, row_of(x, i)), y[static_cast<std::size_t>(i)]);
}

TEST(Svm, MatchesBruteForceDual) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto p = random_problem(10, 2, seed);
    const double c = seed % 2 == 0 ? 1.0 : 5.0;
    const auto k = svm::rbf_kernel(p.x, p.x, 0.5);
    const auto ref = oracle::svm_dual_bruteforce(k, p.y, c);
    svm::TrainInfo info;
    const auto m = svm::svm_train(p.x, p.y, {.c = c, .gamma = 0.5, .tolerance = 1e-6}, &info);
    EXPECT_NEAR(info.objective, ref.objective, 1e-3 * std::max(1.0, std::abs(ref.objective))) << seed;
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(info.alpha[i], ref.alpha[i], 1e-3 * c) << seed;
    EXPECT_TRUE(info.converged);
    EXPECT_TRUE(info.objective_monotone);
    EXPECT_LT(svm::kkt_residual(m, info.alpha, p.x, p.y), 1e-3);
    // Free support vectors lie on the margin.
    for (long i = 0; i < 10; ++i) {
      const double a = info.alpha[static_cast<std::size_t>(i)];
      if (a > 1e-6 && a < c - 1e-6) {
        EXPECT_NEAR(p.y[static_cast<std::size_t>(i)] * svm::svm_score(m, row_of(p.x, i)), 1.0, 1e-3);
      }
    }
  }
}

TEST(Svm, DualFeasibility) {
  const auto p = random_problem(40, 3, 17);
  svm::TrainInfo info;
  svm::svm_train(p.x, p.y, {.c = 2.0, .gamma = 0.3}, &info);
  double s = 0.0;
  for (std::size_t i = 0; i < info.alpha.size(); ++i) {
    EXPECT_GE(info.alpha[i], 0.0);
    EXPECT_LE(info.alpha[i], 2.0);
    s += info.alpha[i] * p.y[i];
  }
  EXPECT_NEAR(s, 0.0, 1e-9);
  const auto k = svm::rbf_kernel(p.x, p.x, 0.3);
  EXPECT_NEAR(svm::dual_objective(info.alpha, p.y, k), info.objective, 1e-9);
}

TEST(Svm, DuplicatePointWithConflictingLabels) {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.0, 3.0;
  const std::vector<int> y{1, -1, 1};
  svm::TrainInfo info;
  const auto m = svm::svm_train(x, y, {.c = 1.0, .gamma = 1.0}, &info);
  EXPECT_TRUE(info.converged);
  EXPECT_TRUE(std::isfinite(svm::svm_score(m, std::vector<double>{0.0})));
}

TEST(Svm, ScoreIsContinuous) {
  const auto p = random_problem(30, 2, 5);
  const auto m = svm::svm_train(p.x, p.y, {.c = 1.0, .gamma = 1.0});
  const std::vector<double> a{0.3, -0.2}, b{0.3 + 1e-7, -0.2};
  EXPECT_NEAR(svm::svm_score(m, a), svm::svm_score(m, b), 1e-5);
  const auto batch = svm::svm_score(m, p.x);
  for (long i = 0; i < p.x.rows(); ++i) EXPECT_NEAR(batch[static_cast<std::size_t>(i)], svm::svm_score(m, row_of(p.x, i)), 1e-12);
}

TEST(Svm, SingleClassRejected) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  const std::vector<int> y{1, 1, 1};
  try {
    svm::svm_train(x, y, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingleClass);
  }
}
