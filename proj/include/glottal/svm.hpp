#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace glottal::svm {

struct SvmParams {
  double c = 1.0;
  double gamma = 1.0;
  double tolerance = 1e-3;  // on the maximal KKT violation gap
  std::uint64_t max_kernel_evals = 10'000'000;
};

struct SvmModel {
  Eigen::MatrixXd support_vectors;  // rows
  std::vector<double> dual_coef;    // alpha_i * y_i
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

struct TrainInfo {
  double objective = 0.0;  // dual objective sum(alpha) - 1/2 alpha'Q alpha at exit
  std::size_t iterations = 0;
  bool converged = false;
  bool objective_monotone = true;  // the dual never decreased between iterations
  std::vector<double> alpha;       // per training row
};

double rbf(std::span<const double> u, std::span<const double> v, double gamma);
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

/// Pairwise squared Euclidean distances between rows of a and b.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct SmoSolution {
  std::vector<double> alpha;
  double rho = 0.0;  // decision f(x) = sum alpha_i y_i K(x_i, x) - rho
};

/// SMO with second-order working-set selection on a precomputed kernel matrix.
SmoSolution smo_solve(const Eigen::MatrixXd& kernel, std::span<const int> y,
                      const SvmParams& params, TrainInfo* info = nullptr);

/// Keeps the rows with alpha > 0 as support vectors.
SvmModel make_model(const Eigen::MatrixXd& x, std::span<const int> y, const SmoSolution& sol,
                    const SvmParams& params);

/// RBF kernel matrix, SMO, then make_model.
/// Labels are +1 / -1. Throws kSingleClass when one class is absent.
SvmModel svm_train(const Eigen::MatrixXd& x, std::span<const int> y, const SvmParams& params,
                   TrainInfo* info = nullptr);

double svm_score(const SvmModel& model, std::span<const double> x);
inline int svm_predict(const SvmModel& model, std::span<const double> x) {
  return svm_score(model, x) >= 0.0 ? 1 : -1;
}
std::vector<double> svm_score(const SvmModel& model, const Eigen::MatrixXd& x);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const double> alpha, std::span<const int> y,
                      const Eigen::MatrixXd& kernel);

/// Largest KKT violation of a trained model on its training set:
/// |y f - 1| for free vectors, max(0, 1 - y f) at alpha = 0, max(0, y f - 1) at C.
double kkt_residual(const SvmModel& model, std::span<const double> alpha,
                    const Eigen::MatrixXd& x, std::span<const int> y);

}  // namespace glottal::svm
