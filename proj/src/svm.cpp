#include "glottal/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glottal/error.hpp"

namespace glottal::svm {

double rbf(std::span<const double> u, std::span<const double> v, double gamma) {
  if (u.size() != v.size()) throw Error(ErrorKind::kDimensionMismatch, "kernel arguments differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += (u[i] - v[i]) * (u[i] - v[i]);
  return std::exp(-gamma * d);
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  if (a.cols() != b.cols()) throw Error(ErrorKind::kDimensionMismatch, "kernel arguments differ in size");
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
  return k;
}

double dual_objective(std::span<const double> alpha, std::span<const int> y,
                      const Eigen::MatrixXd& kernel) {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  double lin = 0.0, quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    lin += alpha[i];
    for (Eigen::Index j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(i, j);
  }
  return lin - 0.5 * quad;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw Error(ErrorKind::kDimensionMismatch, "row dimensions differ");
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d;
}

SmoSolution smo_solve(const Eigen::MatrixXd& k, std::span<const int> y, const SvmParams& params,
                      TrainInfo* info) {
  const auto n = static_cast<Eigen::Index>(k.rows());
  if (static_cast<std::size_t>(n) != y.size())
    throw Error(ErrorKind::kDimensionMismatch, "label count differs from row count");
  if (!(params.c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "C must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(ErrorKind::kInvalidArgument, "labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorKind::kSingleClass, "training set holds one class");

  if (k.cols() != n) throw Error(ErrorKind::kDimensionMismatch, "kernel matrix must be square");
  const double c = params.c;
  std::uint64_t evals = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n + 1) / 2;
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * k(i, j); };

  // Minimises f(a) = 1/2 a'Qa - e'a; grad = Qa - e.
  std::vector<double> a(static_cast<std::size_t>(n), 0.0), g(static_cast<std::size_t>(n), -1.0);
  auto is_up = [&](Eigen::Index t) { return (y[t] == 1 && a[t] < c) || (y[t] == -1 && a[t] > 0.0); };
  auto is_low = [&](Eigen::Index t) { return (y[t] == 1 && a[t] > 0.0) || (y[t] == -1 && a[t] < c); };
  auto f_value = [&] {
    double f = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) f += a[t] * (g[t] - 1.0);
    return 0.5 * f;
  };
  constexpr double kTau = 1e-12;

  TrainInfo local;
  double prev_f = 0.0;
  while (true) {
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (is_up(t) && -y[t] * g[t] >= g_max) {
        g_max = -y[t] * g[t];
        i = t;
      }
    double g_min = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!is_low(t)) continue;
      g_min = std::min(g_min, -y[t] * g[t]);
      const double b = g_max + y[t] * g[t];
      if (i < 0 || b <= 0.0) continue;
      double curv = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (curv <= 0.0) curv = kTau;
      if (-(b * b) / curv <= best) {
        best = -(b * b) / curv;
        j = t;
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < params.tolerance) {
      local.converged = true;
      break;
    }
    if (evals > params.max_kernel_evals) break;
    evals += 2 * static_cast<std::uint64_t>(n);

    // Two-variable update along y_i a_i + y_j a_j = const.
    const double old_ai = a[i], old_aj = a[j];
    if (y[i] != y[j]) {
      double curv = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (curv <= 0.0) curv = kTau;
      const double delta = (-g[i] - g[j]) / curv;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = diff; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = -diff; }
      }
      if (diff > 0.0) {
        if (a[i] > c) { a[i] = c; a[j] = c - diff; }
      } else {
        if (a[j] > c) { a[j] = c; a[i] = c + diff; }
      }
    } else {
      double curv = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (curv <= 0.0) curv = kTau;
      const double delta = (g[i] - g[j]) / curv;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) { a[i] = c; a[j] = sum - c; }
      } else {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = sum; }
      }
      if (sum > c) {
        if (a[j] > c) { a[j] = c; a[i] = sum - c; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = sum; }
      }
    }
    const double dai = a[i] - old_ai, daj = a[j] - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) g[t] += q(t, i) * dai + q(t, j) * daj;
    ++local.iterations;

    const double f = f_value();
    if (f > prev_f + 1e-12 * std::max(1.0, std::abs(prev_f))) local.objective_monotone = false;
    prev_f = f;
  }

  // rho: mean of y_t g_t over free vectors, else the midpoint of the feasible range.
  double sum_free = 0.0, ub = std::numeric_limits<double>::infinity(),
         lb = -std::numeric_limits<double>::infinity();
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (a[t] > 0.0 && a[t] < c) {
      sum_free += yg;
      ++n_free;
    } else if ((a[t] >= c && y[t] == -1) || (a[t] <= 0.0 && y[t] == 1)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  SmoSolution sol;
  sol.rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  if (info) {
    local.objective = -f_value();
    local.alpha = a;
    *info = std::move(local);
  }
  sol.alpha = std::move(a);
  return sol;
}

SvmModel make_model(const Eigen::MatrixXd& x, std::span<const int> y, const SmoSolution& sol,
                    const SvmParams& params) {
  SvmModel m;
  m.gamma = params.gamma;
  m.c = params.c;
  m.bias = -sol.rho;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    if (sol.alpha[static_cast<std::size_t>(t)] > 0.0) sv.push_back(t);
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
    m.dual_coef.push_back(sol.alpha[static_cast<std::size_t>(sv[s])] * y[static_cast<std::size_t>(sv[s])]);
  }
  return m;
}

SvmModel svm_train(const Eigen::MatrixXd& x, std::span<const int> y, const SvmParams& params,
                   TrainInfo* info) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error(ErrorKind::kDimensionMismatch, "label count differs from row count");
  if (!(params.gamma > 0.0)) throw Error(ErrorKind::kInvalidArgument, "gamma must be positive");
  const auto sol = smo_solve(rbf_kernel(x, x, params.gamma), y, params, info);
  return make_model(x, y, sol, params);
}

double svm_score(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw Error(ErrorKind::kDimensionMismatch, "feature dimension differs from model");
  double s = model.bias;
  for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < model.support_vectors.cols(); ++j) {
      const double e = model.support_vectors(i, j) - x[static_cast<std::size_t>(j)];
      d += e * e;
    }
    s += model.dual_coef[static_cast<std::size_t>(i)] * std::exp(-model.gamma * d);
  }
  return s;
}

std::vector<double> svm_score(const SvmModel& model, const Eigen::MatrixXd& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(r, j);
    out[static_cast<std::size_t>(r)] = svm_score(model, row);
  }
  return out;
}

double kkt_residual(const SvmModel& model, std::span<const double> alpha, const Eigen::MatrixXd& x,
                    std::span<const int> y) {
  const auto scores = svm_score(model, x);
  double worst = 0.0;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    const double yf = y[t] * scores[t];
    double v;
    if (alpha[t] <= 0.0) v = std::max(0.0, 1.0 - yf);
    else if (alpha[t] >= model.c) v = std::max(0.0, yf - 1.0);
    else v = std::abs(yf - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace glottal::svm
