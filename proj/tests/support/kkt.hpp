#pragma once

// Test-side KKT oracle for the balanced-init inner QPs:
//   min sum_r ||D x_r||^2  s.t. rows on the simplex, sum_r q_r . x_r <= T.
// Multipliers are recovered from the active constraints by least squares,
// independently of how the point was produced, and the scaled residual over
// stationarity, primal/dual feasibility and complementarity is returned.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace hcnas_test {

inline double chain_qp_kkt_residual(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& q, double budget) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index m = x.cols();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    p(i, i) += 2.0;
    p(i + 1, i + 1) += 2.0;
    p(i, i + 1) -= 2.0;
    p(i + 1, i) -= 2.0;
  }

  const double support_tol = 1e-10;
  double residual = 0.0;

  double cost = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    residual = std::max(residual, std::abs(x.row(r).sum() - 1.0));
    residual = std::max(residual, -x.row(r).minCoeff());
    cost += q.row(r).dot(x.row(r));
  }
  if (std::isfinite(budget))
    residual = std::max(residual, (cost - budget) / (1.0 + std::abs(budget)));

  const Eigen::MatrixXd grad = x * p;  // row r holds (P x_r)'

  // mu = 0 unless the budget is active. When it is, fit mu >= 0 by least
  // squares over the support stationarity equations (per-row lambdas
  // eliminated). Rows that are one-hot, or whose support costs are constant,
  // say nothing about mu through stationarity; if no row is informative the
  // smallest mu that satisfies the off-support dual inequalities is used
  // instead (any surviving violation still lands in the residual).
  double mu = 0.0;
  const bool active =
      std::isfinite(budget) && budget - cost <= 1e-6 * (1.0 + std::abs(budget));
  if (active) {
    double sum_ab = 0.0, sum_bb = 0.0, q_scale = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      double mean_g = 0.0, mean_q = 0.0;
      int support = 0;
      for (Eigen::Index i = 0; i < m; ++i)
        if (x(r, i) > support_tol) {
          mean_g += grad(r, i);
          mean_q += q(r, i);
          ++support;
        }
      if (support == 0) continue;
      mean_g /= support;
      mean_q /= support;
      for (Eigen::Index i = 0; i < m; ++i)
        if (x(r, i) > support_tol) {
          sum_ab += (grad(r, i) - mean_g) * (q(r, i) - mean_q);
          sum_bb += (q(r, i) - mean_q) * (q(r, i) - mean_q);
          q_scale += q(r, i) * q(r, i);
        }
    }
    if (sum_bb > 1e-12 * (1.0 + q_scale)) {
      mu = std::max(0.0, -sum_ab / sum_bb);
    } else {
      // stationarity is mu-invariant here; pick mu from the dual system
      double lower = 0.0;
      double upper = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows; ++r) {
        double mean_g = 0.0, mean_q = 0.0;
        int support = 0;
        for (Eigen::Index i = 0; i < m; ++i)
          if (x(r, i) > support_tol) {
            mean_g += grad(r, i);
            mean_q += q(r, i);
            ++support;
          }
        if (support == 0) continue;
        mean_g /= support;
        mean_q /= support;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (x(r, i) > support_tol) continue;
          const double coef = q(r, i) - mean_q;  // s = -rhs + mu * coef
          const double rhs = mean_g - grad(r, i);
          if (coef > 1e-12)
            lower = std::max(lower, rhs / coef);
          else if (coef < -1e-12)
            upper = std::min(upper, rhs / coef);
        }
      }
      mu = std::max(0.0, std::isfinite(upper) ? std::min(lower, upper) : lower);
    }
  }

  double scale = 1.0;
  for (Eigen::Index r = 0; r < rows; ++r)
    scale = std::max(scale, grad.row(r).cwiseAbs().maxCoeff() +
                                mu * q.row(r).cwiseAbs().maxCoeff());

  for (Eigen::Index r = 0; r < rows; ++r) {
    // lambda_r from the support, then check stationarity and dual signs
    double lambda = 0.0;
    int support = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (x(r, i) > support_tol) {
        lambda -= grad(r, i) + mu * q(r, i);
        ++support;
      }
    lambda /= std::max(support, 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = grad(r, i) + mu * q(r, i) + lambda;
      if (x(r, i) > support_tol)
        residual = std::max(residual, std::abs(s) / scale);
      else
        residual = std::max(residual, -s / scale);
    }
  }

  if (std::isfinite(budget) && mu > 0.0) {
    const double comp =
        mu * std::max(0.0, budget - cost) / (1.0 + mu * (1.0 + std::abs(budget)));
    residual = std::max(residual, comp);
  }
  return residual;
}

}  // namespace hcnas_test
