#pragma once

#include <cmath>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class Scalar = double>
struct LpResult {
  LpStatus status = LpStatus::Optimal;
  VectorX<Scalar> x;
  Scalar objective = Scalar(0);
};

namespace detail {

// One Bland-rule pass over a tableau in canonical form. The objective row is
// the last row; the rightmost column is the RHS. Returns false on unbounded.
template <class Scalar>
bool run_simplex(MatrixX<Scalar>& t, std::vector<Index>& basis,
                 Index num_enterable, Scalar tol) {
  const Index m = t.rows() - 1;
  const Index rhs = t.cols() - 1;
  const Index max_pivots = 20000 + 200 * (m + t.cols());
  for (Index pivots = 0;; ++pivots) {
    if (pivots > max_pivots)
      throw Error(ErrorKind::Numeric, "simplex: pivot limit exceeded");
    Index enter = -1;
    for (Index j = 0; j < num_enterable; ++j) {
      if (t(m, j) < -tol) {
        enter = j;
        break;  // Bland: lowest eligible index
      }
    }
    if (enter < 0) return true;
    Index leave = -1;
    Scalar best_ratio = Scalar(0);
    for (Index i = 0; i < m; ++i) {
      if (t(i, enter) > tol) {
        const Scalar ratio = t(i, rhs) / t(i, enter);
        if (leave < 0 || ratio < best_ratio - tol ||
            (std::abs(static_cast<double>(ratio - best_ratio)) <=
                 static_cast<double>(tol) &&
             basis[static_cast<std::size_t>(i)] <
                 basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) return false;  // unbounded along the entering column
    const Scalar piv = t(leave, enter);
    t.row(leave) /= piv;
    for (Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const Scalar f = t(i, enter);
      if (f != Scalar(0)) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
}

}  // namespace detail

// Two-phase primal simplex on the dense tableau, Bland's rule throughout.
// Solves min c'x s.t. a_eq x = b_eq, a_ub x <= b_ub, x >= 0. Meant as a
// reference oracle on small problems, not a production solver.
template <class Scalar = double>
LpResult<Scalar> reference_lp(const VectorX<Scalar>& c,
                              const MatrixX<Scalar>& a_eq,
                              const VectorX<Scalar>& b_eq,
                              const MatrixX<Scalar>& a_ub,
                              const VectorX<Scalar>& b_ub) {
  const Scalar tol = Scalar(1e-9);
  const Index n = c.size();
  const Index m_eq = a_eq.rows();
  const Index m_ub = a_ub.rows();
  const Index m = m_eq + m_ub;
  if ((m_eq > 0 && a_eq.cols() != n) || (m_ub > 0 && a_ub.cols() != n) ||
      b_eq.size() != m_eq || b_ub.size() != m_ub)
    throw Error(ErrorKind::ShapeMismatch, "reference_lp: inconsistent shapes");

  const Index n_slack = m_ub;
  const Index n_art = m;
  const Index cols = n + n_slack + n_art + 1;
  const Index rhs = cols - 1;
  MatrixX<Scalar> t = MatrixX<Scalar>::Zero(m + 1, cols);
  for (Index i = 0; i < m_eq; ++i) {
    t.block(i, 0, 1, n) = a_eq.row(i);
    t(i, rhs) = b_eq(i);
  }
  for (Index i = 0; i < m_ub; ++i) {
    t.block(m_eq + i, 0, 1, n) = a_ub.row(i);
    t(m_eq + i, n + i) = Scalar(1);
    t(m_eq + i, rhs) = b_ub(i);
  }
  for (Index i = 0; i < m; ++i)
    if (t(i, rhs) < Scalar(0)) t.row(i) = -t.row(i);

  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    t(i, n + n_slack + i) = Scalar(1);
    basis[static_cast<std::size_t>(i)] = n + n_slack + i;
  }

  // Phase 1: minimize the sum of artificials.
  for (Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  t.block(m, n + n_slack, 1, n_art).setZero();
  if (!detail::run_simplex(t, basis, n + n_slack, tol))
    throw Error(ErrorKind::Numeric, "simplex: phase 1 unbounded");
  if (-t(m, rhs) > Scalar(1e-7)) return {LpStatus::Infeasible, {}, Scalar(0)};

  // Drive leftover artificials out of the basis; rows where that is
  // impossible are redundant and can be cleared.
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] >= n + n_slack) {
      Index enter = -1;
      for (Index j = 0; j < n + n_slack; ++j)
        if (std::abs(static_cast<double>(t(i, j))) > static_cast<double>(tol)) {
          enter = j;
          break;
        }
      if (enter < 0) {
        t.row(i).setZero();
        continue;
      }
      const Scalar piv = t(i, enter);
      t.row(i) /= piv;
      for (Index k = 0; k <= m; ++k) {
        if (k == i) continue;
        const Scalar f = t(k, enter);
        if (f != Scalar(0)) t.row(k) -= f * t.row(i);
      }
      basis[static_cast<std::size_t>(i)] = enter;
    }
  }

  // Phase 2: rebuild the objective row for the real costs.
  t.row(m).setZero();
  t.block(m, 0, 1, n) = c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bj = basis[static_cast<std::size_t>(i)];
    if (bj < n && c(bj) != Scalar(0)) t.row(m) -= c(bj) * t.row(i);
  }
  if (!detail::run_simplex(t, basis, n + n_slack, tol))
    return {LpStatus::Unbounded, {}, Scalar(0)};

  LpResult<Scalar> result;
  result.status = LpStatus::Optimal;
  result.x = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index bj = basis[static_cast<std::size_t>(i)];
    if (bj < n) result.x(bj) = t(i, rhs);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace hcnas
