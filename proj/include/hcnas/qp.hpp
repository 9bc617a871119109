#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

template <class Scalar = double>
struct SimplexQpResult {
  VectorX<Scalar> x;
  Scalar lambda = Scalar(0);  // multiplier of the sum-to-one constraint
};

// min 1/2 x'Px + c'x  s.t. sum x = 1, x >= 0, by a primal active-set method.
// P must be positive definite on the simplex tangent space (true for the
// chain-difference objective used by the balanced initialization). Ties when
// releasing or clamping are broken by lowest index, so the solve is
// deterministic.
template <class Scalar>
SimplexQpResult<Scalar> simplex_qp(const MatrixX<Scalar>& p,
                                   const VectorX<Scalar>& c) {
  const Index n = p.rows();
  if (p.cols() != n || c.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "simplex_qp: inconsistent shapes");
  const Scalar tol = Scalar(1e-12);

  std::vector<bool> free_set(static_cast<std::size_t>(n), true);
  VectorX<Scalar> x = VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));

  // Null-space solve of the equality-constrained subproblem: parametrize the
  // free coordinates as uniform + Z v with Z the zero-sum difference basis,
  // so the sum constraint holds by construction. The raw saddle (KKT) system
  // loses the O(1) component of y when the linear term is many orders of
  // magnitude larger, which happens during bisection on the budget
  // multiplier.
  const auto solve_eqp = [&](VectorX<Scalar>& y, Scalar& lambda) {
    std::vector<Index> free_idx;
    for (Index i = 0; i < n; ++i)
      if (free_set[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    const Index k = static_cast<Index>(free_idx.size());
    VectorX<Scalar> y_free = VectorX<Scalar>::Constant(k, Scalar(1) / Scalar(k));
    if (k > 1) {
      MatrixX<Scalar> z = MatrixX<Scalar>::Zero(k, k - 1);
      for (Index j = 0; j + 1 < k; ++j) {
        z(j, j) = Scalar(1);
        z(j + 1, j) = Scalar(-1);
      }
      MatrixX<Scalar> p_ff(k, k);
      VectorX<Scalar> c_f(k);
      for (Index a = 0; a < k; ++a) {
        c_f(a) = c(free_idx[a]);
        for (Index b = 0; b < k; ++b) p_ff(a, b) = p(free_idx[a], free_idx[b]);
      }
      const MatrixX<Scalar> reduced = z.transpose() * p_ff * z;
      const VectorX<Scalar> rhs = -z.transpose() * (p_ff * y_free + c_f);
      y_free += z * reduced.ldlt().solve(rhs).eval();
    }
    y.setZero(n);
    Scalar lambda_sum = Scalar(0);
    for (Index a = 0; a < k; ++a) y(free_idx[a]) = y_free(a);
    for (Index a = 0; a < k; ++a)
      lambda_sum -= p.row(free_idx[a]).dot(y) + c(free_idx[a]);
    lambda = lambda_sum / Scalar(k);
  };

  Scalar lambda = Scalar(0);
  const int max_iter = static_cast<int>(8 * n * n + 32);
  for (int iter = 0; iter < max_iter; ++iter) {
    VectorX<Scalar> y(n);
    solve_eqp(y, lambda);
    // Step from x toward y, clamping the first free coordinate that hits 0.
    Scalar step = Scalar(1);
    Index blocking = -1;
    for (Index i = 0; i < n; ++i) {
      if (!free_set[static_cast<std::size_t>(i)]) continue;
      const Scalar d = y(i) - x(i);
      if (d < -tol) {
        const Scalar a = x(i) / -d;
        if (a < step - tol) {
          step = a;
          blocking = i;
        }
      }
    }
    if (blocking >= 0) {
      x += step * (y - x);
      x(blocking) = Scalar(0);
      free_set[static_cast<std::size_t>(blocking)] = false;
      continue;
    }
    x = y.cwiseMax(Scalar(0));
    // Optimal on the current face; check duals of the clamped coordinates.
    const VectorX<Scalar> grad = p * x + c;
    Index release = -1;
    Scalar worst = -Scalar(1e-10);
    for (Index i = 0; i < n; ++i) {
      if (free_set[static_cast<std::size_t>(i)]) continue;
      const Scalar s = grad(i) + lambda;
      if (s < worst) {
        worst = s;
        release = i;
        break;  // lowest index among violators
      }
    }
    if (release < 0) {
      SimplexQpResult<Scalar> result;
      result.x = x;
      result.lambda = lambda;
      return result;
    }
    free_set[static_cast<std::size_t>(release)] = true;
  }
  throw Error(ErrorKind::Numeric, "simplex_qp: iteration limit exceeded");
}

template <class Scalar = double>
struct BudgetedQpResult {
  MatrixX<Scalar> x;       // one solved simplex row per input row
  Scalar mu = Scalar(0);   // budget multiplier
  Scalar cost = Scalar(0);
};

// Rows of a block solved jointly under one budget:
//   min sum_r ||D x_r||^2  s.t. rows on the simplex, sum_r q_r' x_r <= T,
// where D is the consecutive-difference operator. The coupling enters only
// through the budget multiplier mu, so each evaluation decouples into
// per-row simplex QPs with linear term mu * q_r; mu is found by bisection on
// the total cost, which is continuous and nonincreasing in mu. The returned
// point is always on the feasible side of the budget.
template <class Scalar>
BudgetedQpResult<Scalar> chain_qp_under_budget(const MatrixX<Scalar>& q,
                                               Scalar budget) {
  const Index rows = q.rows();
  const Index m = q.cols();
  MatrixX<Scalar> p_chain = MatrixX<Scalar>::Zero(m, m);
  for (Index i = 0; i + 1 < m; ++i) {
    p_chain(i, i) += Scalar(2);
    p_chain(i + 1, i + 1) += Scalar(2);
    p_chain(i, i + 1) -= Scalar(2);
    p_chain(i + 1, i) -= Scalar(2);
  }

  const auto solve_at = [&](Scalar mu, MatrixX<Scalar>& x) -> Scalar {
    x.resize(rows, m);
    Scalar cost = Scalar(0);
    for (Index r = 0; r < rows; ++r) {
      const VectorX<Scalar> lin = mu * q.row(r).transpose();
      const SimplexQpResult<Scalar> sol = simplex_qp(p_chain, lin);
      x.row(r) = sol.x.transpose();
      cost += q.row(r).dot(sol.x);
    }
    return cost;
  };

  BudgetedQpResult<Scalar> result;
  Scalar cost0 = solve_at(Scalar(0), result.x);
  if (cost0 <= budget + Scalar(kFeasTol)) {
    result.mu = Scalar(0);
    result.cost = cost0;
    return result;
  }

  Scalar lo = Scalar(0);
  Scalar hi = Scalar(1);
  MatrixX<Scalar> x_hi;
  Scalar cost_hi = solve_at(hi, x_hi);
  int expansions = 0;
  while (cost_hi > budget && expansions++ < 80) {
    lo = hi;
    hi *= Scalar(8);
    cost_hi = solve_at(hi, x_hi);
  }
  if (cost_hi > budget) {
    // Budget within rounding of the minimal achievable cost: blend toward the
    // per-row cheapest vertices to land exactly feasible.
    MatrixX<Scalar> lightest = MatrixX<Scalar>::Zero(rows, m);
    Scalar cost_light = Scalar(0);
    for (Index r = 0; r < rows; ++r) {
      Index arg = 0;
      q.row(r).minCoeff(&arg);
      lightest(r, arg) = Scalar(1);
      cost_light += q(r, arg);
    }
    if (cost_light > budget + Scalar(kFeasTol))
      throw InfeasibleError("chain_qp_under_budget: budget below minimal cost",
                            static_cast<double>(cost_light));
    const Scalar span = cost_hi - cost_light;
    const Scalar theta =
        span > Scalar(0)
            ? std::min(Scalar(1), std::max(Scalar(0), (budget - cost_light) / span))
            : Scalar(0);
    result.x = (Scalar(1) - theta) * lightest + theta * x_hi;
    result.mu = hi;
    result.cost = (Scalar(1) - theta) * cost_light + theta * cost_hi;
    return result;
  }

  // Bisect until the feasible side is tight against the budget.
  const Scalar rel = Scalar(1e-9) * (Scalar(1) + std::abs(budget));
  for (int it = 0; it < 200 && budget - cost_hi > rel; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    MatrixX<Scalar> x_mid;
    const Scalar cost_mid = solve_at(mid, x_mid);
    if (cost_mid > budget) {
      lo = mid;
    } else {
      hi = mid;
      cost_hi = cost_mid;
      x_hi.swap(x_mid);
    }
    if (hi - lo <= Scalar(1e-15) * hi) break;
  }
  result.x = x_hi;
  result.mu = hi;
  result.cost = cost_hi;
  return result;
}

}  // namespace hcnas
