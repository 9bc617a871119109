#pragma once

#include <cmath>
#include <limits>

#include "hcnas/error.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/qp.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

// The lightest architecture: cheapest config per block, minimal depth per
// stage. Ties go to the lowest config index. If even this point exceeds the
// budget, the problem is infeasible; callers check its latency against T.
template <class Scalar>
ArchParams<Scalar> lightest_init(const SpaceSpec& spec,
                                 const LatencyTable<Scalar>& table) {
  check_table(table, spec);
  ArchParams<Scalar> p;
  p.alpha = MatrixX<Scalar>::Zero(spec.num_alpha_rows(), spec.num_configs());
  p.beta = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
  for (Index r = 0; r < spec.num_alpha_rows(); ++r) {
    Index arg = 0;
    table.t.row(r).minCoeff(&arg);
    p.alpha(r, arg) = Scalar(1);
  }
  for (Index s = 0; s < spec.num_stages; ++s)
    p.beta(s, spec.min_depth - 1) = Scalar(1);
  return p;
}

namespace detail {

// Sum of squared consecutive differences over the free entries of each row.
template <class Scalar>
Scalar chain_objective(const MatrixX<Scalar>& rows) {
  Scalar total = Scalar(0);
  for (Index r = 0; r < rows.rows(); ++r)
    for (Index i = 0; i + 1 < rows.cols(); ++i) {
      const Scalar d = rows(r, i + 1) - rows(r, i);
      total += d * d;
    }
  return total;
}

}  // namespace detail

// Balance objective of an initialization point: the sum of both blocks'
// squared-consecutive-difference objectives (beta over allowed depths only).
template <class Scalar>
Scalar balance_objective(const ArchParams<Scalar>& p, const SpaceSpec& spec) {
  const MatrixX<Scalar> beta_free =
      p.beta.block(0, spec.min_depth - 1, spec.num_stages, spec.depth_choices());
  return detail::chain_objective(p.alpha) + detail::chain_objective(beta_free);
}

// Feasible starting point that is as close to uniform as the budget allows.
// Alternates exact QP solves over the beta block (depth probabilities) and
// the alpha block (config probabilities), starting with beta, until the
// combined objective stops improving.
template <class Scalar>
ArchParams<Scalar> balanced_init(const SpaceSpec& spec,
                                 const LatencyTable<Scalar>& table,
                                 Scalar budget, Scalar tol = Scalar(1e-10),
                                 int max_rounds = 50) {
  check_table(table, spec);
  const ThetaMatrix<Scalar> theta(table, spec);

  const ArchParams<Scalar> lightest = lightest_init(spec, table);
  const Scalar min_latency = expected_latency(lightest, table, spec);
  if (min_latency > budget + Scalar(kFeasTol))
    throw InfeasibleError(
        "balanced_init: budget below the lightest achievable latency",
        static_cast<double>(min_latency));

  ArchParams<Scalar> uniform = uniform_params<Scalar>(spec);
  if (expected_latency(uniform, table, spec) <= budget + Scalar(kFeasTol))
    return uniform;  // unconstrained optimum of both QPs

  ArchParams<Scalar> p = lightest;
  Scalar prev = balance_objective(p, spec);
  for (int round = 0; round < max_rounds; ++round) {
    // beta step: rows over allowed depths, costs Theta' alpha.
    {
      const MatrixX<Scalar> full_costs = theta.beta_costs(p.alpha);
      const MatrixX<Scalar> q = full_costs.block(
          0, spec.min_depth - 1, spec.num_stages, spec.depth_choices());
      const BudgetedQpResult<Scalar> sol = chain_qp_under_budget(q, budget);
      p.beta.setZero();
      p.beta.block(0, spec.min_depth - 1, spec.num_stages,
                   spec.depth_choices()) = sol.x;
    }
    // alpha step: all (stage, block) rows, costs Theta beta.
    {
      const MatrixX<Scalar> q = theta.alpha_costs(p.beta);
      const BudgetedQpResult<Scalar> sol = chain_qp_under_budget(q, budget);
      p.alpha = sol.x;
    }
    const Scalar obj = balance_objective(p, spec);
    if (prev - obj < tol) break;
    prev = obj;
  }
  return p;
}

}  // namespace hcnas
