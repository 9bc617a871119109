#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/lmo.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

// Per-row argmax discretization, ties to the lowest index. No feasibility
// guarantee; this is the baseline whose budget violations the credit
// projection is measured against.
template <class Scalar>
DiscreteArch project_argmax(const ArchParams<Scalar>& p, const SpaceSpec& spec) {
  const ValidationResult v = validate(p, spec);
  if (!v.ok()) throw Error(ErrorKind::Invariant, "project_argmax: " + v.message);
  DiscreteArch arch;
  arch.depth.resize(static_cast<std::size_t>(spec.num_stages));
  arch.config.resize(static_cast<std::size_t>(spec.num_stages));
  for (Index s = 0; s < spec.num_stages; ++s) {
    Index best = spec.min_depth - 1;
    for (Index b = spec.min_depth - 1; b < spec.max_depth; ++b)
      if (p.beta(s, b) > p.beta(s, best)) best = b;
    const int depth = static_cast<int>(best) + 1;
    arch.depth[static_cast<std::size_t>(s)] = depth;
    for (int b = 0; b < depth; ++b) {
      Index c = 0;
      p.alpha.row(spec.alpha_row(s, b)).maxCoeff(&c);
      arch.config[static_cast<std::size_t>(s)].push_back(static_cast<int>(c));
    }
  }
  return arch;
}

// Credit of a discrete architecture against continuous parameters: the mass
// the parameters place on the architecture's depth and active-block choices.
template <class Scalar>
Scalar credit_of(const DiscreteArch& arch, const ArchParams<Scalar>& p,
                 const SpaceSpec& spec) {
  check_arch(arch, spec);
  Scalar credit = Scalar(0);
  for (Index s = 0; s < spec.num_stages; ++s) {
    const int depth = arch.depth[static_cast<std::size_t>(s)];
    credit += p.beta(s, depth - 1);
    for (int b = 0; b < depth; ++b)
      credit += p.alpha(
          spec.alpha_row(s, b),
          arch.config[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]);
  }
  return credit;
}

struct LpSparsity {
  int non_one_hot_rows = 0;
  int max_nonzeros = 0;  // among the non-one-hot rows
};

// Row-wise sparsity of an LP solution: how many rows are not one-hot, and the
// largest number of nonzeros among them. The projection LPs admit at most one
// non-one-hot row with at most two nonzeros per variable group.
template <class Scalar>
LpSparsity sparsity_report(const MatrixX<Scalar>& rows,
                           Scalar tol = Scalar(1e-12)) {
  LpSparsity report;
  for (Index r = 0; r < rows.rows(); ++r) {
    int nonzeros = 0;
    for (Index c = 0; c < rows.cols(); ++c)
      if (rows(r, c) > tol) ++nonzeros;
    if (nonzeros > 1) {
      ++report.non_one_hot_rows;
      report.max_nonzeros = std::max(report.max_nonzeros, nonzeros);
    }
  }
  return report;
}

template <class Scalar = double>
struct ProjectionResult {
  DiscreteArch arch;
  MatrixX<Scalar> beta_lp;   // S x d, raw LP weights before resolution
  MatrixX<Scalar> alpha_lp;  // (S*d) x |C|
  Scalar latency = Scalar(0);
  Scalar credit = Scalar(0);
};

// Credit-maximizing projection onto the discrete space. Discretizes beta
// first (LP over depth choices with the continuous alpha folded into the
// costs), then alpha against the now-discrete depths, resolving the at most
// one fractional row of each LP by enumerating its two surviving options.
// The output never exceeds the budget.
template <class Scalar>
ProjectionResult<Scalar> project_credit(const ArchParams<Scalar>& p,
                                        const SpaceSpec& spec,
                                        const LatencyTable<Scalar>& table,
                                        Scalar budget) {
  const ValidationResult v = validate(p, spec);
  if (!v.ok()) throw Error(ErrorKind::Invariant, "project_credit: " + v.message);
  const ThetaMatrix<Scalar> theta(table, spec);
  {
    const Scalar lat = expected_latency(p, table, spec);
    if (lat > budget + Scalar(kFeasTol))
      throw InfeasibleError("project_credit: input point violates the budget",
                            static_cast<double>(lat));
  }

  ProjectionResult<Scalar> result;

  // Minimal extra cost of activating blocks up to a given depth.
  MatrixX<Scalar> min_block_cost(spec.num_stages, spec.max_depth);
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = 0; b < spec.max_depth; ++b)
      min_block_cost(s, b) = table.t.row(spec.alpha_row(s, b)).minCoeff();
  const auto min_cost_for_depths = [&](const std::vector<int>& depth) {
    Scalar total = Scalar(0);
    for (Index s = 0; s < spec.num_stages; ++s)
      for (int b = 0; b < depth[static_cast<std::size_t>(s)]; ++b)
        total += min_block_cost(s, b);
    return total;
  };

  // Stage 1: depth LP, costs Theta' alpha*.
  std::vector<int> depth(static_cast<std::size_t>(spec.num_stages));
  {
    const MatrixX<Scalar> costs = theta.beta_costs(p.alpha);
    McKpInstance<Scalar> inst;
    inst.budget = budget;
    inst.groups.resize(static_cast<std::size_t>(spec.num_stages));
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = spec.min_depth - 1; b < spec.max_depth; ++b)
        inst.groups[static_cast<std::size_t>(s)].push_back(
            {p.beta(s, b), costs(s, b)});
    const McKpSolution<Scalar> sol = solve_relaxed_mckp(inst, OptSense::Max);

    result.beta_lp = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index j = 0; j < spec.depth_choices(); ++j)
        result.beta_lp(s, spec.min_depth - 1 + j) =
            sol.weights[static_cast<std::size_t>(s)](j);

    for (Index s = 0; s < spec.num_stages; ++s) {
      if (s == sol.fractional_group) continue;
      Index j = 0;
      sol.weights[static_cast<std::size_t>(s)].maxCoeff(&j);
      depth[static_cast<std::size_t>(s)] =
          static_cast<int>(spec.min_depth + j);
    }
    if (sol.fractional_group >= 0) {
      const Index s = sol.fractional_group;
      const auto& w = sol.weights[static_cast<std::size_t>(s)];
      std::vector<int> options;
      for (Index j = 0; j < w.size(); ++j)
        if (w(j) > Scalar(0))
          options.push_back(static_cast<int>(spec.min_depth + j));
      // Lower depth first; it is always feasible since rounding the LP down
      // can only reduce the cost.
      int chosen = options.front();
      Scalar chosen_credit = p.beta(s, chosen - 1);
      for (std::size_t k = 1; k < options.size(); ++k) {
        depth[static_cast<std::size_t>(s)] = options[k];
        const bool feasible =
            min_cost_for_depths(depth) <= budget + Scalar(kFeasTol);
        const Scalar credit = p.beta(s, options[k] - 1);
        if (feasible && credit > chosen_credit) {
          chosen = options[k];
          chosen_credit = credit;
        }
      }
      depth[static_cast<std::size_t>(s)] = chosen;
    }
  }

  // Stage 2: config LP against the discrete depths. Inactive blocks carry
  // zero cost, so their groups collapse to the per-row argmax.
  {
    McKpInstance<Scalar> inst;
    inst.budget = budget;
    inst.groups.resize(static_cast<std::size_t>(spec.num_alpha_rows()));
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = 0; b < spec.max_depth; ++b) {
        const bool active = b < depth[static_cast<std::size_t>(s)];
        auto& group = inst.groups[static_cast<std::size_t>(spec.alpha_row(s, b))];
        for (Index c = 0; c < spec.num_configs(); ++c)
          group.push_back({p.alpha(spec.alpha_row(s, b), c),
                           active ? table.t(spec.alpha_row(s, b), c)
                                  : Scalar(0)});
      }
    const McKpSolution<Scalar> sol = solve_relaxed_mckp(inst, OptSense::Max);

    result.alpha_lp.resize(spec.num_alpha_rows(), spec.num_configs());
    for (Index r = 0; r < spec.num_alpha_rows(); ++r)
      result.alpha_lp.row(r) =
          sol.weights[static_cast<std::size_t>(r)].transpose();

    std::vector<int> config_full(static_cast<std::size_t>(spec.num_alpha_rows()));
    Scalar base_cost = Scalar(0);
    for (Index r = 0; r < spec.num_alpha_rows(); ++r) {
      if (r == sol.fractional_group) continue;
      Index c = 0;
      sol.weights[static_cast<std::size_t>(r)].maxCoeff(&c);
      config_full[static_cast<std::size_t>(r)] = static_cast<int>(c);
      base_cost += inst.groups[static_cast<std::size_t>(r)]
                       [static_cast<std::size_t>(c)].cost;
    }
    if (sol.fractional_group >= 0) {
      const Index r = sol.fractional_group;
      const auto& w = sol.weights[static_cast<std::size_t>(r)];
      int best_feasible = -1, cheapest = -1;
      Scalar best_credit = Scalar(0);
      Scalar cheapest_cost = std::numeric_limits<Scalar>::infinity();
      for (Index c = 0; c < w.size(); ++c) {
        if (!(w(c) > Scalar(0))) continue;
        const Scalar cost =
            inst.groups[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                .cost;
        const Scalar credit = p.alpha(r, c);
        if (cost < cheapest_cost) {
          cheapest = static_cast<int>(c);
          cheapest_cost = cost;
        }
        if (base_cost + cost <= budget + Scalar(kFeasTol) &&
            (best_feasible < 0 || credit > best_credit)) {
          best_feasible = static_cast<int>(c);
          best_credit = credit;
        }
      }
      // The cheaper option is feasible by LP feasibility; the cheapest
      // fallback is a guard only.
      config_full[static_cast<std::size_t>(r)] =
          best_feasible >= 0 ? best_feasible : cheapest;
    }

    result.arch.depth = depth;
    result.arch.config.resize(static_cast<std::size_t>(spec.num_stages));
    for (Index s = 0; s < spec.num_stages; ++s)
      for (int b = 0; b < depth[static_cast<std::size_t>(s)]; ++b)
        result.arch.config[static_cast<std::size_t>(s)].push_back(
            config_full[static_cast<std::size_t>(spec.alpha_row(s, b))]);
  }

  result.latency = discrete_latency(result.arch, table, spec);
  result.credit = credit_of(result.arch, p, spec);
  if (result.latency > budget + Scalar(kFeasTol))
    throw Error(ErrorKind::Numeric,
                "project_credit: produced an infeasible architecture");
  return result;
}

// Greedy-MCKP variant of the final discretization: the LP sweep rounded down
// in both stages. Always integral and feasible.
template <class Scalar>
DiscreteArch project_credit_greedy(const ArchParams<Scalar>& p,
                                   const SpaceSpec& spec,
                                   const LatencyTable<Scalar>& table,
                                   Scalar budget) {
  const ValidationResult v = validate(p, spec);
  if (!v.ok())
    throw Error(ErrorKind::Invariant, "project_credit_greedy: " + v.message);
  const ThetaMatrix<Scalar> theta(table, spec);

  McKpInstance<Scalar> beta_inst;
  beta_inst.budget = budget;
  beta_inst.groups.resize(static_cast<std::size_t>(spec.num_stages));
  const MatrixX<Scalar> beta_costs = theta.beta_costs(p.alpha);
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = spec.min_depth - 1; b < spec.max_depth; ++b)
      beta_inst.groups[static_cast<std::size_t>(s)].push_back(
          {p.beta(s, b), beta_costs(s, b)});
  const std::vector<Index> depth_pick = solve_mckp_greedy(beta_inst);

  std::vector<int> depth(static_cast<std::size_t>(spec.num_stages));
  for (Index s = 0; s < spec.num_stages; ++s)
    depth[static_cast<std::size_t>(s)] =
        static_cast<int>(spec.min_depth + depth_pick[static_cast<std::size_t>(s)]);

  McKpInstance<Scalar> alpha_inst;
  alpha_inst.budget = budget;
  alpha_inst.groups.resize(static_cast<std::size_t>(spec.num_alpha_rows()));
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = 0; b < spec.max_depth; ++b) {
      const bool active = b < depth[static_cast<std::size_t>(s)];
      auto& group =
          alpha_inst.groups[static_cast<std::size_t>(spec.alpha_row(s, b))];
      for (Index c = 0; c < spec.num_configs(); ++c)
        group.push_back({p.alpha(spec.alpha_row(s, b), c),
                         active ? table.t(spec.alpha_row(s, b), c) : Scalar(0)});
    }
  const std::vector<Index> config_pick = solve_mckp_greedy(alpha_inst);

  DiscreteArch arch;
  arch.depth = depth;
  arch.config.resize(static_cast<std::size_t>(spec.num_stages));
  for (Index s = 0; s < spec.num_stages; ++s)
    for (int b = 0; b < depth[static_cast<std::size_t>(s)]; ++b)
      arch.config[static_cast<std::size_t>(s)].push_back(static_cast<int>(
          config_pick[static_cast<std::size_t>(spec.alpha_row(s, b))]));
  return arch;
}

}  // namespace hcnas
