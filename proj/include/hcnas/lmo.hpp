#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

// Relaxed Multiple-Choice Knapsack instance: pick a convex combination per
// group under one budget row. Groups map to simplex rows of the search space;
// the budget is the latency target.
template <class Scalar = double>
struct McKpInstance {
  struct Item {
    Scalar value;
    Scalar cost;
  };
  std::vector<std::vector<Item>> groups;
  Scalar budget = std::numeric_limits<Scalar>::infinity();
};

using McKpInstanced = McKpInstance<double>;

enum class OptSense { Min, Max };

// LP-relaxation solution: per-group weights on the simplex. By the structure
// of the relaxation, at most one group is not one-hot and that group has at
// most two nonzero weights.
template <class Scalar = double>
struct McKpSolution {
  std::vector<VectorX<Scalar>> weights;
  Scalar objective = Scalar(0);  // in the caller's sense
  Scalar cost = Scalar(0);
  Index fractional_group = -1;  // -1 when fully integral
};

namespace detail {

template <class Scalar>
struct HullItem {
  Index idx;  // original item index
  Scalar value;
  Scalar cost;
};

// Dominance filtering: keep, per group, only the upper convex hull of
// (cost, value) with strictly increasing cost and value. LP optima are
// supported on these items.
template <class Scalar>
std::vector<HullItem<Scalar>> upper_hull(
    const std::vector<typename McKpInstance<Scalar>::Item>& group) {
  std::vector<HullItem<Scalar>> sorted;
  sorted.reserve(group.size());
  for (std::size_t j = 0; j < group.size(); ++j) {
    const auto& it = group[j];
    if (!std::isfinite(static_cast<double>(it.cost)) || it.cost < Scalar(0))
      throw Error(ErrorKind::Invariant,
                  "mckp: item costs must be finite and nonnegative");
    if (!std::isfinite(static_cast<double>(it.value)))
      throw Error(ErrorKind::Invariant, "mckp: item values must be finite");
    sorted.push_back({static_cast<Index>(j), it.value, it.cost});
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const HullItem<Scalar>& a, const HullItem<Scalar>& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              if (a.value != b.value) return a.value > b.value;
              return a.idx < b.idx;
            });
  // IP dominance: drop items no better than a cheaper one.
  std::vector<HullItem<Scalar>> kept;
  for (const auto& it : sorted) {
    if (kept.empty() || it.value > kept.back().value) kept.push_back(it);
  }
  // LP dominance: monotone chain keeping strictly decreasing slopes.
  std::vector<HullItem<Scalar>> hull;
  for (const auto& it : kept) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      const Scalar lhs = (b.value - a.value) * (it.cost - b.cost);
      const Scalar rhs = (it.value - b.value) * (b.cost - a.cost);
      if (lhs <= rhs)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(it);
  }
  return hull;
}

}  // namespace detail

// LP relaxation of the MCKP by incremental efficiency sweep over the
// per-group hulls. Deterministic: ties in efficiency are resolved by group,
// then by hull position; within a group the sweep is always in hull order.
// Throws InfeasibleError (carrying the minimal achievable cost) when even the
// cheapest choice per group exceeds the budget.
template <class Scalar>
McKpSolution<Scalar> solve_relaxed_mckp(const McKpInstance<Scalar>& inst,
                                        OptSense sense) {
  const Index num_groups = static_cast<Index>(inst.groups.size());
  if (num_groups == 0)
    throw Error(ErrorKind::Invariant, "mckp: no groups");
  const Scalar sign = sense == OptSense::Max ? Scalar(1) : Scalar(-1);

  std::vector<std::vector<detail::HullItem<Scalar>>> hulls;
  hulls.reserve(static_cast<std::size_t>(num_groups));
  for (const auto& group : inst.groups) {
    if (group.empty())
      throw Error(ErrorKind::Invariant, "mckp: empty group");
    auto signed_group = group;
    if (sense == OptSense::Min)
      for (auto& it : signed_group) it.value = -it.value;
    hulls.push_back(detail::upper_hull<Scalar>(signed_group));
  }

  std::vector<std::size_t> pos(static_cast<std::size_t>(num_groups), 0);
  Scalar used = Scalar(0);
  Scalar value = Scalar(0);
  for (Index g = 0; g < num_groups; ++g) {
    used += hulls[static_cast<std::size_t>(g)][0].cost;
    value += hulls[static_cast<std::size_t>(g)][0].value;
  }
  if (used > inst.budget + Scalar(kFeasTol))
    throw InfeasibleError(
        "mckp: infeasible, minimal achievable cost exceeds the budget",
        static_cast<double>(used));

  struct Step {
    Scalar ratio;
    Index group;
    std::size_t from;  // hull position; upgrade is from -> from + 1
  };
  std::vector<Step> steps;
  for (Index g = 0; g < num_groups; ++g) {
    const auto& hull = hulls[static_cast<std::size_t>(g)];
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
      steps.push_back(
          {(hull[k + 1].value - hull[k].value) / (hull[k + 1].cost - hull[k].cost),
           g, k});
  }
  std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.group != b.group) return a.group < b.group;
    return a.from < b.from;
  });

  McKpSolution<Scalar> sol;
  sol.weights.resize(static_cast<std::size_t>(num_groups));
  Scalar frac = Scalar(0);
  Index frac_group = -1;
  std::size_t frac_pos = 0;
  for (const auto& step : steps) {
    const auto& hull = hulls[static_cast<std::size_t>(step.group)];
    const Scalar dc = hull[step.from + 1].cost - hull[step.from].cost;
    const Scalar dv = hull[step.from + 1].value - hull[step.from].value;
    if (used + dc <= inst.budget + Scalar(kFeasTol)) {
      used += dc;
      value += dv;
      pos[static_cast<std::size_t>(step.group)] = step.from + 1;
    } else {
      const Scalar room = inst.budget - used;
      if (room > Scalar(0)) {
        frac = room / dc;
        frac_group = step.group;
        frac_pos = step.from;
        used += frac * dc;
        value += frac * dv;
      }
      break;  // all remaining steps have lower efficiency and no room
    }
  }

  for (Index g = 0; g < num_groups; ++g) {
    const auto& hull = hulls[static_cast<std::size_t>(g)];
    VectorX<Scalar> w = VectorX<Scalar>::Zero(
        static_cast<Index>(inst.groups[static_cast<std::size_t>(g)].size()));
    if (g == frac_group) {
      w(hull[frac_pos].idx) = Scalar(1) - frac;
      w(hull[frac_pos + 1].idx) = frac;
    } else {
      w(hull[pos[static_cast<std::size_t>(g)]].idx) = Scalar(1);
    }
    sol.weights[static_cast<std::size_t>(g)] = std::move(w);
  }
  sol.objective = sign * value;
  sol.cost = used;
  sol.fractional_group = frac_group;
  return sol;
}

// Integral greedy MCKP (maximization): the LP sweep with the fractional
// upgrade rounded down. Always feasible; value equals the LP optimum minus
// the fractional group's partial gain.
template <class Scalar>
std::vector<Index> solve_mckp_greedy(const McKpInstance<Scalar>& inst) {
  McKpSolution<Scalar> lp = solve_relaxed_mckp(inst, OptSense::Max);
  std::vector<Index> choice(inst.groups.size());
  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    if (static_cast<Index>(g) == lp.fractional_group) {
      // keep the cheaper of the two nonzeros
      Index best = -1;
      for (Index j = 0; j < lp.weights[g].size(); ++j)
        if (lp.weights[g](j) > Scalar(0) &&
            (best < 0 || inst.groups[g][static_cast<std::size_t>(j)].cost <
                             inst.groups[g][static_cast<std::size_t>(best)].cost))
          best = j;
      choice[g] = best;
    } else {
      Index best = 0;
      lp.weights[g].maxCoeff(&best);
      choice[g] = best;
    }
  }
  return choice;
}

}  // namespace hcnas
