#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/objective.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

template <class Scalar = double>
struct EnumerationResult {
  std::vector<DiscreteArch> archs;  // lexicographic by (depths, config ids)
  VectorX<Scalar> latency;
  VectorX<Scalar> score;
  Index best_feasible = -1;  // max score with latency <= budget; -1 if none
  Scalar budget = std::numeric_limits<Scalar>::infinity();
};

using EnumerationResultd = EnumerationResult<double>;

// Exhaustive enumeration of every discrete architecture in the space, with
// its exact latency and score. Refuses spaces larger than max_archs.
template <class Scalar>
EnumerationResult<Scalar> enumerate_space(
    const SpaceSpec& spec, const LatencyTable<Scalar>& table,
    const ObjectiveSpec<Scalar>& obj,
    Scalar budget = std::numeric_limits<Scalar>::infinity(),
    std::uint64_t max_archs = 1000000) {
  check_table(table, spec);
  check_objective(obj, spec);
  const BigUint count = count_space(spec);
  if (!(count <= max_archs))
    throw Error(ErrorKind::TooLarge,
                "enumerate_space: space holds " + count.to_string() +
                    " architectures, limit is " + std::to_string(max_archs));
  const std::size_t total = static_cast<std::size_t>(count.to_u64_saturating());

  EnumerationResult<Scalar> result;
  result.budget = budget;
  result.archs.reserve(total);

  const int s_count = static_cast<int>(spec.num_stages);
  const int c_count = static_cast<int>(spec.num_configs());
  std::vector<int> depth(static_cast<std::size_t>(s_count),
                         static_cast<int>(spec.min_depth));
  DiscreteArch arch;
  arch.depth = depth;
  arch.config.assign(static_cast<std::size_t>(s_count), {});

  // Outer odometer over per-stage depths, inner odometer over the config ids
  // of the active blocks; both most-significant first.
  const auto emit_configs = [&](auto&& self, int stage) -> void {
    if (stage == s_count) {
      result.archs.push_back(arch);
      return;
    }
    std::vector<int>& cfg = arch.config[static_cast<std::size_t>(stage)];
    cfg.assign(static_cast<std::size_t>(arch.depth[static_cast<std::size_t>(stage)]),
               0);
    const auto spin = [&](auto&& inner, std::size_t pos) -> void {
      if (pos == cfg.size()) {
        self(self, stage + 1);
        return;
      }
      for (int c = 0; c < c_count; ++c) {
        cfg[pos] = c;
        inner(inner, pos + 1);
      }
    };
    spin(spin, 0);
  };
  const auto spin_depths = [&](auto&& self, int stage) -> void {
    if (stage == s_count) {
      emit_configs(emit_configs, 0);
      return;
    }
    for (int d = static_cast<int>(spec.min_depth);
         d <= static_cast<int>(spec.max_depth); ++d) {
      arch.depth[static_cast<std::size_t>(stage)] = d;
      self(self, stage + 1);
    }
  };
  spin_depths(spin_depths, 0);

  const Index n = static_cast<Index>(result.archs.size());
  result.latency.resize(n);
  result.score.resize(n);
  for (Index i = 0; i < n; ++i) {
    result.latency(i) = discrete_latency(result.archs[static_cast<std::size_t>(i)],
                                         table, spec);
    result.score(i) =
        discrete_score(result.archs[static_cast<std::size_t>(i)], obj, spec);
    if (result.latency(i) <= budget + Scalar(kFeasTol) &&
        (result.best_feasible < 0 ||
         result.score(i) > result.score(result.best_feasible)))
      result.best_feasible = i;
  }
  return result;
}

struct RankCorrelation {
  double kendall_tau = 0.0;  // tau-b, tie corrected
  double spearman_rho = 0.0;
};

// Kendall tau-b and Spearman rho. Quadratic in the input length; meant for
// oracle-scale comparisons. Throws on constant input, where neither
// coefficient is defined.
inline RankCorrelation rank_correlation(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw Error(ErrorKind::Input,
                "rank_correlation: need two lists of equal length >= 2");
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) {
        ++ties_x;
        ++ties_y;
      } else if (dx == 0) {
        ++ties_x;
      } else if (dy == 0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double n0 = 0.5 * static_cast<double>(n) * (static_cast<double>(n) - 1);
  const double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom == 0)
    throw Error(ErrorKind::Input,
                "rank_correlation: undefined for constant input");

  const auto ranks = [](const std::vector<double>& v) {
    const std::size_t m = v.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(m);
    std::size_t i = 0;
    while (i < m) {
      std::size_t j = i;
      while (j + 1 < m && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw Error(ErrorKind::Input,
                "rank_correlation: undefined for constant input");
  return {(concordant - discordant) / denom, sxy / std::sqrt(sxx * syy)};
}

struct GapStats {
  double normalized_gap = 0.0;  // (score_found - score_best) / feasible range
  double percentile = 0.0;      // rank of found among feasible archs
  bool feasible = true;
};

// Position of a found architecture against the enumerated ground truth.
template <class Scalar>
GapStats optimality_gap(const DiscreteArch& found,
                        const EnumerationResult<Scalar>& oracle,
                        const SpaceSpec& spec,
                        const LatencyTable<Scalar>& table,
                        const ObjectiveSpec<Scalar>& obj) {
  GapStats stats;
  const Scalar lat = discrete_latency(found, table, spec);
  const Scalar score = discrete_score(found, obj, spec);
  stats.feasible = lat <= oracle.budget + Scalar(kFeasTol);
  if (oracle.best_feasible < 0) {
    stats.feasible = false;
    return stats;
  }
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = -std::numeric_limits<Scalar>::infinity();
  std::size_t feasible_count = 0, not_above = 0;
  for (Index i = 0; i < oracle.latency.size(); ++i) {
    if (oracle.latency(i) > oracle.budget + Scalar(kFeasTol)) continue;
    ++feasible_count;
    lo = std::min(lo, oracle.score(i));
    hi = std::max(hi, oracle.score(i));
    if (oracle.score(i) <= score) ++not_above;
  }
  const Scalar range = hi - lo;
  const Scalar best = oracle.score(oracle.best_feasible);
  stats.normalized_gap =
      range > Scalar(0) ? static_cast<double>((score - best) / range) : 0.0;
  stats.percentile = 100.0 * static_cast<double>(not_above) /
                     static_cast<double>(feasible_count);
  return stats;
}

}  // namespace hcnas
