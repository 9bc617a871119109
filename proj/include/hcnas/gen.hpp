#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/objective.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

namespace detail {

inline double config_cost_proxy(const ConfigLabel& cfg) {
  const auto get = [&](const char* key, double fallback) {
    const auto it = cfg.attrs.find(key);
    return it == cfg.attrs.end() ? fallback : it->second;
  };
  const double er = get("er", 1.0 + 0.5 * cfg.id);
  const double k = get("k", 3.0);
  const double se = get("se", 0.0);
  return er * k * k * (1.0 + 0.25 * se);
}

}  // namespace detail

// Synthetic search space: an (er, k, se) grid sorted by nominal cost, so the
// config index ordering matches what the latency generator produces.
inline SpaceSpec gen_space(Index stages, Index max_depth, Index num_configs,
                           Index min_depth = 2) {
  std::vector<ConfigLabel> grid;
  for (double er : {3.0, 4.0, 6.0})
    for (double k : {3.0, 5.0})
      for (double se : {0.0, 1.0})
        grid.push_back({0, {{"er", er}, {"k", k}, {"se", se}}});
  std::sort(grid.begin(), grid.end(), [](const ConfigLabel& a,
                                         const ConfigLabel& b) {
    return detail::config_cost_proxy(a) < detail::config_cost_proxy(b);
  });
  if (num_configs < 1 || num_configs > static_cast<Index>(grid.size()))
    throw Error(ErrorKind::Input,
                "gen_space: supports between 1 and 12 configurations");
  SpaceSpec spec;
  spec.num_stages = stages;
  spec.max_depth = max_depth;
  spec.min_depth = min_depth;
  grid.resize(static_cast<std::size_t>(num_configs));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i].id = static_cast<int>(i);
    spec.configs.push_back(grid[i]);
  }
  check_spec(spec);
  return spec;
}

// Synthetic latency table: per-block scale times the config cost proxy, plus
// multiplicative noise. Noise below ~15% keeps per-block latencies monotone
// in the config index for the default grid.
template <class Scalar = double>
LatencyTable<Scalar> gen_table(const SpaceSpec& spec, std::uint64_t seed,
                               double noise = 0.05) {
  check_spec(spec);
  Rng rng(seed);
  LatencyTable<Scalar> table;
  table.device_name = "synthetic-" + std::to_string(seed);
  table.t.resize(spec.num_alpha_rows(), spec.num_configs());
  double proxy_max = 0.0;
  for (const auto& cfg : spec.configs)
    proxy_max = std::max(proxy_max, detail::config_cost_proxy(cfg));
  for (Index s = 0; s < spec.num_stages; ++s) {
    const double stage_scale = rng.uniform(0.6, 1.4);
    for (Index b = 0; b < spec.max_depth; ++b) {
      const double block_scale = stage_scale * rng.uniform(0.8, 1.2);
      for (Index c = 0; c < spec.num_configs(); ++c) {
        const double proxy =
            detail::config_cost_proxy(spec.configs[static_cast<std::size_t>(c)]) /
            proxy_max;
        const double jitter = 1.0 + noise * (2.0 * rng.uniform01() - 1.0);
        table.t(spec.alpha_row(s, b), c) =
            static_cast<Scalar>(2.5 * block_scale * (0.25 + proxy) * jitter);
      }
    }
  }
  return table;
}

// Synthetic utilities mirroring the table generator: heavier configurations
// and deeper stages score higher, with seeded jitter, so the latency budget
// genuinely binds.
template <class Scalar = double>
ObjectiveSpec<Scalar> gen_objective(const SpaceSpec& spec, std::uint64_t seed,
                                    ObjectiveKind kind = ObjectiveKind::LinearSurrogate,
                                    double noise_sd = 0.01, int batch_size = 64) {
  check_spec(spec);
  Rng rng(seed);
  ObjectiveSpec<Scalar> obj;
  obj.kind = kind;
  obj.noise_sd = static_cast<Scalar>(noise_sd);
  obj.batch_size = batch_size;
  obj.u_alpha.resize(spec.num_alpha_rows(), spec.num_configs());
  obj.u_beta.resize(spec.num_stages, spec.max_depth);
  const double c_count = static_cast<double>(spec.num_configs());
  for (Index r = 0; r < spec.num_alpha_rows(); ++r)
    for (Index c = 0; c < spec.num_configs(); ++c) {
      const double base = 0.2 + 0.8 * (static_cast<double>(c) + 1.0) / c_count;
      obj.u_alpha(r, c) = static_cast<Scalar>(base * rng.uniform(0.7, 1.3));
    }
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = 0; b < spec.max_depth; ++b) {
      const double base =
          0.3 * (static_cast<double>(b) + 1.0) / static_cast<double>(spec.max_depth);
      obj.u_beta(s, b) = static_cast<Scalar>(base * rng.uniform(0.7, 1.3));
    }
  return obj;
}

}  // namespace hcnas
