#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "hcnas/error.hpp"
#include "hcnas/init.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/lmo.hpp"
#include "hcnas/objective.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

enum class StepSchedule { FwClassic, Fw2, Fixed };  // 4/(t+4), 2/(t+2), fixed
enum class BlockRule { Random, Alternate };

// Default block rule is the alpha-first alternation. Committing beta first
// under the full gamma_0 = 1 step can spend the whole budget on depth and
// pin the config block against the budget face, a poor stationary corner of
// the bilinear objective; alternating from alpha avoids that ratchet.
struct SolverConfig {
  int max_iters = 500;
  StepSchedule schedule = StepSchedule::FwClassic;
  double fixed_gamma = 0.1;
  BlockRule block_rule = BlockRule::Alternate;
  std::uint64_t seed = 0;
  double budget = std::numeric_limits<double>::infinity();  // T, ms
  double tolerance = kFeasTol;
};

inline double step_size(const SolverConfig& cfg, int t) {
  switch (cfg.schedule) {
    case StepSchedule::FwClassic:
      return 4.0 / (t + 4.0);
    case StepSchedule::Fw2:
      return 2.0 / (t + 2.0);
    case StepSchedule::Fixed:
    default:
      return cfg.fixed_gamma;
  }
}

struct TraceRow {
  int iter = 0;
  char block = 'a';  // 'a' alpha, 'b' beta, 'g' gradient-descent baseline
  double objective = 0.0;
  double latency_ms = 0.0;
  double fw_gap = 0.0;  // for GD baselines this column records the violation
  double step_size = 0.0;
};

template <class Scalar = double>
struct SearchTrace {
  std::vector<TraceRow> rows;
  ArchParams<Scalar> final_params;
  bool diverged = false;
  std::vector<std::pair<int, double>> full_gaps;  // (iter, both-block gap)
};

using SearchTraced = SearchTrace<double>;

namespace detail {

// LMO over one coordinate block's feasible set: a relaxed MCKP whose groups
// are the block's simplex rows, with the other block folded into the costs.
template <class Scalar>
McKpInstance<Scalar> block_instance(const MatrixX<Scalar>& grad,
                                    const MatrixX<Scalar>& costs,
                                    Index col_begin, Index col_end,
                                    Scalar budget) {
  McKpInstance<Scalar> inst;
  inst.budget = budget;
  inst.groups.resize(static_cast<std::size_t>(grad.rows()));
  for (Index r = 0; r < grad.rows(); ++r) {
    auto& group = inst.groups[static_cast<std::size_t>(r)];
    group.reserve(static_cast<std::size_t>(col_end - col_begin));
    for (Index c = col_begin; c < col_end; ++c)
      group.push_back({grad(r, c), costs(r, c)});
  }
  return inst;
}

template <class Scalar>
MatrixX<Scalar> vertex_from_solution(const McKpSolution<Scalar>& sol,
                                     Index rows, Index cols, Index col_begin) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& w = sol.weights[static_cast<std::size_t>(r)];
    for (Index j = 0; j < w.size(); ++j) out(r, col_begin + j) = w(j);
  }
  return out;
}

}  // namespace detail

// Per-iteration hook: iteration, active block, the LMO vertex, and the
// updated point. Used by tests and trace consumers.
template <class Scalar>
using BcsfwObserver = std::function<void(
    int, char, const MatrixX<Scalar>&, const ArchParams<Scalar>&)>;

// Block Coordinate Stochastic Frank-Wolfe over the latency-restricted space.
// Each step solves the active block's LMO (a relaxed MCKP) and takes the
// convex-combination update, so every iterate stays feasible; the inactive
// block is untouched bit for bit.
template <class Scalar>
SearchTrace<Scalar> bcsfw_search(const ArchParams<Scalar>& init,
                                 const SpaceSpec& spec,
                                 const ObjectiveSpec<Scalar>& obj,
                                 const LatencyTable<Scalar>& table,
                                 const SolverConfig& cfg,
                                 const BcsfwObserver<Scalar>& observer = {}) {
  const ValidationResult v = validate(init, spec);
  if (!v.ok()) throw Error(ErrorKind::Invariant, "bcsfw_search: " + v.message);
  check_objective(obj, spec);
  const ThetaMatrix<Scalar> theta(table, spec);
  const Scalar budget = static_cast<Scalar>(cfg.budget);
  {
    const Scalar lat0 = expected_latency(init, table, spec);
    if (lat0 > budget + Scalar(kFeasTol))
      throw InfeasibleError("bcsfw_search: initial point violates the budget",
                            static_cast<double>(lat0));
  }

  Rng rng(cfg.seed);
  SearchTrace<Scalar> trace;
  trace.rows.reserve(static_cast<std::size_t>(cfg.max_iters));
  ArchParams<Scalar> zeta = init;

  const auto alpha_lmo = [&](const GradSample<Scalar>& g,
                             const ArchParams<Scalar>& at) {
    const MatrixX<Scalar> costs = theta.alpha_costs(at.beta);
    const auto inst = detail::block_instance<Scalar>(
        g.grad_alpha, costs, 0, spec.num_configs(), budget);
    const auto sol = solve_relaxed_mckp(inst, OptSense::Min);
    MatrixX<Scalar> xi = detail::vertex_from_solution(
        sol, spec.num_alpha_rows(), spec.num_configs(), 0);
    const Scalar gap = (at.alpha - xi).cwiseProduct(g.grad_alpha).sum();
    return std::make_pair(std::move(xi), gap);
  };
  const auto beta_lmo = [&](const GradSample<Scalar>& g,
                            const ArchParams<Scalar>& at) {
    const MatrixX<Scalar> costs = theta.beta_costs(at.alpha);
    // Depths below min_depth are excluded from the groups outright.
    const auto inst = detail::block_instance<Scalar>(
        g.grad_beta, costs, spec.min_depth - 1, spec.max_depth, budget);
    const auto sol = solve_relaxed_mckp(inst, OptSense::Min);
    MatrixX<Scalar> xi = detail::vertex_from_solution(
        sol, spec.num_stages, spec.max_depth, spec.min_depth - 1);
    const Scalar gap = (at.beta - xi).cwiseProduct(g.grad_beta).sum();
    return std::make_pair(std::move(xi), gap);
  };

  for (int t = 0; t < cfg.max_iters; ++t) {
    const bool pick_alpha = cfg.block_rule == BlockRule::Random
                                ? rng.bernoulli(0.5)
                                : (t % 2 == 0);
    const GradSample<Scalar> g = surrogate_value_grad(zeta, spec, obj, rng);
    const double gamma = step_size(cfg, t);

    Scalar gap;
    MatrixX<Scalar> xi;
    if (pick_alpha) {
      auto step = alpha_lmo(g, zeta);
      gap = step.second;
      xi = std::move(step.first);
      if (t % 10 == 0)
        trace.full_gaps.emplace_back(
            t, static_cast<double>(gap + beta_lmo(g, zeta).second));
      zeta.alpha = (Scalar(1) - Scalar(gamma)) * zeta.alpha + Scalar(gamma) * xi;
    } else {
      auto step = beta_lmo(g, zeta);
      gap = step.second;
      xi = std::move(step.first);
      if (t % 10 == 0)
        trace.full_gaps.emplace_back(
            t, static_cast<double>(gap + alpha_lmo(g, zeta).second));
      zeta.beta = (Scalar(1) - Scalar(gamma)) * zeta.beta + Scalar(gamma) * xi;
    }

    trace.rows.push_back({t, pick_alpha ? 'a' : 'b',
                          static_cast<double>(g.value),
                          static_cast<double>(expected_latency(zeta, table, spec)),
                          static_cast<double>(gap), gamma});
    if (observer) observer(t, pick_alpha ? 'a' : 'b', xi, zeta);
  }
  trace.final_params = std::move(zeta);
  return trace;
}

struct ToyRow {
  int iter = 0;
  double objective = 0.0;
  double residual = 0.0;  // sum(x) - 1
};

template <class Scalar = double>
struct ToyTrace {
  std::vector<ToyRow> rows;
  VectorX<Scalar> x_final;
  bool diverged = false;
};

// Random feasible start for the toy problem: uniform draws normalized to the
// constraint hyperplane.
template <class Scalar = double>
VectorX<Scalar> toy_feasible_start(Index dim, Rng& rng) {
  VectorX<Scalar> x(dim);
  for (Index i = 0; i < dim; ++i) x(i) = rng.uniform01();
  return x / x.sum();
}

// Frank-Wolfe on min ||x||^2 s.t. sum x = 1. The per-step target is the
// constrained minimizer itself (the uniform vector), so every iterate is a
// convex combination of points on the constraint hyperplane.
template <class Scalar>
ToyTrace<Scalar> sfw_toy(const VectorX<Scalar>& start, int iters,
                         const SolverConfig& cfg) {
  ToyTrace<Scalar> trace;
  VectorX<Scalar> x = start;
  const VectorX<Scalar> target =
      VectorX<Scalar>::Constant(x.size(), Scalar(1) / Scalar(x.size()));
  for (int t = 0; t < iters; ++t) {
    const Scalar gamma = static_cast<Scalar>(step_size(cfg, t));
    x = (Scalar(1) - gamma) * x + gamma * target;
    trace.rows.push_back({t, static_cast<double>(x.squaredNorm()),
                          static_cast<double>(x.sum() - Scalar(1))});
  }
  trace.x_final = std::move(x);
  return trace;
}

template <class Scalar>
ToyTrace<Scalar> sfw_toy(Index dim, int iters, const SolverConfig& cfg) {
  Rng rng(cfg.seed);
  return sfw_toy(toy_feasible_start<Scalar>(dim, rng), iters, cfg);
}

// Gradient descent on ||x||^2 + lambda (sum x - 1)^2 from the same kind of
// start; the baseline the toy comparison is made against.
template <class Scalar>
ToyTrace<Scalar> gd_penalty_toy(const VectorX<Scalar>& start, Scalar lambda,
                                Scalar lr, int iters) {
  if (!(lr > Scalar(0)))
    throw Error(ErrorKind::Input, "gd_penalty_toy: lr must be positive");
  ToyTrace<Scalar> trace;
  VectorX<Scalar> x = start;
  for (int t = 0; t < iters; ++t) {
    const Scalar residual = x.sum() - Scalar(1);
    const VectorX<Scalar> grad =
        Scalar(2) * x +
        VectorX<Scalar>::Constant(x.size(), Scalar(2) * lambda * residual);
    x -= lr * grad;
    const Scalar obj = x.squaredNorm();
    trace.rows.push_back(
        {t, static_cast<double>(obj), static_cast<double>(x.sum() - Scalar(1))});
    if (obj > Scalar(1e10)) {
      trace.diverged = true;
      break;
    }
  }
  trace.x_final = std::move(x);
  return trace;
}

// Soft-penalty baseline over the architecture space: free logits mapped to
// the simplex rows by softmax, plain gradient descent on
// objective + lambda * max(0, LAT - T)^2. No feasibility guarantee; used
// only for comparison. The fw_gap column of the trace records the latency
// violation max(0, LAT - T).
template <class Scalar>
SearchTrace<Scalar> gd_penalty_search(const ArchParams<Scalar>& init,
                                      const SpaceSpec& spec,
                                      const ObjectiveSpec<Scalar>& obj,
                                      const LatencyTable<Scalar>& table,
                                      Scalar budget, Scalar lambda, Scalar lr,
                                      int iters, std::uint64_t seed) {
  check_objective(obj, spec);
  const ThetaMatrix<Scalar> theta(table, spec);
  Rng rng(seed);

  MatrixX<Scalar> z_alpha = (init.alpha.array() + Scalar(1e-6)).log().matrix();
  MatrixX<Scalar> z_beta(spec.num_stages, spec.depth_choices());
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index j = 0; j < spec.depth_choices(); ++j)
      z_beta(s, j) = std::log(
          static_cast<double>(init.beta(s, spec.min_depth - 1 + j)) + 1e-6);

  const auto softmax_rows = [](const MatrixX<Scalar>& z) {
    MatrixX<Scalar> p(z.rows(), z.cols());
    for (Index r = 0; r < z.rows(); ++r) {
      const Scalar top = z.row(r).maxCoeff();
      const VectorX<Scalar> e = (z.row(r).array() - top).exp();
      p.row(r) = e.transpose() / e.sum();
    }
    return p;
  };
  const auto chain_to_logits = [](const MatrixX<Scalar>& p,
                                  const MatrixX<Scalar>& gp) {
    MatrixX<Scalar> gz(p.rows(), p.cols());
    for (Index r = 0; r < p.rows(); ++r) {
      const Scalar dot = p.row(r).dot(gp.row(r));
      gz.row(r) = p.row(r).cwiseProduct((gp.row(r).array() - dot).matrix());
    }
    return gz;
  };
  const auto assemble = [&](ArchParams<Scalar>& p) {
    p.alpha = softmax_rows(z_alpha);
    p.beta = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
    p.beta.block(0, spec.min_depth - 1, spec.num_stages, spec.depth_choices()) =
        softmax_rows(z_beta);
  };

  SearchTrace<Scalar> trace;
  ArchParams<Scalar> p;
  for (int t = 0; t < iters; ++t) {
    assemble(p);
    const GradSample<Scalar> g = surrogate_value_grad(p, spec, obj, rng);
    const Scalar lat = expected_latency(p, table, spec);
    const Scalar violation = std::max(Scalar(0), lat - budget);

    MatrixX<Scalar> grad_alpha = g.grad_alpha;
    MatrixX<Scalar> grad_beta = g.grad_beta;
    if (violation > Scalar(0)) {
      const Scalar w = Scalar(2) * lambda * violation;
      grad_alpha += w * theta.alpha_costs(p.beta);
      grad_beta += w * theta.beta_costs(p.alpha);
    }

    trace.rows.push_back({t, 'g', static_cast<double>(g.value),
                          static_cast<double>(lat),
                          static_cast<double>(violation),
                          static_cast<double>(lr)});

    z_alpha -= lr * chain_to_logits(p.alpha, grad_alpha);
    MatrixX<Scalar> gb_free(spec.num_stages, spec.depth_choices());
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index j = 0; j < spec.depth_choices(); ++j)
        gb_free(s, j) = grad_beta(s, spec.min_depth - 1 + j);
    const MatrixX<Scalar> beta_free = p.beta.block(
        0, spec.min_depth - 1, spec.num_stages, spec.depth_choices());
    z_beta -= lr * chain_to_logits(beta_free, gb_free);

    if (std::abs(static_cast<double>(g.value)) > 1e10) {
      trace.diverged = true;
      break;
    }
  }
  assemble(p);
  trace.final_params = std::move(p);
  return trace;
}

}  // namespace hcnas
