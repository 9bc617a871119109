#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hcnas/bigint.hpp"
#include "hcnas/error.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

// One block configuration. Attributes (er, k, se, ...) are opaque to the
// solver; only the index matters, and indices are expected to be sorted by
// ascending nominal cost.
struct ConfigLabel {
  int id = 0;
  std::map<std::string, double> attrs;
};

struct SpaceSpec {
  Index num_stages = 0;                // S
  Index max_depth = 0;                 // d
  Index min_depth = 2;                 // depths below carry zero probability
  std::vector<ConfigLabel> configs;    // the set C, latency-sorted

  Index num_configs() const { return static_cast<Index>(configs.size()); }
  Index num_alpha_rows() const { return num_stages * max_depth; }
  Index alpha_row(Index s, Index b) const { return s * max_depth + b; }
  Index depth_choices() const { return max_depth - min_depth + 1; }
};

inline void check_spec(const SpaceSpec& spec) {
  if (spec.num_stages < 1 || spec.max_depth < 1)
    throw Error(ErrorKind::Invariant, "space: stages and max_depth must be >= 1");
  if (spec.min_depth < 1 || spec.min_depth > spec.max_depth)
    throw Error(ErrorKind::Invariant, "space: need 1 <= min_depth <= max_depth");
  if (spec.configs.empty())
    throw Error(ErrorKind::Invariant, "space: configs must be nonempty");
  for (std::size_t i = 0; i < spec.configs.size(); ++i) {
    if (spec.configs[i].id != static_cast<int>(i))
      throw Error(ErrorKind::Invariant,
                  "space: config ids must equal their position");
  }
}

// Continuous architecture parameters. alpha rows are the per-(stage, block)
// config simplices, flattened so that row (s * max_depth + b) holds stage s,
// block b. beta rows are the per-stage depth simplices.
template <class Scalar = double>
struct ArchParams {
  MatrixX<Scalar> alpha;  // (S*d) x |C|
  MatrixX<Scalar> beta;   // S x d
};

using ArchParamsd = ArchParams<double>;

// A fully discrete architecture: depth per stage, config id per active block.
struct DiscreteArch {
  std::vector<int> depth;                 // size S, in [min_depth, max_depth]
  std::vector<std::vector<int>> config;   // config[s] has depth[s] entries

  friend bool operator==(const DiscreteArch& a, const DiscreteArch& b) {
    return a.depth == b.depth && a.config == b.config;
  }
};

template <class Scalar = double>
struct GumbelSample {
  MatrixX<Scalar> alpha_hat;
  MatrixX<Scalar> beta_hat;
};

enum class SampleMode { Soft, Hard };

enum class Violation { None, ShapeMismatch, Negative, RowSum, MinDepth };

struct ValidationResult {
  Violation violation = Violation::None;
  std::string message;

  bool ok() const { return violation == Violation::None; }
};

template <class Scalar>
ValidationResult validate(const ArchParams<Scalar>& p, const SpaceSpec& spec) {
  check_spec(spec);
  if (p.alpha.rows() != spec.num_alpha_rows() ||
      p.alpha.cols() != spec.num_configs() ||
      p.beta.rows() != spec.num_stages || p.beta.cols() != spec.max_depth) {
    return {Violation::ShapeMismatch,
            "alpha/beta shapes do not match the space spec"};
  }
  for (Index s = 0; s < spec.num_stages; ++s) {
    for (Index b = 0; b < spec.max_depth; ++b) {
      const auto row = p.alpha.row(spec.alpha_row(s, b));
      if ((row.array() < Scalar(0)).any())
        return {Violation::Negative, "alpha row (s=" + std::to_string(s) +
                                         ", b=" + std::to_string(b) +
                                         ") has a negative entry"};
      if (std::abs(static_cast<double>(row.sum()) - 1.0) > kRowTol)
        return {Violation::RowSum, "alpha row (s=" + std::to_string(s) +
                                       ", b=" + std::to_string(b) +
                                       ") does not sum to 1"};
    }
  }
  for (Index s = 0; s < spec.num_stages; ++s) {
    const auto row = p.beta.row(s);
    if ((row.array() < Scalar(0)).any())
      return {Violation::Negative,
              "beta row s=" + std::to_string(s) + " has a negative entry"};
    if (std::abs(static_cast<double>(row.sum()) - 1.0) > kRowTol)
      return {Violation::RowSum,
              "beta row s=" + std::to_string(s) + " does not sum to 1"};
    for (Index b = 0; b + 1 < spec.min_depth; ++b) {
      if (row(b) != Scalar(0))
        return {Violation::MinDepth,
                "beta row s=" + std::to_string(s) + " places mass on depth " +
                    std::to_string(b + 1) + " below min_depth"};
    }
  }
  return {};
}

// Exact number of discrete architectures: (sum_{b=min_depth}^{d} |C|^b)^S.
inline BigUint count_space(const SpaceSpec& spec) {
  check_spec(spec);
  const BigUint c(static_cast<std::uint64_t>(spec.num_configs()));
  BigUint per_stage(0);
  for (Index b = spec.min_depth; b <= spec.max_depth; ++b)
    per_stage += c.pow(static_cast<unsigned>(b));
  return per_stage.pow(static_cast<unsigned>(spec.num_stages));
}

namespace detail {

// Gumbel-softmax over one simplex row. Entries with exactly zero probability
// are excluded from the support and never receive mass or random draws.
template <class Scalar, class RowIn, class RowOut>
void gumbel_row(const RowIn& p, Scalar temperature, SampleMode mode, Rng& rng,
                RowOut&& out, const char* what, Index row_id) {
  const Index n = p.size();
  out.setZero();
  std::vector<Index> support;
  support.reserve(n);
  for (Index i = 0; i < n; ++i)
    if (p(i) > Scalar(0)) support.push_back(i);
  if (support.empty())
    throw Error(ErrorKind::DegenerateRow,
                std::string(what) + " row " + std::to_string(row_id) +
                    " is identically zero");
  VectorX<Scalar> logits(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    logits(static_cast<Index>(k)) =
        (std::log(static_cast<double>(p(support[k]))) + rng.gumbel()) /
        static_cast<double>(temperature);
  }
  Index arg = 0;
  const Scalar top = logits.maxCoeff(&arg);
  if (mode == SampleMode::Hard) {
    out(support[static_cast<std::size_t>(arg)]) = Scalar(1);
    return;
  }
  VectorX<Scalar> w = (logits.array() - top).exp();
  w /= w.sum();
  for (std::size_t k = 0; k < support.size(); ++k)
    out(support[k]) = w(static_cast<Index>(k));
}

}  // namespace detail

// Draws one architecture sample. Rows are visited in a fixed order (all alpha
// rows by (s, b), then beta rows by s), so a given seed determines the sample.
template <class Scalar>
GumbelSample<Scalar> gumbel_sample(const ArchParams<Scalar>& p,
                                   const SpaceSpec& spec, Scalar temperature,
                                   SampleMode mode, Rng& rng) {
  if (!(temperature > Scalar(0)))
    throw Error(ErrorKind::Input, "gumbel_sample: temperature must be > 0");
  const ValidationResult v = validate(p, spec);
  if (!v.ok()) throw Error(ErrorKind::Invariant, "gumbel_sample: " + v.message);
  GumbelSample<Scalar> out;
  out.alpha_hat.resize(p.alpha.rows(), p.alpha.cols());
  out.beta_hat.resize(p.beta.rows(), p.beta.cols());
  for (Index r = 0; r < p.alpha.rows(); ++r)
    detail::gumbel_row(p.alpha.row(r), temperature, mode, rng,
                       out.alpha_hat.row(r), "alpha", r);
  for (Index s = 0; s < p.beta.rows(); ++s)
    detail::gumbel_row(p.beta.row(s), temperature, mode, rng,
                       out.beta_hat.row(s), "beta", s);
  return out;
}

template <class Scalar>
DiscreteArch to_discrete(const ArchParams<Scalar>& p, const SpaceSpec& spec) {
  const ValidationResult v = validate(p, spec);
  if (!v.ok()) throw Error(ErrorKind::Invariant, "to_discrete: " + v.message);
  const auto one_hot_index = [](const auto& row, const std::string& name) {
    Index arg = 0;
    row.maxCoeff(&arg);
    if (std::abs(static_cast<double>(row(arg)) - 1.0) > kRowTol)
      throw Error(ErrorKind::NotDiscrete, "not discrete: " + name);
    return arg;
  };
  DiscreteArch arch;
  arch.depth.resize(static_cast<std::size_t>(spec.num_stages));
  arch.config.resize(static_cast<std::size_t>(spec.num_stages));
  for (Index s = 0; s < spec.num_stages; ++s) {
    const Index b = one_hot_index(p.beta.row(s),
                                  "beta row s=" + std::to_string(s));
    arch.depth[static_cast<std::size_t>(s)] = static_cast<int>(b) + 1;
    for (Index blk = 0; blk < spec.max_depth; ++blk) {
      const Index c = one_hot_index(
          p.alpha.row(spec.alpha_row(s, blk)),
          "alpha row (s=" + std::to_string(s) + ", b=" + std::to_string(blk) +
              ")");
      if (blk <= b)
        arch.config[static_cast<std::size_t>(s)].push_back(static_cast<int>(c));
    }
  }
  return arch;
}

inline void check_arch(const DiscreteArch& arch, const SpaceSpec& spec) {
  if (static_cast<Index>(arch.depth.size()) != spec.num_stages ||
      static_cast<Index>(arch.config.size()) != spec.num_stages)
    throw Error(ErrorKind::ShapeMismatch, "arch has wrong number of stages");
  for (Index s = 0; s < spec.num_stages; ++s) {
    const int d = arch.depth[static_cast<std::size_t>(s)];
    if (d < spec.min_depth || d > spec.max_depth)
      throw Error(ErrorKind::Invariant,
                  "arch depth outside [min_depth, max_depth] at stage " +
                      std::to_string(s));
    const auto& cfg = arch.config[static_cast<std::size_t>(s)];
    if (static_cast<int>(cfg.size()) != d)
      throw Error(ErrorKind::Invariant,
                  "arch stage " + std::to_string(s) +
                      " must list one config per active block");
    for (int c : cfg)
      if (c < 0 || c >= spec.num_configs())
        throw Error(ErrorKind::Invariant,
                    "arch config id out of range at stage " + std::to_string(s));
  }
}

// Inverse of to_discrete. Inactive blocks (b >= depth) get a one-hot at
// config 0 so every row stays on its simplex.
template <class Scalar = double>
ArchParams<Scalar> from_discrete(const DiscreteArch& arch,
                                 const SpaceSpec& spec) {
  check_arch(arch, spec);
  ArchParams<Scalar> p;
  p.alpha = MatrixX<Scalar>::Zero(spec.num_alpha_rows(), spec.num_configs());
  p.beta = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
  for (Index s = 0; s < spec.num_stages; ++s) {
    const int d = arch.depth[static_cast<std::size_t>(s)];
    p.beta(s, d - 1) = Scalar(1);
    for (Index b = 0; b < spec.max_depth; ++b) {
      const int c =
          b < d ? arch.config[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]
                : 0;
      p.alpha(spec.alpha_row(s, b), c) = Scalar(1);
    }
  }
  return p;
}

// Uniform distribution over the space: alpha rows uniform over configs, beta
// rows uniform over the allowed depths.
template <class Scalar = double>
ArchParams<Scalar> uniform_params(const SpaceSpec& spec) {
  check_spec(spec);
  ArchParams<Scalar> p;
  p.alpha = MatrixX<Scalar>::Constant(spec.num_alpha_rows(), spec.num_configs(),
                                      Scalar(1) / Scalar(spec.num_configs()));
  p.beta = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
  const Scalar w = Scalar(1) / Scalar(spec.depth_choices());
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = spec.min_depth - 1; b < spec.max_depth; ++b)
      p.beta(s, b) = w;
  return p;
}

// Random point in the relaxed space: each row drawn uniformly on its simplex.
template <class Scalar = double>
ArchParams<Scalar> random_params(const SpaceSpec& spec, Rng& rng) {
  check_spec(spec);
  ArchParams<Scalar> p;
  p.alpha.resize(spec.num_alpha_rows(), spec.num_configs());
  p.beta = MatrixX<Scalar>::Zero(spec.num_stages, spec.max_depth);
  const auto fill_simplex = [&rng](auto&& row, Index begin, Index end) {
    double sum = 0.0;
    for (Index i = begin; i < end; ++i) {
      const double e = -std::log(rng.uniform01());
      row(i) = e;
      sum += e;
    }
    for (Index i = begin; i < end; ++i) row(i) /= sum;
  };
  for (Index r = 0; r < p.alpha.rows(); ++r)
    fill_simplex(p.alpha.row(r), 0, spec.num_configs());
  for (Index s = 0; s < spec.num_stages; ++s)
    fill_simplex(p.beta.row(s), spec.min_depth - 1, spec.max_depth);
  return p;
}

}  // namespace hcnas
