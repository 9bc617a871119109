#pragma once

#include <cmath>
#include <map>
#include <string>

#include "hcnas/error.hpp"
#include "hcnas/space.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

// Per-(stage, block, config) latency costs in milliseconds, laid out like
// ArchParams::alpha: row (s * max_depth + b), column c.
template <class Scalar = double>
struct LatencyTable {
  MatrixX<Scalar> t;  // (S*d) x |C|
  std::string device_name;
  std::map<std::string, std::string> metadata;
};

using LatencyTabled = LatencyTable<double>;

template <class Scalar>
void check_table(const LatencyTable<Scalar>& table, const SpaceSpec& spec) {
  check_spec(spec);
  if (table.t.rows() != spec.num_alpha_rows() ||
      table.t.cols() != spec.num_configs())
    throw Error(ErrorKind::ShapeMismatch,
                "latency table shape does not match the space spec");
  if (!table.t.allFinite() || (table.t.array() < Scalar(0)).any())
    throw Error(ErrorKind::Invariant,
                "latency table entries must be finite and nonnegative");
}

// The bilinear form LAT(alpha, beta) = alpha' Theta beta. Theta is block
// banded by stage and mostly zero, so it is kept as the table plus structured
// products; dense() materializes it for the reference LP and tests.
template <class Scalar = double>
class ThetaMatrix {
 public:
  ThetaMatrix(const LatencyTable<Scalar>& table, const SpaceSpec& spec)
      : t_(table.t),
        stages_(spec.num_stages),
        depth_(spec.max_depth),
        configs_(spec.num_configs()) {
    check_table(table, spec);
  }

  Index rows() const { return stages_ * depth_ * configs_; }
  Index cols() const { return stages_ * depth_; }

  // Theta[(s,b,c),(s',b')] = t[s,b,c] if s == s' and b <= b', else 0.
  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> theta = MatrixX<Scalar>::Zero(rows(), cols());
    for (Index s = 0; s < stages_; ++s)
      for (Index b = 0; b < depth_; ++b)
        for (Index c = 0; c < configs_; ++c)
          for (Index bp = b; bp < depth_; ++bp)
            theta((s * depth_ + b) * configs_ + c, s * depth_ + bp) =
                t_(s * depth_ + b, c);
    return theta;
  }

  // (Theta beta)[s,b,c] = t[s,b,c] * sum_{b' >= b} beta[s,b']; these are the
  // knapsack costs of the alpha block when beta is held fixed.
  MatrixX<Scalar> alpha_costs(const MatrixX<Scalar>& beta) const {
    MatrixX<Scalar> costs(stages_ * depth_, configs_);
    for (Index s = 0; s < stages_; ++s) {
      Scalar suffix = Scalar(0);
      for (Index b = depth_ - 1; b >= 0; --b) {
        suffix += beta(s, b);
        costs.row(s * depth_ + b) = t_.row(s * depth_ + b) * suffix;
      }
    }
    return costs;
  }

  // (Theta' alpha)[s,b'] = sum_{b <= b'} sum_c alpha[s,b,c] t[s,b,c]; the
  // knapsack costs of the beta block when alpha is held fixed.
  MatrixX<Scalar> beta_costs(const MatrixX<Scalar>& alpha) const {
    MatrixX<Scalar> costs(stages_, depth_);
    for (Index s = 0; s < stages_; ++s) {
      Scalar prefix = Scalar(0);
      for (Index b = 0; b < depth_; ++b) {
        prefix += alpha.row(s * depth_ + b).dot(t_.row(s * depth_ + b));
        costs(s, b) = prefix;
      }
    }
    return costs;
  }

  // alpha' Theta beta through the structured product.
  template <class P>
  Scalar bilinear(const P& params) const {
    const MatrixX<Scalar> costs = alpha_costs(params.beta);
    return costs.cwiseProduct(params.alpha).sum();
  }

 private:
  MatrixX<Scalar> t_;
  Index stages_, depth_, configs_;
};

template <class Scalar>
ThetaMatrix<Scalar> build_theta(const LatencyTable<Scalar>& table,
                                const SpaceSpec& spec) {
  return ThetaMatrix<Scalar>(table, spec);
}

// Expected latency of a continuous architecture distribution, evaluated as
// the direct quadruple sum over stages, depths, active blocks and configs.
template <class Scalar>
Scalar expected_latency(const ArchParams<Scalar>& p,
                        const LatencyTable<Scalar>& table,
                        const SpaceSpec& spec) {
  check_table(table, spec);
  if (p.alpha.rows() != spec.num_alpha_rows() ||
      p.alpha.cols() != spec.num_configs() ||
      p.beta.rows() != spec.num_stages || p.beta.cols() != spec.max_depth)
    throw Error(ErrorKind::ShapeMismatch,
                "expected_latency: params shape does not match the spec");
  Scalar total = Scalar(0);
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index bp = 0; bp < spec.max_depth; ++bp)
      for (Index b = 0; b <= bp; ++b)
        for (Index c = 0; c < spec.num_configs(); ++c)
          total += p.alpha(spec.alpha_row(s, b), c) *
                   table.t(spec.alpha_row(s, b), c) * p.beta(s, bp);
  return total;
}

// Latency of a discrete architecture: the first depth[s] chosen-config
// latencies of every stage.
template <class Scalar>
Scalar discrete_latency(const DiscreteArch& arch,
                        const LatencyTable<Scalar>& table,
                        const SpaceSpec& spec) {
  check_table(table, spec);
  check_arch(arch, spec);
  Scalar total = Scalar(0);
  for (Index s = 0; s < spec.num_stages; ++s) {
    const int d = arch.depth[static_cast<std::size_t>(s)];
    for (int b = 0; b < d; ++b)
      total += table.t(
          spec.alpha_row(s, b),
          arch.config[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]);
  }
  return total;
}

// Per-block latencies are expected to be nondecreasing in the config index
// (configs sorted by nominal cost). Returns a message per offending block.
template <class Scalar>
std::vector<std::string> monotonicity_warnings(const LatencyTable<Scalar>& table,
                                               const SpaceSpec& spec) {
  check_table(table, spec);
  std::vector<std::string> warnings;
  for (Index s = 0; s < spec.num_stages; ++s)
    for (Index b = 0; b < spec.max_depth; ++b) {
      const auto row = table.t.row(spec.alpha_row(s, b));
      for (Index c = 0; c + 1 < spec.num_configs(); ++c)
        if (row(c) > row(c + 1)) {
          warnings.push_back("latency not monotone in config index at stage " +
                             std::to_string(s) + " block " + std::to_string(b));
          break;
        }
    }
  return warnings;
}

}  // namespace hcnas
