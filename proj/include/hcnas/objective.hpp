#pragma once

#include <cmath>
#include <utility>

#include "hcnas/error.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/space.hpp"
#include "hcnas/types.hpp"

namespace hcnas {

enum class ObjectiveKind { ToyQuadratic, LinearSurrogate, NoisySurrogate };

// Differentiable proxy objective over the relaxed space. Utilities follow the
// same depth-prefix accumulation as the latency formula: an alpha utility
// counts only while its block is active under the sampled depth. The solver
// minimizes, so surrogate values are negated scores.
template <class Scalar = double>
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::LinearSurrogate;
  MatrixX<Scalar> u_alpha;  // (S*d) x |C|
  MatrixX<Scalar> u_beta;   // S x d
  Scalar noise_sd = Scalar(0);
  int batch_size = 64;
};

using ObjectiveSpecd = ObjectiveSpec<double>;

template <class Scalar = double>
struct GradSample {
  Scalar value = Scalar(0);
  MatrixX<Scalar> grad_alpha;
  MatrixX<Scalar> grad_beta;
};

// ||x||^2 with gradient 2x; the toy problem's objective.
template <class Scalar>
std::pair<Scalar, VectorX<Scalar>> toy_objective(const VectorX<Scalar>& x) {
  return {x.squaredNorm(), Scalar(2) * x};
}

template <class Scalar>
void check_objective(const ObjectiveSpec<Scalar>& obj, const SpaceSpec& spec) {
  if (obj.kind == ObjectiveKind::ToyQuadratic) return;
  if (obj.u_alpha.rows() != spec.num_alpha_rows() ||
      obj.u_alpha.cols() != spec.num_configs() ||
      obj.u_beta.rows() != spec.num_stages ||
      obj.u_beta.cols() != spec.max_depth)
    throw Error(ErrorKind::ShapeMismatch,
                "objective utilities do not match the space spec");
  if (!obj.u_alpha.allFinite() || !obj.u_beta.allFinite())
    throw Error(ErrorKind::Invariant, "objective utilities must be finite");
  if (obj.batch_size < 1)
    throw Error(ErrorKind::Invariant, "objective batch_size must be >= 1");
}

namespace detail {

// (U beta)[s,b,c] = u_alpha[s,b,c] * sum_{b' >= b} beta[s,b'] -- the prefix
// structure shared with the latency form, for arbitrary-sign utilities.
template <class Scalar>
MatrixX<Scalar> utility_alpha_weights(const MatrixX<Scalar>& u_alpha,
                                      const MatrixX<Scalar>& beta,
                                      const SpaceSpec& spec) {
  MatrixX<Scalar> w(spec.num_alpha_rows(), spec.num_configs());
  for (Index s = 0; s < spec.num_stages; ++s) {
    Scalar suffix = Scalar(0);
    for (Index b = spec.max_depth - 1; b >= 0; --b) {
      suffix += beta(s, b);
      w.row(spec.alpha_row(s, b)) = u_alpha.row(spec.alpha_row(s, b)) * suffix;
    }
  }
  return w;
}

// (U' alpha)[s,b'] = sum_{b <= b'} alpha[s,b] . u_alpha[s,b].
template <class Scalar>
MatrixX<Scalar> utility_beta_weights(const MatrixX<Scalar>& u_alpha,
                                     const MatrixX<Scalar>& alpha,
                                     const SpaceSpec& spec) {
  MatrixX<Scalar> w(spec.num_stages, spec.max_depth);
  for (Index s = 0; s < spec.num_stages; ++s) {
    Scalar prefix = Scalar(0);
    for (Index b = 0; b < spec.max_depth; ++b) {
      prefix +=
          alpha.row(spec.alpha_row(s, b)).dot(u_alpha.row(spec.alpha_row(s, b)));
      w(s, b) = prefix;
    }
  }
  return w;
}

// Pathwise gradient of a linear function of one Gumbel-softmax row with
// respect to the row probabilities, at temperature 1. The result is centered
// over the support: row gradients act on a simplex, where a per-row constant
// shift is invisible to the LMO and the FW gap, and leaving the raw offsets
// in makes batches of this estimator point away from the exact gradient.
template <class Scalar, class PRow, class HatRow, class WRow, class OutRow>
void soft_row_grad(const PRow& p, const HatRow& hat, const WRow& w,
                   OutRow&& out) {
  const Scalar mean = hat.dot(w);
  Scalar shift = Scalar(0);
  Index support = 0;
  for (Index i = 0; i < p.size(); ++i) {
    out(i) = p(i) > Scalar(0) ? hat(i) * (w(i) - mean) / p(i) : Scalar(0);
    if (p(i) > Scalar(0)) {
      shift += out(i);
      ++support;
    }
  }
  if (support == 0) return;
  shift /= Scalar(support);
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) > Scalar(0)) out(i) -= shift;
}

}  // namespace detail

// Ground-truth score of a discrete architecture: active-block alpha utilities
// plus the depth utility.
template <class Scalar>
Scalar discrete_score(const DiscreteArch& arch, const ObjectiveSpec<Scalar>& obj,
                      const SpaceSpec& spec) {
  check_objective(obj, spec);
  check_arch(arch, spec);
  Scalar score = Scalar(0);
  for (Index s = 0; s < spec.num_stages; ++s) {
    const int d = arch.depth[static_cast<std::size_t>(s)];
    score += obj.u_beta(s, d - 1);
    for (int b = 0; b < d; ++b)
      score += obj.u_alpha(
          spec.alpha_row(s, b),
          arch.config[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]);
  }
  return score;
}

// Stochastic (or exact) value and gradient of the surrogate at params.
//
// linear_surrogate: exact expectation and exact analytic gradient.
// noisy_surrogate: averages batch_size hard Gumbel samples of the discrete
// score plus Gaussian noise; the gradient flows through the soft relaxation
// of the same draws (straight-through style).
template <class Scalar>
GradSample<Scalar> surrogate_value_grad(const ArchParams<Scalar>& p,
                                        const SpaceSpec& spec,
                                        const ObjectiveSpec<Scalar>& obj,
                                        Rng& rng) {
  if (obj.kind == ObjectiveKind::ToyQuadratic)
    throw Error(ErrorKind::Input,
                "surrogate_value_grad: toy_quadratic is not defined over "
                "architecture parameters");
  check_objective(obj, spec);
  const ValidationResult v = validate(p, spec);
  if (!v.ok())
    throw Error(ErrorKind::Invariant, "surrogate_value_grad: " + v.message);

  GradSample<Scalar> g;
  if (obj.kind == ObjectiveKind::LinearSurrogate) {
    const MatrixX<Scalar> wa =
        detail::utility_alpha_weights(obj.u_alpha, p.beta, spec);
    const MatrixX<Scalar> wb =
        detail::utility_beta_weights(obj.u_alpha, p.alpha, spec);
    g.value = -(wa.cwiseProduct(p.alpha).sum() +
                obj.u_beta.cwiseProduct(p.beta).sum());
    g.grad_alpha = -wa;
    g.grad_beta = -(wb + obj.u_beta);
    return g;
  }

  g.grad_alpha = MatrixX<Scalar>::Zero(p.alpha.rows(), p.alpha.cols());
  g.grad_beta = MatrixX<Scalar>::Zero(p.beta.rows(), p.beta.cols());
  Scalar value_sum = Scalar(0);
  for (int sample = 0; sample < obj.batch_size; ++sample) {
    const GumbelSample<Scalar> soft =
        gumbel_sample(p, spec, Scalar(1), SampleMode::Soft, rng);
    // The hard sample shares the draws: argmax of the soft row.
    DiscreteArch arch;
    arch.depth.resize(static_cast<std::size_t>(spec.num_stages));
    arch.config.resize(static_cast<std::size_t>(spec.num_stages));
    for (Index s = 0; s < spec.num_stages; ++s) {
      Index db = 0;
      soft.beta_hat.row(s).maxCoeff(&db);
      arch.depth[static_cast<std::size_t>(s)] = static_cast<int>(db) + 1;
      for (Index b = 0; b <= db; ++b) {
        Index c = 0;
        soft.alpha_hat.row(spec.alpha_row(s, b)).maxCoeff(&c);
        arch.config[static_cast<std::size_t>(s)].push_back(static_cast<int>(c));
      }
    }
    value_sum += discrete_score(arch, obj, spec) + obj.noise_sd * rng.normal();

    const MatrixX<Scalar> wa =
        detail::utility_alpha_weights(obj.u_alpha, soft.beta_hat, spec);
    const MatrixX<Scalar> wb =
        detail::utility_beta_weights(obj.u_alpha, soft.alpha_hat, spec) +
        obj.u_beta;
    for (Index r = 0; r < p.alpha.rows(); ++r) {
      VectorX<Scalar> rg(p.alpha.cols());
      detail::soft_row_grad<Scalar>(p.alpha.row(r), soft.alpha_hat.row(r),
                                    wa.row(r), rg);
      g.grad_alpha.row(r) -= rg.transpose();
    }
    for (Index s = 0; s < p.beta.rows(); ++s) {
      VectorX<Scalar> rg(p.beta.cols());
      detail::soft_row_grad<Scalar>(p.beta.row(s), soft.beta_hat.row(s),
                                    wb.row(s), rg);
      g.grad_beta.row(s) -= rg.transpose();
    }
  }
  const Scalar inv = Scalar(1) / Scalar(obj.batch_size);
  g.value = -value_sum * inv;
  g.grad_alpha *= inv;
  g.grad_beta *= inv;
  return g;
}

}  // namespace hcnas
