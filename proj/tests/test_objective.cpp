#include <doctest.h>

#include <cmath>

#include "hcnas/gen.hpp"
#include "hcnas/objective.hpp"

using namespace hcnas;

namespace {

// central finite differences over every coordinate
template <class F>
void check_gradient(const F& value_at, const Eigen::MatrixXd& point,
                    const Eigen::MatrixXd& analytic, double h, double tol) {
  for (Index r = 0; r < point.rows(); ++r)
    for (Index c = 0; c < point.cols(); ++c) {
      Eigen::MatrixXd hi = point, lo = point;
      hi(r, c) += h;
      lo(r, c) -= h;
      const double fd = (value_at(hi) - value_at(lo)) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(analytic(r, c))});
      CHECK(std::abs(fd - analytic(r, c)) / scale <= tol);
    }
}

}  // namespace

TEST_CASE("toy objective value and gradient") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(10, 0.1);
  const auto [value, grad] = toy_objective(x);
  CHECK(value == doctest::Approx(0.1));  // optimum of the constrained toy
  CHECK((grad - 2.0 * x).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(10);
  e1(0) = 1.0;
  CHECK(toy_objective(e1).first == doctest::Approx(1.0));
}

TEST_CASE("toy gradient matches central differences") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(6);
    for (Index i = 0; i < 6; ++i) x(i) = rng.uniform(-2.0, 2.0);
    const auto [value, grad] = toy_objective(x);
    const double h = 1e-6;
    for (Index i = 0; i < 6; ++i) {
      Eigen::VectorXd hi = x, lo = x;
      hi(i) += h;
      lo(i) -= h;
      const double fd = (toy_objective(hi).first - toy_objective(lo).first) / (2 * h);
      CHECK(std::abs(fd - grad(i)) /
                std::max({1.0, std::abs(fd), std::abs(grad(i))}) <=
            1e-6);
    }
  }
}

TEST_CASE("zero utilities give zero value and gradient") {
  const SpaceSpec spec = gen_space(2, 3, 3, 2);
  ObjectiveSpecd obj;
  obj.kind = ObjectiveKind::LinearSurrogate;
  obj.u_alpha = Eigen::MatrixXd::Zero(spec.num_alpha_rows(), spec.num_configs());
  obj.u_beta = Eigen::MatrixXd::Zero(spec.num_stages, spec.max_depth);
  Rng prng(1), rng(2);
  const ArchParamsd p = random_params(spec, prng);
  const auto g = surrogate_value_grad(p, spec, obj, rng);
  CHECK(g.value == 0.0);
  CHECK(g.grad_alpha.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.grad_beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear surrogate at one-hot points equals the negated score") {
  const SpaceSpec spec = gen_space(2, 3, 3, 2);
  const ObjectiveSpecd obj = gen_objective(spec, 10);
  Rng rng(4);
  DiscreteArch arch;
  arch.depth = {3, 2};
  arch.config = {{0, 2, 1}, {2, 2}};
  const ArchParamsd p = from_discrete(arch, spec);
  const auto g = surrogate_value_grad(p, spec, obj, rng);
  CHECK(g.value == doctest::Approx(-discrete_score(arch, obj, spec)).epsilon(1e-15));
}

TEST_CASE("linear surrogate gradient matches central differences") {
  const SpaceSpec spec = gen_space(2, 3, 4, 2);
  const ObjectiveSpecd obj = gen_objective(spec, 21);
  Rng prng(8), rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ArchParamsd p = random_params(spec, prng);
    const auto g = surrogate_value_grad(p, spec, obj, rng);

    const auto value_alpha = [&](const Eigen::MatrixXd& alpha) {
      ArchParamsd q{alpha, p.beta};
      Rng r(0);
      // the linear surrogate extends smoothly off the simplex
      const Eigen::MatrixXd wa =
          detail::utility_alpha_weights(obj.u_alpha, q.beta, spec);
      return -(wa.cwiseProduct(q.alpha).sum() +
               obj.u_beta.cwiseProduct(q.beta).sum());
    };
    const auto value_beta = [&](const Eigen::MatrixXd& beta) {
      const Eigen::MatrixXd wa =
          detail::utility_alpha_weights(obj.u_alpha, beta, spec);
      return -(wa.cwiseProduct(p.alpha).sum() +
               obj.u_beta.cwiseProduct(beta).sum());
    };
    check_gradient(value_alpha, p.alpha, g.grad_alpha, 1e-6, 1e-6);
    check_gradient(value_beta, p.beta, g.grad_beta, 1e-6, 1e-6);
  }
}

TEST_CASE("discrete score equals enumerated sums") {
  const SpaceSpec spec = gen_space(1, 2, 2, 1);
  ObjectiveSpecd obj;
  obj.kind = ObjectiveKind::LinearSurrogate;
  obj.u_alpha.resize(2, 2);
  obj.u_alpha << 1.0, 5.0, 2.0, 3.0;
  obj.u_beta.resize(1, 2);
  obj.u_beta << 0.5, 0.25;
  DiscreteArch arch;
  arch.depth = {2};
  arch.config = {{1, 0}};
  CHECK(discrete_score(arch, obj, spec) == doctest::Approx(5.0 + 2.0 + 0.25));
}

TEST_CASE("noisy surrogate mean converges to the linear value") {
  const SpaceSpec spec = gen_space(2, 3, 3, 2);
  ObjectiveSpecd linear = gen_objective(spec, 33);
  ObjectiveSpecd noisy = linear;
  noisy.kind = ObjectiveKind::NoisySurrogate;
  noisy.noise_sd = 0.01;
  noisy.batch_size = 1;

  Rng prng(12);
  const ArchParamsd p = random_params(spec, prng);
  Rng lin_rng(0);
  const double exact = surrogate_value_grad(p, spec, linear, lin_rng).value;

  Rng rng(77);
  const int n = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = surrogate_value_grad(p, spec, noisy, rng).value;
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1.0));
  CHECK(std::abs(mean - exact) <= 3.0 * se);
}

TEST_CASE("noisy gradient points along the exact gradient") {
  const SpaceSpec spec = gen_space(2, 3, 3, 2);
  ObjectiveSpecd linear = gen_objective(spec, 44);
  ObjectiveSpecd noisy = linear;
  noisy.kind = ObjectiveKind::NoisySurrogate;
  noisy.noise_sd = 0.01;
  noisy.batch_size = 64;

  Rng prng(3);
  Rng rng(999);
  int aligned = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const ArchParamsd p = random_params(spec, prng);
    Rng lin_rng(0);
    const auto exact = surrogate_value_grad(p, spec, linear, lin_rng);
    const auto est = surrogate_value_grad(p, spec, noisy, rng);
    const double inner = est.grad_alpha.cwiseProduct(exact.grad_alpha).sum() +
                         est.grad_beta.cwiseProduct(exact.grad_beta).sum();
    if (inner > 0.0) ++aligned;
  }
  CHECK(aligned >= 950);
}

TEST_CASE("toy kind is rejected over architecture parameters") {
  const SpaceSpec spec = gen_space(1, 2, 2, 1);
  ObjectiveSpecd obj;
  obj.kind = ObjectiveKind::ToyQuadratic;
  Rng rng(1);
  const ArchParamsd p = uniform_params(spec);
  CHECK_THROWS_AS(surrogate_value_grad(p, spec, obj, rng), Error);
}
