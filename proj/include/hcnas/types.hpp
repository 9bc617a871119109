#pragma once

#include <Eigen/Dense>

namespace hcnas {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Absolute slack for the latency budget and other feasibility checks (ms).
inline constexpr double kFeasTol = 1e-9;

// Tolerance for simplex row sums and one-hot detection.
inline constexpr double kRowTol = 1e-9;

}  // namespace hcnas
