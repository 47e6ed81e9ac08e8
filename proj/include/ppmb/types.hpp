#pragma once

#include <complex>

#include <Eigen/Dense>

namespace ppmb {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

// Shared floor below which denominators of the phase-space formulas count as
// a singularity.
inline constexpr double kPoleFloor = 1e-10;

}  // namespace ppmb
