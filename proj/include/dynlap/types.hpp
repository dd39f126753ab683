#pragma once

#include <Eigen/Dense>

namespace dynlap {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

constexpr double pi = 3.1415926535897932384626433832795;
constexpr double two_pi = 2.0 * pi;

}  // namespace dynlap
