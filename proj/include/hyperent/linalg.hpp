#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace hyperent {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Wrap an angle into [-pi, pi). The +pi branch maps to -pi.
inline double wrap_angle(double x) {
    double w = std::remainder(x, 2.0 * kPi);  // (-pi, pi]
    if (w >= kPi) w -= 2.0 * kPi;
    return w;
}

}  // namespace hyperent
