#pragma once

// Shared helpers for the test binaries: random physical states,
// state fidelity, and common fixture states.

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "hyperent/polcore.hpp"

namespace hyperent::testing {

inline Vector4c phi_plus() {
    Vector4c k = Vector4c::Zero();
    k(0) = 1.0 / std::sqrt(2.0);
    k(3) = 1.0 / std::sqrt(2.0);
    return k;
}

inline Vector4c hh_vv_phase(double theta) {
    Vector4c k = Vector4c::Zero();
    k(0) = 1.0 / std::sqrt(2.0);
    k(3) = std::exp(Complex(0.0, theta)) / std::sqrt(2.0);
    return k;
}

inline DensityMatrix2Q werner(double p) {
    DensityMatrix2Q rho = density_from_ket(phi_plus());
    rho.elements = p * rho.elements + (1.0 - p) * Matrix4c::Identity() / 4.0;
    return rho;
}

/// Random full-rank physical state via the Ginibre ensemble.
inline DensityMatrix2Q random_state(std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix4c g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = Complex(nd(gen), nd(gen));
    Matrix4c rho = g * g.adjoint();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix2Q{rho};
}

/// Haar-ish random single-qubit unitary (QR of a Ginibre matrix).
inline Matrix2c random_unitary(std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix2c g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = Complex(nd(gen), nd(gen));
    Eigen::HouseholderQR<Matrix2c> qr(g);
    Matrix2c q = qr.householderQ();
    Matrix2c r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 2; ++i) {
        Complex d = r(i, i);
        if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

inline Matrix4c matrix_sqrt(const Matrix4c& m) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
    Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0);
    Matrix4c out = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i)
        out += std::sqrt(lam(i)) *
               (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    return out;
}

/// Uhlmann fidelity F = (tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const Matrix4c& a, const Matrix4c& b) {
    Matrix4c sa = matrix_sqrt(a);
    Matrix4c inner = matrix_sqrt(sa * b * sa);
    double t = std::real(inner.trace());
    return t * t;
}

}  // namespace hyperent::testing
