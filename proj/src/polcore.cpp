#include "hyperent/polcore.hpp"

#include <algorithm>
#include <stdexcept>

namespace hyperent {

namespace {

Matrix2c rotation(double theta) {
    Matrix2c r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

Matrix2c retarder(double theta, double delta) {
    Matrix2c d = Matrix2c::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = std::exp(Complex(0.0, delta));
    return rotation(theta) * d * rotation(-theta);
}

void check_state(const DensityMatrix2Q& rho) {
    const Matrix4c& m = rho.elements;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > 1e-9)
        throw std::invalid_argument("density matrix trace is not 1");
}

}  // namespace

Matrix2c hwp_jones(double theta) { return retarder(theta, kPi); }

Matrix2c qwp_jones(double theta) { return retarder(theta, kPi / 2.0); }

PolarizationKet projector_from_waveplates(const WaveplateSetting& setting) {
    Vector2c port = setting.port == PbsPort::transmit ? Vector2c(1.0, 0.0)
                                                      : Vector2c(0.0, 1.0);
    Vector2c v = qwp_jones(setting.qwp_angle).adjoint() *
                 (hwp_jones(setting.hwp_angle).adjoint() * port);
    v.normalize();
    // Canonical global phase: first nonzero amplitude real positive.
    for (int i = 0; i < 2; ++i) {
        if (std::abs(v(i)) > 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    }
    return PolarizationKet{v};
}

Vector4c joint_ket(const PolarizationKet& signal, const PolarizationKet& idler) {
    Vector4c k;
    k << signal.amplitudes(0) * idler.amplitudes(0),
        signal.amplitudes(0) * idler.amplitudes(1),
        signal.amplitudes(1) * idler.amplitudes(0),
        signal.amplitudes(1) * idler.amplitudes(1);
    return k;
}

DensityMatrix2Q density_from_ket(const Vector4c& ket) {
    Vector4c v = ket.normalized();
    return DensityMatrix2Q{v * v.adjoint()};
}

double born_probability_joint(const DensityMatrix2Q& rho,
                              const PolarizationKet& proj_signal,
                              const PolarizationKet& proj_idler) {
    check_state(rho);
    Vector4c k = joint_ket(proj_signal, proj_idler);
    double p = std::real(k.dot(rho.elements * k));
    return std::clamp(p, 0.0, 1.0);
}

double concurrence(const DensityMatrix2Q& rho) {
    const Matrix4c& m = rho.elements;
    // sigma_y (x) sigma_y is antidiagonal (-1, 1, 1, -1).
    Matrix4c yy = Matrix4c::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    Matrix4c r = m * yy * m.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4c> solver(r, false);
    std::array<double, 4> lambda{};
    for (int i = 0; i < 4; ++i) {
        double ev = std::real(solver.eigenvalues()(i));
        if (ev < -1e-10)
            throw std::invalid_argument("state is not positive semidefinite");
        lambda[i] = std::sqrt(std::max(ev, 0.0));
    }
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    double c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
    return std::clamp(c, 0.0, 1.0);
}

double entanglement_of_formation(double concurrence_value) {
    if (concurrence_value < -1e-12 || concurrence_value > 1.0 + 1e-12)
        throw std::domain_error("concurrence outside [0, 1]");
    double c = std::clamp(concurrence_value, 0.0, 1.0);
    double x = (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))) / 2.0;
    auto term = [](double t) {
        return t <= 0.0 || t >= 1.0 ? 0.0 : -t * std::log2(t);
    };
    return term(x) + term(1.0 - x);
}

std::optional<double> biphoton_phase(const DensityMatrix2Q& rho,
                                     double phase_floor) {
    Complex e = rho.elements(3, 0);  // row VV, column HH
    if (std::abs(e) <= phase_floor) return std::nullopt;
    return wrap_angle(std::arg(e));
}

ValidationReport validate_density_matrix(const DensityMatrix2Q& rho) {
    const Matrix4c& m = rho.elements;
    ValidationReport rep;
    rep.hermiticity_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    rep.trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
    Matrix4c h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = solver.eigenvalues().minCoeff();
    rep.hermitian_ok = rep.hermiticity_dev <= kHermitianTol;
    rep.trace_ok = rep.trace_dev <= kTraceTol;
    rep.psd_ok = rep.min_eigenvalue >= -kPsdTol;
    return rep;
}

}  // namespace hyperent
