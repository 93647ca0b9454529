#pragma once

// Two-qubit polarization algebra: waveplate projectors, Born-rule
// probabilities, density-matrix validation, and entanglement measures.
// Basis order throughout is (HH, HV, VH, VV).

#include <optional>

#include "hyperent/linalg.hpp"

namespace hyperent {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

enum class PbsPort { transmit, reflect };

struct WaveplateSetting {
    double hwp_angle = 0.0;  // fast axis from horizontal, radians
    double qwp_angle = 0.0;
    PbsPort port = PbsPort::transmit;
};

// Single-photon polarization ket over (H, V), unit norm.
struct PolarizationKet {
    Vector2c amplitudes = Vector2c(1.0, 0.0);
};

// 4x4 complex density matrix over (HH, HV, VH, VV).
struct DensityMatrix2Q {
    Matrix4c elements = Matrix4c::Identity() / 4.0;
};

struct ValidationReport {
    double hermiticity_dev = 0.0;
    double trace_dev = 0.0;
    double min_eigenvalue = 0.0;
    bool hermitian_ok = false;
    bool trace_ok = false;
    bool psd_ok = false;
    bool ok() const { return hermitian_ok && trace_ok && psd_ok; }
};

// Jones matrices, convention R(theta) * diag(1, e^{i delta}) * R(-theta)
// with delta = pi (HWP) and pi/2 (QWP).
Matrix2c hwp_jones(double theta);
Matrix2c qwp_jones(double theta);

/// State whose Born overlap gives the detection probability behind the
/// QWP -> HWP -> PBS chain: |psi> = Uq^dag Uh^dag |port>, global phase
/// fixed so the first nonzero amplitude is real positive.
PolarizationKet projector_from_waveplates(const WaveplateSetting& setting);

/// <psi_s (x) psi_i| rho |psi_s (x) psi_i>, clamped to [0, 1].
/// Throws std::invalid_argument on non-Hermitian or non-unit-trace rho.
double born_probability_joint(const DensityMatrix2Q& rho,
                              const PolarizationKet& proj_signal,
                              const PolarizationKet& proj_idler);

/// Wootters concurrence C = max{0, l1 - l2 - l3 - l4} where l_i are the
/// descending square roots of the eigenvalues of
/// rho (sy(x)sy) rho* (sy(x)sy).
double concurrence(const DensityMatrix2Q& rho);

/// E(C) = h((1 + sqrt(1 - C^2)) / 2) with h the binary entropy.
double entanglement_of_formation(double concurrence_value);

/// Phase of the <VV|rho|HH> element, in [-pi, pi). Returns nullopt when
/// the element magnitude is below phase_floor (undefined phase).
std::optional<double> biphoton_phase(const DensityMatrix2Q& rho,
                                     double phase_floor = 1e-6);

ValidationReport validate_density_matrix(const DensityMatrix2Q& rho);

/// Pure-state density matrix from a two-qubit ket.
DensityMatrix2Q density_from_ket(const Vector4c& ket);

/// Kronecker product of two single-photon kets, signal first.
Vector4c joint_ket(const PolarizationKet& signal, const PolarizationKet& idler);

}  // namespace hyperent
