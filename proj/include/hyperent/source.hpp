#pragma once

// Parametric model of the hyperentangled biphoton source: joint
// transverse-momentum amplitude, momentum-dependent biphoton
// polarization phase, and the local two-photon polarization state.

#include "hyperent/polcore.hpp"
#include "hyperent/rng.hpp"

namespace hyperent {

// Transverse momentum in angular units (small-angle k_perp / k), rad.
struct TransverseMomentum {
    double px = 0.0;
    double py = 0.0;

    double norm2() const { return px * px + py * py; }
    double norm() const { return std::sqrt(norm2()); }
    TransverseMomentum operator+(const TransverseMomentum& o) const {
        return {px + o.px, py + o.py};
    }
    TransverseMomentum operator-(const TransverseMomentum& o) const {
        return {px - o.px, py - o.py};
    }
    TransverseMomentum operator*(double s) const { return {px * s, py * s}; }
};

struct SourceConfig {
    double sigma_pump = 7.3e-4;   // spread of (p_s + p_i) components, rad
    double sigma_pm = 1.5e-2;     // spread of |p_s - p_i| / 2, rad
    double ring_radius = 0.0;     // mean emission angle; 0 = collinear disk
    double phi0 = 0.0;            // global polarization phase offset, rad
    double alpha = 0.0;           // radial phase coefficient, rad / rad^2
    double beta_x = 0.0;          // pump-linear phase coefficient, rad / rad
    double beta_y = 0.0;
    double visibility = 1.0;      // Werner-like purity of the local state
    double hh_vv_imbalance = 0.5; // HH amplitude weight, 0.5 = balanced

    void validate() const;  // throws std::invalid_argument
};

/// Biphoton polarization phase, phenomenological model:
/// wrap(phi0 + alpha (|p_s|^2 + |p_i|^2) + beta . (p_s + p_i)) in [-pi, pi).
double phi(const SourceConfig& cfg, const TransverseMomentum& ps,
           const TransverseMomentum& pi);

/// Unnormalized |c|^2: Gaussian in the sum momentum times a Gaussian
/// (optionally annular) in half the difference momentum.
double joint_momentum_pdf(const SourceConfig& cfg, const TransverseMomentum& ps,
                          const TransverseMomentum& pi);

/// Local polarization state at (p_s, p_i):
/// rho = v |psi><psi| + (1 - v) diag(eps, 0, 0, 1 - eps),
/// |psi> = sqrt(eps)|HH> + e^{i phi} sqrt(1 - eps)|VV>.
DensityMatrix2Q local_state(const SourceConfig& cfg,
                            const TransverseMomentum& ps,
                            const TransverseMomentum& pi);

/// One draw from the normalized joint momentum distribution.
std::pair<TransverseMomentum, TransverseMomentum> sample_pair(
    const SourceConfig& cfg, Rng& rng);

}  // namespace hyperent
