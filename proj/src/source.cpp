#include "hyperent/source.hpp"

#include <stdexcept>

namespace hyperent {

void SourceConfig::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(sigma_pump > 0.0) || !(sigma_pm > 0.0))
        throw std::invalid_argument("sigma_pump and sigma_pm must be > 0");
    if (visibility < 0.0 || visibility > 1.0)
        throw std::invalid_argument("visibility must be in [0, 1]");
    if (hh_vv_imbalance < 0.0 || hh_vv_imbalance > 1.0)
        throw std::invalid_argument("hh_vv_imbalance must be in [0, 1]");
    if (ring_radius < 0.0)
        throw std::invalid_argument("ring_radius must be >= 0");
    if (!finite(sigma_pump) || !finite(sigma_pm) || !finite(ring_radius) ||
        !finite(phi0) || !finite(alpha) || !finite(beta_x) || !finite(beta_y))
        throw std::invalid_argument("source parameters must be finite");
}

double phi(const SourceConfig& cfg, const TransverseMomentum& ps,
           const TransverseMomentum& pi) {
    TransverseMomentum pp = ps + pi;
    double raw = cfg.phi0 + cfg.alpha * (ps.norm2() + pi.norm2()) +
                 cfg.beta_x * pp.px + cfg.beta_y * pp.py;
    return wrap_angle(raw);
}

double joint_momentum_pdf(const SourceConfig& cfg, const TransverseMomentum& ps,
                          const TransverseMomentum& pi) {
    double sum2 = (ps + pi).norm2();
    double half_diff = 0.5 * (ps - pi).norm();
    double dr = half_diff - cfg.ring_radius;
    return std::exp(-sum2 / (2.0 * cfg.sigma_pump * cfg.sigma_pump)) *
           std::exp(-dr * dr / (2.0 * cfg.sigma_pm * cfg.sigma_pm));
}

DensityMatrix2Q local_state(const SourceConfig& cfg,
                            const TransverseMomentum& ps,
                            const TransverseMomentum& pi) {
    double eps = cfg.hh_vv_imbalance;
    double v = cfg.visibility;
    Vector4c psi = Vector4c::Zero();
    psi(0) = std::sqrt(eps);
    psi(3) = std::exp(Complex(0.0, phi(cfg, ps, pi))) * std::sqrt(1.0 - eps);
    Matrix4c rho = v * (psi * psi.adjoint()).eval();
    rho(0, 0) += (1.0 - v) * eps;
    rho(3, 3) += (1.0 - v) * (1.0 - eps);
    return DensityMatrix2Q{rho};
}

std::pair<TransverseMomentum, TransverseMomentum> sample_pair(
    const SourceConfig& cfg, Rng& rng) {
    // Sum and half-difference momenta are independent under the pdf.
    TransverseMomentum sum{rng.normal(0.0, cfg.sigma_pump),
                           rng.normal(0.0, cfg.sigma_pump)};
    TransverseMomentum half_diff;
    if (cfg.ring_radius <= 0.0) {
        half_diff = {rng.normal(0.0, cfg.sigma_pm), rng.normal(0.0, cfg.sigma_pm)};
    } else {
        // Radial density is r * exp(-(r - r0)^2 / 2 sigma^2); rejection
        // against a truncated Gaussian proposal with the radius bound
        // r0 + 8 sigma (mass beyond it is negligible).
        double bound = cfg.ring_radius + 8.0 * cfg.sigma_pm;
        double r;
        do {
            do {
                r = rng.normal(cfg.ring_radius, cfg.sigma_pm);
            } while (r < 0.0 || r > bound);
        } while (rng.uniform() * bound > r);
        double angle = rng.uniform(0.0, 2.0 * kPi);
        half_diff = {r * std::cos(angle), r * std::sin(angle)};
    }
    TransverseMomentum ps = sum * 0.5 + half_diff;
    TransverseMomentum pi = sum * 0.5 - half_diff;
    return {ps, pi};
}

}  // namespace hyperent
