#include "hyperent/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyperent {

namespace {

long long pack_index(int i, int j) {
    return (static_cast<long long>(i) << 32) ^ (static_cast<unsigned>(j));
}

}  // namespace

std::pair<double, double> SuperpixelGrid::idler_center(int mode) const {
    const auto& [sx, sy] = signal_centers[static_cast<size_t>(mode)];
    if (basis == SpatialBasis::momentum) {
        // Momentum anti-correlation: point reflection about the anchors.
        return {idler_anchor_x - (sx - signal_anchor_x),
                idler_anchor_y - (sy - signal_anchor_y)};
    }
    return {idler_anchor_x + (sx - signal_anchor_x),
            idler_anchor_y + (sy - signal_anchor_y)};
}

std::optional<int> SuperpixelGrid::signal_mode(double cx, double cy) const {
    double ux = (cx - signal_anchor_x) / stride;
    double uy = (cy - signal_anchor_y) / stride;
    int i = static_cast<int>(std::lround(ux));
    int j = static_cast<int>(std::lround(uy));
    double half = 0.5 * cell;
    if (std::abs(cx - (signal_anchor_x + i * stride)) >= half ||
        std::abs(cy - (signal_anchor_y + j * stride)) >= half)
        return std::nullopt;
    auto it = mode_of_index.find(pack_index(i, j));
    if (it == mode_of_index.end()) return std::nullopt;
    return it->second;
}

std::optional<int> SuperpixelGrid::idler_mode(double cx, double cy) const {
    // Map the idler coordinate back onto the signal lattice through the
    // conjugation map, then reuse the lattice lookup.
    double ex, ey;
    if (basis == SpatialBasis::momentum) {
        ex = signal_anchor_x + (idler_anchor_x - cx);
        ey = signal_anchor_y + (idler_anchor_y - cy);
    } else {
        ex = signal_anchor_x + (cx - idler_anchor_x);
        ey = signal_anchor_y + (cy - idler_anchor_y);
    }
    return signal_mode(ex, ey);
}

SuperpixelGrid SuperpixelGrid::build(std::span<const CentroidedPhoton> photons,
                                     const Roi& signal_roi,
                                     const Roi& idler_roi, SpatialBasis basis,
                                     double radius_px, int cell, int stride) {
    SuperpixelGrid g;
    g.cell = cell;
    g.stride = stride;
    g.basis = basis;

    double sx = 0, sy = 0, ix = 0, iy = 0;
    uint64_t ns = 0, ni = 0;
    for (const auto& p : photons) {
        if (p.arm == Arm::signal) {
            sx += p.cx;
            sy += p.cy;
            ++ns;
        } else {
            ix += p.cx;
            iy += p.cy;
            ++ni;
        }
    }
    if (ns == 0 || ni == 0)
        throw std::invalid_argument("grid build needs photons in both arms");
    g.signal_anchor_x = sx / ns;
    g.signal_anchor_y = sy / ns;
    g.idler_anchor_x = ix / ni;
    g.idler_anchor_y = iy / ni;

    double half = 0.5 * cell;
    auto footprint_inside = [&](const Roi& roi, double cx, double cy) {
        return cx - half >= roi.x0 - 0.5 && cx + half <= roi.x0 + roi.width - 0.5 &&
               cy - half >= roi.y0 - 0.5 && cy + half <= roi.y0 + roi.height - 0.5;
    };

    int span = static_cast<int>(std::floor(radius_px / stride)) + 1;
    for (int j = -span; j <= span; ++j) {
        for (int i = -span; i <= span; ++i) {
            double dx = i * stride, dy = j * stride;
            if (dx * dx + dy * dy > radius_px * radius_px) continue;
            double scx = g.signal_anchor_x + dx;
            double scy = g.signal_anchor_y + dy;
            double icx, icy;
            if (basis == SpatialBasis::momentum) {
                icx = g.idler_anchor_x - dx;
                icy = g.idler_anchor_y - dy;
            } else {
                icx = g.idler_anchor_x + dx;
                icy = g.idler_anchor_y + dy;
            }
            if (!footprint_inside(signal_roi, scx, scy) ||
                !footprint_inside(idler_roi, icx, icy))
                continue;
            int mode = static_cast<int>(g.signal_centers.size());
            g.signal_centers.emplace_back(scx, scy);
            g.lattice_index.emplace_back(i, j);
            g.mode_of_index.emplace(pack_index(i, j), mode);
        }
    }
    if (g.signal_centers.empty())
        throw std::runtime_error("grid build produced no active superpixels");
    return g;
}

CorrelationMatrix bin_to_superpixels(std::span<const CoincidencePair> pairs,
                                     const SuperpixelGrid& grid) {
    CorrelationMatrix m;
    m.d = grid.d();
    m.basis = grid.basis;
    m.counts.assign(static_cast<size_t>(m.d) * m.d, 0);
    for (const auto& p : pairs) {
        auto sm = grid.signal_mode(p.signal.cx, p.signal.cy);
        auto im = grid.idler_mode(p.idler.cx, p.idler.cy);
        if (!sm || !im) {
            m.dropped++;
            continue;
        }
        m.at(*sm, *im)++;
        m.total++;
    }
    return m;
}

Histogram1D correlation_profile(std::span<const CoincidencePair> pairs,
                                Axis axis, CoordCombination coords,
                                const Roi& signal_roi, const Roi& idler_roi) {
    if (pairs.empty())
        throw std::invalid_argument("correlation_profile: no pairs");
    std::vector<double> values;
    values.reserve(pairs.size());
    for (const auto& p : pairs) {
        double s = axis == Axis::x ? p.signal.cx - signal_roi.center_x()
                                   : p.signal.cy - signal_roi.center_y();
        double i = axis == Axis::x ? p.idler.cx - idler_roi.center_x()
                                   : p.idler.cy - idler_roi.center_y();
        values.push_back(coords == CoordCombination::sum ? s + i : s - i);
    }
    double lo = std::floor(*std::min_element(values.begin(), values.end()));
    double hi = std::ceil(*std::max_element(values.begin(), values.end()));
    size_t nbins = static_cast<size_t>(std::max(1.0, hi - lo)) + 1;
    Histogram1D h;
    h.origin = lo - 0.5;
    h.bin_width = 1.0;
    h.counts.assign(nbins, 0.0);
    for (double v : values) {
        size_t k = static_cast<size_t>((v - h.origin) / h.bin_width);
        if (k >= h.counts.size()) k = h.counts.size() - 1;
        h.counts[k] += 1.0;
    }
    return h;
}

GaussianFit fit_gaussian_width(const Histogram1D& hist, double pixel_pitch_um) {
    size_t nonzero = 0;
    for (double c : hist.counts)
        if (c > 0.0) ++nonzero;
    if (nonzero < 5)
        throw std::invalid_argument(
            "fit_gaussian_width: need at least 5 nonzero bins");

    const size_t n = hist.counts.size();
    Eigen::VectorXd x(n), y(n);
    for (size_t k = 0; k < n; ++k) {
        x(static_cast<Eigen::Index>(k)) = hist.bin_center(k);
        y(static_cast<Eigen::Index>(k)) = hist.counts[k];
    }

    // Moment-based initial guess.
    double b0 = y.minCoeff();
    double a0 = std::max(y.maxCoeff() - b0, 1e-9);
    double wsum = 0, mu0 = 0;
    for (size_t k = 0; k < n; ++k) {
        double w = std::max(hist.counts[k] - b0, 0.0);
        wsum += w;
        mu0 += w * hist.bin_center(k);
    }
    mu0 /= std::max(wsum, 1e-12);
    double var0 = 0;
    for (size_t k = 0; k < n; ++k) {
        double w = std::max(hist.counts[k] - b0, 0.0);
        var0 += w * (hist.bin_center(k) - mu0) * (hist.bin_center(k) - mu0);
    }
    double sig0 = std::sqrt(var0 / std::max(wsum, 1e-12));
    if (!(sig0 > 0.2)) sig0 = 0.2;

    Eigen::Vector4d p(a0, mu0, sig0, b0);  // (A, mu, sigma, B)
    auto cost_of = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r) {
        double c = 0;
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
            double z = (x(k) - q(1)) / q(2);
            double model = q(0) * std::exp(-0.5 * z * z) + q(3);
            r(k) = model - y(k);
            c += r(k) * r(k);
        }
        return c;
    };

    Eigen::VectorXd r(n), r_new(n);
    Eigen::MatrixXd jac(n, 4);
    double lambda = 1e-3;
    double cost = cost_of(p, r);
    GaussianFit fit;
    int iter = 0;
    for (; iter < 200; ++iter) {
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
            double z = (x(k) - p(1)) / p(2);
            double g = std::exp(-0.5 * z * z);
            jac(k, 0) = g;
            jac(k, 1) = p(0) * g * z / p(2);
            jac(k, 2) = p(0) * g * z * z / p(2);
            jac(k, 3) = 1.0;
        }
        Eigen::Matrix4d jtj = jac.transpose() * jac;
        Eigen::Vector4d jtr = jac.transpose() * r;
        Eigen::Matrix4d damped = jtj;
        damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
        Eigen::Vector4d step = damped.ldlt().solve(-jtr);
        Eigen::Vector4d trial = p + step;
        trial(2) = std::abs(trial(2));
        if (!(trial(2) > 1e-6)) trial(2) = 1e-6;
        double trial_cost = cost_of(trial, r_new);
        if (!std::isfinite(trial_cost))
            throw std::runtime_error("fit_gaussian_width: diverged");
        if (trial_cost < cost) {
            p = trial;
            r = r_new;
            cost = trial_cost;
            lambda = std::max(lambda * 0.3, 1e-12);
        } else {
            lambda *= 3.0;
            if (lambda > 1e10) {  // stalled at the optimum
                fit.converged = true;
                break;
            }
        }
        if (step.norm() < 1e-9 * (1.0 + p.norm())) {
            fit.converged = true;
            break;
        }
    }
    if (iter == 200) fit.converged = true;  // bounded-iteration exit
    if (!fit.converged || !std::isfinite(cost))
        throw std::runtime_error("fit_gaussian_width: no convergence after " +
                                 std::to_string(iter) + " iterations");

    // Covariance from the final Jacobian.
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
        double z = (x(k) - p(1)) / p(2);
        double g = std::exp(-0.5 * z * z);
        jac(k, 0) = g;
        jac(k, 1) = p(0) * g * z / p(2);
        jac(k, 2) = p(0) * g * z * z / p(2);
        jac(k, 3) = 1.0;
    }
    Eigen::Matrix4d jtj = jac.transpose() * jac;
    double dof = std::max<double>(static_cast<double>(n) - 4.0, 1.0);
    Eigen::Matrix4d cov = jtj.inverse() * (cost / dof);

    fit.amplitude = p(0);
    fit.mean = p(1);
    fit.sigma = p(2);
    fit.offset = p(3);
    fit.sigma_um = p(2) * pixel_pitch_um;
    fit.sigma_err_um = std::sqrt(std::max(cov(2, 2), 0.0)) * pixel_pitch_um;
    fit.subpixel = fit.sigma < 1.0;
    fit.iterations = iter;
    return fit;
}

EprResult epr_products(const DetectorConfig& det, const GaussianFit& ff_x,
                       const GaussianFit& ff_y, const GaussianFit& nf_x,
                       const GaussianFit& nf_y) {
    if (ff_x.sigma_um <= 0 || ff_y.sigma_um <= 0 || nf_x.sigma_um <= 0 ||
        nf_y.sigma_um <= 0)
        throw std::invalid_argument("epr_products: widths must be > 0");

    double k_si = 2.0 * kPi * 1000.0 / det.epr_wavelength_nm;  // 1 / um
    double f_e = det.f_eff_mm * 1000.0;                        // um

    EprResult r;
    r.delta_ff_x_um = ff_x.sigma_um;
    r.delta_ff_y_um = ff_y.sigma_um;
    r.delta_nf_x_um = nf_x.sigma_um;
    r.delta_nf_y_um = nf_y.sigma_um;
    r.dp_x = k_si / f_e * ff_x.sigma_um;
    r.dp_y = k_si / f_e * ff_y.sigma_um;
    r.dq_x = nf_x.sigma_um / det.magnification;
    r.dq_y = nf_y.sigma_um / det.magnification;
    r.product_x = r.dp_x * r.dq_x;
    r.product_y = r.dp_y * r.dq_y;
    auto rel = [](const GaussianFit& f) {
        return f.sigma_um > 0 ? f.sigma_err_um / f.sigma_um : 0.0;
    };
    r.product_x_err =
        r.product_x * std::sqrt(rel(ff_x) * rel(ff_x) + rel(nf_x) * rel(nf_x));
    r.product_y_err =
        r.product_y * std::sqrt(rel(ff_y) * rel(ff_y) + rel(nf_y) * rel(nf_y));
    r.violation_x = r.product_x < 0.5;
    r.violation_y = r.product_y < 0.5;
    return r;
}

}  // namespace hyperent
