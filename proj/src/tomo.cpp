#include "hyperent/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hyperent/rng.hpp"

namespace hyperent {

namespace {

std::array<Matrix2c, 4> pauli_basis() {
    Matrix2c id = Matrix2c::Identity();
    Matrix2c sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    sz << 1, 0, 0, -1;
    return {id, sx, sy, sz};
}

Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

const std::array<Matrix4c, 16>& two_qubit_pauli() {
    static const std::array<Matrix4c, 16> basis = [] {
        auto p = pauli_basis();
        std::array<Matrix4c, 16> out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out[4 * i + j] = kron2(p[i], p[j]);
        return out;
    }();
    return basis;
}

}  // namespace

TomographyDesign::TomographyDesign(
    const std::vector<MeasurementSetting>& settings)
    : settings_(settings) {
    if (settings_.size() != 16)
        throw std::invalid_argument("tomography requires exactly 16 settings");

    norm_settings_ = {-1, -1, -1, -1};
    const char* wanted[4] = {"HH", "HV", "VV", "VH"};
    for (size_t i = 0; i < settings_.size(); ++i)
        for (int w = 0; w < 4; ++w)
            if (settings_[i].label == wanted[w])
                norm_settings_[w] = static_cast<int>(i);
    for (int w = 0; w < 4; ++w)
        if (norm_settings_[w] < 0)
            throw std::invalid_argument(
                "settings must include the complete basis group HH, HV, VV, VH");

    const auto& basis = two_qubit_pauli();
    Eigen::MatrixXd design(16, 16);
    projectors_.reserve(16);
    for (size_t v = 0; v < 16; ++v) {
        Vector4c k = joint_ket(projector_from_waveplates(settings_[v].signal),
                               projector_from_waveplates(settings_[v].idler));
        projectors_.push_back(k * k.adjoint());
        for (int b = 0; b < 16; ++b)
            design(static_cast<Eigen::Index>(v), b) =
                0.25 * std::real((projectors_[v] * basis[static_cast<size_t>(b)])
                                     .trace());
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(design);
    if (!lu.isInvertible())
        throw std::invalid_argument(
            "tomography settings give a singular design matrix");
    inverse_design_ = lu.inverse();
}

Matrix4c TomographyDesign::reconstruct_linear(
    const std::array<double, 16>& counts) const {
    double n0 = 0.0;
    for (int idx : norm_settings_) n0 += counts[static_cast<size_t>(idx)];
    if (!(n0 > 0.0))
        throw std::invalid_argument(
            "reconstruct_linear: zero normalization counts");
    Eigen::VectorXd probs(16);
    for (int v = 0; v < 16; ++v)
        probs(v) = counts[static_cast<size_t>(v)] / n0;
    Eigen::VectorXd coeff = inverse_design_ * probs;
    const auto& basis = two_qubit_pauli();
    Matrix4c rho = Matrix4c::Zero();
    for (int b = 0; b < 16; ++b)
        rho += 0.25 * coeff(b) * basis[static_cast<size_t>(b)];
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Complex tr = rho.trace();
    if (std::abs(tr) < 1e-9)
        throw std::runtime_error("reconstruct_linear: vanishing trace");
    rho /= tr;
    return rho;
}

std::array<double, 16> TomographyDesign::probabilities(
    const DensityMatrix2Q& rho) const {
    std::array<double, 16> p{};
    for (size_t v = 0; v < 16; ++v)
        p[v] = std::clamp(
            std::real((projectors_[v] * rho.elements).trace()), 0.0, 1.0);
    return p;
}

DensityMatrix2Q project_physical(const Matrix4c& rho_raw) {
    Matrix4c h = 0.5 * (rho_raw + rho_raw.adjoint());
    h /= h.trace();
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h);
    Eigen::Vector4d lam = solver.eigenvalues().reverse();  // descending
    Matrix4c vecs = solver.eigenvectors().rowwise().reverse();

    // Clip negative eigenvalues, redistributing the deficit over the
    // remaining ones so the trace stays 1.
    double acc = 0.0;
    int last = 3;
    while (last >= 0 && lam(last) + acc / (last + 1) < 0.0) {
        acc += lam(last);
        lam(last) = 0.0;
        --last;
    }
    for (int i = 0; i <= last; ++i) lam(i) += acc / (last + 1);

    Matrix4c out = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i)
        out += lam(i) * (vecs.col(i) * vecs.col(i).adjoint());
    return DensityMatrix2Q{out};
}

namespace {

CellResult cell_from_counts(const std::array<double, 16>& counts16,
                            const TomographyDesign& design, uint64_t total,
                            uint64_t min_counts) {
    CellResult cell;
    cell.total_counts = total;
    std::copy(counts16.begin(), counts16.end(), cell.counts16.begin());
    if (total < min_counts) return cell;
    DensityMatrix2Q rho = project_physical(design.reconstruct_linear(counts16));
    cell.concurrence = concurrence(rho);
    cell.eof = entanglement_of_formation(cell.concurrence);
    auto ph = biphoton_phase(rho);
    cell.phase_defined = ph.has_value();
    cell.phase = ph.value_or(0.0);
    cell.valid = true;
    return cell;
}

}  // namespace

EntanglementMaps map_tomography(
    const std::vector<CorrelationMatrix>& per_setting_counts,
    const SuperpixelGrid& grid, const TomographyDesign& design,
    uint64_t min_counts) {
    if (per_setting_counts.size() != 16)
        throw std::invalid_argument("map_tomography: expected 16 matrices");
    for (const auto& m : per_setting_counts)
        if (m.d != grid.d())
            throw std::invalid_argument("map_tomography: matrix/grid mismatch");

    EntanglementMaps maps;
    maps.grid = grid;
    maps.cells.resize(static_cast<size_t>(grid.d()));

    uint64_t max_total = 0;
    for (int m = 0; m < grid.d(); ++m) {
        std::array<double, 16> counts16{};
        uint64_t total = 0;
        for (size_t v = 0; v < 16; ++v) {
            uint64_t c = per_setting_counts[v].at(m, m);
            counts16[v] = static_cast<double>(c);
            total += c;
        }
        maps.cells[static_cast<size_t>(m)] =
            cell_from_counts(counts16, design, total, min_counts);
        maps.cells[static_cast<size_t>(m)].mode = m;
        max_total = std::max(max_total, total);
    }
    for (auto& c : maps.cells)
        c.intensity = max_total > 0 ? static_cast<double>(c.total_counts) /
                                          static_cast<double>(max_total)
                                    : 0.0;
    return maps;
}

namespace {

std::pair<double, double> weighted_c_e(const std::vector<CellResult>& cells,
                                       bool count_weighted) {
    double wsum = 0, csum = 0, esum = 0;
    for (const auto& c : cells) {
        if (!c.valid) continue;
        double w = count_weighted ? static_cast<double>(c.total_counts) : 1.0;
        wsum += w;
        csum += w * c.concurrence;
        esum += w * c.eof;
    }
    if (wsum <= 0) throw std::runtime_error("aggregate: no valid cells");
    return {csum / wsum, esum / wsum};
}

}  // namespace

AggregateResult aggregate(const EntanglementMaps& maps,
                          const TomographyDesign& design, int n_bootstrap,
                          bool count_weighted, uint64_t seed,
                          uint64_t min_counts) {
    AggregateResult res;
    auto [avg_c, avg_e] = weighted_c_e(maps.cells, count_weighted);
    res.avg_concurrence = avg_c;
    res.avg_eof = avg_e;
    for (const auto& c : maps.cells)
        if (c.valid) ++res.valid_cells;

    if (n_bootstrap > 1) {
        std::vector<double> boot_c, boot_e;
        boot_c.reserve(static_cast<size_t>(n_bootstrap));
        boot_e.reserve(static_cast<size_t>(n_bootstrap));
        for (int b = 0; b < n_bootstrap; ++b) {
            Rng rng = Rng::for_chunk(seed, static_cast<uint64_t>(b));
            std::vector<CellResult> resampled;
            resampled.reserve(maps.cells.size());
            for (const auto& c : maps.cells) {
                if (!c.valid) continue;
                std::array<double, 16> counts{};
                uint64_t total = 0;
                for (size_t v = 0; v < 16; ++v) {
                    int64_t n = rng.poisson(c.counts16[v]);
                    counts[v] = static_cast<double>(n);
                    total += static_cast<uint64_t>(n);
                }
                resampled.push_back(
                    cell_from_counts(counts, design, total, min_counts));
            }
            auto [bc, be] = weighted_c_e(resampled, count_weighted);
            boot_c.push_back(bc);
            boot_e.push_back(be);
        }
        auto stdev = [](const std::vector<double>& v) {
            double mean = 0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0;
            for (double x : v) var += (x - mean) * (x - mean);
            return std::sqrt(var / static_cast<double>(v.size() - 1));
        };
        res.err_concurrence = stdev(boot_c);
        res.err_eof = stdev(boot_e);
    }
    return res;
}

HyperdimResult hyperdimensionality(const CertificationResult& spatial,
                                   double avg_eof) {
    if (spatial.certified_dim < 1)
        throw std::invalid_argument("hyperdimensionality: spatial dim < 1");
    if (avg_eof < 0.0 || avg_eof > 1.0)
        throw std::domain_error("hyperdimensionality: avg_eof outside [0, 1]");
    HyperdimResult r;
    r.spatial_dim = spatial.certified_dim;
    r.avg_eof = avg_eof;
    r.total_dim = static_cast<int>(
        std::floor(spatial.certified_dim * std::exp2(avg_eof) + 1e-9));
    return r;
}

PumpMapResult pump_momentum_maps(
    const std::vector<CorrelationMatrix>& per_setting_counts,
    const SuperpixelGrid& grid, const TomographyDesign& design,
    const DetectorConfig& det, int fixed_signal_mode, uint64_t min_counts) {
    if (per_setting_counts.size() != 16)
        throw std::invalid_argument("pump_momentum_maps: expected 16 matrices");
    const int d = grid.d();

    int fixed = fixed_signal_mode;
    if (fixed < 0) {
        // Pick the signal row with the most coincidences.
        uint64_t best = 0;
        fixed = 0;
        for (int m = 0; m < d; ++m) {
            uint64_t row = 0;
            for (int n = 0; n < d; ++n)
                for (const auto& mat : per_setting_counts) row += mat.at(m, n);
            if (row > best) {
                best = row;
                fixed = m;
            }
        }
    }

    double px_per_rad = det.f_eff_mm * 1000.0 / det.pixel_pitch_um;
    auto momentum_of = [&](double cx, double cy, bool signal_arm) {
        double ax = signal_arm ? grid.signal_anchor_x : grid.idler_anchor_x;
        double ay = signal_arm ? grid.signal_anchor_y : grid.idler_anchor_y;
        return std::make_pair((cx - ax) / px_per_rad, (cy - ay) / px_per_rad);
    };
    auto [scx, scy] = grid.signal_centers[static_cast<size_t>(fixed)];
    auto [ps_x, ps_y] = momentum_of(scx, scy, true);

    PumpMapResult res;
    res.fixed_signal_mode = fixed;
    size_t populated = 0;
    for (int n = 0; n < d; ++n) {
        std::array<double, 16> counts16{};
        uint64_t total = 0;
        for (size_t v = 0; v < 16; ++v) {
            uint64_t c = per_setting_counts[v].at(fixed, n);
            counts16[v] = static_cast<double>(c);
            total += c;
        }
        if (total == 0) continue;
        PumpMapCell cell;
        cell.idler_mode = n;
        auto [icx, icy] = grid.idler_center(n);
        auto [pi_x, pi_y] = momentum_of(icx, icy, false);
        cell.pp_x = ps_x + pi_x;
        cell.pp_y = ps_y + pi_y;
        cell.total_counts = total;
        if (total >= min_counts) {
            CellResult cr = cell_from_counts(counts16, design, total, min_counts);
            cell.concurrence = cr.concurrence;
            cell.phase = cr.phase;
            cell.phase_defined = cr.phase_defined;
            cell.valid = true;
            ++populated;
        }
        res.cells.push_back(cell);
    }
    if (populated < 3)
        throw std::runtime_error(
            "pump_momentum_maps: fewer than 3 populated idler superpixels");
    return res;
}

}  // namespace hyperent
