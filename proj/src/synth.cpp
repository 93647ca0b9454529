#include "hyperent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperent {

void DetectorConfig::validate() const {
    if (sensor_size <= 0) throw std::invalid_argument("sensor_size must be > 0");
    if (!(efficiency > 0.0) || efficiency > 1.0)
        throw std::invalid_argument("efficiency must be in (0, 1]");
    if (dark_rate_hz < 0.0 || pair_rate_hz < 0.0)
        throw std::invalid_argument("rates must be >= 0");
    if (acquisition_s < 0.0)
        throw std::invalid_argument("acquisition_s must be >= 0");
    auto inside = [&](const Roi& r) {
        return r.width > 0 && r.height > 0 && r.x0 >= 0 && r.y0 >= 0 &&
               r.x0 + r.width <= sensor_size && r.y0 + r.height <= sensor_size;
    };
    if (!inside(signal_roi) || !inside(idler_roi))
        throw std::invalid_argument("ROIs must lie inside the sensor");
    bool overlap = signal_roi.x0 < idler_roi.x0 + idler_roi.width &&
                   idler_roi.x0 < signal_roi.x0 + signal_roi.width &&
                   signal_roi.y0 < idler_roi.y0 + idler_roi.height &&
                   idler_roi.y0 < signal_roi.y0 + signal_roi.height;
    if (overlap) throw std::invalid_argument("signal and idler ROIs overlap");
    if (pixel_pitch_um <= 0.0 || f_eff_mm <= 0.0 || magnification <= 0.0)
        throw std::invalid_argument("geometry parameters must be > 0");
}

BirthPosition sample_birth_position(const DetectorConfig& det, Rng& rng) {
    double cx = rng.normal(0.0, det.nf_beam_sigma_um);
    double cy = rng.normal(0.0, det.nf_beam_sigma_um);
    double dx = rng.normal(0.0, det.nf_corr_sigma_um);
    double dy = rng.normal(0.0, det.nf_corr_sigma_um);
    return {cx + 0.5 * dx, cy + 0.5 * dy, cx - 0.5 * dx, cy - 0.5 * dy};
}

bool assign_arms(const DetectorConfig& det, Rng& rng) {
    if (det.deterministic_split) return true;
    // Each photon exits reflect/transmit independently; keep only the
    // configurations with one photon per arm.
    bool first_to_signal = rng.bernoulli(0.5);
    bool second_to_signal = rng.bernoulli(0.5);
    return first_to_signal != second_to_signal;
}

JointOutcome project_polarization(const DensityMatrix2Q& rho,
                                  const MeasurementSetting& setting, Rng& rng) {
    PolarizationKet ks = projector_from_waveplates(setting.signal);
    PolarizationKet ki = projector_from_waveplates(setting.idler);
    double p_both = born_probability_joint(rho, ks, ki);
    // Marginal pass probabilities from the reduced states.
    Matrix2c proj_s = ks.amplitudes * ks.amplitudes.adjoint();
    Matrix2c proj_i = ki.amplitudes * ki.amplitudes.adjoint();
    const Matrix4c& m = rho.elements;
    Matrix2c red_s, red_i;
    red_s << m(0, 0) + m(1, 1), m(0, 2) + m(1, 3), m(2, 0) + m(3, 1),
        m(2, 2) + m(3, 3);
    red_i << m(0, 0) + m(2, 2), m(0, 1) + m(2, 3), m(1, 0) + m(3, 2),
        m(1, 1) + m(3, 3);
    double p_s = std::clamp(std::real((proj_s * red_s).trace()), 0.0, 1.0);
    double p_i = std::clamp(std::real((proj_i * red_i).trace()), 0.0, 1.0);
    double p_signal_only = std::max(0.0, p_s - p_both);
    double p_idler_only = std::max(0.0, p_i - p_both);
    double u = rng.uniform();
    if (u < p_both) return JointOutcome::both;
    if (u < p_both + p_signal_only) return JointOutcome::signal_only;
    if (u < p_both + p_signal_only + p_idler_only) return JointOutcome::idler_only;
    return JointOutcome::none;
}

namespace {

std::optional<std::pair<double, double>> clip_to_roi(const DetectorConfig& det,
                                                     const Roi& roi, double px,
                                                     double py) {
    if (!roi.contains(px, py)) return std::nullopt;
    return std::make_pair(px, py);
}

}  // namespace

std::optional<std::pair<double, double>> momentum_to_pixel(
    const DetectorConfig& det, const TransverseMomentum& p, Arm arm) {
    const Roi& roi = arm == Arm::signal ? det.signal_roi : det.idler_roi;
    double scale = det.f_eff_mm * 1000.0 / det.pixel_pitch_um;  // px per rad
    return clip_to_roi(det, roi, roi.center_x() + scale * p.px,
                       roi.center_y() + scale * p.py);
}

std::optional<std::pair<double, double>> position_to_pixel(
    const DetectorConfig& det, double qx_um, double qy_um, Arm arm) {
    const Roi& roi = arm == Arm::signal ? det.signal_roi : det.idler_roi;
    double scale = det.magnification / det.pixel_pitch_um;
    return clip_to_roi(det, roi, roi.center_x() + scale * qx_um,
                       roi.center_y() + scale * qy_um);
}

std::vector<PhotonEvent> emit_cluster(const DetectorConfig& det, double x,
                                      double y, double t_ns, Rng& rng) {
    // Truncated-Poisson cluster size, at least one pixel.
    int k = 0;
    do {
        k = static_cast<int>(rng.poisson(det.cluster_mean_size));
    } while (k < 1);

    double base_amp = rng.uniform(80.0, 160.0);
    // The intensifier pool spreads Gaussian charge over the pixel
    // neighborhood; the k pixels with the largest deposited amplitude
    // fire, with a trigger floor so every fired pixel carries enough
    // tot that its time walk stays within one cluster gap.
    struct Deposit {
        int ix, iy;
        double amp;
    };
    double sig = std::max(det.cluster_sigma, 0.25);
    constexpr double kTriggerFloor = 0.2;  // fraction of the peak amplitude
    std::vector<Deposit> deposits;
    int cx = static_cast<int>(std::lround(x));
    int cy = static_cast<int>(std::lround(y));
    for (int dx = -2; dx <= 2; ++dx)
        for (int dy = -2; dy <= 2; ++dy) {
            int ix = cx + dx, iy = cy + dy;
            if (ix < 0 || iy < 0 || ix >= det.sensor_size ||
                iy >= det.sensor_size)
                continue;
            double rx = ix - x, ry = iy - y;
            double amp = base_amp *
                         std::exp(-(rx * rx + ry * ry) / (2.0 * sig * sig)) *
                         rng.uniform(0.95, 1.05);
            if (amp >= kTriggerFloor * base_amp)
                deposits.push_back({ix, iy, amp});
        }
    std::sort(deposits.begin(), deposits.end(),
              [](const Deposit& a, const Deposit& b) { return a.amp > b.amp; });
    if (static_cast<int>(deposits.size()) > k) deposits.resize(
        static_cast<size_t>(k));
    std::vector<PhotonEvent> out;
    out.reserve(deposits.size());
    for (const auto& d : deposits) {
        uint32_t tot = std::max<uint32_t>(
            1, static_cast<uint32_t>(std::lround(d.amp)));
        double toa = t_ns + rng.normal(0.0, det.time_resolution_ns) +
                     det.time_walk_coeff / static_cast<double>(tot);
        if (toa < 0.0) toa = 0.0;
        PhotonEvent ev;
        ev.x = static_cast<uint16_t>(d.ix);
        ev.y = static_cast<uint16_t>(d.iy);
        ev.tot = tot;
        ev.toa_ns = static_cast<uint64_t>(std::llround(toa));
        out.push_back(ev);
    }
    if (out.empty()) {
        // All sampled pixels fell off-sensor or collided; keep the seed
        // pixel if it is on-sensor so the photon is not silently lost.
        int ix = static_cast<int>(std::lround(x));
        int iy = static_cast<int>(std::lround(y));
        if (ix >= 0 && iy >= 0 && ix < det.sensor_size && iy < det.sensor_size) {
            PhotonEvent ev;
            ev.x = static_cast<uint16_t>(ix);
            ev.y = static_cast<uint16_t>(iy);
            ev.tot = static_cast<uint32_t>(std::lround(base_amp));
            double toa = t_ns + rng.normal(0.0, det.time_resolution_ns) +
                         det.time_walk_coeff / base_amp;
            ev.toa_ns = static_cast<uint64_t>(std::llround(std::max(toa, 0.0)));
            out.push_back(ev);
        }
    }
    return out;
}

AcquisitionResult simulate_acquisition(const SourceConfig& src,
                                       const DetectorConfig& det,
                                       const MeasurementSetting& setting,
                                       uint64_t seed, bool record_truth) {
    src.validate();
    det.validate();
    AcquisitionResult res;
    Rng rng = Rng::for_chunk(seed, 0);

    double duration_ns = det.acquisition_s * 1e9;
    uint64_t n_pairs =
        static_cast<uint64_t>(rng.poisson(det.pair_rate_hz * det.acquisition_s));
    res.stats.pairs_generated = n_pairs;

    for (uint64_t i = 0; i < n_pairs; ++i) {
        uint64_t birth = static_cast<uint64_t>(rng.uniform() * duration_ns);
        auto [ps, pi] = sample_pair(src, rng);
        BirthPosition q = sample_birth_position(det, rng);

        PairTruth truth;
        truth.pair_id = i;
        truth.ps_x = ps.px;
        truth.ps_y = ps.py;
        truth.pi_x = pi.px;
        truth.pi_y = pi.py;
        truth.qs_x = q.qs_x;
        truth.qs_y = q.qs_y;
        truth.qi_x = q.qi_x;
        truth.qi_y = q.qi_y;
        truth.birth_ns = birth;

        if (!assign_arms(det, rng)) {
            if (record_truth) res.truth.push_back(truth);
            continue;
        }
        res.stats.pairs_surviving_arms++;

        DensityMatrix2Q rho = local_state(src, ps, pi);
        JointOutcome outcome = project_polarization(rho, setting, rng);
        truth.outcome = outcome;

        bool want_signal =
            outcome == JointOutcome::both || outcome == JointOutcome::signal_only;
        bool want_idler =
            outcome == JointOutcome::both || outcome == JointOutcome::idler_only;

        auto place = [&](Arm arm) -> std::optional<std::pair<double, double>> {
            if (setting.basis_plane == BasisPlane::far_field) {
                return momentum_to_pixel(det, arm == Arm::signal ? ps : pi, arm);
            }
            return arm == Arm::signal
                       ? position_to_pixel(det, q.qs_x, q.qs_y, arm)
                       : position_to_pixel(det, q.qi_x, q.qi_y, arm);
        };

        for (Arm arm : {Arm::signal, Arm::idler}) {
            bool want = arm == Arm::signal ? want_signal : want_idler;
            if (!want) continue;
            if (!rng.bernoulli(det.efficiency)) continue;
            auto px = place(arm);
            if (!px) {
                res.stats.vignetted++;
                continue;
            }
            res.stats.photons_detected++;
            if (arm == Arm::signal) {
                truth.signal_detected = true;
                truth.signal_px = px->first;
                truth.signal_py = px->second;
            } else {
                truth.idler_detected = true;
                truth.idler_px = px->first;
                truth.idler_py = px->second;
            }
            auto cluster = emit_cluster(det, px->first, px->second,
                                        static_cast<double>(birth), rng);
            res.events.insert(res.events.end(), cluster.begin(), cluster.end());
        }
        if (truth.signal_detected && truth.idler_detected)
            res.stats.coincident_truth++;
        if (record_truth) res.truth.push_back(truth);
    }

    // Dark counts, uniform over sensor and time.
    uint64_t n_dark = static_cast<uint64_t>(
        rng.poisson(det.dark_rate_hz * det.acquisition_s));
    res.stats.dark_events = n_dark;
    for (uint64_t i = 0; i < n_dark; ++i) {
        double x = rng.uniform() * det.sensor_size - 0.5;
        double y = rng.uniform() * det.sensor_size - 0.5;
        double t = rng.uniform() * duration_ns;
        auto cluster = emit_cluster(det, x, y, t, rng);
        res.events.insert(res.events.end(), cluster.begin(), cluster.end());
    }

    std::sort(res.events.begin(), res.events.end(),
              [](const PhotonEvent& a, const PhotonEvent& b) {
                  if (a.toa_ns != b.toa_ns) return a.toa_ns < b.toa_ns;
                  if (a.y != b.y) return a.y < b.y;
                  if (a.x != b.x) return a.x < b.x;
                  return a.tot < b.tot;
              });
    return res;
}

WaveplateSetting waveplates_for(char pol_label) {
    switch (pol_label) {
        case 'H': return {0.0, 0.0, PbsPort::transmit};
        case 'V': return {kPi / 4.0, 0.0, PbsPort::transmit};
        case 'D': return {kPi / 8.0, kPi / 4.0, PbsPort::transmit};
        case 'A': return {-kPi / 8.0, -kPi / 4.0, PbsPort::transmit};
        case 'R': return {0.0, -kPi / 4.0, PbsPort::transmit};
        case 'L': return {0.0, kPi / 4.0, PbsPort::transmit};
        default: throw std::invalid_argument("unknown polarization label");
    }
}

std::vector<MeasurementSetting> tomography_settings16(BasisPlane plane) {
    static const char* kPairs[16] = {"HH", "HV", "VV", "VH", "RH", "RV",
                                     "DV", "DH", "DR", "DD", "RD", "HD",
                                     "VD", "VL", "HL", "RL"};
    std::vector<MeasurementSetting> out;
    out.reserve(16);
    for (const char* p : kPairs) {
        MeasurementSetting s;
        s.label = p;
        s.signal = waveplates_for(p[0]);
        s.idler = waveplates_for(p[1]);
        s.basis_plane = plane;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace hyperent
