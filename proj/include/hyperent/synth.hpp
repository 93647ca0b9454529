#pragma once

// Event-stream synthesis: pair sampling, beam-splitter arm assignment,
// polarization projection, momentum/position to pixel mapping,
// intensifier cluster emission, time walk, jitter, efficiency, and
// dark counts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperent/source.hpp"

namespace hyperent {

struct Roi {
    int x0 = 0, y0 = 0, width = 0, height = 0;

    bool contains(int x, int y) const {
        return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
    }
    bool contains(double x, double y) const {
        return x >= x0 - 0.5 && x < x0 + width - 0.5 && y >= y0 - 0.5 &&
               y < y0 + height - 0.5;
    }
    double center_x() const { return x0 + 0.5 * (width - 1); }
    double center_y() const { return y0 + 0.5 * (height - 1); }
};

struct DetectorConfig {
    int sensor_size = 256;          // pixels per side
    double pixel_pitch_um = 55.0;
    double f_eff_mm = 75.0;         // far-field effective focal length
    double magnification = 2.0;     // near-field imaging magnification
    double wavelength_nm = 800.0;   // signal/idler center wavelength
    double epr_wavelength_nm = 810.0;  // wavevector used in the EPR check
    double time_resolution_ns = 2.0;   // single-photon timing jitter (std)
    double time_walk_coeff = 600.0;    // ns * tot units, delay = c / tot
    double cluster_sigma = 0.7;        // intensifier spread, pixels
    double cluster_mean_size = 4.0;    // truncated-Poisson mean pixel count
    double efficiency = 0.08;          // detection probability per photon
    double dark_rate_hz = 0.0;         // dark events per second, full sensor
    double nf_beam_sigma_um = 300.0;   // birth-position beam width at crystal
    double nf_corr_sigma_um = 27.0;    // birth-position difference width
    Roi signal_roi{0, 0, 128, 256};
    Roi idler_roi{128, 0, 128, 256};
    double acquisition_s = 1.0;
    double pair_rate_hz = 200000.0;    // generated pairs per second
    bool deterministic_split = false;  // route photon 1 -> signal, 2 -> idler
    uint64_t seed = 1;

    void validate() const;
};

struct PhotonEvent {
    uint16_t x = 0;
    uint16_t y = 0;
    uint32_t tot = 0;   // amplitude surrogate, arbitrary units
    uint64_t toa_ns = 0;
};

enum class BasisPlane { far_field, near_field };

struct MeasurementSetting {
    std::string label;  // e.g. "VV", "DR"
    WaveplateSetting signal;
    WaveplateSetting idler;
    BasisPlane basis_plane = BasisPlane::far_field;
};

enum class Arm { signal, idler };

enum class JointOutcome { both, signal_only, idler_only, none };

// Per-pair ground truth emitted alongside the event stream for tests.
struct PairTruth {
    uint64_t pair_id = 0;
    double ps_x = 0, ps_y = 0, pi_x = 0, pi_y = 0;  // rad
    double qs_x = 0, qs_y = 0, qi_x = 0, qi_y = 0;  // birth position, um
    uint64_t birth_ns = 0;
    JointOutcome outcome = JointOutcome::none;
    // True (pre-cluster) sensor hit positions, fractional pixels; valid
    // only for the detected photons of the pair.
    double signal_px = 0, signal_py = 0, idler_px = 0, idler_py = 0;
    bool signal_detected = false, idler_detected = false;
};

struct AcquisitionStats {
    uint64_t pairs_generated = 0;
    uint64_t pairs_surviving_arms = 0;
    uint64_t photons_detected = 0;
    uint64_t vignetted = 0;
    uint64_t dark_events = 0;
    uint64_t coincident_truth = 0;  // pairs with both photons detected
};

struct AcquisitionResult {
    std::vector<PhotonEvent> events;  // globally sorted by toa
    std::vector<PairTruth> truth;     // empty unless requested
    AcquisitionStats stats;
};

struct BirthPosition {
    double qs_x = 0, qs_y = 0;  // um at the crystal plane
    double qi_x = 0, qi_y = 0;
};

/// Correlated birth positions: common Gaussian beam envelope plus a
/// narrow Gaussian difference between the two photons.
BirthPosition sample_birth_position(const DetectorConfig& det, Rng& rng);

/// Routes a pair through the non-polarizing splitter. Returns false when
/// both photons exit the same port (pair discarded). With
/// deterministic_split the pair always survives.
bool assign_arms(const DetectorConfig& det, Rng& rng);

/// Samples the four-outcome joint PBS-port detection result for one pair.
JointOutcome project_polarization(const DensityMatrix2Q& rho,
                                  const MeasurementSetting& setting, Rng& rng);

/// Far-field map: pixel = ROI center + f_eff * p / pitch. Returns nullopt
/// when the hit lands outside the arm's ROI (vignetted).
std::optional<std::pair<double, double>> momentum_to_pixel(
    const DetectorConfig& det, const TransverseMomentum& p, Arm arm);

/// Near-field map: pixel = ROI center + M * q / pitch, q in um.
std::optional<std::pair<double, double>> position_to_pixel(
    const DetectorConfig& det, double qx_um, double qy_um, Arm arm);

/// Intensifier cluster around a true hit: 1..K pixels, Gaussian spread,
/// amplitude decreasing with distance, per-pixel jitter and time walk.
std::vector<PhotonEvent> emit_cluster(const DetectorConfig& det, double x,
                                      double y, double t_ns, Rng& rng);

AcquisitionResult simulate_acquisition(const SourceConfig& src,
                                       const DetectorConfig& det,
                                       const MeasurementSetting& setting,
                                       uint64_t seed, bool record_truth = false);

/// The 16 tomographic settings: all (signal, idler) pairs used in the
/// standard two-qubit reconstruction, expressed as waveplate angles.
std::vector<MeasurementSetting> tomography_settings16(
    BasisPlane plane = BasisPlane::far_field);

/// Waveplate angles projecting onto one of H, V, D, A, R, L.
WaveplateSetting waveplates_for(char pol_label);

}  // namespace hyperent
