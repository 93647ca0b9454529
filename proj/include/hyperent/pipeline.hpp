#pragma once

// Raw event stream -> centroided photons -> coincidence pairs.

#include <cstdint>
#include <span>
#include <vector>

#include "hyperent/synth.hpp"

namespace hyperent {

struct CentroidedPhoton {
    double cx = 0.0;  // amplitude-weighted centroid, fractional pixels
    double cy = 0.0;
    int64_t toa_corr = 0;   // timestamp of the max-tot reference pixel, ns
    int cluster_size = 0;
    uint64_t total_tot = 0;
    Arm arm = Arm::signal;
};

struct CoincidencePair {
    CentroidedPhoton signal;
    CentroidedPhoton idler;
    int64_t dt = 0;  // idler.toa_corr - signal.toa_corr
};

struct ClusterParams {
    int spatial_radius = 2;     // Chebyshev, pixels
    int64_t temporal_gap = 40;  // ns, single-linkage chain limit
};

struct CentroidResult {
    std::vector<CentroidedPhoton> photons;  // sorted by toa_corr
    uint64_t outside_roi = 0;  // photons whose centroid lies in neither ROI
};

/// Groups toa-sorted events into single-linkage clusters (within
/// spatial_radius AND temporal_gap) and reduces each to one photon.
/// The highest-tot pixel provides the time reference; ties break by
/// earliest toa, then lowest (y, x). Arm comes from ROI membership.
/// Throws std::invalid_argument on unsorted input.
CentroidResult cluster_and_centroid(std::span<const PhotonEvent> events,
                                    const ClusterParams& params,
                                    const Roi& signal_roi, const Roi& idler_roi);

/// Greedy one-to-one pairing: signal photons are scanned in time order
/// and each takes the unused idler with the smallest |dt| within the
/// window (ties -> earlier idler). Output sorted by signal time.
/// Throws std::invalid_argument on unsorted input.
std::vector<CoincidencePair> find_coincidences(
    std::span<const CentroidedPhoton> signal,
    std::span<const CentroidedPhoton> idler, int64_t window_ns = 10);

/// Coincidence count with idler timestamps shifted by offset;
/// expectation equals the accidental background. offset should be
/// much larger than the window.
size_t accidental_estimate(std::span<const CentroidedPhoton> signal,
                           std::span<const CentroidedPhoton> idler,
                           int64_t window_ns, int64_t offset_ns);

/// Splits photons by arm, preserving time order.
std::pair<std::vector<CentroidedPhoton>, std::vector<CentroidedPhoton>>
split_by_arm(std::span<const CentroidedPhoton> photons);

}  // namespace hyperent
