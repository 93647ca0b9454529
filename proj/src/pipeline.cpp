#include "hyperent/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace hyperent {

namespace {

struct ClusterAccum {
    int32_t parent = -1;  // union-find; self-parent = root
    double sum_wx = 0.0, sum_wy = 0.0;
    uint64_t sum_tot = 0;
    int count = 0;
    int64_t last_toa = 0;
    // Reference pixel: max tot, ties by earliest toa then lowest (y, x).
    uint32_t ref_tot = 0;
    int64_t ref_toa = 0;
    uint16_t ref_x = 0, ref_y = 0;
};

int32_t find_root(std::vector<ClusterAccum>& cs, int32_t i) {
    while (cs[i].parent != i) {
        cs[i].parent = cs[cs[i].parent].parent;
        i = cs[i].parent;
    }
    return i;
}

bool ref_better(uint32_t tot, int64_t toa, uint16_t x, uint16_t y,
                const ClusterAccum& c) {
    if (tot != c.ref_tot) return tot > c.ref_tot;
    if (toa != c.ref_toa) return toa < c.ref_toa;
    if (y != c.ref_y) return y < c.ref_y;
    return x < c.ref_x;
}

}  // namespace

CentroidResult cluster_and_centroid(std::span<const PhotonEvent> events,
                                    const ClusterParams& params,
                                    const Roi& signal_roi,
                                    const Roi& idler_roi) {
    CentroidResult result;
    if (events.empty()) return result;

    int max_x = 0, max_y = 0;
    for (const auto& e : events) {
        max_x = std::max(max_x, static_cast<int>(e.x));
        max_y = std::max(max_y, static_cast<int>(e.y));
    }
    const int w = max_x + 1, h = max_y + 1;

    struct PixelSlot {
        int32_t cluster = -1;
        int64_t toa = std::numeric_limits<int64_t>::min();
    };
    std::vector<PixelSlot> grid(static_cast<size_t>(w) * h);
    std::vector<ClusterAccum> clusters;
    clusters.reserve(events.size() / 3 + 8);

    int64_t prev_toa = std::numeric_limits<int64_t>::min();
    const int r = params.spatial_radius;

    for (const auto& e : events) {
        int64_t toa = static_cast<int64_t>(e.toa_ns);
        if (toa < prev_toa)
            throw std::invalid_argument(
                "cluster_and_centroid: events not sorted by toa");
        prev_toa = toa;

        int32_t home = -1;
        for (int dy = -r; dy <= r; ++dy) {
            int ny = e.y + dy;
            if (ny < 0 || ny >= h) continue;
            for (int dx = -r; dx <= r; ++dx) {
                int nx = e.x + dx;
                if (nx < 0 || nx >= w) continue;
                const PixelSlot& slot = grid[static_cast<size_t>(ny) * w + nx];
                if (slot.cluster < 0 || toa - slot.toa > params.temporal_gap)
                    continue;
                int32_t root = find_root(clusters, slot.cluster);
                if (home < 0) {
                    home = root;
                } else if (root != home) {
                    // Merge; accumulators are additive, so the final
                    // photon set does not depend on merge order.
                    ClusterAccum& a = clusters[home];
                    ClusterAccum& b = clusters[root];
                    a.sum_wx += b.sum_wx;
                    a.sum_wy += b.sum_wy;
                    a.sum_tot += b.sum_tot;
                    a.count += b.count;
                    a.last_toa = std::max(a.last_toa, b.last_toa);
                    if (ref_better(b.ref_tot, b.ref_toa, b.ref_x, b.ref_y, a)) {
                        a.ref_tot = b.ref_tot;
                        a.ref_toa = b.ref_toa;
                        a.ref_x = b.ref_x;
                        a.ref_y = b.ref_y;
                    }
                    b.parent = home;
                    b.count = 0;
                }
            }
        }
        if (home < 0) {
            home = static_cast<int32_t>(clusters.size());
            ClusterAccum c;
            c.parent = home;
            c.ref_toa = std::numeric_limits<int64_t>::max();
            clusters.push_back(c);
        }
        ClusterAccum& c = clusters[home];
        double tot = static_cast<double>(e.tot);
        c.sum_wx += tot * e.x;
        c.sum_wy += tot * e.y;
        c.sum_tot += e.tot;
        c.count += 1;
        c.last_toa = std::max(c.last_toa, toa);
        if (ref_better(e.tot, toa, e.x, e.y, c)) {
            c.ref_tot = e.tot;
            c.ref_toa = toa;
            c.ref_x = e.x;
            c.ref_y = e.y;
        }
        grid[static_cast<size_t>(e.y) * w + e.x] = {home, toa};
    }

    result.photons.reserve(clusters.size());
    for (size_t i = 0; i < clusters.size(); ++i) {
        const ClusterAccum& c = clusters[i];
        if (c.parent != static_cast<int32_t>(i) || c.count == 0) continue;
        CentroidedPhoton p;
        p.cx = c.sum_wx / static_cast<double>(c.sum_tot);
        p.cy = c.sum_wy / static_cast<double>(c.sum_tot);
        p.toa_corr = c.ref_toa;
        p.cluster_size = c.count;
        p.total_tot = c.sum_tot;
        if (signal_roi.contains(p.cx, p.cy)) {
            p.arm = Arm::signal;
        } else if (idler_roi.contains(p.cx, p.cy)) {
            p.arm = Arm::idler;
        } else {
            result.outside_roi++;
            continue;
        }
        result.photons.push_back(p);
    }
    std::sort(result.photons.begin(), result.photons.end(),
              [](const CentroidedPhoton& a, const CentroidedPhoton& b) {
                  if (a.toa_corr != b.toa_corr) return a.toa_corr < b.toa_corr;
                  if (a.cy != b.cy) return a.cy < b.cy;
                  return a.cx < b.cx;
              });
    return result;
}

namespace {

void check_sorted(std::span<const CentroidedPhoton> photons, const char* what) {
    for (size_t i = 1; i < photons.size(); ++i)
        if (photons[i].toa_corr < photons[i - 1].toa_corr)
            throw std::invalid_argument(std::string(what) +
                                        ": photons not sorted by toa_corr");
}

}  // namespace

std::vector<CoincidencePair> find_coincidences(
    std::span<const CentroidedPhoton> signal,
    std::span<const CentroidedPhoton> idler, int64_t window_ns) {
    check_sorted(signal, "find_coincidences(signal)");
    check_sorted(idler, "find_coincidences(idler)");

    std::vector<CoincidencePair> pairs;
    std::vector<char> used(idler.size(), 0);
    size_t lo = 0;
    for (const auto& s : signal) {
        while (lo < idler.size() && idler[lo].toa_corr < s.toa_corr - window_ns)
            ++lo;
        size_t best = idler.size();
        int64_t best_abs = window_ns + 1;
        for (size_t j = lo;
             j < idler.size() && idler[j].toa_corr <= s.toa_corr + window_ns;
             ++j) {
            if (used[j]) continue;
            int64_t dt = idler[j].toa_corr - s.toa_corr;
            int64_t a = dt < 0 ? -dt : dt;
            if (a < best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < idler.size()) {
            used[best] = 1;
            pairs.push_back({s, idler[best], idler[best].toa_corr - s.toa_corr});
        }
    }
    return pairs;
}

size_t accidental_estimate(std::span<const CentroidedPhoton> signal,
                           std::span<const CentroidedPhoton> idler,
                           int64_t window_ns, int64_t offset_ns) {
    std::vector<CentroidedPhoton> shifted(idler.begin(), idler.end());
    for (auto& p : shifted) p.toa_corr += offset_ns;
    return find_coincidences(signal, shifted, window_ns).size();
}

std::pair<std::vector<CentroidedPhoton>, std::vector<CentroidedPhoton>>
split_by_arm(std::span<const CentroidedPhoton> photons) {
    std::vector<CentroidedPhoton> s, i;
    for (const auto& p : photons)
        (p.arm == Arm::signal ? s : i).push_back(p);
    return {std::move(s), std::move(i)};
}

}  // namespace hyperent
