#pragma once

// File formats: binary event stream (little-endian, 16-byte records),
// binary photon/pair intermediates, CSV exports, and the gzip-compressed
// ground-truth sidecar.

#include <string>
#include <vector>

#include "hyperent/spatial.hpp"

namespace hyperent {

// 8-byte magic + u32 version + u32 record count + 64-byte config hash.
inline constexpr char kEventMagic[9] = "HYPEVT01";
inline constexpr char kPhotonMagic[9] = "HYPPHO01";
inline constexpr char kPairMagic[9] = "HYPPAIR1";
inline constexpr uint32_t kFormatVersion = 1;

void write_events(const std::string& path, const std::vector<PhotonEvent>& events,
                  const std::string& config_hash);

struct EventFile {
    std::vector<PhotonEvent> events;
    std::string config_hash;
    uint32_t version = 0;
};
EventFile read_events(const std::string& path);

void write_photons(const std::string& path,
                   const std::vector<CentroidedPhoton>& photons,
                   const std::string& config_hash);
std::vector<CentroidedPhoton> read_photons(const std::string& path);

void write_pairs(const std::string& path,
                 const std::vector<CoincidencePair>& pairs,
                 const std::string& config_hash);
std::vector<CoincidencePair> read_pairs(const std::string& path);

void write_truth_csv_gz(const std::string& path,
                        const std::vector<PairTruth>& truth);
std::vector<PairTruth> read_truth_csv_gz(const std::string& path);

void write_matrix_csv(const std::string& path, const CorrelationMatrix& m,
                      const std::string& config_hash);
CorrelationMatrix read_matrix_csv(const std::string& path);

void write_histogram_csv(const std::string& path, const Histogram1D& h,
                         const std::string& config_hash);

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& data);

/// SHA-256 of a file's contents, lowercase hex.
std::string sha256_file(const std::string& path);

}  // namespace hyperent
