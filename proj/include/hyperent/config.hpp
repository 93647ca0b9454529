#pragma once

// Run configuration: JSON schema, validation, and provenance hashing.

#include <string>
#include <vector>

#include "hyperent/synth.hpp"

namespace hyperent {

struct GridParams {
    double radius_px = 28.0;  // active-set disk radius about the anchor
    int cell = 3;
    int stride = 5;
};

struct PipelineParams {
    int64_t window_ns = 10;
    int spatial_radius = 2;
    int64_t temporal_gap_ns = 40;
    uint64_t min_counts = 100;
};

struct TomoParams {
    int n_bootstrap = 100;
    bool count_weighted = true;
};

struct RunConfig {
    int schema_version = 1;
    SourceConfig source;
    DetectorConfig detector;
    // 16 two-character polarization labels (signal, idler); empty means
    // the standard tomography set. A full settings table with explicit
    // waveplate angles may be given in JSON instead.
    std::vector<std::string> setting_labels;
    std::vector<MeasurementSetting> settings_table;  // overrides labels
    bool near_field_run = true;
    GridParams grid;
    PipelineParams pipeline;
    TomoParams tomo;
    uint64_t seed = 1;

    void validate() const;

    /// The far-field tomography settings resolved from the table/labels.
    std::vector<MeasurementSetting> settings() const;

    std::string to_json_string() const;
    static RunConfig from_json_string(const std::string& text);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;

    /// SHA-256 of the canonical JSON serialization.
    std::string hash() const;
};

}  // namespace hyperent
