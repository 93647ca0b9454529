#include "hyperent/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hyperent/event_io.hpp"
#include "json.hpp"

namespace hyperent {

using nlohmann::json;

namespace {

json roi_to_json(const Roi& r) {
    return json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}};
}

Roi roi_from_json(const json& j) {
    return Roi{j.at("x0").get<int>(), j.at("y0").get<int>(),
               j.at("width").get<int>(), j.at("height").get<int>()};
}

json waveplate_to_json(const WaveplateSetting& w) {
    return json{{"hwp", w.hwp_angle},
                {"qwp", w.qwp_angle},
                {"port", w.port == PbsPort::transmit ? "transmit" : "reflect"}};
}

WaveplateSetting waveplate_from_json(const json& j) {
    WaveplateSetting w;
    w.hwp_angle = j.at("hwp").get<double>();
    w.qwp_angle = j.at("qwp").get<double>();
    std::string port = j.value("port", "transmit");
    if (port != "transmit" && port != "reflect")
        throw std::invalid_argument("port must be transmit or reflect");
    w.port = port == "transmit" ? PbsPort::transmit : PbsPort::reflect;
    return w;
}

json build(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["source"] = {{"sigma_pump", c.source.sigma_pump},
                   {"sigma_pm", c.source.sigma_pm},
                   {"ring_radius", c.source.ring_radius},
                   {"phi0", c.source.phi0},
                   {"alpha", c.source.alpha},
                   {"beta_x", c.source.beta_x},
                   {"beta_y", c.source.beta_y},
                   {"visibility", c.source.visibility},
                   {"hh_vv_imbalance", c.source.hh_vv_imbalance}};
    const DetectorConfig& d = c.detector;
    j["detector"] = {{"sensor_size", d.sensor_size},
                     {"pixel_pitch_um", d.pixel_pitch_um},
                     {"f_eff_mm", d.f_eff_mm},
                     {"magnification", d.magnification},
                     {"wavelength_nm", d.wavelength_nm},
                     {"epr_wavelength_nm", d.epr_wavelength_nm},
                     {"time_resolution_ns", d.time_resolution_ns},
                     {"time_walk_coeff", d.time_walk_coeff},
                     {"cluster_sigma", d.cluster_sigma},
                     {"cluster_mean_size", d.cluster_mean_size},
                     {"efficiency", d.efficiency},
                     {"dark_rate_hz", d.dark_rate_hz},
                     {"nf_beam_sigma_um", d.nf_beam_sigma_um},
                     {"nf_corr_sigma_um", d.nf_corr_sigma_um},
                     {"signal_roi", roi_to_json(d.signal_roi)},
                     {"idler_roi", roi_to_json(d.idler_roi)},
                     {"acquisition_s", d.acquisition_s},
                     {"pair_rate_hz", d.pair_rate_hz},
                     {"deterministic_split", d.deterministic_split}};
    j["setting_labels"] = c.setting_labels;
    if (!c.settings_table.empty()) {
        json table = json::array();
        for (const auto& s : c.settings_table)
            table.push_back({{"label", s.label},
                             {"signal", waveplate_to_json(s.signal)},
                             {"idler", waveplate_to_json(s.idler)}});
        j["settings_table"] = table;
    }
    j["near_field_run"] = c.near_field_run;
    j["grid"] = {{"radius_px", c.grid.radius_px},
                 {"cell", c.grid.cell},
                 {"stride", c.grid.stride}};
    j["pipeline"] = {{"window_ns", c.pipeline.window_ns},
                     {"spatial_radius", c.pipeline.spatial_radius},
                     {"temporal_gap_ns", c.pipeline.temporal_gap_ns},
                     {"min_counts", c.pipeline.min_counts}};
    j["tomo"] = {{"n_bootstrap", c.tomo.n_bootstrap},
                 {"count_weighted", c.tomo.count_weighted}};
    return j;
}

RunConfig parse(const json& j) {
    if (!j.contains("schema_version"))
        throw std::invalid_argument("config missing schema_version");
    RunConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1)
        throw std::invalid_argument("unsupported config schema_version");
    c.seed = j.value("seed", uint64_t{1});
    if (j.contains("source")) {
        const json& s = j.at("source");
        c.source.sigma_pump = s.value("sigma_pump", c.source.sigma_pump);
        c.source.sigma_pm = s.value("sigma_pm", c.source.sigma_pm);
        c.source.ring_radius = s.value("ring_radius", c.source.ring_radius);
        c.source.phi0 = s.value("phi0", c.source.phi0);
        c.source.alpha = s.value("alpha", c.source.alpha);
        c.source.beta_x = s.value("beta_x", c.source.beta_x);
        c.source.beta_y = s.value("beta_y", c.source.beta_y);
        c.source.visibility = s.value("visibility", c.source.visibility);
        c.source.hh_vv_imbalance =
            s.value("hh_vv_imbalance", c.source.hh_vv_imbalance);
    }
    if (j.contains("detector")) {
        const json& d = j.at("detector");
        DetectorConfig& t = c.detector;
        t.sensor_size = d.value("sensor_size", t.sensor_size);
        t.pixel_pitch_um = d.value("pixel_pitch_um", t.pixel_pitch_um);
        t.f_eff_mm = d.value("f_eff_mm", t.f_eff_mm);
        t.magnification = d.value("magnification", t.magnification);
        t.wavelength_nm = d.value("wavelength_nm", t.wavelength_nm);
        t.epr_wavelength_nm = d.value("epr_wavelength_nm", t.epr_wavelength_nm);
        t.time_resolution_ns = d.value("time_resolution_ns", t.time_resolution_ns);
        t.time_walk_coeff = d.value("time_walk_coeff", t.time_walk_coeff);
        t.cluster_sigma = d.value("cluster_sigma", t.cluster_sigma);
        t.cluster_mean_size = d.value("cluster_mean_size", t.cluster_mean_size);
        t.efficiency = d.value("efficiency", t.efficiency);
        t.dark_rate_hz = d.value("dark_rate_hz", t.dark_rate_hz);
        t.nf_beam_sigma_um = d.value("nf_beam_sigma_um", t.nf_beam_sigma_um);
        t.nf_corr_sigma_um = d.value("nf_corr_sigma_um", t.nf_corr_sigma_um);
        if (d.contains("signal_roi")) t.signal_roi = roi_from_json(d.at("signal_roi"));
        if (d.contains("idler_roi")) t.idler_roi = roi_from_json(d.at("idler_roi"));
        t.acquisition_s = d.value("acquisition_s", t.acquisition_s);
        t.pair_rate_hz = d.value("pair_rate_hz", t.pair_rate_hz);
        t.deterministic_split =
            d.value("deterministic_split", t.deterministic_split);
        t.seed = c.seed;
    }
    c.setting_labels =
        j.value("setting_labels", std::vector<std::string>{});
    if (j.contains("settings_table")) {
        for (const auto& e : j.at("settings_table")) {
            MeasurementSetting s;
            s.label = e.at("label").get<std::string>();
            s.signal = waveplate_from_json(e.at("signal"));
            s.idler = waveplate_from_json(e.at("idler"));
            c.settings_table.push_back(std::move(s));
        }
    }
    c.near_field_run = j.value("near_field_run", true);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        c.grid.radius_px = g.value("radius_px", c.grid.radius_px);
        c.grid.cell = g.value("cell", c.grid.cell);
        c.grid.stride = g.value("stride", c.grid.stride);
    }
    if (j.contains("pipeline")) {
        const json& p = j.at("pipeline");
        c.pipeline.window_ns = p.value("window_ns", c.pipeline.window_ns);
        c.pipeline.spatial_radius =
            p.value("spatial_radius", c.pipeline.spatial_radius);
        c.pipeline.temporal_gap_ns =
            p.value("temporal_gap_ns", c.pipeline.temporal_gap_ns);
        c.pipeline.min_counts = p.value("min_counts", c.pipeline.min_counts);
    }
    if (j.contains("tomo")) {
        const json& t = j.at("tomo");
        c.tomo.n_bootstrap = t.value("n_bootstrap", c.tomo.n_bootstrap);
        c.tomo.count_weighted = t.value("count_weighted", c.tomo.count_weighted);
    }
    return c;
}

}  // namespace

void RunConfig::validate() const {
    source.validate();
    detector.validate();
    if (grid.cell < 1 || grid.stride < grid.cell)
        throw std::invalid_argument("grid stride must be >= cell size >= 1");
    if (grid.radius_px <= 0)
        throw std::invalid_argument("grid radius_px must be > 0");
    if (pipeline.window_ns <= 0 || pipeline.temporal_gap_ns <= 0 ||
        pipeline.spatial_radius < 0)
        throw std::invalid_argument("invalid pipeline parameters");
    auto s = settings();
    std::set<std::string> labels;
    for (const auto& m : s)
        if (!labels.insert(m.label).second)
            throw std::invalid_argument("duplicate setting label " + m.label);
}

std::vector<MeasurementSetting> RunConfig::settings() const {
    if (!settings_table.empty()) {
        if (settings_table.size() != 16)
            throw std::invalid_argument("settings_table must have 16 entries");
        return settings_table;
    }
    if (setting_labels.empty()) return tomography_settings16();
    if (setting_labels.size() != 16)
        throw std::invalid_argument("setting_labels must have 16 entries");
    std::vector<MeasurementSetting> out;
    for (const auto& l : setting_labels) {
        if (l.size() != 2)
            throw std::invalid_argument("setting label must have 2 characters");
        MeasurementSetting s;
        s.label = l;
        s.signal = waveplates_for(l[0]);
        s.idler = waveplates_for(l[1]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string RunConfig::to_json_string() const { return build(*this).dump(2); }

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    return parse(j);
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig c = from_json_string(ss.str());
    c.validate();
    return c;
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write config " + path);
    out << to_json_string() << "\n";
}

std::string RunConfig::hash() const { return sha256_hex(to_json_string()); }

}  // namespace hyperent
