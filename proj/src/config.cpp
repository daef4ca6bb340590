#include "moire/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "moire/io.hpp"

namespace moire {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json grating_json(const Gratingd& g) {
  return json{{"pitch", g.pitch}, {"orientation", g.orientation}, {"phase_offset", g.phase_offset}};
}

Gratingd grating_from(const json& j, const std::string& where) {
  reject_unknown(j, {"pitch", "orientation", "phase_offset"}, where);
  double pitch = 0, orientation = 0, phase = 0;
  get_if(j, "pitch", pitch);
  get_if(j, "orientation", orientation);
  get_if(j, "phase_offset", phase);
  return Gratingd(pitch, orientation, phase);
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

std::string config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = "1";
  j["geometry"] = {{"far", grating_json(c.geometry.far)},
                   {"near", grating_json(c.geometry.near)},
                   {"spacing", c.geometry.spacing},
                   {"camera_distance", c.geometry.camera_distance}};
  j["material"] = {{"c_strain", c.material.c_strain},
                   {"k_shear", c.material.k_shear},
                   {"k_twist", c.material.k_twist},
                   {"k_spacing", c.material.k_spacing},
                   {"brightness_gain", c.material.brightness_gain},
                   {"hertz_radius_coeff", c.material.hertz_radius_coeff},
                   {"psf_sigma", c.material.psf_sigma},
                   {"preload_floor", c.material.preload_floor}};
  j["render"] = {{"resolution", c.render.resolution},
                 {"scale", c.render.scale},
                 {"noise_sigma", c.render.noise_sigma},
                 {"rim_gain", c.render.rim_gain},
                 {"rim_width", c.render.rim_width},
                 {"baseline_intensity", c.render.baseline_intensity},
                 {"seed", c.render.seed},
                 {"grid_mode", c.render.grid_mode == GridMode::Crossed ? "crossed" : "lines"},
                 {"cross_modulation", c.render.cross_modulation}};
  j["wrench_ranges"] = {{"fz_max", c.ranges.fz_max},
                        {"f_lat_max", c.ranges.f_lat_max},
                        {"tz_max", c.ranges.tz_max},
                        {"tilt_max", c.ranges.tilt_max}};
  j["dataset"] = {{"n", c.dataset.n},
                  {"mixed_fraction", c.dataset.mixed_fraction},
                  {"shear_preload", c.dataset.shear_preload},
                  {"tilt_preload", c.dataset.tilt_preload},
                  {"tilt_offset_max", c.dataset.tilt_offset_max},
                  {"mixed_fz_min", c.dataset.mixed_fz_min},
                  {"mixed_offset_max", c.dataset.mixed_offset_max},
                  {"seed", c.dataset.seed}};
  j["estimator"] = {{"ridge_lambda", c.ridge_lambda},
                    {"split_seed", c.split_seed},
                    {"test_fraction", c.test_fraction}};
  j["gate"] = {{"t_on", c.gate.t_on},
               {"hysteresis_ratio", c.gate.hysteresis_ratio},
               {"debounce_frames", c.gate.debounce_frames},
               {"frame_rate", c.gate.frame_rate},
               {"auto_threshold", c.gate_auto_threshold}};
  json pairs = json::array();
  for (const auto& [p1, p2] : c.design_pairs) pairs.push_back({p1, p2});
  j["design"] = {{"pitch_pairs", pairs}, {"a_over_z", c.design_a_over_z}};
  j["features"] = {{"dc_exclusion_bins", c.features.dc_exclusion_bins},
                   {"search_kmax", c.features.search_kmax},
                   {"peak_floor", c.features.peak_floor},
                   {"cutoff_factor", c.features.cutoff_factor},
                   {"roi_fraction", c.features.roi_fraction},
                   {"demod_grid", c.features.demod_grid},
                   {"refine", c.features.refine}};
  return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"schema_version", "geometry", "material", "render", "wrench_ranges", "dataset",
                  "estimator", "gate", "design", "features"},
                 "root");
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  if (j.at("schema_version").get<std::string>() != "1")
    throw ConfigError("config: unsupported schema_version");

  RunConfig c;
  try {
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      reject_unknown(g, {"far", "near", "spacing", "camera_distance"}, "geometry");
      Gratingd far = c.geometry.far, near = c.geometry.near;
      if (g.contains("far")) far = grating_from(g.at("far"), "geometry.far");
      if (g.contains("near")) near = grating_from(g.at("near"), "geometry.near");
      double spacing = c.geometry.spacing, z = c.geometry.camera_distance;
      get_if(g, "spacing", spacing);
      get_if(g, "camera_distance", z);
      c.geometry = SensorGeometryd(far, near, spacing, z);
    }
    if (j.contains("material")) {
      const json& m = j.at("material");
      reject_unknown(m,
                     {"c_strain", "k_shear", "k_twist", "k_spacing", "brightness_gain",
                      "hertz_radius_coeff", "psf_sigma", "preload_floor"},
                     "material");
      get_if(m, "c_strain", c.material.c_strain);
      get_if(m, "k_shear", c.material.k_shear);
      get_if(m, "k_twist", c.material.k_twist);
      get_if(m, "k_spacing", c.material.k_spacing);
      get_if(m, "brightness_gain", c.material.brightness_gain);
      get_if(m, "hertz_radius_coeff", c.material.hertz_radius_coeff);
      get_if(m, "psf_sigma", c.material.psf_sigma);
      get_if(m, "preload_floor", c.material.preload_floor);
    }
    if (j.contains("render")) {
      const json& r = j.at("render");
      reject_unknown(r,
                     {"resolution", "scale", "noise_sigma", "rim_gain", "rim_width",
                      "baseline_intensity", "seed", "grid_mode", "cross_modulation"},
                     "render");
      get_if(r, "resolution", c.render.resolution);
      get_if(r, "scale", c.render.scale);
      get_if(r, "noise_sigma", c.render.noise_sigma);
      get_if(r, "rim_gain", c.render.rim_gain);
      get_if(r, "rim_width", c.render.rim_width);
      get_if(r, "baseline_intensity", c.render.baseline_intensity);
      get_if(r, "seed", c.render.seed);
      get_if(r, "cross_modulation", c.render.cross_modulation);
      if (r.contains("grid_mode")) {
        const std::string mode = r.at("grid_mode").get<std::string>();
        if (mode == "crossed")
          c.render.grid_mode = GridMode::Crossed;
        else if (mode == "lines")
          c.render.grid_mode = GridMode::Lines;
        else
          throw ConfigError("config: render.grid_mode must be 'crossed' or 'lines'");
      }
      c.render.validate();
    }
    if (j.contains("wrench_ranges")) {
      const json& r = j.at("wrench_ranges");
      reject_unknown(r, {"fz_max", "f_lat_max", "tz_max", "tilt_max"}, "wrench_ranges");
      get_if(r, "fz_max", c.ranges.fz_max);
      get_if(r, "f_lat_max", c.ranges.f_lat_max);
      get_if(r, "tz_max", c.ranges.tz_max);
      get_if(r, "tilt_max", c.ranges.tilt_max);
    }
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      reject_unknown(d,
                     {"n", "mixed_fraction", "shear_preload", "tilt_preload", "tilt_offset_max",
                      "mixed_fz_min", "mixed_offset_max", "seed"},
                     "dataset");
      get_if(d, "n", c.dataset.n);
      get_if(d, "mixed_fraction", c.dataset.mixed_fraction);
      get_if(d, "shear_preload", c.dataset.shear_preload);
      get_if(d, "tilt_preload", c.dataset.tilt_preload);
      get_if(d, "tilt_offset_max", c.dataset.tilt_offset_max);
      get_if(d, "mixed_fz_min", c.dataset.mixed_fz_min);
      get_if(d, "mixed_offset_max", c.dataset.mixed_offset_max);
      get_if(d, "seed", c.dataset.seed);
    }
    if (j.contains("estimator")) {
      const json& e = j.at("estimator");
      reject_unknown(e, {"ridge_lambda", "split_seed", "test_fraction"}, "estimator");
      get_if(e, "ridge_lambda", c.ridge_lambda);
      get_if(e, "split_seed", c.split_seed);
      get_if(e, "test_fraction", c.test_fraction);
    }
    if (j.contains("gate")) {
      const json& g = j.at("gate");
      reject_unknown(g, {"t_on", "hysteresis_ratio", "debounce_frames", "frame_rate",
                         "auto_threshold"},
                     "gate");
      get_if(g, "t_on", c.gate.t_on);
      get_if(g, "hysteresis_ratio", c.gate.hysteresis_ratio);
      get_if(g, "debounce_frames", c.gate.debounce_frames);
      get_if(g, "frame_rate", c.gate.frame_rate);
      get_if(g, "auto_threshold", c.gate_auto_threshold);
      c.gate.validate();
    }
    if (j.contains("design")) {
      const json& d = j.at("design");
      reject_unknown(d, {"pitch_pairs", "a_over_z"}, "design");
      get_if(d, "a_over_z", c.design_a_over_z);
      if (d.contains("pitch_pairs")) {
        c.design_pairs.clear();
        for (const auto& p : d.at("pitch_pairs")) {
          if (!p.is_array() || p.size() != 2)
            throw ConfigError("config: design.pitch_pairs entries must be [p1, p2]");
          c.design_pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
      }
    }
    if (j.contains("features")) {
      const json& f = j.at("features");
      reject_unknown(f,
                     {"dc_exclusion_bins", "search_kmax", "peak_floor", "cutoff_factor",
                      "roi_fraction", "demod_grid", "refine"},
                     "features");
      get_if(f, "dc_exclusion_bins", c.features.dc_exclusion_bins);
      get_if(f, "search_kmax", c.features.search_kmax);
      get_if(f, "peak_floor", c.features.peak_floor);
      get_if(f, "cutoff_factor", c.features.cutoff_factor);
      get_if(f, "roi_fraction", c.features.roi_fraction);
      get_if(f, "demod_grid", c.features.demod_grid);
      get_if(f, "refine", c.features.refine);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(json::parse(config_to_json(cfg)).dump());
}

}  // namespace moire
