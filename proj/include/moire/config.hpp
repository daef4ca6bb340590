#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moire/estimator.hpp"
#include "moire/gate.hpp"

namespace moire {

/// One document fully specifying a deterministic run. Unknown keys are
/// rejected; the schema version string is required.
struct RunConfig {
  SensorGeometryd geometry{Gratingd(0.35, 0.0), Gratingd(0.30, 0.0), 3.0, 12.0};
  MaterialModel material;
  RenderConfig render;
  WrenchRanges ranges;
  DatasetConfig dataset;

  double ridge_lambda = 1e-6;
  std::uint64_t split_seed = 1;
  double test_fraction = 0.2;

  GateConfig gate;
  bool gate_auto_threshold = true;  // t_on = 5 * noise-only p99 when set

  /// Pitch pairs (mm) for the design table; defaults to the three reference
  /// configurations Dense/Mid/Sparse.
  std::vector<std::pair<double, double>> design_pairs{{0.20, 0.20}, {0.35, 0.30}, {0.30, 0.25}};
  double design_a_over_z = 0.25;

  FeatureConfig features;
};

RunConfig default_config();
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// FNV-1a hash of the canonical (sorted-key) JSON form.
std::string config_hash(const RunConfig& cfg);

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace moire
