#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "moire/features.hpp"
#include "moire/load.hpp"
#include "moire/synth.hpp"

// Observable -> wrench calibration: feature assembly, dataset synthesis,
// closed-form ridge regression, metrics, and the centroid-to-tilt matrix.

namespace moire {

/// Fixed, versioned feature assembly order.
inline constexpr const char* kFeatureOrder = "I,cx,cy,pox,poy,theta_sin2,theta_cos2,inv_lambda";
inline constexpr int kFeatureDim = 8;

/// [I, cx, cy, phase offsets, sin 2*theta, cos 2*theta, 1/Lambda]. The folded
/// orientation enters through sin/cos of the doubled angle (continuous across
/// the half-plane seam); the period enters as spatial frequency.
Eigen::VectorXd feature_vector(const MoireObservables& obs);

enum class SweepKind { Fz, Fx, Fy, Tz, Tx, Ty, Mixed };
const char* to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

struct Sample {
  Wrench wrench;
  MoireObservables obs;
  SweepKind sweep = SweepKind::Mixed;
};

struct Dataset {
  std::vector<Sample> samples;
};

struct DatasetConfig {
  int n = 2000;
  double mixed_fraction = 0.5;   // remainder is split across isolated sweeps
  double shear_preload = 0.5;    // N, Fz held during fx/fy/tz sweeps
  double tilt_preload = 1.0;     // N, Fz held during tilt sweeps
  double tilt_offset_max = 8.0;  // mm, contact offset range in tilt sweeps
  double mixed_fz_min = 0.2;     // N, lower normal load for mixed samples
  double mixed_offset_max = 8.0; // mm, contact offset range in mixed samples
  std::uint64_t seed = 0;
};

/// Ascending isolated sweep for one axis (other axes at the configured
/// preloads, zero elsewhere).
std::vector<Wrench> sweep_wrenches(SweepKind kind, int count, const WrenchRanges& ranges,
                                   const DatasetConfig& cfg);

/// The full deterministic wrench plan: per-axis sweeps then mixed samples.
std::vector<std::pair<Wrench, SweepKind>> dataset_wrench_plan(const DatasetConfig& cfg,
                                                              const WrenchRanges& ranges);

/// Render and extract the whole plan. The reference frame is the noiseless
/// zero-wrench render; frame i uses sub-seed derive_seed(cfg.seed, i).
Dataset build_dataset(const DatasetConfig& cfg, const SensorGeometryd& g, const MaterialModel& m,
                      const RenderConfig& render_cfg, const WrenchRanges& ranges = WrenchRanges{},
                      const FeatureConfig& feat_cfg = FeatureConfig{});

struct AxisMetrics {
  std::optional<double> r2;  // empty when the axis has zero target variance
  double mae = 0;
};

struct Metrics {
  std::array<AxisMetrics, 6> axes;  // Fx, Fy, Fz, Tx, Ty, Tz
  int sample_count = 0;
};

struct CalibrationModel {
  Eigen::Matrix<double, 6, Eigen::Dynamic> weights;  // 6 x d on standardized features
  Vec6d bias = Vec6d::Zero();
  Eigen::VectorXd feature_means;
  Eigen::VectorXd feature_scales;
  double ridge_lambda = 0;
  std::string feature_order = kFeatureOrder;

  Wrench predict_features(const Eigen::VectorXd& f) const;
};

Wrench predict(const CalibrationModel& model, const MoireObservables& obs);

struct FitResult {
  CalibrationModel model;
  Metrics held_out;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

/// Standardize on the 80% training split (stratified by sweep kind, shuffled
/// by split_seed), solve the ridge normal equations per axis in closed form
/// (bias unpenalized), report metrics on the held-out split. Throws
/// SingularSystem when the regularized normal matrix is numerically singular.
FitResult fit(const Dataset& data, double ridge_lambda, std::uint64_t split_seed,
              double test_fraction = 0.2);

Metrics evaluate(const CalibrationModel& model, const Dataset& data);

struct TiltFit {
  Eigen::Matrix2d m;           // [tx, ty] = m * (c - c0)
  Vec2d c0 = Vec2d::Zero();    // centroid at zero tilt
  double residual_norm = 0;    // rms prediction residual, N*m
};

/// Least-squares fit of the tilt mapping on tilt-sweep samples. Throws
/// SingularSystem when the centroid excitation is degenerate.
TiltFit fit_tilt_matrix(const Dataset& tilt_samples);

void save_model(const CalibrationModel& model, const std::filesystem::path& path);
CalibrationModel load_model(const std::filesystem::path& path);

}  // namespace moire
