#pragma once

#include <cstdint>
#include <utility>

#include "moire/image.hpp"

// GateER: gated energy-ratio contact detection with hysteresis and debounce.

namespace moire {

enum class Mode { Vision, Tactile };
inline const char* to_string(Mode m) { return m == Mode::Vision ? "vision" : "tactile"; }

struct GateConfig {
  double t_on = 0.01;            // energy-ratio switch-on threshold
  double hysteresis_ratio = 0.8; // t_off = t_on * ratio
  int debounce_frames = 2;       // N consecutive frames before switching
  double frame_rate = 60.0;      // Hz, for reporting only
  double roi_fraction = 0.7;

  double t_off() const { return t_on * hysteresis_ratio; }
  void validate() const {
    if (!(t_on > 0)) throw OutOfRange("GateConfig: t_on must be > 0");
    if (!(hysteresis_ratio > 0) || !(hysteresis_ratio < 1))
      throw OutOfRange("GateConfig: hysteresis ratio must be in (0,1)");
    if (debounce_frames < 1) throw OutOfRange("GateConfig: debounce must be >= 1");
    if (!(frame_rate > 0)) throw OutOfRange("GateConfig: frame rate must be > 0");
  }
};

struct GateState {
  Mode mode = Mode::Vision;
  int consecutive_count = 0;
  double baseline_energy = 0;  // cached denominator for streaming use
  double last_er = 0;
};

/// ER = sum((frame-baseline)^2) / max(sum(baseline^2), eps) over the central
/// region of interest.
double energy_ratio(const ImageGray& frame, const ImageGray& baseline, double roi_fraction = 0.7);

/// Pure debounced-hysteresis transition. In Vision mode, `debounce_frames`
/// consecutive frames with er > t_on switch to Tactile; in Tactile mode,
/// symmetric with er < t_off. The mode is stable for er in [t_off, t_on].
std::pair<GateState, Mode> update(const GateState& state, double er, const GateConfig& cfg);

/// 99th percentile of the noise-only energy ratio: Monte-Carlo over frames
/// that are the baseline plus pixel noise of the given sigma. Used to derive
/// the default threshold t_on = 5 * p99.
double noise_floor_er(const ImageGray& baseline, double noise_sigma, int trials = 100,
                      std::uint64_t seed = 0, double roi_fraction = 0.7);

}  // namespace moire
