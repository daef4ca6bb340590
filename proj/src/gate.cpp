#include "moire/gate.hpp"

#include <algorithm>
#include <vector>

namespace moire {

double energy_ratio(const ImageGray& frame, const ImageGray& baseline, double roi_fraction) {
  if (frame.width != baseline.width || frame.height != baseline.height)
    throw DimensionMismatch("energy_ratio: frame/baseline dimensions differ");
  const Roi roi = central_roi(frame.height, frame.width, roi_fraction);
  const auto f = frame.values.block(roi.r0, roi.c0, roi.rows(), roi.cols());
  const auto b = baseline.values.block(roi.r0, roi.c0, roi.rows(), roi.cols());
  const double num = (f - b).square().sum();
  const double den = std::max(b.square().sum(), 1e-12);
  return num / den;
}

std::pair<GateState, Mode> update(const GateState& state, double er, const GateConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(er) || er < 0) throw OutOfRange("gate update: er must be finite and >= 0");
  GateState next = state;
  next.last_er = er;
  const bool crossing = state.mode == Mode::Vision ? er > cfg.t_on : er < cfg.t_off();
  if (!crossing) {
    next.consecutive_count = 0;
    return {next, next.mode};
  }
  next.consecutive_count = state.consecutive_count + 1;
  if (next.consecutive_count >= cfg.debounce_frames) {
    next.mode = state.mode == Mode::Vision ? Mode::Tactile : Mode::Vision;
    next.consecutive_count = 0;
  }
  return {next, next.mode};
}

double noise_floor_er(const ImageGray& baseline, double noise_sigma, int trials,
                      std::uint64_t seed, double roi_fraction) {
  if (trials < 1) throw OutOfRange("noise_floor_er: trials must be >= 1");
  const Roi roi = central_roi(baseline.height, baseline.width, roi_fraction);
  const double den =
      std::max(baseline.values.block(roi.r0, roi.c0, roi.rows(), roi.cols()).square().sum(), 1e-12);
  std::vector<double> ers(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    double num = 0;
    const std::size_t n = std::size_t(roi.rows()) * roi.cols();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = noise_sigma * rng.gaussian();
      num += d * d;
    }
    ers[t] = num / den;
  }
  std::sort(ers.begin(), ers.end());
  const std::size_t idx = std::min<std::size_t>(trials - 1, std::size_t(std::ceil(0.99 * trials)) - 1);
  return ers[idx];
}

}  // namespace moire
