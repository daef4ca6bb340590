#pragma once

#include <cstdint>
#include <vector>

#include "moire/image.hpp"
#include "moire/load.hpp"

// Raster renderer: grayscale fringe images from geometry + deformation, with
// brightness coupling, contact-rim illumination, point-spread blur and noise.

namespace moire {

/// `Crossed` renders each grating as a crossed grid (two orthogonal line
/// patterns, the second at reduced modulation), which is what the physical
/// sensor uses and what makes both shear axes observable. `Lines` renders the
/// plain single-axis transmission.
enum class GridMode { Lines, Crossed };

struct RenderConfig {
  int resolution = 800;              // px, square
  double scale = 20.0;               // px per mm
  double noise_sigma = 0.01;         // additive Gaussian, intensity units
  double rim_gain = 0.05;            // contact-rim additive gain
  double rim_width = 1.0;            // mm, annulus width (2 sigma)
  double baseline_intensity = 0.25;  // I0
  std::uint64_t seed = 0;
  GridMode grid_mode = GridMode::Crossed;
  double cross_modulation = 0.9;     // contrast of each grid's second axis

  void validate() const {
    if (resolution < 16 || !(scale > 0)) throw OutOfRange("RenderConfig: bad raster");
    if (!(noise_sigma >= 0)) throw OutOfRange("RenderConfig: noise_sigma must be >= 0");
    if (baseline_intensity < 0 || baseline_intensity > 1)
      throw OutOfRange("RenderConfig: baseline intensity outside [0,1]");
    if (cross_modulation < 0 || cross_modulation > 1)
      throw OutOfRange("RenderConfig: cross modulation outside [0,1]");
  }
};

/// Render one frame from an explicit deformation state.
ImageGray render(const SensorGeometryd& g, const DeformationState& d, const MaterialModel& m,
                 const RenderConfig& cfg);

/// Render the wrench's deformation (validation included).
ImageGray render_wrench(const SensorGeometryd& g, const Wrench& w, const MaterialModel& m,
                        const RenderConfig& cfg, const WrenchRanges& ranges = WrenchRanges{});

/// One frame per wrench; frame i uses the sub-seed derive_seed(cfg.seed, i),
/// so the result is independent of scheduling.
std::vector<ImageGray> render_sequence(const std::vector<Wrench>& trace,
                                       const SensorGeometryd& g, const MaterialModel& m,
                                       const RenderConfig& cfg,
                                       const WrenchRanges& ranges = WrenchRanges{});

}  // namespace moire
