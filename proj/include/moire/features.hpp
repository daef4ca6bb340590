#pragma once

#include <complex>

#include "moire/fft2.hpp"
#include "moire/image.hpp"
#include "moire/optics.hpp"

// Physics feature extraction: brightness, centroid, spectral moire peak
// (period + orientation), and demodulated phase statistics against a
// reference frame.

namespace moire {

struct FeatureConfig {
  double dc_exclusion_bins = 2.0;  // zeroed disk radius around DC, bins
  double search_kmax = 10.0;       // rad/mm, upper edge of the beat search band
                                   // (keeps the grating carriers out)
  double peak_floor = 0.05;        // minimum peak-pair fraction of in-band energy
  double cutoff_factor = 0.5;      // demod low-pass cutoff = factor * |K|
  double roi_fraction = 0.7;       // central region used for statistics
  int demod_grid = 64;             // coarse grid for the demodulated field
  bool refine = true;              // refine K with the demodulated phase ramp
};

struct SpectralPeak {
  Vec2d k = Vec2d::Zero();  // rad/mm, half-plane representative (kx >= 0)
  double lambda = 0;        // mm
  double theta = 0;         // rad in (-pi/2, pi/2]
  double band_energy = 0;   // peak-neighborhood energy / in-band energy
};

/// Band-limited complex field near one spectral peak, demodulated by `k` and
/// sampled on a coarse grid (the pass band is far below the image Nyquist,
/// so nothing is lost). The grid covers the full image extent.
struct PhaseField {
  Eigen::MatrixXcd z;       // grid x grid
  Vec2d k = Vec2d::Zero();  // demod wavevector, rad/mm
  double dx = 0, dy = 0;    // mm between coarse samples
  Roi roi;                  // statistics window, coarse indices

  /// Wrapped phase, values in (-pi, pi].
  Eigen::ArrayXXd phase() const;
};

double mean_brightness(const ImageGray& img);

/// Intensity-weighted mean position in mm relative to the image center.
/// Throws ZeroImage when the total intensity vanishes.
Vec2d brightness_centroid(const ImageGray& img);

/// Locate the dominant moire peak: Hann window, 2-D DFT, DC-disk exclusion,
/// band-limited max search, parabolic sub-bin interpolation and (optionally)
/// demodulated-ramp refinement. Throws NoPeak when no bin concentrates at
/// least `peak_floor` of the in-band energy.
SpectralPeak spectral_peak(const ImageGray& img, const FeatureConfig& cfg = {});

/// Demodulate the image at wavevector `k`: Hann window, multiply by
/// exp(-i k*x), low-pass at cutoff_factor*|k|, return the band-limited field.
PhaseField phase_map(const ImageGray& img, const Vec2d& k, const FeatureConfig& cfg = {});

/// Amplitude-weighted circular mean of the wrapped phase difference.
double phase_offset(const PhaseField& frame, const PhaseField& reference);

/// Spatial average of the wrap-aware gradient of the phase difference
/// (rad/mm), over the statistics window.
Vec2d mean_phase_gradient(const PhaseField& frame, const PhaseField& reference);

/// k plus the amplitude-weighted mean phase ramp of the field: the precise
/// frequency of the dominated component within the pass band.
Vec2d refine_wavevector(const PhaseField& field);

struct MoireObservables {
  double mean_brightness = 0;            // I
  Vec2d centroid = Vec2d::Zero();        // c, mm
  Vec2d phase_offset = Vec2d::Zero();    // rad: primary and quadrature channel
  Vec2d phase_gradient = Vec2d::Zero();  // <grad phi>, rad/mm (primary channel)
  double theta = 0;                      // rad in (-pi/2, pi/2]
  double lambda = 0;                     // mm
  double band_energy = 0;
};

/// Extracts all observables against a fixed reference frame (the zero-wrench
/// frame of the same configuration). The reference's beat K anchors both
/// demodulation channels; the quadrature channel demodulates at K rotated by
/// 90 degrees, which is the grid's second beat.
class FeatureExtractor {
 public:
  FeatureExtractor(const ImageGray& reference, FeatureConfig cfg = {});

  const SpectralPeak& reference_peak() const { return ref_peak_; }
  const FeatureConfig& config() const { return cfg_; }

  /// Thread-safe for concurrent frames.
  MoireObservables extract(const ImageGray& frame) const;

 private:
  FeatureConfig cfg_;
  Eigen::ArrayXXd window_;
  SpectralPeak ref_peak_;
  PhaseField ref_primary_;
  PhaseField ref_quadrature_;
};

/// One-shot convenience wrapper over FeatureExtractor.
MoireObservables extract_all(const ImageGray& frame, const ImageGray& reference,
                             const FeatureConfig& cfg = {});

}  // namespace moire
