#include "moire/features.hpp"

#include <algorithm>
#include <cmath>

namespace moire {

namespace {

using cd = std::complex<double>;

Eigen::ArrayXXd hann2d(int rows, int cols) {
  Eigen::ArrayXd hr(rows), hc(cols);
  for (int r = 0; r < rows; ++r) hr[r] = 0.5 * (1.0 - std::cos(kTwoPi * r / (rows - 1)));
  for (int c = 0; c < cols; ++c) hc[c] = 0.5 * (1.0 - std::cos(kTwoPi * c / (cols - 1)));
  return (hr.matrix() * hc.matrix().transpose()).array();
}

/// Mean-removed, Hann-windowed spectrum of the image.
HalfSpectrum windowed_spectrum(const ImageGray& img, const Eigen::ArrayXXd& window) {
  const double mean = img.values.mean();
  return fft2_real((img.values - mean) * window);
}

HalfSpectrum windowed_spectrum(const ImageGray& img) {
  return windowed_spectrum(img, hann2d(img.height, img.width));
}

struct PeakSearch {
  int fr = 0, fc = 0;              // peak bin, signed frequency indices
  double peak_pair_energy = 0;     // |F|^2 at the peak bin and its mirror
  double in_band_energy = 0;       // total |F|^2 over the search annulus
  double neighborhood_energy = 0;  // within 3 bins of the peak (both signs)
};

double bin_dk(const ImageGray& img) { return kTwoPi * img.scale / img.width; }

/// Max-magnitude bin in the annulus dc_exclusion < |b| (bins), |k| <= kmax.
/// Row frequencies 0..bmax cover one half-plane of the Hermitian spectrum;
/// energies count both signs.
PeakSearch find_peak(const HalfSpectrum& f, const ImageGray& img, const FeatureConfig& cfg) {
  const double dk = bin_dk(img);
  const int bmax = std::min(img.width / 2 - 1, int(std::ceil(cfg.search_kmax / dk)));
  PeakSearch out;
  double best = -1.0;
  for (int fr = 0; fr <= bmax; ++fr) {
    for (int fc = -bmax; fc <= bmax; ++fc) {
      const double bin_norm = std::hypot(double(fr), double(fc));
      if (bin_norm <= cfg.dc_exclusion_bins || bin_norm * dk > cfg.search_kmax) continue;
      const double e = std::norm(f.at(fr, fc));
      out.in_band_energy += fr == 0 ? e : 2.0 * e;
      const bool rep = fr > 0 || (fr == 0 && fc > 0);
      if (rep && e > best) {
        best = e;
        out.fr = fr;
        out.fc = fc;
      }
    }
  }
  if (best <= 0.0 || out.in_band_energy <= 0.0) throw NoPeak("spectral_peak: empty search band");
  out.peak_pair_energy = 2.0 * best;

  for (int dr = -3; dr <= 3; ++dr)
    for (int dc = -3; dc <= 3; ++dc)
      if (std::hypot(double(dr), double(dc)) <= 3.0) {
        out.neighborhood_energy += std::norm(f.at(out.fr + dr, out.fc + dc));
        out.neighborhood_energy += std::norm(f.at(-out.fr + dr, -out.fc + dc));
      }
  return out;
}

/// Log-magnitude parabolic vertex offset from three samples around the max.
double parabolic_offset(double lm, double l0, double lp) {
  const double denom = lm - 2.0 * l0 + lp;
  if (!(std::abs(denom) > 1e-300)) return 0.0;
  return std::clamp(0.5 * (lm - lp) / denom, -0.5, 0.5);
}

double log_mag(const HalfSpectrum& f, int fr, int fc) {
  return std::log(std::max(std::abs(f.at(fr, fc)), 1e-300));
}

/// Half-plane representative: kx > 0, or kx == 0 and ky > 0.
Vec2d half_plane(const Vec2d& k) {
  if (k.x() < 0 || (k.x() == 0 && k.y() < 0)) return -k;
  return k;
}

PhaseField demod_from_spectrum(const HalfSpectrum& f, const ImageGray& img, const Vec2d& k,
                               const FeatureConfig& cfg) {
  const int h = img.height, w = img.width;
  const int g = cfg.demod_grid;
  const double dk = bin_dk(img);
  const double cutoff = cfg.cutoff_factor * k.norm();
  const double rbins = std::max(cutoff / dk, 1.0);
  const int rb = std::min(int(std::ceil(rbins)), g / 2 - 1);

  // Frequency-space block around the nearest bin, disk-masked with a cosine
  // rolloff from 0.85*cutoff to cutoff.
  const int b0c = int(std::lround(k.x() / dk));
  const int b0r = int(std::lround(k.y() / dk));
  SpectrumMatrix block = SpectrumMatrix::Zero(g, g);
  for (int dr = -rb; dr <= rb; ++dr) {
    for (int dc = -rb; dc <= rb; ++dc) {
      const double d = std::hypot(double(dr), double(dc));
      if (d > rbins) continue;
      double mask = 1.0;
      if (d > 0.85 * rbins)
        mask = 0.5 * (1.0 + std::cos(kPi * (d - 0.85 * rbins) / (0.15 * rbins)));
      block((dr + g) % g, (dc + g) % g) = f.at(b0r + dr, b0c + dc) * mask;
    }
  }

  PhaseField field;
  field.z = ifft2(block) * (double(g) * g / (double(h) * w));
  field.k = k;
  field.dx = img.width_mm() / g;
  field.dy = img.height_mm() / g;
  field.roi = central_roi(g, g, cfg.roi_fraction);

  // Finish the exact demodulation: the block carries e^{i k_b0 . x} plus the
  // pixel-index phase convention; multiply by e^{i((k_b0 - k) . x + psi0)}.
  const Vec2d kb(b0c * dk, b0r * dk);
  const Vec2d dres = kb - k;
  const double psi0 = kb.x() * (img.width_mm() / 2 - 0.5 / img.scale) +
                      kb.y() * (img.height_mm() / 2 - 0.5 / img.scale);
  Eigen::VectorXcd px(g), py(g);
  for (int i = 0; i < g; ++i) {
    const double x = img.x_mm(double(i) * w / g);
    const double y = img.y_mm(double(i) * h / g);
    px[i] = std::polar(1.0, dres.x() * x + psi0);
    py[i] = std::polar(1.0, dres.y() * y);
  }
  field.z = field.z.cwiseProduct(py * px.transpose());
  return field;
}

void check_compatible(const PhaseField& a, const PhaseField& b) {
  if (a.z.rows() != b.z.rows() || a.z.cols() != b.z.cols())
    throw DimensionMismatch("phase fields live on different grids");
  if ((a.k - b.k).norm() > 1e-9)
    throw DimensionMismatch("phase fields demodulated at different wavevectors");
}

SpectralPeak peak_from(const HalfSpectrum& f, const ImageGray& img, const FeatureConfig& cfg) {
  const PeakSearch ps = find_peak(f, img, cfg);
  if (ps.peak_pair_energy < cfg.peak_floor * ps.in_band_energy)
    throw NoPeak("spectral_peak: no dominant beat in the search band");

  const double dk = bin_dk(img);
  const double oc = parabolic_offset(log_mag(f, ps.fr, ps.fc - 1), log_mag(f, ps.fr, ps.fc),
                                     log_mag(f, ps.fr, ps.fc + 1));
  const double orow = parabolic_offset(log_mag(f, ps.fr - 1, ps.fc), log_mag(f, ps.fr, ps.fc),
                                       log_mag(f, ps.fr + 1, ps.fc));
  Vec2d k((ps.fc + oc) * dk, (ps.fr + orow) * dk);

  if (cfg.refine) k = refine_wavevector(demod_from_spectrum(f, img, k, cfg));
  k = half_plane(k);

  SpectralPeak peak;
  peak.k = k;
  peak.lambda = kTwoPi / k.norm();
  peak.theta = fold_halfplane(std::atan2(k.y(), k.x()));
  peak.band_energy = ps.neighborhood_energy / ps.in_band_energy;
  return peak;
}

}  // namespace

Eigen::ArrayXXd PhaseField::phase() const {
  // std::arg lands in [-pi, pi]; fold the closed lower edge onto +pi.
  Eigen::ArrayXXd p = z.array().arg();
  return (p <= -kPi).select(p + kTwoPi, p);
}

double mean_brightness(const ImageGray& img) {
  if (img.values.size() == 0) throw OutOfRange("mean_brightness: empty image");
  return img.values.mean();
}

Vec2d brightness_centroid(const ImageGray& img) {
  const double total = img.values.sum();
  if (!(total > 0)) throw ZeroImage("brightness_centroid: total intensity is zero");
  double sx = 0, sy = 0;
  for (int c = 0; c < img.width; ++c) sx += img.values.col(c).sum() * img.x_mm(c);
  for (int r = 0; r < img.height; ++r) sy += img.values.row(r).sum() * img.y_mm(r);
  return Vec2d(sx / total, sy / total);
}

SpectralPeak spectral_peak(const ImageGray& img, const FeatureConfig& cfg) {
  if (img.width < 64 || img.height < 64)
    throw OutOfRange("spectral_peak: image must be at least 64x64");
  return peak_from(windowed_spectrum(img), img, cfg);
}

PhaseField phase_map(const ImageGray& img, const Vec2d& k, const FeatureConfig& cfg) {
  if (!(k.norm() > 0)) throw OutOfRange("phase_map: zero wavevector");
  return demod_from_spectrum(windowed_spectrum(img), img, k, cfg);
}

double phase_offset(const PhaseField& frame, const PhaseField& reference) {
  check_compatible(frame, reference);
  cd acc = 0;
  for (int r = frame.roi.r0; r < frame.roi.r1; ++r)
    for (int c = frame.roi.c0; c < frame.roi.c1; ++c)
      acc += frame.z(r, c) * std::conj(reference.z(r, c));
  return std::arg(acc);
}

Vec2d mean_phase_gradient(const PhaseField& frame, const PhaseField& reference) {
  check_compatible(frame, reference);
  const Roi& roi = frame.roi;
  cd gx = 0, gy = 0;
  for (int r = roi.r0; r < roi.r1; ++r) {
    for (int c = roi.c0; c < roi.c1; ++c) {
      const cd d = frame.z(r, c) * std::conj(reference.z(r, c));
      if (c + 1 < roi.c1) gx += frame.z(r, c + 1) * std::conj(reference.z(r, c + 1)) * std::conj(d);
      if (r + 1 < roi.r1) gy += frame.z(r + 1, c) * std::conj(reference.z(r + 1, c)) * std::conj(d);
    }
  }
  return Vec2d(std::arg(gx) / frame.dx, std::arg(gy) / frame.dy);
}

Vec2d refine_wavevector(const PhaseField& field) {
  const Roi& roi = field.roi;
  cd gx = 0, gy = 0;
  for (int r = roi.r0; r < roi.r1; ++r) {
    for (int c = roi.c0; c < roi.c1; ++c) {
      if (c + 1 < roi.c1) gx += field.z(r, c + 1) * std::conj(field.z(r, c));
      if (r + 1 < roi.r1) gy += field.z(r + 1, c) * std::conj(field.z(r, c));
    }
  }
  return field.k + Vec2d(std::arg(gx) / field.dx, std::arg(gy) / field.dy);
}

FeatureExtractor::FeatureExtractor(const ImageGray& reference, FeatureConfig cfg)
    : cfg_(cfg), window_(hann2d(reference.height, reference.width)) {
  const HalfSpectrum f = windowed_spectrum(reference, window_);
  ref_peak_ = peak_from(f, reference, cfg_);
  ref_primary_ = demod_from_spectrum(f, reference, ref_peak_.k, cfg_);
  ref_quadrature_ =
      demod_from_spectrum(f, reference, Vec2d(-ref_peak_.k.y(), ref_peak_.k.x()), cfg_);
}

MoireObservables FeatureExtractor::extract(const ImageGray& frame) const {
  if (frame.height != int(window_.rows()) || frame.width != int(window_.cols()))
    throw DimensionMismatch("extract: frame does not match the reference raster");

  MoireObservables obs;
  obs.mean_brightness = mean_brightness(frame);
  obs.centroid = brightness_centroid(frame);

  const HalfSpectrum f = windowed_spectrum(frame, window_);
  const PeakSearch ps = find_peak(f, frame, cfg_);
  if (ps.peak_pair_energy < cfg_.peak_floor * ps.in_band_energy)
    throw NoPeak("extract: no dominant beat in the search band");
  obs.band_energy = ps.neighborhood_energy / ps.in_band_energy;

  const PhaseField zp = demod_from_spectrum(f, frame, ref_primary_.k, cfg_);
  const PhaseField zq = demod_from_spectrum(f, frame, ref_quadrature_.k, cfg_);
  obs.phase_offset = Vec2d(phase_offset(zp, ref_primary_), phase_offset(zq, ref_quadrature_));
  obs.phase_gradient = mean_phase_gradient(zp, ref_primary_);

  Vec2d k = cfg_.refine ? refine_wavevector(zp) : Vec2d(ps.fc * bin_dk(frame), ps.fr * bin_dk(frame));
  k = half_plane(k);
  obs.lambda = kTwoPi / k.norm();
  obs.theta = fold_halfplane(std::atan2(k.y(), k.x()));
  return obs;
}

MoireObservables extract_all(const ImageGray& frame, const ImageGray& reference,
                             const FeatureConfig& cfg) {
  return FeatureExtractor(reference, cfg).extract(frame);
}

}  // namespace moire
