#pragma once

#include <string>
#include <utility>

#include "moire/core.hpp"

// Analytic moiré geometry: gratings, beat wavevectors, period laws, and the
// perspective reconciliation of the design-table amplification values. All
// functions are pure and templated on the scalar type.

namespace moire {

/// One line grating: spatial period and stripe normal direction.
template <typename Scalar>
struct Grating {
  Scalar pitch{};              // mm, > 0
  Scalar orientation{};        // rad, normalized to (-pi, pi]
  Scalar phase_offset{};       // rad

  Grating() = default;
  Grating(Scalar pitch_mm, Scalar orientation_rad, Scalar phase = Scalar(0))
      : pitch(pitch_mm), orientation(normalize_angle(orientation_rad)), phase_offset(phase) {
    if (!(pitch > Scalar(0))) throw OutOfRange("Grating: pitch must be > 0");
  }
};
using Gratingd = Grating<double>;

/// Moiré beat descriptor: wavevector, period, and folded orientation.
template <typename Scalar>
struct FringeDescriptor {
  Vec2<Scalar> k;       // rad/mm, K = k1 - k2
  Scalar lambda{};      // mm, 2*pi/|K|
  Scalar theta{};       // rad in (-pi/2, pi/2]
};
using FringeDescriptord = FringeDescriptor<double>;

/// Dual-grating stack in front of the camera. `far` sits at depth Z + a,
/// `near` at depth Z (the camera calibration plane).
template <typename Scalar>
struct SensorGeometry {
  Grating<Scalar> far;
  Grating<Scalar> near;
  Scalar spacing{};          // a, mm, >= 0
  Scalar camera_distance{};  // Z, mm, > 0

  SensorGeometry() = default;
  SensorGeometry(Grating<Scalar> far_g, Grating<Scalar> near_g, Scalar a, Scalar z)
      : far(std::move(far_g)), near(std::move(near_g)), spacing(a), camera_distance(z) {
    if (!(spacing >= Scalar(0))) throw OutOfRange("SensorGeometry: spacing must be >= 0");
    if (!(camera_distance > Scalar(0)))
      throw OutOfRange("SensorGeometry: camera distance must be > 0");
    if (!(spacing < camera_distance))
      throw OutOfRange("SensorGeometry: spacing must be smaller than camera distance");
  }
};
using SensorGeometryd = SensorGeometry<double>;

/// k = (2*pi/p) [cos a, sin a].
template <typename Scalar>
Vec2<Scalar> grating_wavevector(const Grating<Scalar>& g) {
  const Scalar m = Scalar(kTwoPi) / g.pitch;
  return Vec2<Scalar>(m * std::cos(g.orientation), m * std::sin(g.orientation));
}

/// Beat of two gratings: K = k1 - k2, Lambda = 2*pi/|K|, theta folded into
/// (-pi/2, pi/2]. Throws DegenerateGratings for (near-)identical gratings.
template <typename Scalar>
FringeDescriptor<Scalar> moire_descriptor(const Grating<Scalar>& g1, const Grating<Scalar>& g2,
                                          Scalar eps_k = Scalar(kEpsK)) {
  FringeDescriptor<Scalar> d;
  d.k = grating_wavevector(g1) - grating_wavevector(g2);
  const Scalar mag = d.k.norm();
  if (mag <= eps_k)
    throw DegenerateGratings("moire_descriptor: gratings coincide, beat period diverges");
  d.lambda = Scalar(kTwoPi) / mag;
  d.theta = fold_halfplane(std::atan2(d.k.y(), d.k.x()));
  return d;
}

/// Lambda = p1 p2 / sqrt(p1^2 + p2^2 - 2 p1 p2 cos(da)). Algebraically equal
/// to the beat period of moire_descriptor with orientations 0 and da.
template <typename Scalar>
Scalar period_general(Scalar p1, Scalar p2, Scalar delta_alpha) {
  if (!(p1 > Scalar(0)) || !(p2 > Scalar(0)))
    throw OutOfRange("period_general: pitches must be > 0");
  const Scalar q = p1 * p1 + p2 * p2 - Scalar(2) * p1 * p2 * std::cos(delta_alpha);
  const Scalar denom = std::sqrt(std::max(q, Scalar(0)));
  // |K| = 2*pi*denom/(p1*p2); compare against the shared wavevector threshold.
  if (Scalar(kTwoPi) * denom / (p1 * p2) <= Scalar(kEpsK))
    throw DegenerateGratings("period_general: zero pitch/orientation mismatch");
  return p1 * p2 / denom;
}

enum class PeriodRegime { AngleDominated, PitchDominated };

/// The two design-regime approximations: p/|da| and p/delta with the mean
/// pitch p = (p1+p2)/2 and relative mismatch delta = |p2-p1|/p.
template <typename Scalar>
Scalar period_approx(Scalar p1, Scalar p2, Scalar delta_alpha, PeriodRegime regime) {
  if (!(p1 > Scalar(0)) || !(p2 > Scalar(0)))
    throw OutOfRange("period_approx: pitches must be > 0");
  const Scalar p = (p1 + p2) / Scalar(2);
  if (regime == PeriodRegime::AngleDominated) {
    if (std::abs(delta_alpha) <= Scalar(kEpsK))
      throw DegenerateGratings("period_approx: angle-dominated regime needs delta_alpha != 0");
    return p / std::abs(delta_alpha);
  }
  const Scalar delta = std::abs(p2 - p1) / p;
  if (delta <= Scalar(kEpsK))
    throw DegenerateGratings("period_approx: pitch-dominated regime needs p1 != p2");
  return p / delta;
}

/// Intrinsic relative pitch mismatch, normalized by the mean pitch.
template <typename Scalar>
Scalar delta_obj(Scalar p1, Scalar p2) {
  return std::abs(p2 - p1) / ((p1 + p2) / Scalar(2));
}

template <typename Scalar>
void require_parallel(const SensorGeometry<Scalar>& g, const char* where) {
  if (halfplane_distance(double(g.far.orientation), double(g.near.orientation)) > 1e-9)
    throw OutOfRange(std::string(where) + ": gratings must be parallel");
}

/// Effective mismatch |delta_obj - a/Z| (the documented approximation).
template <typename Scalar>
Scalar delta_eff_approx(const SensorGeometry<Scalar>& g) {
  require_parallel(g, "delta_eff_approx");
  return std::abs(delta_obj(g.far.pitch, g.near.pitch) - g.spacing / g.camera_distance);
}

/// Far-grating pitch as projected onto the camera calibration plane.
template <typename Scalar>
Scalar apparent_far_pitch(const SensorGeometry<Scalar>& g) {
  return g.far.pitch * g.camera_distance / (g.camera_distance + g.spacing);
}

/// Apparent (projected) grating pair seen by the camera: the far grating is
/// foreshortened by Z/(Z+a), the near grating sits on the calibration plane.
template <typename Scalar>
std::pair<Grating<Scalar>, Grating<Scalar>> apparent_gratings(const SensorGeometry<Scalar>& g) {
  return {Grating<Scalar>(apparent_far_pitch(g), g.far.orientation, g.far.phase_offset),
          Grating<Scalar>(g.near.pitch, g.near.orientation, g.near.phase_offset)};
}

/// Apparent beat period q1 q2 / |q1 - q2| for parallel gratings.
template <typename Scalar>
Scalar lambda_apparent(const SensorGeometry<Scalar>& g) {
  require_parallel(g, "lambda_apparent");
  const Scalar q1 = apparent_far_pitch(g);
  const Scalar q2 = g.near.pitch;
  const Scalar dq = std::abs(q1 - q2);
  if (Scalar(kTwoPi) * dq / (q1 * q2) <= Scalar(kEpsK))
    throw DegenerateGratings("lambda_apparent: projected pitches coincide");
  return q1 * q2 / dq;
}

/// Exact amplification A = q1/|q1 - q2| = Lambda_apparent/q2 with
/// q1 = p1 Z/(Z+a). Reproduces the design-table values 4.00/14.00/24.00;
/// the approximate effective-mismatch definition (1/delta_eff) is exposed
/// separately via delta_eff_approx.
template <typename Scalar>
Scalar amplification_exact(const SensorGeometry<Scalar>& g) {
  require_parallel(g, "amplification_exact");
  const Scalar q1 = apparent_far_pitch(g);
  const Scalar q2 = g.near.pitch;
  const Scalar dq = std::abs(q1 - q2);
  if (Scalar(kTwoPi) * dq / (q1 * q2) <= Scalar(kEpsK))
    throw DegenerateGratings("amplification_exact: moire vanishes at the camera");
  return q1 / dq;
}

enum class CompressionTrend { Sparser, Denser };

/// Direction of the fringe-density change under compression. Compression
/// reduces a, so delta_eff = |delta_obj - a/Z| shrinks when delta_obj < a/Z
/// (fringes get sparser) and grows otherwise.
template <typename Scalar>
CompressionTrend compression_trend(const SensorGeometry<Scalar>& g) {
  require_parallel(g, "compression_trend");
  const Scalar d = delta_obj(g.far.pitch, g.near.pitch) - g.spacing / g.camera_distance;
  if (std::abs(d) < Scalar(1e-9))
    throw BoundaryCase("compression_trend: delta_obj equals a/Z");
  return d < Scalar(0) ? CompressionTrend::Sparser : CompressionTrend::Denser;
}

inline const char* to_string(CompressionTrend t) {
  return t == CompressionTrend::Sparser ? "sparser" : "denser";
}

}  // namespace moire
