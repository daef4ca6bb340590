#pragma once

#include "moire/core.hpp"
#include "moire/optics.hpp"

// Forward constitutive model: 6-axis wrench -> geometric deformation of the
// upper grating plus a Hertzian contact pressure field.

namespace moire {

struct Wrench {
  double fx = 0, fy = 0, fz = 0;  // N
  double tx = 0, ty = 0, tz = 0;  // N*m

  Vec6d vector() const {
    Vec6d v;
    v << fx, fy, fz, tx, ty, tz;
    return v;
  }
  static Wrench from_vector(const Vec6d& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

/// Per-axis simulation ranges; fz is one-sided (indentation only).
struct WrenchRanges {
  double fz_max = 1.2;        // N
  double f_lat_max = 0.2;     // N, |fx|,|fy|
  double tz_max = 0.008;      // N*m
  double tilt_max = 0.012;    // N*m, |tx|,|ty|

  bool contains(const Wrench& w, double tol = 1e-12) const {
    return w.fz >= -tol && w.fz <= fz_max + tol && std::abs(w.fx) <= f_lat_max + tol &&
           std::abs(w.fy) <= f_lat_max + tol && std::abs(w.tz) <= tz_max + tol &&
           std::abs(w.tx) <= tilt_max + tol && std::abs(w.ty) <= tilt_max + tol;
  }
};

struct MaterialModel {
  double c_strain = 0.001;          // 1/N, lateral strain per normal force
  double k_shear = 5.0;             // N/mm, u = F_lat / k_shear
  double k_twist = 1.0;             // N*m/rad, grating twist per Tz
  double k_spacing = 50.0;          // N/mm, spacing change -Fz/k_spacing
  double brightness_gain = 8.0;     // kappa, intensity per (N/mm^2)
  double hertz_radius_coeff = 3.0;  // mm/N^(1/3), a_c = coeff * Fz^(1/3)
  double psf_sigma = 3.0;           // mm, optical point-spread width
  double preload_floor = 0.05;      // N, minimum Fz for tilt moments

  /// Checks the stiffnesses and that the configured wrench ranges cannot
  /// self-intersect the stack (|eps| < 0.2, a' > 0).
  void validate(const SensorGeometryd& g, const WrenchRanges& r) const;
};

struct DeformationState {
  Vec2d displacement = Vec2d::Zero();    // u, mm
  double strain = 0;                     // eps, dimensionless
  double twist = 0;                      // rad, upper-grating rotation
  Vec2d contact_center = Vec2d::Zero();  // mm, offset from sensor center
  double contact_radius = 0;             // a_c, mm
  double spacing = 0;                    // a', mm
  double peak_pressure = 0;              // P0, N/mm^2
};

/// Map a wrench to the deformation of the stack. Throws OutOfRange when the
/// wrench leaves the configured ranges and TiltWithoutPreload when tilt
/// moments are applied without normal preload.
DeformationState wrench_to_deformation(const Wrench& w, const MaterialModel& m,
                                       const SensorGeometryd& g,
                                       const WrenchRanges& ranges = WrenchRanges{});

/// Hertzian pressure profile: P0 sqrt(1 - (r/a_c)^2) inside the contact
/// circle, zero outside.
double pressure_at(const DeformationState& d, const Vec2d& x_mm);

/// Deformed stack geometry: strained/twisted far grating, reduced spacing.
SensorGeometryd deformed_geometry(const SensorGeometryd& g, const DeformationState& d);

}  // namespace moire
