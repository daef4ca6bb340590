#include "moire/load.hpp"

namespace moire {

void MaterialModel::validate(const SensorGeometryd& g, const WrenchRanges& r) const {
  if (!(c_strain >= 0) || !(k_shear > 0) || !(k_twist > 0) || !(k_spacing > 0))
    throw OutOfRange("MaterialModel: stiffnesses must be positive");
  if (!(brightness_gain >= 0)) throw OutOfRange("MaterialModel: brightness gain must be >= 0");
  if (!(hertz_radius_coeff > 0) || !(psf_sigma >= 0) || !(preload_floor > 0))
    throw OutOfRange("MaterialModel: contact parameters must be positive");
  if (std::abs(c_strain * r.fz_max) >= 0.2)
    throw OutOfRange("MaterialModel: strain exceeds 0.2 at full normal load");
  if (g.spacing - r.fz_max / k_spacing <= 0)
    throw OutOfRange("MaterialModel: stack self-intersects at full normal load");
}

DeformationState wrench_to_deformation(const Wrench& w, const MaterialModel& m,
                                       const SensorGeometryd& g, const WrenchRanges& ranges) {
  if (!ranges.contains(w)) throw OutOfRange("wrench_to_deformation: wrench exceeds ranges");

  DeformationState d;
  d.displacement = Vec2d(w.fx, w.fy) / m.k_shear;
  d.strain = m.c_strain * w.fz;
  d.twist = w.tz / m.k_twist;
  d.spacing = g.spacing - w.fz / m.k_spacing;
  if (!(d.spacing > 0)) throw OutOfRange("wrench_to_deformation: spacing collapsed");

  const bool has_tilt = w.tx != 0.0 || w.ty != 0.0;
  if (has_tilt && w.fz < m.preload_floor)
    throw TiltWithoutPreload("wrench_to_deformation: tilt moment without normal preload");
  // Tilt moments realized as off-center contact: Tx = Fz*c_y, Ty = -Fz*c_x.
  // Torques are N*m, offsets mm, hence the factor 1000.
  const double f_div = std::max(w.fz, m.preload_floor);
  d.contact_center = Vec2d(-w.ty, w.tx) * 1000.0 / f_div;

  if (w.fz > 0) {
    d.contact_radius = m.hertz_radius_coeff * std::cbrt(w.fz);
    d.peak_pressure = 3.0 * w.fz / (2.0 * kPi * d.contact_radius * d.contact_radius);
  }
  return d;
}

double pressure_at(const DeformationState& d, const Vec2d& x_mm) {
  if (d.contact_radius <= 0) return 0.0;
  const double r = (x_mm - d.contact_center).norm();
  if (r >= d.contact_radius) return 0.0;
  const double s = r / d.contact_radius;
  return d.peak_pressure * std::sqrt(1.0 - s * s);
}

SensorGeometryd deformed_geometry(const SensorGeometryd& g, const DeformationState& d) {
  Gratingd far(g.far.pitch * (1.0 + d.strain), g.far.orientation + d.twist, g.far.phase_offset);
  return SensorGeometryd(far, g.near, d.spacing, g.camera_distance);
}

}  // namespace moire
