#include <doctest.h>

#include <algorithm>
#include <vector>

#include "moire/features.hpp"
#include "moire/synth.hpp"

using namespace moire;

namespace {

const SensorGeometryd kMid(Gratingd(0.35, 0.0), Gratingd(0.30, 0.0), 3.0, 12.0);

ImageGray cosine_image(const Vec2d& k, double phase = 0.0, int n = 800, double scale = 20.0) {
  ImageGray img(n, n, scale);
  for (int c = 0; c < n; ++c) {
    const double x = img.x_mm(c);
    for (int r = 0; r < n; ++r)
      img.values(r, c) = 0.5 + 0.25 * std::cos(k.x() * x + k.y() * img.y_mm(r) + phase);
  }
  return img;
}

RenderConfig noiseless() {
  RenderConfig cfg;
  cfg.noise_sigma = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("mean brightness basics") {
  ImageGray img(64, 64, 20.0);
  CHECK(mean_brightness(img) == 0.0);
  img.values.setConstant(1.0);
  CHECK(mean_brightness(img) == doctest::Approx(1.0));
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) img.values(r, c) = (r + c) % 2;
  CHECK(mean_brightness(img) == doctest::Approx(0.5));
}

TEST_CASE("brightness centroid") {
  ImageGray img(800, 800, 20.0);
  CHECK_THROWS_AS(brightness_centroid(img), ZeroImage);

  img.values.setConstant(0.5);
  CHECK(brightness_centroid(img).norm() < 1e-9);

  img.values.setZero();
  // Pixel column closest to +5 mm (pixel centers sit on the half grid).
  img.values(400, 499) = 1.0;
  const Vec2d c = brightness_centroid(img);
  CHECK(std::abs(c.x() - 5.0) <= 0.5 / 20.0);
  CHECK(std::abs(c.y()) <= 0.5 / 20.0);
}

TEST_CASE("spectral peak on a pure cosine") {
  const Vec2d k(1.496, 0.0);
  const SpectralPeak p = spectral_peak(cosine_image(k));
  CHECK(std::abs(p.lambda - kTwoPi / 1.496) / (kTwoPi / 1.496) < 0.02);
  CHECK(std::abs(deg(p.theta)) < 0.5);
  CHECK(p.band_energy > 0.5);

  // Rotation equivariance: rotating the pattern rotates theta (mod pi).
  for (double b : {10.0, 30.0, 60.0}) {
    const Vec2d kb = 1.496 * Vec2d(std::cos(rad(b)), std::sin(rad(b)));
    const SpectralPeak q = spectral_peak(cosine_image(kb));
    CHECK(deg(halfplane_distance(q.theta, rad(b))) < 0.5);
    CHECK(std::abs(q.lambda - p.lambda) / p.lambda < 0.02);
  }
}

TEST_CASE("no peak on structureless images") {
  ImageGray img(128, 128, 20.0);
  img.values.setConstant(0.5);
  CHECK_THROWS_AS(spectral_peak(img), NoPeak);

  // Pure noise: nothing concentrates in a single in-band bin.
  Rng rng(3);
  for (int c = 0; c < 128; ++c)
    for (int r = 0; r < 128; ++r) img.values(r, c) = 0.5 + 0.05 * rng.gaussian();
  CHECK_THROWS_AS(spectral_peak(img), NoPeak);

  ImageGray small(32, 32, 20.0);
  CHECK_THROWS_AS(spectral_peak(small), OutOfRange);
}

TEST_CASE("phase map is self-consistent on the reference") {
  const Vec2d k(1.496, 0.0);
  const ImageGray img = cosine_image(k);
  const PhaseField field = phase_map(img, k);

  // Residual phase after removing the best-fit plane, amplitude weighted.
  const Eigen::ArrayXXd phase = field.phase();
  double sw = 0, swp = 0;
  std::vector<double> residuals;
  for (int r = field.roi.r0; r < field.roi.r1; ++r)
    for (int c = field.roi.c0; c < field.roi.c1; ++c) {
      sw += 1.0;
      swp += phase(r, c);
    }
  const double mean = swp / sw;
  double var = 0;
  for (int r = field.roi.r0; r < field.roi.r1; ++r)
    for (int c = field.roi.c0; c < field.roi.c1; ++c)
      var += (phase(r, c) - mean) * (phase(r, c) - mean);
  CHECK(std::sqrt(var / sw) < 0.05);

  CHECK(std::abs(phase_offset(field, field)) < 1e-12);
  CHECK(mean_phase_gradient(field, field).norm() < 1e-12);
}

TEST_CASE("phase offset recovers pattern translations") {
  const Vec2d k(1.496, 0.0);
  const ImageGray ref = cosine_image(k);
  const PhaseField zr = phase_map(ref, k);

  // Advance the pattern phase by K*u = 0.3 rad.
  const PhaseField zf = phase_map(cosine_image(k, 0.3), k);
  CHECK(phase_offset(zf, zr) == doctest::Approx(0.3).epsilon(0.02 / 0.3));

  // A full period wraps back to zero.
  const PhaseField zw = phase_map(cosine_image(k, kTwoPi), k);
  CHECK(std::abs(phase_offset(zw, zr)) < 0.02);
}

TEST_CASE("mean phase gradient sees linearly varying displacement") {
  const Vec2d k(1.496, 0.0);
  const double g = 0.01;  // du_x/dx
  const ImageGray ref = cosine_image(k);
  const ImageGray stretched = cosine_image(Vec2d(k.x() * (1 + g), 0.0));
  const PhaseField zr = phase_map(ref, k);
  const PhaseField zf = phase_map(stretched, k);
  const Vec2d grad = mean_phase_gradient(zf, zr);
  CHECK(std::abs(grad.x() - k.x() * g) / (k.x() * g) < 0.05);
  CHECK(std::abs(grad.y()) < 0.05 * k.x() * g + 1e-4);
}

TEST_CASE("extractor on rendered frames") {
  const RenderConfig cfg = noiseless();
  const MaterialModel m;
  const ImageGray ref = render_wrench(kMid, Wrench{}, m, cfg);
  const FeatureExtractor ex(ref);

  SUBCASE("reference against itself") {
    const MoireObservables obs = ex.extract(ref);
    CHECK(obs.phase_offset.norm() < 1e-9);
    CHECK(obs.phase_gradient.norm() < 1e-9);
    CHECK(std::abs(obs.lambda - ex.reference_peak().lambda) / obs.lambda < 1e-5);
    CHECK(std::abs(obs.lambda - lambda_apparent(kMid)) / lambda_apparent(kMid) < 0.02);
  }

  SUBCASE("twist rotates the beat by the analytic angle") {
    Wrench w;
    w.fz = 0.5;
    w.tz = 0.004;
    const ImageGray img = render_wrench(kMid, w, m, cfg);
    const MoireObservables obs = ex.extract(img);
    const SensorGeometryd def = deformed_geometry(kMid, wrench_to_deformation(w, m, kMid));
    const auto [far_app, near_app] = apparent_gratings(def);
    const FringeDescriptord analytic = moire_descriptor(far_app, near_app);
    CHECK(deg(halfplane_distance(obs.theta, analytic.theta)) < 0.5);
    CHECK(std::abs(obs.lambda - analytic.lambda) / analytic.lambda < 0.02);
  }

  SUBCASE("normal load raises the period") {
    Wrench w;
    w.fz = 1.2;
    CHECK(ex.extract(render_wrench(kMid, w, m, cfg)).lambda > ex.reference_peak().lambda);
  }

  SUBCASE("tilt shifts the centroid toward the contact") {
    Wrench preload;
    preload.fz = 1.0;
    Wrench tilted = preload;
    tilted.tx = 0.006;
    const double cy0 = ex.extract(render_wrench(kMid, preload, m, cfg)).centroid.y();
    const double cy1 = ex.extract(render_wrench(kMid, tilted, m, cfg)).centroid.y();
    const DeformationState d = wrench_to_deformation(tilted, m, kMid);
    CHECK(cy1 > cy0);
    CHECK(d.contact_center.y() > 0);  // same sign as the shift
  }

  SUBCASE("quadrature channel separates the shear axes") {
    DeformationState d;
    d.spacing = kMid.spacing;
    d.displacement = Vec2d(0.0, 0.04);
    const MoireObservables obs = ex.extract(render(kMid, d, m, cfg));
    const Vec2d kq(-ex.reference_peak().k.y(), ex.reference_peak().k.x());
    CHECK(std::abs(obs.phase_offset.y() - kq.dot(d.displacement)) < 0.02);
    CHECK(std::abs(obs.phase_offset.x()) < 0.02);
  }
}

TEST_CASE("noise robustness of the extracted observables") {
  const MaterialModel m;
  const ImageGray ref = render_wrench(kMid, Wrench{}, m, noiseless());
  const FeatureExtractor ex(ref);
  const double lambda0 = ex.reference_peak().lambda;

  std::vector<double> lambda_err, theta_err, offset_err;
  for (int s = 0; s < 50; ++s) {
    RenderConfig cfg;
    cfg.noise_sigma = 0.01;
    cfg.seed = 1000 + s;
    const MoireObservables obs = ex.extract(render_wrench(kMid, Wrench{}, m, cfg));
    lambda_err.push_back(std::abs(obs.lambda - lambda0) / lambda0);
    theta_err.push_back(deg(halfplane_distance(obs.theta, ex.reference_peak().theta)));
    offset_err.push_back(obs.phase_offset.cwiseAbs().maxCoeff());
  }
  auto p95 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[std::size_t(std::ceil(0.95 * v.size())) - 1];
  };
  CHECK(p95(lambda_err) < 0.03);
  CHECK(p95(theta_err) < 1.0);
  CHECK(p95(offset_err) < 0.05);
}

TEST_CASE("phase offset is linear in the applied displacement") {
  const MaterialModel m;
  const RenderConfig cfg = noiseless();
  const ImageGray ref = render_wrench(kMid, Wrench{}, m, cfg);
  const FeatureExtractor ex(ref);
  const double kx = ex.reference_peak().k.x();

  std::vector<double> u_levels = {0.01, 0.02, 0.03, 0.04, 0.05};
  double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
  for (double u : u_levels) {
    DeformationState d;
    d.spacing = kMid.spacing;
    d.displacement = Vec2d(u, 0.0);
    const double phi = ex.extract(render(kMid, d, m, cfg)).phase_offset.x();
    sx += u;
    sy += phi;
    sxx += u * u;
    sxy += u * phi;
    syy += phi * phi;
    CHECK(std::abs(phi - kx * u) < 0.02);
  }
  const double n = double(u_levels.size());
  const double r_num = n * sxy - sx * sy;
  const double r2 = r_num * r_num / ((n * sxx - sx * sx) * (n * syy - sy * sy));
  CHECK(r2 > 0.999);
}
