#include <doctest.h>

#include "moire/optics.hpp"

using namespace moire;

namespace {
const SensorGeometryd kDense(Gratingd(0.20, 0.0), Gratingd(0.20, 0.0), 3.0, 12.0);
const SensorGeometryd kMid(Gratingd(0.35, 0.0), Gratingd(0.30, 0.0), 3.0, 12.0);
const SensorGeometryd kSparse(Gratingd(0.30, 0.0), Gratingd(0.25, 0.0), 3.0, 12.0);
}  // namespace

TEST_CASE("grating wavevector") {
  const Vec2d k0 = grating_wavevector(Gratingd(0.2, 0.0));
  CHECK(k0.x() == doctest::Approx(kTwoPi / 0.2).epsilon(1e-12));
  CHECK(k0.y() == doctest::Approx(0.0));

  const Vec2d k90 = grating_wavevector(Gratingd(0.3, kPi / 2));
  CHECK(k90.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k90.y() == doctest::Approx(20.943951).epsilon(1e-6));

  // Direct evaluation at 5 degrees.
  const double a = rad(5.0);
  const Vec2d k5 = grating_wavevector(Gratingd(0.2, a));
  CHECK(k5.x() == doctest::Approx((kTwoPi / 0.2) * std::cos(a)).epsilon(1e-12));
  CHECK(k5.y() == doctest::Approx((kTwoPi / 0.2) * std::sin(a)).epsilon(1e-12));
  CHECK(k5.x() == doctest::Approx(31.296).epsilon(1e-4));
  CHECK(k5.y() == doctest::Approx(2.7384).epsilon(1e-4));
  CHECK(k5.norm() == doctest::Approx(kTwoPi / 0.2).epsilon(1e-12));
}

TEST_CASE("moire descriptor") {
  CHECK_THROWS_AS(moire_descriptor(Gratingd(0.3, 0.0), Gratingd(0.3, 0.0)), DegenerateGratings);

  // Equal pitches, 5 degree twist. Oracle: the chord identity gives
  // Lambda = p / (2 sin(da/2)); the beat is perpendicular to the bisector.
  const double da = rad(5.0);
  const double lambda_oracle = 0.2 / (2.0 * std::sin(da / 2));
  const FringeDescriptord d = moire_descriptor(Gratingd(0.2, 0.0), Gratingd(0.2, da));
  CHECK(d.lambda == doctest::Approx(lambda_oracle).epsilon(1e-12));
  CHECK(d.lambda == doctest::Approx(2.2926).epsilon(1e-4));
  CHECK(deg(d.theta) == doctest::Approx(-87.5).epsilon(1e-9));
  CHECK(d.lambda == doctest::Approx(kTwoPi / d.k.norm()).epsilon(1e-15));

  // Parallel pitch-dominated pair: Lambda = p1 p2 / |p1 - p2|.
  const FringeDescriptord p = moire_descriptor(Gratingd(0.35, 0.0), Gratingd(0.30, 0.0));
  CHECK(p.lambda == doctest::Approx(0.35 * 0.30 / 0.05).epsilon(1e-12));
  CHECK(p.theta == doctest::Approx(0.0));
}

TEST_CASE("moire descriptor swap negates K, keeps lambda and folded theta") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Gratingd g1(rng.uniform(0.1, 0.5), rng.uniform(-kPi, kPi));
    const Gratingd g2(rng.uniform(0.1, 0.5), rng.uniform(-kPi, kPi));
    FringeDescriptord a, b;
    try {
      a = moire_descriptor(g1, g2);
      b = moire_descriptor(g2, g1);
    } catch (const DegenerateGratings&) {
      continue;
    }
    CHECK((a.k + b.k).norm() <= 1e-12 * a.k.norm());
    CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-12));
    CHECK(halfplane_distance(a.theta, b.theta) <= 1e-9);
  }
}

TEST_CASE("general period law") {
  CHECK(period_general(0.2, 0.2, rad(5.0)) ==
        doctest::Approx(0.2 / (2.0 * std::sin(rad(2.5)))).epsilon(1e-12));
  CHECK(period_general(0.35, 0.30, 0.0) == doctest::Approx(2.100).epsilon(1e-12));
  CHECK(period_general(0.4, 0.4, kPi) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(period_general(0.3, 0.3, 0.0), DegenerateGratings);
}

TEST_CASE("general period equals the beat of the descriptor") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double p1 = rng.uniform(0.1, 0.5), p2 = rng.uniform(0.1, 0.5);
    const double da = rng.uniform(-kPi, kPi);
    try {
      const double lg = period_general(p1, p2, da);
      const double ld = moire_descriptor(Gratingd(p1, 0.0), Gratingd(p2, da)).lambda;
      CHECK(std::abs(lg - ld) / ld < 1e-9);
    } catch (const DegenerateGratings&) {
    }
  }
}

TEST_CASE("regime approximations") {
  const double la = period_approx(0.2, 0.2, 0.0873, PeriodRegime::AngleDominated);
  CHECK(la == doctest::Approx(0.2 / 0.0873).epsilon(1e-12));
  const double lg = period_general(0.2, 0.2, 0.0873);
  CHECK(std::abs(la - lg) / lg < 1e-3);

  const double lp = period_approx(0.35, 0.30, 0.0, PeriodRegime::PitchDominated);
  CHECK(lp == doctest::Approx(2.1125).epsilon(1e-12));  // 0.325^2 / 0.05

  CHECK_THROWS_AS(period_approx(0.2, 0.2, 0.0, PeriodRegime::AngleDominated), DegenerateGratings);
  CHECK_THROWS_AS(period_approx(0.3, 0.3, 0.1, PeriodRegime::PitchDominated), DegenerateGratings);

  // Lambda grows without bound as the twist vanishes.
  double prev = 0;
  for (double da : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double l = period_approx(0.2, 0.2, da, PeriodRegime::AngleDominated);
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("approximation error bounds over the design grids") {
  for (double p = 0.1; p <= 0.5 + 1e-12; p += 0.02) {
    for (double da = 0.005; da <= 0.1 + 1e-12; da += 0.005) {
      const double exact = period_general(p, p, da);
      const double approx = period_approx(p, p, da, PeriodRegime::AngleDominated);
      CHECK(std::abs(approx - exact) / exact < 0.01);
    }
  }
  for (double pm = 0.1; pm <= 0.5 + 1e-12; pm += 0.05) {
    for (double delta = 0.01; delta <= 0.15 + 1e-12; delta += 0.01) {
      const double p1 = pm * (1 + delta / 2), p2 = pm * (1 - delta / 2);
      const double exact = period_general(p1, p2, 0.0);
      const double approx = period_approx(p1, p2, 0.0, PeriodRegime::PitchDominated);
      CHECK(std::abs(approx - exact) / exact < 0.01);
    }
  }
}

TEST_CASE("effective mismatch of the three reference configurations") {
  CHECK(delta_eff_approx(kDense) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(delta_eff_approx(kMid) == doctest::Approx(0.25 - 0.05 / 0.325).epsilon(1e-12));
  CHECK(delta_eff_approx(kMid) == doctest::Approx(0.0962).epsilon(5e-4));
  CHECK(std::round(delta_eff_approx(kMid) * 100) / 100 == doctest::Approx(0.10));
  CHECK(delta_eff_approx(kSparse) == doctest::Approx(0.0682).epsilon(5e-4));
  CHECK(std::round(delta_eff_approx(kSparse) * 100) / 100 == doctest::Approx(0.07));
}

TEST_CASE("exact amplification reproduces the design table") {
  CHECK(amplification_exact(kDense) == doctest::Approx(4.00).epsilon(1e-9));
  CHECK(amplification_exact(kMid) == doctest::Approx(14.00).epsilon(1e-9));
  CHECK(amplification_exact(kSparse) == doctest::Approx(24.00).epsilon(1e-9));

  // A equals Lambda_apparent / near pitch.
  CHECK(amplification_exact(kMid) ==
        doctest::Approx(lambda_apparent(kMid) / kMid.near.pitch).epsilon(1e-12));

  // q1 = q2: the moire vanishes at the camera.
  const SensorGeometryd degenerate(Gratingd(0.25, 0.0), Gratingd(0.20, 0.0), 3.0, 12.0);
  CHECK_THROWS_AS(amplification_exact(degenerate), DegenerateGratings);
}

TEST_CASE("compression trend") {
  CHECK(compression_trend(kDense) == CompressionTrend::Sparser);
  CHECK(compression_trend(kMid) == CompressionTrend::Sparser);
  CHECK(compression_trend(kSparse) == CompressionTrend::Sparser);

  // delta_obj = 0.3 > a/Z = 0.25.
  const SensorGeometryd denser(Gratingd(0.345, 0.0), Gratingd(0.255, 0.0), 3.0, 12.0);
  CHECK(compression_trend(denser) == CompressionTrend::Denser);

  // delta_obj = 0.25 = a/Z.
  const SensorGeometryd boundary(Gratingd(0.3375, 0.0), Gratingd(0.2625, 0.0), 3.0, 12.0);
  CHECK_THROWS_AS(compression_trend(boundary), BoundaryCase);
}

TEST_CASE("dimensionless outputs are scale invariant") {
  for (double s : {0.5, 2.0, 3.7}) {
    const SensorGeometryd scaled(Gratingd(0.35 * s, 0.0), Gratingd(0.30 * s, 0.0), 3.0 * s,
                                 12.0 * s);
    CHECK(amplification_exact(scaled) == doctest::Approx(amplification_exact(kMid)).epsilon(1e-12));
    CHECK(delta_obj(scaled.far.pitch, scaled.near.pitch) ==
          doctest::Approx(delta_obj(0.35, 0.30)).epsilon(1e-12));
    CHECK(delta_eff_approx(scaled) == doctest::Approx(delta_eff_approx(kMid)).epsilon(1e-12));
    const auto [f1, n1] = apparent_gratings(scaled);
    const auto [f0, n0] = apparent_gratings(kMid);
    CHECK(halfplane_distance(moire_descriptor(f1, n1).theta, moire_descriptor(f0, n0).theta) <=
          1e-12);
  }
}

TEST_CASE("angle folding") {
  CHECK(fold_halfplane(rad(92.5)) == doctest::Approx(rad(-87.5)).epsilon(1e-12));
  CHECK(fold_halfplane(kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(fold_halfplane(-kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(fold_halfplane(rad(181.0)) == doctest::Approx(rad(1.0)).epsilon(1e-9));
  CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(Gratingd(0.0, 0.0), OutOfRange);
  CHECK_THROWS_AS(Gratingd(-0.2, 0.0), OutOfRange);
  CHECK_THROWS_AS(SensorGeometryd(Gratingd(0.3, 0), Gratingd(0.3, 0), -1.0, 12.0), OutOfRange);
  CHECK_THROWS_AS(SensorGeometryd(Gratingd(0.3, 0), Gratingd(0.3, 0), 13.0, 12.0), OutOfRange);
}
