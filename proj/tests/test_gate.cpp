#include <doctest.h>

#include "moire/gate.hpp"
#include "moire/synth.hpp"

using namespace moire;

namespace {
const SensorGeometryd kMid(Gratingd(0.35, 0.0), Gratingd(0.30, 0.0), 3.0, 12.0);
}

TEST_CASE("energy ratio") {
  ImageGray base(4, 4, 1.0);
  base.values.setConstant(0.5);
  ImageGray frame = base;
  CHECK(energy_ratio(frame, base) == 0.0);

  // Hand evaluation: 16 pixels, sum(b^2) = 4, sum(d^2) = 16 * 0.01.
  frame.values += 0.1;
  CHECK(energy_ratio(frame, base) == doctest::Approx(0.04).epsilon(1e-12));

  ImageGray other(5, 4, 1.0);
  CHECK_THROWS_AS(energy_ratio(other, base), DimensionMismatch);
}

TEST_CASE("contact lifts the energy ratio above the noise floor") {
  RenderConfig ref_cfg;
  ref_cfg.noise_sigma = 0.0;
  const ImageGray baseline = render_wrench(kMid, Wrench{}, MaterialModel{}, ref_cfg);
  const double p99 = noise_floor_er(baseline, 0.01, 100, 5);

  RenderConfig cfg;
  cfg.noise_sigma = 0.01;
  cfg.seed = 77;
  Wrench w;
  w.fz = 1.0;
  const ImageGray frame = render_wrench(kMid, w, MaterialModel{}, cfg);
  CHECK(energy_ratio(frame, baseline) > p99);
}

TEST_CASE("debounced switching") {
  GateConfig cfg;
  cfg.t_on = 1.0;
  cfg.debounce_frames = 2;
  GateState s;

  SUBCASE("two sustained exceedances switch on the second frame") {
    auto [s1, m1] = update(s, 2.0 * cfg.t_on, cfg);
    CHECK(m1 == Mode::Vision);
    auto [s2, m2] = update(s1, 2.0 * cfg.t_on, cfg);
    CHECK(m2 == Mode::Tactile);
    // Two frames at 60 Hz: 33 ms, inside the 30-40 ms response window.
    const double latency_ms = 1000.0 * cfg.debounce_frames / cfg.frame_rate;
    CHECK(latency_ms > 30.0);
    CHECK(latency_ms < 40.0);
  }

  SUBCASE("alternating exceedances never switch") {
    GateState st = s;
    for (int i = 0; i < 100; ++i) {
      auto [next, m] = update(st, i % 2 == 0 ? 2.0 * cfg.t_on : 0.0, cfg);
      st = next;
      CHECK(m == Mode::Vision);
    }
  }

  SUBCASE("the dead band holds the mode indefinitely") {
    GateState st;
    st.mode = Mode::Tactile;
    Rng rng(123);
    for (int i = 0; i < 10000; ++i) {
      auto [next, m] = update(st, rng.uniform(cfg.t_off(), cfg.t_on), cfg);
      st = next;
      CHECK(m == Mode::Tactile);
    }
  }
}

TEST_CASE("no chatter after settling") {
  GateConfig cfg;
  cfg.t_on = 0.5;
  cfg.debounce_frames = 2;
  Rng rng(9);
  GateState st;
  // Force a switch, then hold the ratio inside the dead band.
  for (int i = 0; i < 4; ++i) st = update(st, 1.0, cfg).first;
  CHECK(st.mode == Mode::Tactile);
  int changes = 0;
  Mode prev = st.mode;
  for (int i = 0; i < 10000; ++i) {
    auto [next, m] = update(st, rng.uniform(cfg.t_off(), cfg.t_on), cfg);
    st = next;
    if (m != prev) ++changes;
    prev = m;
  }
  CHECK(changes == 0);
}

TEST_CASE("switch latency is exactly the debounce length") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    GateConfig cfg;
    cfg.t_on = rng.uniform(0.1, 2.0);
    cfg.debounce_frames = 1 + int(rng.next_u64() % 5);
    GateState st;
    const int quiet = 3 + int(rng.next_u64() % 10);
    int frame = 0;
    int switched_at = -1;
    for (int i = 0; i < quiet; ++i, ++frame) {
      st = update(st, rng.uniform(0.0, cfg.t_off()), cfg).first;
      REQUIRE(st.mode == Mode::Vision);
    }
    const int step_start = frame;
    for (int i = 0; i < cfg.debounce_frames + 3; ++i, ++frame) {
      auto [next, m] = update(st, cfg.t_on * rng.uniform(1.5, 3.0), cfg);
      st = next;
      if (m == Mode::Tactile && switched_at < 0) switched_at = frame;
    }
    CHECK(switched_at - step_start == cfg.debounce_frames - 1);
  }
}

TEST_CASE("update is a pure transition") {
  GateConfig cfg;
  cfg.t_on = 0.7;
  GateState st;
  st.mode = Mode::Vision;
  st.consecutive_count = 1;
  const auto a = update(st, 1.4, cfg);
  const auto b = update(st, 1.4, cfg);
  CHECK(a.second == b.second);
  CHECK(a.first.mode == b.first.mode);
  CHECK(a.first.consecutive_count == b.first.consecutive_count);
  CHECK(a.first.last_er == b.first.last_er);
  CHECK_THROWS_AS(update(st, -1.0, cfg), OutOfRange);
}

TEST_CASE("gate config validation") {
  GateConfig cfg;
  cfg.t_on = 1.0;
  cfg.hysteresis_ratio = 0.8;
  CHECK(cfg.t_off() == doctest::Approx(0.8));
  cfg.hysteresis_ratio = 1.2;
  CHECK_THROWS_AS(cfg.validate(), OutOfRange);
  cfg.hysteresis_ratio = 0.8;
  cfg.debounce_frames = 0;
  CHECK_THROWS_AS(cfg.validate(), OutOfRange);
}
