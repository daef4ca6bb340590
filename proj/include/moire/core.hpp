#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace moire {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec2d = Vec2<double>;
using Vec6d = Eigen::Matrix<double, 6, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Degeneracy threshold for wavevector differences, rad/mm.
inline constexpr double kEpsK = 1e-9;

// ---------------------------------------------------------------------------
// Errors. One exception type per contract violation; the CLI maps the whole
// family onto its "numeric" exit code.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateGratings : Error {
  using Error::Error;
};
struct BoundaryCase : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};
struct TiltWithoutPreload : Error {
  using Error::Error;
};
struct UndersampledGrating : Error {
  using Error::Error;
};
struct ZeroImage : Error {
  using Error::Error;
};
struct NoPeak : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// Normalize an angle to (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  Scalar r = std::remainder(a, Scalar(kTwoPi));
  if (r <= Scalar(-kPi)) r += Scalar(kTwoPi);
  return r;
}

/// Fold an angle into the fringe half-plane (-pi/2, pi/2]. K and -K describe
/// the same intensity fringes, so orientations live on a half-open half-turn.
template <typename Scalar>
Scalar fold_halfplane(Scalar a) {
  Scalar r = std::remainder(a, Scalar(kPi));
  if (r <= Scalar(-kPi / 2)) r += Scalar(kPi);
  if (r > Scalar(kPi / 2)) r -= Scalar(kPi);
  return r;
}

/// Smallest magnitude difference between two half-plane angles (mod pi).
inline double halfplane_distance(double a, double b) {
  return std::abs(fold_halfplane(a - b));
}

inline double deg(double rad) { return rad * 180.0 / kPi; }
inline double rad(double deg) { return deg * kPi / 180.0; }

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 for seeding/stream derivation, xoshiro256++
// for the bulk stream, explicit Box-Muller for normals. Self-contained so the
// byte-level outputs do not depend on the standard library implementation.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derive an independent sub-stream seed (e.g. per frame) from a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; samples are produced in pairs.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Parallelism helper: static partition over [0, n). Each index writes its own
// output slot, so results are identical under any schedule.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (max_threads > 0 && max_threads < hw) hw = max_threads;
  if (hw <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace moire
