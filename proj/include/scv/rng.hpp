#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace scv {

// Seeded random stream with deterministic value mapping (the engine is fully
// specified by the standard; distributions are not, so we map bits ourselves).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Independent child stream; stable under the order of other draws.
  Rng substream(std::uint64_t tag) const {
    std::uint64_t x = seed_ ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27; x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return Rng(x);
  }

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd vector(int n, double a, double b) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  Eigen::VectorXd unit_vector(int n) {
    Eigen::VectorXd v(n);
    double s = 0.0;
    while (s < 1e-12) {
      for (int i = 0; i < n; ++i) v[i] = normal();
      s = v.norm();
    }
    return v / s;
  }

  Eigen::VectorXcd complex_vector(int n, double scale) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i)
      v[i] = std::complex<double>(uniform(-scale, scale), uniform(-scale, scale));
    return v;
  }

  Eigen::VectorXcd complex_unit_vector(int n) {
    Eigen::VectorXcd v(n);
    double s = 0.0;
    while (s < 1e-12) {
      for (int i = 0; i < n; ++i) v[i] = std::complex<double>(normal(), normal());
      s = v.norm();
    }
    return v / s;
  }

  // Uniform in the real ball of given radius (rejection from the cube).
  Eigen::VectorXd ball_point(int n, double radius) {
    while (true) {
      Eigen::VectorXd v = vector(n, -1.0, 1.0);
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

  // Uniform in the complex ball |z| < radius of C^n (real dimension 2n).
  Eigen::VectorXcd complex_ball_point(int n, double radius) {
    while (true) {
      Eigen::VectorXcd v = complex_vector(n, 1.0);
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace scv
