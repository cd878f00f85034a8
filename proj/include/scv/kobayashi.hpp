#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "scv/domains.hpp"
#include "scv/rng.hpp"

namespace scv {

struct MetricQuery {
  DomainSpec domain;
  Eigen::VectorXcd z;
  Eigen::VectorXcd v;

  // z interior (rho < 0), v nonzero, matching sizes.
  void validate() const;
};

struct MetricEstimate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::optional<double> exact;

  // lower <= upper and lower <= exact <= upper within the slack.
  void validate(double slack = 1e-9) const;
};

// Distance from an interior point to the boundary {rho = 0}, by multistart
// projected descent.
double boundary_distance(const DomainSpec& d, const Eigen::VectorXcd& z,
                         std::uint64_t seed = 0x5eed, int starts = 8);

// |v| / dist(z, boundary): the inscribed-ball competitor bound.
double upper_bound_inscribed(const MetricQuery& q, std::uint64_t seed = 0x5eed);

// Bracket c1^2 |<d psh(z), v>|^2 / psh(z)^2 + c1 |v|^2 / psh(z)^2 from a
// negative strictly psh certificate; the multiplicative constant in front
// is existential and fitted separately. Verifies psh(z) < 0 and complex
// Hessian >= c1 on interior probes before evaluating.
double sibony_lower_bracket(const MetricQuery& q, const Jet2& psh, double c1,
                            int probe_count = 64, std::uint64_t seed = 0x51b);

// Bracket |xi| |u(w)|^{-1/2} for a negative psh u that dominates eps |z|^2
// on probes of the domain within radius 3 and is bounded by `bound` within
// radius 2; w must be an interior point within radius 2.
double localization_lower_bracket(const DomainSpec& domain,
                                  const Eigen::VectorXcd& w,
                                  const Eigen::VectorXcd& xi, const Jet2& u,
                                  double eps, double bound,
                                  int probe_count = 64,
                                  std::uint64_t seed = 0x10c);

// Poincare metric of the unit disc: |v| / (1 - |z|^2).
double exact_metric_disc(cd z, cd v);

// Closed form for the unit ball:
// sqrt((1 - |z|^2) |v|^2 + |<v,z>|^2) / (1 - |z|^2).
double exact_metric_ball(const Eigen::VectorXcd& z, const Eigen::VectorXcd& v);

// Closed form when the domain is a ball or a round centered ellipsoid
// (a scaled ball); nullopt otherwise.
std::optional<double> exact_metric(const DomainSpec& d,
                                   const Eigen::VectorXcd& z,
                                   const Eigen::VectorXcd& v);

struct ExtremalDiscResult {
  double value = std::numeric_limits<double>::infinity();
  // n x (degree+1), column k holds the zeta^k coefficient of the witness.
  Eigen::MatrixXcd coefficients;
  bool fallback = false;  // no feasible disc found; value is the inscribed bound
};

// Definitional upper bound: minimize lambda over polynomial discs
// h(zeta) = z + (v/lambda) zeta + sum_{k=2..degree} a_k zeta^k that stay
// inside the domain on 256 boundary samples. Warm-starts each degree from
// the previous one, so the value is nonincreasing in `degree`.
ExtremalDiscResult extremal_disc_search(const MetricQuery& q, int degree,
                                        int restarts, std::uint64_t seed);

// Checks that the metric does not increase under a holomorphic map:
// target value at (f(z), df(z) v) <= source value at (z, v) + 1e-9.
// Uses closed forms when both sides admit them, otherwise compares a
// circumscribed-ball lower bound against the inscribed upper bound.
bool decreasing_property_check(const MapUnderTest& f, const MetricQuery& q);

// Empirical infimum of exact / sibony_lower_bracket over random interior
// queries with unit direction; the testable form of the existential
// constant. Requires a closed-form domain.
double fitted_sibony_constant(const DomainSpec& d, const Jet2& psh, double c1,
                              int samples, std::uint64_t seed);

// Empirical infimum of exact * sqrt(|u(w)|) / |xi| over random interior
// queries with unit direction; the testable form of the localization
// constant. Requires a closed-form domain.
double fitted_localization_constant(const DomainSpec& d, const Jet2& u,
                                    double eps, double bound, int samples,
                                    std::uint64_t seed);

}  // namespace scv
