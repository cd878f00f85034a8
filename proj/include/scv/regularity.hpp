#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "scv/bishop.hpp"
#include "scv/domains.hpp"
#include "scv/poly.hpp"

namespace scv {

// Samples of a scalar quantity along one ray running into the boundary:
// g(s_i) at strictly decreasing distances s_i.
struct RayProfile {
  Eigen::VectorXcd base;       // foot of the ray (may be empty for synthetic data)
  Eigen::VectorXcd direction;  // inward direction
  std::vector<double> s;       // strictly decreasing positive distances
  std::vector<double> value;   // g(s_i), filled by the measuring op

  // Sizes consistent, s strictly decreasing and positive, values finite.
  void validate() const;

  Eigen::VectorXcd point(double si) const;  // base + si * direction
};

// s_i = s0 * 2^{-i}, i = 0 .. count-1.
std::vector<double> dyadic_distances(double s0 = 0.1, int count = 20);

// Log-log power-law fit g(s) ~ constant * s^exponent.
struct ExponentFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r2 = 1.0;
  double s_min = 0.0;
  double s_max = 0.0;
  bool exact_zero = false;  // every sample vanished; no rate to report

  void validate() const;  // r2 in [0,1], finite fields
};

// Least squares on pooled (log s, log g) pairs; zero samples are dropped,
// all-zero data comes back flagged exact_zero. Rays sharing the same s
// ladder contribute a common slope even when their constants differ.
ExponentFit fit_power_law(const std::vector<RayProfile>& rays);
ExponentFit fit_power_law(const RayProfile& ray);

// Vanishing rate of a nonnegative subharmonic function on the unit disc
// along radial rays landing strictly inside the open boundary arc
// (arc_lo, arc_hi): fits phi ~ C (1 - |zeta|)^beta. Negativity, failure of
// the sub-mean-value property on spot-check circles, or failure to vanish
// on the arc raise invalid_argument.
ExponentFit vanishing_rate_fit(const std::function<double(cd)>& phi,
                               double arc_lo, double arc_hi, int rays = 3,
                               std::uint64_t seed = 0xfa7);

// Worst case over the members of a disc family.
struct UniformFitSummary {
  std::vector<ExponentFit> member_fits;
  double min_exponent = std::numeric_limits<double>::infinity();
  double max_constant = 0.0;
  double constant_spread = 0.0;  // (max - min) / max over non-degenerate fits
};

// Transports psi through every member disc and fits it against the edge
// distance along the leaf, psi(h(zeta)) ~ C dist(h(zeta), E)^beta; the
// spread of the fitted constants measures uniformity across the family.
UniformFitSummary edge_vanishing_rate(
    const std::function<double(const Eigen::VectorXcd&)>& psi,
    const DiscFamily& family, int rays = 3, std::uint64_t seed = 0xed6e);

// sup over near-boundary samples of |rho_target(f(z))| / dist(z, boundary),
// evaluated on a refining ladder of inward offsets. Images leaving the
// target domain throw (properness violation).
struct HopfReport {
  double sup_ratio = 0.0;         // at the finest offset
  double growth = 1.0;            // finest sup / coarsest sup
  bool refinement_stable = true;  // growth <= 1.25
};

HopfReport hopf_ratio(const MapUnderTest& f, int samples = 64,
                      double offset = 1e-3, std::uint64_t seed = 0x40f);

// Rays from seeded boundary points along the inward radial direction;
// values are left empty for the measuring op to fill.
std::vector<RayProfile> normal_rays(const DomainSpec& d, int count = 32,
                                    double s0 = 0.1, int points = 20,
                                    std::uint64_t seed = 0x4a95);

// Blow-up fit ||g|| ~ A s^{-beta}: same regression with the sign of the
// exponent flipped, so bounded data reports beta ~ 0 and g = s^{-1/2}
// reports beta = 1/2.
ExponentFit blowup_fit(const std::vector<RayProfile>& rays);

// Fills the rays with the operator norm of df and runs blowup_fit.
ExponentFit gradient_exponent_fit(const MapUnderTest& f,
                                  std::vector<RayProfile> rays);

// Hardy-Littlewood step: a gradient blowing up like s^{-beta}, 0 <= beta < 1,
// integrates to a Holder exponent 1 - beta; beta >= 1 supports no conclusion.
double holder_from_gradient(double beta);

// One round of the power-trick bootstrap at parameter theta.
struct BootstrapSchedule {
  double power;              // 1 / theta
  double gradient_exponent;  // 1 - 1/(2 theta)
  double alpha;              // 1/(2 theta)
};

// theta in (1/2, 1); `wide` relaxes the range to (0, 1) for probing.
BootstrapSchedule bootstrap_schedule(double theta, bool wide = false);

// Plurisubharmonicity certificate for rho^theta away from {rho = 0}:
// complex hessian theta rho^{theta-1} H + theta (theta-1) rho^{theta-2} g g*
// assembled from the 2-jet of rho, checked probe by probe.
struct PowerCertificate {
  bool pass = false;
  int violations = 0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd witness;  // first violating probe, when any
};

PowerCertificate psh_power_check(const Jet2& rho, double theta,
                                 const std::vector<Eigen::VectorXcd>& probes);

// Holder modulus of f on the boundary: fits the sup of |f(z) - f(w)| over
// boundary pairs at dyadic separations 2^-18 .. 2^-8 (sampled pairs plus
// pairs anchored at fixed boundary points, nudged inward by 1e-8).
ExponentFit modulus_of_continuity_fit(const MapUnderTest& f, int pairs = 24,
                                      std::uint64_t seed = 0x3103);

}  // namespace scv
