#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "scv/regularity.hpp"

using scv::BishopProblem;
using scv::BootstrapSchedule;
using scv::cd;
using scv::DiscFamily;
using scv::DomainSpec;
using scv::ExponentFit;
using scv::HolomorphicMap;
using scv::HopfReport;
using scv::MapUnderTest;
using scv::Poly;
using scv::PowerCertificate;
using scv::RayProfile;
using scv::TotallyRealGraph;
using scv::UniformFitSummary;

namespace {

// Harmonic measure of the lower semicircle by composite-Simpson Poisson
// quadrature: boundary data 1 on the lower arc, 0 on the upper one.
double harmonic_measure_lower(cd z) {
  const int panels = 4096;
  const double lo = std::numbers::pi;
  const double hi = 2.0 * std::numbers::pi;
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  const double r2 = std::norm(z);
  for (int k = 0; k <= panels; ++k) {
    const double t = lo + k * h;
    const cd e(std::cos(t), std::sin(t));
    const double p = (1.0 - r2) / std::norm(e - z);
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * p;
  }
  return sum * h / 3.0 / (2.0 * std::numbers::pi);
}

RayProfile synthetic_profile(double amplitude, double gamma, double noise,
                             std::uint64_t seed) {
  scv::Rng rng(seed);
  RayProfile p;
  p.s = scv::dyadic_distances(0.1, 20);
  p.value.reserve(p.s.size());
  for (double si : p.s)
    p.value.push_back(amplitude * std::pow(si, gamma) *
                      (1.0 + noise * rng.uniform(-1.0, 1.0)));
  return p;
}

DiscFamily flat_family_1d() {
  const BishopProblem base = BishopProblem::standard(
      TotallyRealGraph::zero(1), Eigen::VectorXd::Zero(1),
      Eigen::VectorXd::Zero(1), 128);
  return DiscFamily::grid(base, 0.25, 0.3, 3);
}

}  // namespace

TEST_SUITE("regularity") {

TEST_CASE("dyadic ladders halve and reject bad arguments") {
  const std::vector<double> s = scv::dyadic_distances(0.1, 20);
  REQUIRE(s.size() == 20);
  CHECK(s[0] == 0.1);
  for (std::size_t i = 1; i < s.size(); ++i)
    CHECK(s[i] == doctest::Approx(0.5 * s[i - 1]).epsilon(1e-15));
  CHECK_THROWS_AS(scv::dyadic_distances(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(scv::dyadic_distances(0.1, 0), std::invalid_argument);
}

TEST_CASE("ray profiles validate their ladder") {
  RayProfile p = synthetic_profile(1.0, 1.0, 0.0, 1);
  CHECK_NOTHROW(p.validate());

  RayProfile up = p;
  std::reverse(up.s.begin(), up.s.end());
  CHECK_THROWS_AS(up.validate(), std::invalid_argument);

  RayProfile neg = p;
  neg.s.back() = -1e-9;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);

  RayProfile short_values = p;
  short_values.value.pop_back();
  CHECK_THROWS_AS(short_values.validate(), std::invalid_argument);

  RayProfile bad_value = p;
  bad_value.value[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad_value.validate(), std::invalid_argument);

  RayProfile mismatched = p;
  mismatched.base = Eigen::VectorXcd::Zero(2);
  mismatched.direction = Eigen::VectorXcd::Zero(1);
  CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);

  RayProfile ray = p;
  ray.base = Eigen::VectorXcd::Constant(1, cd(1.0, 0.0));
  ray.direction = Eigen::VectorXcd::Constant(1, cd(-1.0, 0.0));
  CHECK(ray.point(0.25)[0] == cd(0.75, 0.0));
}

TEST_CASE("power-law fit recovers clean exponents exactly") {
  const RayProfile p = synthetic_profile(3.0, 0.7, 0.0, 1);
  const ExponentFit fit = scv::fit_power_law(p);
  CHECK_NOTHROW(fit.validate());
  CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.constant == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.s_max == 0.1);
  CHECK(fit.s_min == doctest::Approx(0.1 * std::ldexp(1.0, -19)).epsilon(1e-15));

  // Constant data is an exact slope-zero fit.
  const RayProfile flat = synthetic_profile(5.0, 0.0, 0.0, 1);
  const ExponentFit ffit = scv::fit_power_law(flat);
  CHECK(ffit.exponent == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ffit.constant == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(ffit.r2 == 1.0);
}

TEST_CASE("power-law fit stays within 0.02 under multiplicative noise") {
  int stream = 0;
  for (double gamma : {0.0, 0.25, 0.5, 1.0}) {
    const RayProfile p = synthetic_profile(2.0, gamma, 0.05,
                                           0x715e + 17 * stream++);
    const ExponentFit fit = scv::fit_power_law(p);
    CHECK(std::abs(fit.exponent - gamma) <= 0.02);
    CHECK(fit.constant == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("all-zero data reports the exact-zero case") {
  RayProfile p = synthetic_profile(0.0, 1.0, 0.0, 1);
  const ExponentFit fit = scv::fit_power_law(p);
  CHECK(fit.exact_zero);
  CHECK_NOTHROW(fit.validate());

  // Isolated zeros drop out without disturbing the slope.
  RayProfile holed = synthetic_profile(1.0, 1.0, 0.0, 1);
  holed.value[7] = 0.0;
  const ExponentFit hfit = scv::fit_power_law(holed);
  CHECK_FALSE(hfit.exact_zero);
  CHECK(hfit.exponent == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blow-up fits flip the sign convention") {
  RayProfile p = synthetic_profile(1.0, -0.5, 0.05, 0x5eed1);
  const ExponentFit fit = scv::blowup_fit({p});
  CHECK(std::abs(fit.exponent - 0.5) <= 0.02);

  const RayProfile bounded = synthetic_profile(1.0, 0.0, 0.0, 1);
  CHECK(std::abs(scv::blowup_fit({bounded}).exponent) <= 1e-12);
}

TEST_CASE("harmonic measure vanishes at unit rate on the upper arc") {
  const ExponentFit fit =
      scv::vanishing_rate_fit(harmonic_measure_lower, 0.0, std::numbers::pi);
  CHECK(fit.exponent >= 0.98);
  CHECK(fit.exponent <= 1.05);
  CHECK(fit.constant > 0.0);
  CHECK(fit.r2 >= 0.99);
}

TEST_CASE("vanishing rate hypotheses have teeth") {
  // Superharmonic: circle means fall below the center value.
  CHECK_THROWS_AS(scv::vanishing_rate_fit(
                      [](cd z) { return 1.0 - std::norm(z); }, 0.0,
                      std::numbers::pi),
                  std::invalid_argument);
  // Negative somewhere.
  CHECK_THROWS_AS(
      scv::vanishing_rate_fit([](cd) { return -0.1; }, 0.0, std::numbers::pi),
      std::invalid_argument);
  // Positive harmonic, but it does not vanish on the arc.
  CHECK_THROWS_AS(
      scv::vanishing_rate_fit([](cd) { return 0.5; }, 0.0, std::numbers::pi),
      std::invalid_argument);
  // Degenerate arc.
  CHECK_THROWS_AS(scv::vanishing_rate_fit([](cd) { return 0.0; }, 1.0, 1.0),
                  std::invalid_argument);

  const ExponentFit zero =
      scv::vanishing_rate_fit([](cd) { return 0.0; }, 0.0, std::numbers::pi);
  CHECK(zero.exact_zero);
}

TEST_CASE("distance-like functions transport at unit rate with unit constant") {
  const DiscFamily fam = flat_family_1d();
  REQUIRE(fam.members().size() == 9);

  const auto dist_like = [](const Eigen::VectorXcd& z) {
    return z.real().norm();
  };
  const UniformFitSummary s = scv::edge_vanishing_rate(dist_like, fam);
  REQUIRE(s.member_fits.size() == 9);
  CHECK(s.min_exponent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.max_constant == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.constant_spread <= 1e-9);

  const auto squared = [](const Eigen::VectorXcd& z) {
    return z.real().squaredNorm();
  };
  const UniformFitSummary q = scv::edge_vanishing_rate(squared, fam);
  CHECK(q.min_exponent == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(q.max_constant == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q.constant_spread <= 1e-9);

  const UniformFitSummary z =
      scv::edge_vanishing_rate([](const Eigen::VectorXcd&) { return 0.0; }, fam);
  for (const ExponentFit& f : z.member_fits) CHECK(f.exact_zero);
  CHECK(z.constant_spread == 0.0);
}

TEST_CASE("perturbed-edge transport stays uniform across the family") {
  const TotallyRealGraph quad = TotallyRealGraph::quadratic(2, 0.05);
  const BishopProblem base = BishopProblem::standard(
      quad, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 128);
  const DiscFamily fam = DiscFamily::grid(base, 0.25, 0.3, 2);

  const auto edge_dist = [&](const Eigen::VectorXcd& z) {
    const Eigen::VectorXd x = z.real();
    const Eigen::VectorXd y = z.imag();
    return (x - quad.r(x, y)).norm();
  };
  const UniformFitSummary s = scv::edge_vanishing_rate(edge_dist, fam);
  CHECK(s.min_exponent >= 0.99);
  CHECK(s.constant_spread <= 0.10);

  // A single signed component is not subharmonic along the discs; the
  // spot check rejects it.
  const auto one_coordinate = [&](const Eigen::VectorXcd& z) {
    const Eigen::VectorXd x = z.real();
    const Eigen::VectorXd y = z.imag();
    return std::abs((x - quad.r(x, y))[0]);
  };
  CHECK_THROWS_AS(scv::edge_vanishing_rate(one_coordinate, fam),
                  std::invalid_argument);
}

TEST_CASE("unsolved families are rejected") {
  BishopProblem base = BishopProblem::standard(
      TotallyRealGraph::quadratic(1, 0.05), Eigen::VectorXd::Zero(1),
      Eigen::VectorXd::Zero(1), 128);
  base.max_iter = 1;
  base.tol = 1e-16;
  const DiscFamily fam = DiscFamily::grid(base, 0.2, 0.3, 2);
  CHECK_THROWS_AS(scv::edge_vanishing_rate(
                      [](const Eigen::VectorXcd& z) { return z.real().norm(); },
                      fam),
                  std::invalid_argument);
}

TEST_CASE("identity map has hopf ratio between one and two") {
  const DomainSpec ball = DomainSpec::ball(2);
  const HopfReport r =
      scv::hopf_ratio({HolomorphicMap::identity(2), ball, ball});
  CHECK(r.sup_ratio >= 1.0);
  CHECK(r.sup_ratio <= 2.0 + 1e-6);
  CHECK(r.refinement_stable);
  CHECK(r.growth <= 1.01);
}

TEST_CASE("automorphisms are proper, constants are flagged") {
  const DomainSpec ball = DomainSpec::ball(2);
  Eigen::VectorXcd a(2);
  a << cd(0.3, 0.0), cd(0.0, 0.1);
  const HopfReport r =
      scv::hopf_ratio({HolomorphicMap::ball_automorphism(a), ball, ball});
  CHECK(r.refinement_stable);
  CHECK(r.sup_ratio > 0.0);
  CHECK(r.sup_ratio < 5.0);

  const HolomorphicMap constant(
      2, 2, [a](const Eigen::VectorXcd&) { return a; },
      [](const Eigen::VectorXcd&) {
        return Eigen::MatrixXcd::Zero(2, 2).eval();
      },
      "constant");
  const HopfReport c = scv::hopf_ratio({constant, ball, ball});
  CHECK_FALSE(c.refinement_stable);
  CHECK(c.growth == doctest::Approx(16.0).epsilon(1e-6));

  const HolomorphicMap shift(
      2, 2,
      [](const Eigen::VectorXcd& z) {
        Eigen::VectorXcd w = z;
        w[0] += 0.8;
        return w;
      },
      [](const Eigen::VectorXcd&) {
        return Eigen::MatrixXcd::Identity(2, 2).eval();
      },
      "shift");
  CHECK_THROWS_AS(scv::hopf_ratio({shift, ball, ball}), std::runtime_error);

  CHECK_THROWS_AS(scv::hopf_ratio({HolomorphicMap::identity(2), ball, ball},
                                  0, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(scv::hopf_ratio({HolomorphicMap::identity(2), ball, ball},
                                  16, 0.0),
                  std::invalid_argument);
}

TEST_CASE("normal rays start on the boundary and point inward") {
  const DomainSpec ball = DomainSpec::ball(2);
  const std::vector<RayProfile> rays = scv::normal_rays(ball, 8);
  REQUIRE(rays.size() == 8);
  for (const RayProfile& r : rays) {
    CHECK(std::abs(ball.value(r.base)) <= 1e-9);
    CHECK(r.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ball.value(r.point(0.05)) < 0.0);
    CHECK(r.value.empty());
    CHECK(r.s.size() == 20);
  }
  CHECK_THROWS_AS(scv::normal_rays(ball, 0), std::invalid_argument);
}

TEST_CASE("bounded derivatives fit a near-zero blow-up exponent") {
  const DomainSpec ball = DomainSpec::ball(2);
  const MapUnderTest ident{HolomorphicMap::identity(2), ball, ball};
  const ExponentFit gi =
      scv::gradient_exponent_fit(ident, scv::normal_rays(ball));
  CHECK(std::abs(gi.exponent) <= 0.01);
  CHECK(gi.constant == doctest::Approx(1.0).epsilon(1e-9));

  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(2);
  a[0] = 0.5;
  const MapUnderTest aut{HolomorphicMap::ball_automorphism(a), ball, ball};
  const ExponentFit ga =
      scv::gradient_exponent_fit(aut, scv::normal_rays(ball));
  CHECK(std::abs(ga.exponent) <= 0.02);

  const HolomorphicMap broken(
      2, 2, [](const Eigen::VectorXcd& z) { return z; },
      [](const Eigen::VectorXcd&) {
        return Eigen::MatrixXcd::Constant(
                   2, 2, cd(std::numeric_limits<double>::quiet_NaN(), 0.0))
            .eval();
      },
      "broken");
  CHECK_THROWS_AS(scv::gradient_exponent_fit({broken, ball, ball},
                                             scv::normal_rays(ball, 2)),
                  std::runtime_error);
}

TEST_CASE("hardy-littlewood step and bootstrap arithmetic") {
  CHECK(scv::holder_from_gradient(0.5) == 0.5);
  CHECK(scv::holder_from_gradient(0.0) == 1.0);
  CHECK_THROWS_AS(scv::holder_from_gradient(1.0), std::invalid_argument);
  CHECK_THROWS_AS(scv::holder_from_gradient(-0.1), std::invalid_argument);

  const BootstrapSchedule s34 = scv::bootstrap_schedule(0.75);
  CHECK(s34.power == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(s34.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const BootstrapSchedule s55 = scv::bootstrap_schedule(0.55);
  CHECK(s55.alpha == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(scv::bootstrap_schedule(0.999).alpha ==
        doctest::Approx(0.5).epsilon(2e-3));

  // The integration step inverts the schedule exactly, and alpha falls
  // strictly as theta grows.
  double prev = std::numeric_limits<double>::infinity();
  for (double theta = 0.51; theta < 1.0; theta += 0.02) {
    const BootstrapSchedule s = scv::bootstrap_schedule(theta);
    CHECK(scv::holder_from_gradient(s.gradient_exponent) == s.alpha);
    CHECK(s.alpha < prev);
    prev = s.alpha;
  }

  CHECK_THROWS_AS(scv::bootstrap_schedule(0.5), std::invalid_argument);
  CHECK_THROWS_AS(scv::bootstrap_schedule(1.0), std::invalid_argument);
  CHECK_THROWS_AS(scv::bootstrap_schedule(0.3), std::invalid_argument);
  CHECK(scv::bootstrap_schedule(0.3, true).alpha ==
        doctest::Approx(1.0 / 0.6).epsilon(1e-15));
  CHECK_THROWS_AS(scv::bootstrap_schedule(0.0, true), std::invalid_argument);
}

TEST_CASE("fractional powers of the flat-edge model stay psh") {
  // rho = |x|^2: squared distance to the totally real subspace i R^n.
  Poly rho = Poly::constant(2, cd(0.0, 0.0));
  for (int j = 0; j < 2; ++j) {
    const Poly xj = Poly::re_variable(2, j);
    rho = rho + xj * xj;
  }
  const scv::Jet2 jet(rho);

  scv::Rng rng(0x9e5);
  std::vector<Eigen::VectorXcd> probes;
  while (probes.size() < 40) {
    const Eigen::VectorXcd p = rng.complex_ball_point(2, 1.0);
    if (jet.value(p) >= 1e-4) probes.push_back(p);
  }

  const PowerCertificate c34 = scv::psh_power_check(jet, 0.75, probes);
  CHECK(c34.pass);
  CHECK(c34.violations == 0);
  // Closed form: the radial eigenvalue is theta (theta - 1/2) rho^{theta-1}.
  double expected = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXcd& p : probes)
    expected = std::min(expected, 0.75 * 0.25 * std::pow(jet.value(p), -0.25));
  CHECK(c34.min_eigenvalue == doctest::Approx(expected).epsilon(1e-9));

  const PowerCertificate c40 = scv::psh_power_check(jet, 0.40, probes);
  CHECK_FALSE(c40.pass);
  CHECK(c40.violations == 40);
  CHECK(c40.witness.size() == 2);
  CHECK(c40.min_eigenvalue < -1e-8);

  CHECK(scv::psh_power_check(jet, 1.0, probes).pass);
}

TEST_CASE("degenerate directions pass the power check at eigenvalue zero") {
  const Poly rho = Poly::variable(2, 0) * Poly::conj_variable(2, 0);
  const scv::Jet2 jet(rho);
  Eigen::VectorXcd p(2);
  p << cd(0.5, 0.2), cd(0.1, -0.3);
  const PowerCertificate c = scv::psh_power_check(jet, 0.6, {p});
  CHECK(c.pass);
  CHECK(std::abs(c.min_eigenvalue) <= 1e-10);

  // Probes inside the exclusion band are refused.
  Eigen::VectorXcd tiny(2);
  tiny << cd(1e-5, 0.0), cd(0.0, 0.0);
  CHECK_THROWS_AS(scv::psh_power_check(jet, 0.6, {tiny}),
                  std::invalid_argument);

  // So are functions that fail plurisubharmonicity outright.
  const Poly x0 = Poly::re_variable(2, 0);
  const Poly x1 = Poly::re_variable(2, 1);
  const Poly saddle = x0 * x0 - x1 * x1 * cd(0.5, 0.0);
  Eigen::VectorXcd q(2);
  q << cd(1.0, 0.0), cd(0.1, 0.0);
  CHECK_THROWS_AS(scv::psh_power_check(scv::Jet2(saddle), 0.6, {q}),
                  std::invalid_argument);

  CHECK_THROWS_AS(scv::psh_power_check(jet, 0.0, {p}), std::invalid_argument);
  CHECK_THROWS_AS(scv::psh_power_check(jet, 1.5, {p}), std::invalid_argument);
  CHECK_THROWS_AS(scv::psh_power_check(jet, 0.6, {}), std::invalid_argument);
}

TEST_CASE("modulus fitter recovers holder exponents of control maps") {
  const DomainSpec ball = DomainSpec::ball(2);
  const ExponentFit mi =
      scv::modulus_of_continuity_fit({HolomorphicMap::identity(2), ball, ball});
  CHECK(std::abs(mi.exponent - 1.0) <= 0.03);
  CHECK(mi.r2 >= 0.999);

  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(2);
  a[0] = 0.5;
  const ExponentFit ma = scv::modulus_of_continuity_fit(
      {HolomorphicMap::ball_automorphism(a), ball, ball});
  CHECK(std::abs(ma.exponent - 1.0) <= 0.03);

  const DomainSpec disc = DomainSpec::ball(1);
  const HolomorphicMap warp(
      1, 1,
      [](const Eigen::VectorXcd& z) {
        Eigen::VectorXcd w(1);
        w[0] = 0.5 * std::sqrt(cd(1.0, 0.0) + z[0]);
        return w;
      },
      [](const Eigen::VectorXcd& z) {
        Eigen::MatrixXcd j(1, 1);
        j << 0.25 / std::sqrt(cd(1.0, 0.0) + z[0]);
        return j;
      },
      "sqrt-warp");
  const ExponentFit mw = scv::modulus_of_continuity_fit({warp, disc, disc});
  CHECK(std::abs(mw.exponent - 0.5) <= 0.03);

  CHECK_THROWS_AS(
      scv::modulus_of_continuity_fit({HolomorphicMap::identity(2), ball, ball},
                                     -1),
      std::invalid_argument);
  // The local model has the origin on its boundary; no radial chart exists.
  CHECK_THROWS_AS(scv::modulus_of_continuity_fit(
                      {HolomorphicMap::identity(2), DomainSpec::local_model(2),
                       ball}),
                  std::invalid_argument);
}

}  // TEST_SUITE
