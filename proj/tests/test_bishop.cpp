#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "scv/bishop.hpp"

using namespace scv;

namespace {

Eigen::VectorXd evec(int n, int j, double s = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[j] = s;
  return v;
}

AnalyticDisc identity_disc(int grid) {
  std::vector<cd> samples(static_cast<std::size_t>(grid));
  for (int k = 0; k < grid; ++k)
    samples[static_cast<std::size_t>(k)] =
        std::polar(1.0, 2.0 * M_PI * k / grid);
  return AnalyticDisc({CircleFunction(samples)});
}

}  // namespace

TEST_SUITE("bishop") {

TEST_CASE("bump profile vanishes above and is negative below") {
  const CircleFunction psi = bump_function(256);
  CHECK(psi.is_real());
  for (int k = 0; k < psi.size(); ++k) {
    const double theta = psi.theta(k);
    const double v = psi.sample(k).real();
    if (theta <= M_PI)
      CHECK(v == 0.0);
    else
      CHECK(v <= 0.0);
  }
  CHECK(bump_psi(1.5 * M_PI) == doctest::Approx(-std::exp(-4.0 / (M_PI * M_PI)))
                                    .epsilon(1e-12));
  CHECK(bump_psi(M_PI) == 0.0);
  CHECK(bump_psi(2.0 * M_PI) == 0.0);
  CHECK(bump_psi(1.75 * M_PI) < 0.0);
  // 2pi-periodic
  CHECK(bump_psi(1.5 * M_PI + 2.0 * M_PI) == bump_psi(1.5 * M_PI));
}

TEST_CASE("zero graph solves exactly in one step with residual zero") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd c(2), t(2);
  c << 0.1, -0.2;
  t << 0.3, 0.05;
  const BishopProblem p = BishopProblem::standard(g, c, t);
  const BishopSolution s = solve_bishop(p);

  CHECK(s.converged);
  CHECK(s.iterations == 1);
  CHECK(s.residual == 0.0);
  REQUIRE(s.residual_history.size() == 2);
  CHECK(s.residual_history[1] == 0.0);

  // boundary data is exactly t * psi, coordinate by coordinate
  const CircleFunction psi = bump_function(p.grid_size);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < p.grid_size; ++k)
      CHECK(s.u[static_cast<std::size_t>(j)].sample(k).real() ==
            t[j] * psi.sample(k).real());
}

TEST_CASE("zero graph with t = 0 gives the zero solution immediately") {
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  const BishopProblem p = BishopProblem::standard(g, evec(1, 0, 0.2),
                                                  Eigen::VectorXd::Zero(1));
  const BishopSolution s = solve_bishop(p);
  CHECK(s.converged);
  CHECK(s.iterations == 0);
  CHECK(s.residual == 0.0);
  for (int k = 0; k < p.grid_size; ++k)
    CHECK(s.u[0].sample(k) == cd(0.0, 0.0));
}

TEST_CASE("quadratic graph converges fast and the residual is re-verifiable") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  Eigen::VectorXd c(2), t(2);
  c << 0.0, 0.0;
  t << 1.0, 0.0;
  const BishopProblem p = BishopProblem::standard(g, c, t);
  const BishopSolution s = solve_bishop(p);

  CHECK(s.converged);
  CHECK(s.iterations <= 50);
  CHECK(s.residual < 1e-10);
  // independent substitution into the equation reproduces the residual
  CHECK(bishop_residual(p, s.u) == doctest::Approx(s.residual).epsilon(1e-6));
  CHECK(bishop_residual(p, s.u) < 1e-10);
}

TEST_CASE("residual history decays geometrically under the contraction bound") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  Eigen::VectorXd c(2), t(2);
  c << 0.2, -0.1;
  t << 0.25, 0.15;
  const BishopProblem p = BishopProblem::standard(g, c, t);
  const BishopSolution s = solve_bishop(p);
  REQUIRE(s.converged);
  REQUIRE(g.lipschitz_bound() == doctest::Approx(0.2));
  REQUIRE(s.residual_history.size() >= 4);
  for (std::size_t k = 1; k + 1 < s.residual_history.size(); ++k)
    CHECK(s.residual_history[k + 1] <=
          (g.lipschitz_bound() + 0.3) * s.residual_history[k]);
}

TEST_CASE("doubling t doubles the boundary data exactly for the zero graph") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd c(2), t(2);
  c << 0.1, 0.2;
  t << 0.15, 0.08;
  const BishopSolution s1 = solve_bishop(BishopProblem::standard(g, c, t));
  const BishopSolution s2 =
      solve_bishop(BishopProblem::standard(g, c, 2.0 * t));
  REQUIRE(s1.converged);
  REQUIRE(s2.converged);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 256; ++k)
      CHECK(s2.u[static_cast<std::size_t>(j)].sample(k).real() ==
            2.0 * s1.u[static_cast<std::size_t>(j)].sample(k).real());
}

TEST_CASE("iteration cap yields a divergence report, not an exception") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  Eigen::VectorXd c(2), t(2);
  c << 0.2, -0.1;
  t << 0.25, 0.15;
  BishopProblem p = BishopProblem::standard(g, c, t);
  p.max_iter = 2;
  const BishopSolution s = solve_bishop(p);
  CHECK_FALSE(s.converged);
  CHECK(s.residual > p.tol);
  CHECK(s.residual_history.size() == 2);
  CHECK_THROWS_AS(attached_disc(p, s), std::runtime_error);
}

TEST_CASE("iterates escaping the working box raise an error") {
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  const BishopProblem p =
      BishopProblem::standard(g, Eigen::VectorXd::Zero(1), evec(1, 0, 40.0));
  CHECK_THROWS_AS(solve_bishop(p), std::runtime_error);
}

TEST_CASE("profile violating the sign pattern is rejected") {
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  BishopProblem p = BishopProblem::standard(g, Eigen::VectorXd::Zero(1),
                                            evec(1, 0, 0.1));
  p.psi[0] = CircleFunction(256, [](double) { return -1.0; });
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.psi[0] = CircleFunction(256, [](double theta) {
    return theta > M_PI ? 1.0 : 0.0;
  });
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(
      BishopProblem::standard(g, Eigen::VectorXd::Zero(1), evec(1, 0, -0.1)),
      std::invalid_argument);
}

TEST_CASE("zero graph with t = 0 attaches the constant disc i c0") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd c(2);
  c << 0.4, -0.7;
  const BishopProblem p =
      BishopProblem::standard(g, c, Eigen::VectorXd::Zero(2));
  const AnalyticDisc d = attached_disc(p);
  for (const cd zeta : {cd(0.0, 0.0), cd(0.5, 0.3), cd(-0.9, 0.0)}) {
    const Eigen::VectorXcd v = d.evaluate(zeta);
    CHECK(std::abs(v[0] - cd(0.0, 0.4)) < 1e-12);
    CHECK(std::abs(v[1] - cd(0.0, -0.7)) < 1e-12);
  }
  CHECK(attachment_residual(d, g) < 1e-13);
}

TEST_CASE("zero graph boundary has vanishing real part on the upper arc") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd c(2);
  c << 0.1, 0.0;
  const BishopProblem p = BishopProblem::standard(g, c, evec(2, 0, 0.3));
  const AnalyticDisc d = attached_disc(p);
  const int grid = d.grid_size();
  for (int k = 0; k <= grid / 2; ++k)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(d.boundary()[static_cast<std::size_t>(j)].sample(k).real()) <
            1e-13);
  CHECK(attachment_residual(d, g) < 1e-13);
}

TEST_CASE("perturbed graph attaches within 1e-8 at grid 256") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  Eigen::VectorXd c(2), t(2);
  c << 0.1, -0.05;
  t << 0.2, 0.1;
  const BishopProblem p = BishopProblem::standard(g, c, t);
  const AnalyticDisc d = attached_disc(p);
  CHECK(attachment_residual(d, g) < 1e-8);
}

TEST_CASE("attachment of the identity disc against the x = 0 edge is one") {
  const AnalyticDisc d = identity_disc(256);
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  CHECK(attachment_residual(d, g) == 1.0);
}

TEST_CASE("attachment rejects mismatched dimensions") {
  const AnalyticDisc d = identity_disc(64);
  CHECK_THROWS_AS(attachment_residual(d, TotallyRealGraph::zero(2)),
                  std::invalid_argument);
}

TEST_CASE("flat-edge disc exits orthogonally at the top of the arc") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  const BishopProblem p =
      BishopProblem::standard(g, Eigen::VectorXd::Zero(2), evec(2, 0, 0.3));
  const AnalyticDisc d = attached_disc(p);
  const double margin = transversality_margin(d, g, M_PI / 2.0);
  CHECK(margin > 0.0);
  // tangent space of {x = 0} is i R^n; the radial image is real there
  CHECK(margin == doctest::Approx(M_PI / 2.0).epsilon(1e-8));
}

TEST_CASE("identity disc runs along the edge i R at the point i") {
  const AnalyticDisc d = identity_disc(256);
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  // radial direction at zeta = i maps to i * h'(i) = i, inside the tangent
  const double margin = transversality_margin(d, g, M_PI / 2.0);
  CHECK(margin < 1e-8);
}

TEST_CASE("constant disc has a degenerate differential") {
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  const BishopProblem p = BishopProblem::standard(
      g, evec(1, 0, 0.4), Eigen::VectorXd::Zero(1));
  const AnalyticDisc d = attached_disc(p);
  CHECK_THROWS_AS(transversality_margin(d, g, M_PI / 2.0),
                  std::runtime_error);
}

TEST_CASE("perturbed-edge discs stay transverse on the upper arc") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  Eigen::VectorXd c(2), t(2);
  c << 0.1, 0.1;
  t << 0.2, 0.2;
  const BishopProblem p = BishopProblem::standard(g, c, t);
  const AnalyticDisc d = attached_disc(p);
  for (double theta : {0.4, M_PI / 2.0, 2.5})
    CHECK(transversality_margin(d, g, theta) > 0.1);
}

TEST_CASE("solved discs stay inside the wedge on an interior grid") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  const WedgeSpec w{g.as_edge_spec(), 0.2};
  Eigen::VectorXd c(2), t(2);
  c << 0.15, -0.1;
  t << 0.25, 0.2;
  const AnalyticDisc d = attached_disc(BishopProblem::standard(g, c, t));
  for (double r : {0.0, 0.3, 0.6, 0.9})
    for (int a = 0; a < 16; ++a) {
      const cd zeta = std::polar(r, 2.0 * M_PI * a / 16.0);
      CHECK(in_wedge(w, d.evaluate(zeta)));
      if (r == 0.0) break;  // zeta = 0 needs a single angle
    }
}

TEST_CASE("grid family solves every member and attaches within tolerance") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(1, 0.05);
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 5);
  CHECK(fam.members().size() == 25);
  for (const FamilyMember& m : fam.members()) {
    CHECK(m.converged);
    CHECK(m.residual <= base.tol);
    CHECK(m.attachment <= 1e-8);
    CHECK(std::abs(m.c[0]) <= 0.3 + 1e-15);
    CHECK(m.t[0] >= 0.0);
    CHECK(m.t[0] <= 0.3 + 1e-15);
  }
  // corner members reach the box edges
  CHECK(fam.members().front().c[0] == doctest::Approx(-0.3));
  CHECK(fam.members().back().t[0] == doctest::Approx(0.3));
}

TEST_CASE("grid family guards against parameter explosions") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(DiscFamily::grid(base, 0.3, 0.3, 22),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiscFamily::grid(base, 0.3, 0.3, 1), std::invalid_argument);
}

TEST_CASE("wedge filling succeeds for the flat edge") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  const WedgeSpec w{g.as_edge_spec(), 0.2};
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 3);
  const FillReport rep = fill_wedge_check(fam, w, 200, 0xf111);
  CHECK(rep.attempted == 200);
  CHECK(rep.coverage >= 0.99);
  CHECK(rep.succeeded + static_cast<int>(rep.failures.size()) ==
        rep.attempted);
}

TEST_CASE("wedge filling succeeds for the perturbed edge") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(2, 0.05);
  const WedgeSpec w{g.as_edge_spec(), 0.2};
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 3);
  const FillReport rep = fill_wedge_check(fam, w, 120, 0xf112);
  CHECK(rep.coverage >= 0.95);
}

TEST_CASE("wedge filling requires a positive shrink factor") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  const WedgeSpec w{g.as_edge_spec(), 0.0};
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 3);
  CHECK_THROWS_AS(fill_wedge_check(fam, w, 10, 1), std::invalid_argument);
}

TEST_CASE("foliation slice covers each edge point by exactly one arc") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd t0(2);
  t0 << 0.3, 0.15;
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam = DiscFamily::foliation_slice(base, t0, 0.24, 9);
  CHECK(fam.members().size() == 9);
  CHECK(fam.is_slice());
  const FoliationReport rep = foliation_check(fam, 60, 0xf01);
  CHECK(rep.max_multiplicity == 1);
  for (int m : rep.multiplicities) CHECK(m == 1);
}

TEST_CASE("duplicated parameters are flagged with multiplicity two") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd c(2), t(2);
  c << 0.1, -0.1;
  t << 0.3, 0.15;
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam =
      DiscFamily::from_parameters(base, {{c, t}, {c, t}});
  const FoliationReport rep = foliation_check(fam, 20, 0xf02);
  CHECK(rep.max_multiplicity == 2);
}

TEST_CASE("coarse parameter grids report gaps without failing") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  Eigen::VectorXd t0(2);
  t0 << 0.3, 0.15;
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily coarse = DiscFamily::foliation_slice(base, t0, 0.24, 3);
  const DiscFamily fine = DiscFamily::foliation_slice(base, t0, 0.24, 9);
  const FoliationReport rc = foliation_check(coarse, 40, 0xf03);
  const FoliationReport rf = foliation_check(fine, 40, 0xf03);
  CHECK(rc.max_gap > 0.0);
  CHECK(rc.max_gap <= coarse.leaf_spacing());
  CHECK(rf.max_gap < rc.max_gap);
  CHECK(rc.leaf_spacing == doctest::Approx(0.24));
  CHECK(rf.leaf_spacing == doctest::Approx(0.06));
}

TEST_CASE("center map of the flat edge has vanishing second differences") {
  const TotallyRealGraph g = TotallyRealGraph::zero(2);
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 3);
  const SmoothnessReport rep = center_map_smoothness(fam);
  REQUIRE(rep.second_difference_sup.size() == 3);
  for (double v : rep.second_difference_sup) CHECK(v < 1e-8);
  CHECK(rep.bounded);
}

TEST_CASE("center map of the perturbed edge stays bounded under halvings") {
  const TotallyRealGraph g = TotallyRealGraph::quadratic(1, 0.05);
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1));
  const DiscFamily fam = DiscFamily::grid(base, 0.3, 0.3, 3);
  const SmoothnessReport rep = center_map_smoothness(fam);
  CHECK(rep.bounded);
  CHECK(rep.spacings[1] == doctest::Approx(0.5 * rep.spacings[0]));
}

TEST_CASE("smoothness scan needs at least three points per axis") {
  const TotallyRealGraph g = TotallyRealGraph::zero(1);
  const BishopProblem base = BishopProblem::standard(
      g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1));
  const DiscFamily two = DiscFamily::grid(base, 0.3, 0.3, 2);
  CHECK_THROWS_AS(center_map_smoothness(two), std::invalid_argument);
  const DiscFamily listed = DiscFamily::from_parameters(
      base, {{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}});
  CHECK_THROWS_AS(center_map_smoothness(listed), std::invalid_argument);
}

}  // TEST_SUITE
