#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scv/circle.hpp"
#include "scv/rng.hpp"
#include "scv/wedge.hpp"

namespace scv {

// Smooth profile vanishing on the closed upper semicircle and strictly
// negative on the open lower one.
double bump_psi(double theta);
CircleFunction bump_function(int grid_size);

struct BishopProblem {
  TotallyRealGraph graph;
  std::vector<CircleFunction> psi;  // one profile per coordinate
  Eigen::VectorXd c;
  Eigen::VectorXd t;
  int grid_size = 256;
  double tol = 1e-11;
  int max_iter = 200;

  // Problem with the standard bump in every coordinate.
  static BishopProblem standard(TotallyRealGraph graph, Eigen::VectorXd c,
                                Eigen::VectorXd t, int grid_size = 256,
                                double tol = 1e-11, int max_iter = 200);

  BishopProblem with_params(Eigen::VectorXd c2, Eigen::VectorXd t2) const;

  // Checks the profile sign pattern, t >= 0, and consistent sizes.
  void validate() const;
};

struct BishopSolution {
  std::vector<CircleFunction> u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double damping = 1.0;
  std::vector<double> residual_history;
};

// Fixed-point iteration u <- r(u, T(u) + c) + t psi, with a single damping
// retry at 1/2 when the residuals grow; iterates escaping the working box
// throw, exhausting the cap returns a divergence report.
BishopSolution solve_bishop(const BishopProblem& p);
BishopSolution solve_bishop(const BishopProblem& p,
                            const std::vector<CircleFunction>& initial);

// Residual of candidate boundary data under the equation, sup over the grid.
double bishop_residual(const BishopProblem& p,
                       const std::vector<CircleFunction>& u);

// Disc with boundary trace u + i(T(u) + c).
AnalyticDisc attached_disc(const BishopProblem& p, const BishopSolution& s);
AnalyticDisc attached_disc(const BishopProblem& p);  // solves first

// Sup over closed-upper-semicircle grid samples of ||x - r(x, y)||_inf.
double attachment_residual(const AnalyticDisc& d, const TotallyRealGraph& g);

// Angle between the image of the radial direction at e^{i theta} and the
// tangent space of the edge there; pi/2 is orthogonal exit, 0 is tangency.
double transversality_margin(const AnalyticDisc& d, const TotallyRealGraph& g,
                             double theta);

struct FamilyMember {
  Eigen::VectorXd c;
  Eigen::VectorXd t;
  std::vector<CircleFunction> u;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double attachment = 0.0;
  double transversality = 0.0;  // margin at theta = pi/2; 0 when degenerate
};

class DiscFamily {
 public:
  // Full product grid |c_j| <= c_halfwidth, 0 <= t_j <= t_max.
  static DiscFamily grid(const BishopProblem& base, double c_halfwidth,
                         double t_max, int per_axis);
  // Slice t = t0 with c ranging over a grid in the hyperplane orthogonal
  // to t0: one arc per leaf of the candidate foliation.
  static DiscFamily foliation_slice(const BishopProblem& base,
                                    const Eigen::VectorXd& t0,
                                    double c_halfwidth, int per_axis);
  static DiscFamily from_parameters(
      const BishopProblem& base,
      const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& params);

  const BishopProblem& base() const { return base_; }
  const std::vector<FamilyMember>& members() const { return members_; }
  AnalyticDisc disc_of(const FamilyMember& m) const;

  double c_halfwidth() const { return c_halfwidth_; }
  double t_max() const { return t_max_; }
  int per_axis() const { return per_axis_; }
  bool is_slice() const { return is_slice_; }
  const Eigen::VectorXd& slice_t() const { return slice_t_; }
  // Orthonormal leaf directions of a slice family.
  const Eigen::MatrixXd& slice_axes() const { return slice_axes_; }
  double leaf_spacing() const;

 private:
  explicit DiscFamily(BishopProblem base) : base_(std::move(base)) {}

  BishopProblem base_;
  std::vector<FamilyMember> members_;
  double c_halfwidth_ = 0.0;
  double t_max_ = 0.0;
  int per_axis_ = 0;
  bool is_slice_ = false;
  Eigen::VectorXd slice_t_;
  Eigen::MatrixXd slice_axes_;
};

struct FillReport {
  int attempted = 0;
  int succeeded = 0;
  double coverage = 0.0;
  std::vector<Eigen::VectorXcd> failures;
};

// Draws points of the shrunken wedge in the box ||z||_inf <= box_halfwidth
// and inverts the family map by damped least-squares steps over
// (zeta, c, t); success needs ||h(zeta) - z|| <= 1e-6 with |zeta| < 1.
FillReport fill_wedge_check(const DiscFamily& f, const WedgeSpec& w,
                            int sample_count, std::uint64_t seed,
                            double box_halfwidth = 0.1);

struct FoliationReport {
  std::vector<int> multiplicities;  // arcs through each sampled leaf point
  int max_multiplicity = 0;
  double max_gap = 0.0;    // leaf-midpoint distance to the nearest arc
  double leaf_spacing = 0.0;
};

// Samples points on leaves through continuous parameters, counts member
// arcs passing through them, and reports mid-gap distances.
FoliationReport foliation_check(const DiscFamily& f, int samples,
                                std::uint64_t seed);

struct SmoothnessReport {
  std::vector<double> spacings;                // h, h/2, h/4
  std::vector<double> second_difference_sup;   // per spacing
  bool bounded = false;
};

// Second-difference quotients of (c, t) -> h_{c,t}(0) along every parameter
// axis under two grid halvings.
SmoothnessReport center_map_smoothness(const DiscFamily& f);

}  // namespace scv
