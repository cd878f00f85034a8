#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "scv/poly.hpp"
#include "scv/rng.hpp"

namespace scv {

// Edge E = { z in C^n : phi_j(z) = 0, j = 1..m } cut out by m real-valued
// polynomial defining functions with exact jets.
class EdgeSpec {
 public:
  EdgeSpec(int n, std::vector<Poly> phi);

  int ambient_dim() const { return n_; }
  int codim() const { return static_cast<int>(phi_.size()); }
  const std::vector<Jet2>& phi() const { return phi_; }

  double phi_value(int j, const Eigen::VectorXcd& z) const;
  Eigen::VectorXd values(const Eigen::VectorXcd& z) const;

  // Rows are the complex gradients d phi_j / d z_k.
  Eigen::MatrixXcd gradient_matrix(const Eigen::VectorXcd& z) const;

  EdgeSpec rotated(const Eigen::MatrixXcd& u) const;  // z -> U z substitution

  nlohmann::json to_json() const;
  static EdgeSpec from_json(const nlohmann::json& j);

  static EdgeSpec flat(int n);                        // phi_j = Re z_j
  static EdgeSpec perturbed_flat(int n, double eps);  // phi_j = Re z_j - eps |Im z|^2

 private:
  int n_;
  std::vector<Jet2> phi_;
};

struct WedgeSpec {
  EdgeSpec edge;
  double delta = 0.0;

  nlohmann::json to_json() const;
  static WedgeSpec from_json(const nlohmann::json& j);
};

// Graph description x = r(x, y) of a totally real edge through 0.
class TotallyRealGraph {
 public:
  TotallyRealGraph(int n, std::vector<Poly> r, double lipschitz_bound,
                   std::string name);

  static TotallyRealGraph zero(int n);
  static TotallyRealGraph quadratic(int n, double eps);  // r_j = eps |y|^2
  // Certifies the Lipschitz constant by dense sampling with a safety factor.
  static TotallyRealGraph polynomial(int n, std::vector<Poly> r,
                                     std::string name = "polynomial");

  int dim() const { return n_; }
  double lipschitz_bound() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  const std::vector<Poly>& r_polys() const { return r_; }

  Eigen::VectorXd r(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  // d r / d x and d r / d y blocks (each n x n).
  void jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                Eigen::MatrixXd& rx, Eigen::MatrixXd& ry) const;

  // Real basis of the tangent space of E at the edge point with coordinates
  // (x, y): columns are dx + i dy for dy = e_k.
  Eigen::MatrixXcd tangent_basis(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) const;

  EdgeSpec as_edge_spec() const;  // phi_j = x_j - r_j(x, y)

  nlohmann::json to_json() const;
  static TotallyRealGraph from_json(const nlohmann::json& j);

 private:
  int n_;
  std::vector<Poly> r_;        // components as polynomials in (z, zbar)
  std::vector<Jet2> jets_;
  double lipschitz_;
  std::string name_;
};

bool in_wedge(const WedgeSpec& w, const Eigen::VectorXcd& z);
bool in_shrunken(const WedgeSpec& w, const Eigen::VectorXcd& z);

// Smallest singular value of the m x n matrix (d phi_j / d z_k) at z.
double genericity_margin(const EdgeSpec& e, const Eigen::VectorXcd& z);

struct DistanceResult {
  double distance = 0.0;
  Eigen::VectorXcd foot;
  bool converged = false;
};

// Distance from z to the full edge (all constraints active).
DistanceResult dist_to_edge(const EdgeSpec& e, const Eigen::VectorXcd& z,
                            Rng rng, int starts = 8, double tol = 1e-10);

// Distance from z in W to bW = union of the faces {phi_j = 0}.
DistanceResult dist_to_wedge_boundary(const WedgeSpec& w,
                                      const Eigen::VectorXcd& z, Rng rng,
                                      int starts = 8, double tol = 1e-10);

struct ComparabilityRow {
  Eigen::VectorXcd z;
  double dist_edge = 0.0;
  double dist_boundary = 0.0;
  double ratio = 0.0;
  bool converged = false;
};

struct ComparabilityResult {
  double constant = 0.0;  // max over samples of max(dE/dbW, dbW/dE)
  std::vector<ComparabilityRow> rows;
  int failures = 0;
};

// Samples the shrunken wedge near the origin and fits the distance
// comparability constant. Rejects delta = 0.
ComparabilityResult dist_comparability(const WedgeSpec& w, int samples,
                                       std::uint64_t seed,
                                       double box_halfwidth = 0.5);

// Draw a point of W_delta inside the box ||z||_inf <= box_halfwidth.
Eigen::VectorXcd sample_shrunken_point(const WedgeSpec& w, Rng& rng,
                                       double box_halfwidth);

}  // namespace scv
