#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "scv/poly.hpp"
#include "scv/rng.hpp"
#include "scv/wedge.hpp"

namespace scv {

// Domain {rho < 0} cut out by a real-valued polynomial defining function
// with an exact 2-jet.
class DomainSpec {
 public:
  DomainSpec(int n, Poly rho, std::string kind);

  static DomainSpec ball(int n);
  static DomainSpec ellipsoid(const std::vector<double>& a);  // sum a_j |z_j|^2 - 1
  // rho_ball + eps * q; accepted only when the sampled strict
  // pseudoconvexity margin stays positive.
  static DomainSpec perturbed_ball(int n, double eps, const Poly& q);
  static DomainSpec local_model(int n);  // Re z_n + |z'|^2

  int dim() const { return n_; }
  const std::string& kind() const { return kind_; }
  const Jet2& rho() const { return rho_; }

  double value(const Eigen::VectorXcd& z) const { return rho_.value(z); }
  Eigen::VectorXcd gradient(const Eigen::VectorXcd& z) const {
    return rho_.grad_z(z);
  }

  // Newton-projects z onto {|rho| <= 1e-12} along the gradient direction.
  Eigen::VectorXcd project_to_boundary(Eigen::VectorXcd z) const;
  Eigen::VectorXcd boundary_point(Rng& rng) const;
  std::vector<Eigen::VectorXcd> boundary_samples(int count,
                                                 std::uint64_t seed) const;

  nlohmann::json to_json() const;
  static DomainSpec from_json(const nlohmann::json& j);

 private:
  int n_;
  Jet2 rho_;
  std::string kind_;
};

// Complex hyperplane { v : sum_j nu_j v_j = 0 } through the origin of C^n,
// stored by its homogeneous coefficient vector nu (unit-normalized).
class Hyperplane {
 public:
  explicit Hyperplane(Eigen::VectorXcd normal);

  int dim() const { return static_cast<int>(normal_.size()); }
  const Eigen::VectorXcd& normal() const { return normal_; }

  // Incidence via the defining bilinear sum.
  bool contains(const Eigen::VectorXcd& v, double tol = 1e-10) const;
  // Orthonormal columns spanning the hyperplane.
  Eigen::MatrixXcd basis() const;

  struct Chart {
    Eigen::VectorXcd w;  // n-1 quotients, pivot entry skipped
    int pivot = 0;
  };
  Chart chart() const;  // pivot = largest-modulus coefficient
  static Hyperplane from_chart(const Eigen::VectorXcd& w, int pivot);

 private:
  Eigen::VectorXcd normal_;
};

// Metric on lines through the origin; zero iff equal up to scale.
double projective_distance(const Hyperplane& a, const Hyperplane& b);

// L(rho, p, v) = sum_{j,k} rho_{z_j zbar_k}(p) v_j conj(v_k).
double levi_form(const DomainSpec& d, const Eigen::VectorXcd& p,
                 const Eigen::VectorXcd& v);

// Eigenvalues of the Levi form restricted to the holomorphic tangent space
// H_p, ascending. Throws when d rho(p) degenerates.
Eigen::VectorXd restricted_levi_eigenvalues(const DomainSpec& d,
                                            const Eigen::VectorXcd& p);

// Min over boundary samples of the smallest restricted Levi eigenvalue;
// positive value certifies strict pseudoconvexity on the sample set.
double strict_psc_margin(const DomainSpec& d, int boundary_samples,
                         std::uint64_t seed);

// H_p(b Omega) = { v : sum_j rho_{z_j}(p) v_j = 0 }.
Hyperplane holomorphic_tangent(const DomainSpec& d, const Eigen::VectorXcd& p);

struct ChartResult {
  Eigen::VectorXcd w;  // quotients rho_{z_j} / rho_{z_pivot}, j != pivot
  int pivot = 0;
};

ChartResult tangent_bundle_chart(const DomainSpec& d,
                                 const Eigen::VectorXcd& p);

// Edge spec of the projectivized holomorphic tangent bundle over b Omega in
// the chart of the given pivot: coordinates (z, w) in C^n x C^{n-1} and
// 2n-1 defining functions rho(z) and Re/Im(w_j rho_{z_pivot} - rho_{z_j})
// with denominators cleared.
EdgeSpec tangent_bundle_edge(const DomainSpec& d, int pivot);

// A point of the bundle edge over a boundary point of d.
Eigen::VectorXcd tangent_bundle_point(const DomainSpec& d, int pivot,
                                      const Eigen::VectorXcd& p);

// Holomorphic map with an analytic Jacobian.
class HolomorphicMap {
 public:
  using Fn = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;
  using Jac = std::function<Eigen::MatrixXcd(const Eigen::VectorXcd&)>;

  HolomorphicMap(int dim_in, int dim_out, Fn f, Jac df, std::string name);

  static HolomorphicMap identity(int n);
  static HolomorphicMap unitary(const Eigen::MatrixXcd& u);
  // Involutive automorphism of the unit ball exchanging 0 and a (|a| < 1).
  static HolomorphicMap ball_automorphism(const Eigen::VectorXcd& a);
  static HolomorphicMap compose(const HolomorphicMap& outer,
                                const HolomorphicMap& inner);

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::string& name() const { return name_; }

  Eigen::VectorXcd operator()(const Eigen::VectorXcd& z) const { return f_(z); }
  Eigen::MatrixXcd jacobian(const Eigen::VectorXcd& z) const { return df_(z); }

 private:
  int dim_in_;
  int dim_out_;
  Fn f_;
  Jac df_;
  std::string name_;
};

// Max over probe points of the conjugate-derivative residual and the
// mismatch between the supplied Jacobian and centered differences.
double cr_residual(const HolomorphicMap& f,
                   const std::vector<Eigen::VectorXcd>& probes,
                   double step = 1e-5);

struct MapUnderTest {
  HolomorphicMap map;
  DomainSpec source;
  DomainSpec target;
};

// F(z, P) = (f(z), df(z) P): push-forward of the hyperplane through the
// tangent map; throws on a singular differential.
std::pair<Eigen::VectorXcd, Hyperplane> lift_map(const MapUnderTest& m,
                                                 const Eigen::VectorXcd& z,
                                                 const Hyperplane& p);

}  // namespace scv
