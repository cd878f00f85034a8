#include "scv/wedge.hpp"

#include <cmath>
#include <stdexcept>

#include "scv/domains.hpp"

namespace scv {

namespace {

Eigen::VectorXd real_form(const Eigen::VectorXcd& z) {
  const int n = static_cast<int>(z.size());
  Eigen::VectorXd v(2 * n);
  for (int j = 0; j < n; ++j) {
    v[j] = z[j].real();
    v[n + j] = z[j].imag();
  }
  return v;
}

Eigen::VectorXcd complex_form(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size()) / 2;
  Eigen::VectorXcd z(n);
  for (int j = 0; j < n; ++j) z[j] = cd(v[j], v[n + j]);
  return z;
}

// Real gradient rows (d/dx_j, d/dy_j) of the active constraints.
Eigen::MatrixXd real_jacobian(const std::vector<const Jet2*>& cons,
                              const Eigen::VectorXcd& z) {
  const int n = static_cast<int>(z.size());
  Eigen::MatrixXd jac(static_cast<int>(cons.size()), 2 * n);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const Eigen::VectorXcd g = cons[i]->grad_z(z);
    for (int j = 0; j < n; ++j) {
      jac(static_cast<int>(i), j) = 2.0 * g[j].real();
      jac(static_cast<int>(i), n + j) = -2.0 * g[j].imag();
    }
  }
  return jac;
}

Eigen::VectorXd constraint_values(const std::vector<const Jet2*>& cons,
                                  const Eigen::VectorXcd& z) {
  Eigen::VectorXd c(static_cast<int>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i)
    c[static_cast<int>(i)] = cons[i]->value(z);
  return c;
}

// Newton projection of v onto {c = 0}; returns false when it stalls.
bool project_onto(const std::vector<const Jet2*>& cons, Eigen::VectorXd& v,
                  double tol) {
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXcd z = complex_form(v);
    const Eigen::VectorXd c = constraint_values(cons, z);
    if (c.lpNorm<Eigen::Infinity>() <= tol) return true;
    const Eigen::MatrixXd jac = real_jacobian(cons, z);
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    const Eigen::VectorXd step =
        jac.transpose() * jjt.ldlt().solve(c);
    if (!step.allFinite()) return false;
    v -= step;
  }
  const Eigen::VectorXd c = constraint_values(cons, complex_form(v));
  return c.lpNorm<Eigen::Infinity>() <= tol * 10.0;
}

// Minimize |w - z| over {c(w) = 0} by projected gradient descent from w0.
DistanceResult constrained_closest_point(const std::vector<const Jet2*>& cons,
                                         const Eigen::VectorXcd& z,
                                         const Eigen::VectorXcd& w0,
                                         double tol) {
  DistanceResult out;
  const Eigen::VectorXd target = real_form(z);
  Eigen::VectorXd w = real_form(w0);
  if (!project_onto(cons, w, 1e-12)) return out;

  double best = (w - target).norm();
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXcd zc = complex_form(w);
    const Eigen::MatrixXd jac = real_jacobian(cons, zc);
    const Eigen::VectorXd g = w - target;
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    const Eigen::VectorXd gt =
        g - jac.transpose() * jjt.ldlt().solve(jac * g);
    if (gt.norm() <= tol * (1.0 + g.norm())) break;

    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd cand = w - alpha * gt;
      if (project_onto(cons, cand, 1e-12)) {
        const double d = (cand - target).norm();
        if (d < best - 1e-16) {
          w = cand;
          best = d;
          improved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!improved) break;
  }

  const Eigen::VectorXcd zc = complex_form(w);
  const Eigen::MatrixXd jac = real_jacobian(cons, zc);
  const Eigen::VectorXd g = w - target;
  const Eigen::MatrixXd jjt = jac * jac.transpose();
  const Eigen::VectorXd gt = g - jac.transpose() * jjt.ldlt().solve(jac * g);
  out.distance = best;
  out.foot = zc;
  out.converged = constraint_values(cons, zc).lpNorm<Eigen::Infinity>() <= 1e-9 &&
                  gt.norm() <= 1e2 * tol * (1.0 + g.norm());
  return out;
}

DistanceResult multistart_distance(const std::vector<const Jet2*>& cons,
                                   const Eigen::VectorXcd& z, Rng& rng,
                                   int starts, double tol) {
  DistanceResult best;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXcd w0 = z;
    if (s > 0) {
      const double radius = 0.05 * s;
      w0 += rng.complex_vector(static_cast<int>(z.size()), radius);
    }
    DistanceResult r = constrained_closest_point(cons, z, w0, tol);
    if (r.converged && (!best.converged || r.distance < best.distance)) best = r;
  }
  return best;
}

}  // namespace

// ---- EdgeSpec ----

EdgeSpec::EdgeSpec(int n, std::vector<Poly> phi) : n_(n) {
  if (phi.empty()) throw std::invalid_argument("edge: at least one phi required");
  for (Poly& p : phi) {
    if (p.vars() != n) throw std::invalid_argument("edge: phi arity mismatch");
    phi_.emplace_back(std::move(p));
  }
}

double EdgeSpec::phi_value(int j, const Eigen::VectorXcd& z) const {
  return phi_[static_cast<std::size_t>(j)].value(z);
}

Eigen::VectorXd EdgeSpec::values(const Eigen::VectorXcd& z) const {
  Eigen::VectorXd v(codim());
  for (int j = 0; j < codim(); ++j) v[j] = phi_value(j, z);
  return v;
}

Eigen::MatrixXcd EdgeSpec::gradient_matrix(const Eigen::VectorXcd& z) const {
  Eigen::MatrixXcd a(codim(), n_);
  for (int j = 0; j < codim(); ++j)
    a.row(j) = phi_[static_cast<std::size_t>(j)].grad_z(z).transpose();
  return a;
}

EdgeSpec EdgeSpec::rotated(const Eigen::MatrixXcd& u) const {
  std::vector<Poly> phi;
  for (const Jet2& jet : phi_) phi.push_back(jet.poly().compose_linear(u));
  return EdgeSpec(n_, std::move(phi));
}

nlohmann::json EdgeSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = "polynomial";
  j["n"] = n_;
  j["m"] = codim();
  nlohmann::json arr = nlohmann::json::array();
  for (const Jet2& jet : phi_) arr.push_back(jet.poly().to_json());
  j["phi"] = arr;
  return j;
}

EdgeSpec EdgeSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "polynomial");
  if (kind == "flat") return flat(j.at("n").get<int>());
  if (kind == "perturbed-flat")
    return perturbed_flat(j.at("n").get<int>(), j.value("eps", 0.05));
  if (kind == "tangent-bundle") {
    const DomainSpec d = DomainSpec::from_json(j.at("domain"));
    return tangent_bundle_edge(d, j.value("pivot", d.dim() - 1));
  }
  if (kind != "polynomial")
    throw std::invalid_argument(
        "edge spec kind must be flat, perturbed-flat, tangent-bundle or "
        "polynomial");
  const int n = j.at("n").get<int>();
  std::vector<Poly> phi;
  for (const nlohmann::json& jp : j.at("phi")) {
    Poly p = Poly::from_json(jp, n);
    if (p.total_degree() > 4)
      throw std::invalid_argument("edge spec: total degree must be <= 4");
    phi.push_back(std::move(p));
  }
  return EdgeSpec(n, std::move(phi));
}

EdgeSpec EdgeSpec::flat(int n) {
  std::vector<Poly> phi;
  for (int j = 0; j < n; ++j) phi.push_back(Poly::re_variable(n, j));
  return EdgeSpec(n, std::move(phi));
}

EdgeSpec EdgeSpec::perturbed_flat(int n, double eps) {
  Poly y2(n);
  for (int l = 0; l < n; ++l)
    y2 += Poly::im_variable(n, l) * Poly::im_variable(n, l);
  std::vector<Poly> phi;
  for (int j = 0; j < n; ++j)
    phi.push_back(Poly::re_variable(n, j) - y2 * cd(eps));
  return EdgeSpec(n, std::move(phi));
}

nlohmann::json WedgeSpec::to_json() const {
  nlohmann::json j;
  j["edge"] = edge.to_json();
  j["delta"] = delta;
  return j;
}

WedgeSpec WedgeSpec::from_json(const nlohmann::json& j) {
  WedgeSpec w{EdgeSpec::from_json(j.at("edge")), j.value("delta", 0.0)};
  if (w.delta < 0.0) throw std::invalid_argument("wedge: delta must be >= 0");
  return w;
}

// ---- TotallyRealGraph ----

TotallyRealGraph::TotallyRealGraph(int n, std::vector<Poly> r,
                                   double lipschitz_bound, std::string name)
    : n_(n), r_(std::move(r)), lipschitz_(lipschitz_bound), name_(std::move(name)) {
  if (static_cast<int>(r_.size()) != n)
    throw std::invalid_argument("graph: r must have n components");
  Eigen::VectorXcd zero_pt = Eigen::VectorXcd::Zero(n);
  for (const Poly& p : r_) {
    Jet2 jet(p);
    if (std::abs(jet.value(zero_pt)) > 1e-14 ||
        jet.grad_z(zero_pt).norm() > 1e-14)
      throw std::invalid_argument("graph: normalization r(0) = 0, dr(0) = 0");
    jets_.push_back(std::move(jet));
  }
}

TotallyRealGraph TotallyRealGraph::zero(int n) {
  std::vector<Poly> r(static_cast<std::size_t>(n), Poly(n));
  return TotallyRealGraph(n, std::move(r), 0.0, "zero");
}

TotallyRealGraph TotallyRealGraph::quadratic(int n, double eps) {
  Poly y2(n);
  for (int l = 0; l < n; ++l)
    y2 += Poly::im_variable(n, l) * Poly::im_variable(n, l);
  std::vector<Poly> r(static_cast<std::size_t>(n), y2 * cd(eps));
  // dr/dy_k = 2 eps y_k for every component: the operator norm on the box
  // ||y||_inf <= 1 is 2 eps sqrt(n) ||y|| <= 2 eps n, attained at the corner.
  return TotallyRealGraph(n, std::move(r), 2.0 * std::abs(eps) * n,
                          "quadratic");
}

TotallyRealGraph TotallyRealGraph::polynomial(int n, std::vector<Poly> r,
                                              std::string name) {
  TotallyRealGraph g(n, std::move(r), 0.0, std::move(name));
  // Sampled sup of the Jacobian operator norm over the working box, with a
  // safety factor; exact bounds exist only for the named built-ins.
  Rng rng(0x9e3779b9);
  double sup = 0.0;
  Eigen::MatrixXd rx(n, n), ry(n, n);
  for (int s = 0; s < 4096; ++s) {
    const Eigen::VectorXd x = rng.vector(n, -1.0, 1.0);
    const Eigen::VectorXd y = rng.vector(n, -1.0, 1.0);
    g.jacobian(x, y, rx, ry);
    Eigen::MatrixXd full(n, 2 * n);
    full << rx, ry;
    sup = std::max(sup, full.jacobiSvd().singularValues()[0]);
  }
  g.lipschitz_ = 1.5 * sup;
  return g;
}

Eigen::VectorXd TotallyRealGraph::r(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y) const {
  Eigen::VectorXcd z(n_);
  for (int j = 0; j < n_; ++j) z[j] = cd(x[j], y[j]);
  Eigen::VectorXd out(n_);
  for (int j = 0; j < n_; ++j) out[j] = jets_[static_cast<std::size_t>(j)].value(z);
  return out;
}

void TotallyRealGraph::jacobian(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, Eigen::MatrixXd& rx,
                                Eigen::MatrixXd& ry) const {
  Eigen::VectorXcd z(n_);
  for (int j = 0; j < n_; ++j) z[j] = cd(x[j], y[j]);
  rx.resize(n_, n_);
  ry.resize(n_, n_);
  for (int j = 0; j < n_; ++j) {
    const Eigen::VectorXcd g = jets_[static_cast<std::size_t>(j)].grad_z(z);
    for (int k = 0; k < n_; ++k) {
      rx(j, k) = 2.0 * g[k].real();
      ry(j, k) = -2.0 * g[k].imag();
    }
  }
}

Eigen::MatrixXcd TotallyRealGraph::tangent_basis(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& y) const {
  Eigen::MatrixXd rx(n_, n_), ry(n_, n_);
  jacobian(x, y, rx, ry);
  // Tangent vectors solve (I - rx) dx = ry dy.
  const Eigen::MatrixXd dxdy =
      (Eigen::MatrixXd::Identity(n_, n_) - rx).partialPivLu().solve(ry);
  Eigen::MatrixXcd basis(n_, n_);
  for (int k = 0; k < n_; ++k)
    for (int j = 0; j < n_; ++j)
      basis(j, k) = cd(dxdy(j, k), k == j ? 1.0 : 0.0);
  return basis;
}

EdgeSpec TotallyRealGraph::as_edge_spec() const {
  std::vector<Poly> phi;
  for (int j = 0; j < n_; ++j)
    phi.push_back(Poly::re_variable(n_, j) - r_[static_cast<std::size_t>(j)]);
  return EdgeSpec(n_, std::move(phi));
}

nlohmann::json TotallyRealGraph::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["name"] = name_;
  j["lipschitz_bound"] = lipschitz_;
  nlohmann::json arr = nlohmann::json::array();
  for (const Poly& p : r_) arr.push_back(p.to_json());
  j["r"] = arr;
  return j;
}

TotallyRealGraph TotallyRealGraph::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<Poly> r;
  for (const nlohmann::json& jp : j.at("r")) r.push_back(Poly::from_json(jp, n));
  return TotallyRealGraph(n, std::move(r), j.at("lipschitz_bound").get<double>(),
                          j.value("name", "custom"));
}

// ---- membership and margins ----

bool in_wedge(const WedgeSpec& w, const Eigen::VectorXcd& z) {
  for (int j = 0; j < w.edge.codim(); ++j)
    if (!(w.edge.phi_value(j, z) < 0.0)) return false;
  return true;
}

bool in_shrunken(const WedgeSpec& w, const Eigen::VectorXcd& z) {
  const Eigen::VectorXd v = w.edge.values(z);
  const double total = v.sum();
  for (int j = 0; j < v.size(); ++j)
    if (!(v[j] - w.delta * (total - v[j]) < 0.0)) return false;
  return true;
}

double genericity_margin(const EdgeSpec& e, const Eigen::VectorXcd& z) {
  // Full rank m is impossible when m > n, so such edges are never generic.
  if (e.codim() > e.ambient_dim()) return 0.0;
  const Eigen::MatrixXcd a = e.gradient_matrix(z);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues()[e.codim() - 1];
}

DistanceResult dist_to_edge(const EdgeSpec& e, const Eigen::VectorXcd& z,
                            Rng rng, int starts, double tol) {
  std::vector<const Jet2*> cons;
  for (const Jet2& jet : e.phi()) cons.push_back(&jet);
  return multistart_distance(cons, z, rng, starts, tol);
}

DistanceResult dist_to_wedge_boundary(const WedgeSpec& w,
                                      const Eigen::VectorXcd& z, Rng rng,
                                      int starts, double tol) {
  DistanceResult best;
  for (int j = 0; j < w.edge.codim(); ++j) {
    std::vector<const Jet2*> cons{&w.edge.phi()[static_cast<std::size_t>(j)]};
    DistanceResult r = multistart_distance(cons, z, rng, starts, tol);
    if (r.converged && (!best.converged || r.distance < best.distance)) best = r;
  }
  return best;
}

Eigen::VectorXcd sample_shrunken_point(const WedgeSpec& w, Rng& rng,
                                       double box_halfwidth) {
  const int n = w.edge.ambient_dim();
  for (int attempt = 0; attempt < 200000; ++attempt) {
    Eigen::VectorXcd z(n);
    for (int j = 0; j < n; ++j)
      z[j] = cd(rng.uniform(-box_halfwidth, box_halfwidth),
                rng.uniform(-box_halfwidth, box_halfwidth));
    if (in_shrunken(w, z)) return z;
  }
  throw std::runtime_error("could not sample the shrunken wedge in the box");
}

ComparabilityResult dist_comparability(const WedgeSpec& w, int samples,
                                       std::uint64_t seed,
                                       double box_halfwidth) {
  if (!(w.delta > 0.0))
    throw std::invalid_argument(
        "dist_comparability: requires delta > 0 (ratio is unbounded on the "
        "full wedge)");
  Rng rng(seed);
  ComparabilityResult out;
  for (int s = 0; s < samples; ++s) {
    ComparabilityRow row;
    row.z = sample_shrunken_point(w, rng, box_halfwidth);
    Rng sub = rng.substream(static_cast<std::uint64_t>(s));
    const DistanceResult de = dist_to_edge(w.edge, row.z, sub);
    const DistanceResult db = dist_to_wedge_boundary(w, row.z, sub);
    row.converged = de.converged && db.converged;
    if (row.converged && de.distance > 0.0 && db.distance > 0.0) {
      row.dist_edge = de.distance;
      row.dist_boundary = db.distance;
      row.ratio = std::max(de.distance / db.distance, db.distance / de.distance);
      out.constant = std::max(out.constant, row.ratio);
    } else {
      ++out.failures;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace scv
