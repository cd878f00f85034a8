#include "scv/domains.hpp"

#include <cmath>
#include <stdexcept>

namespace scv {

namespace {

// Re-index a polynomial in n variables as one in big_n >= n variables.
Poly promote(const Poly& p, int big_n) {
  Poly out(big_n);
  for (const Poly::Term& t : p.terms()) {
    std::vector<int> zp(static_cast<std::size_t>(big_n), 0);
    std::vector<int> cp(static_cast<std::size_t>(big_n), 0);
    for (std::size_t j = 0; j < t.zp.size(); ++j) {
      zp[j] = t.zp[j];
      cp[j] = t.cp[j];
    }
    out.add_term(t.coeff, std::move(zp), std::move(cp));
  }
  return out;
}

Eigen::MatrixXcd hyperplane_basis_of(const Eigen::VectorXcd& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  // { v : coeffs . v = 0 } is the Hermitian complement of conj(coeffs).
  Eigen::MatrixXcd col = coeffs.conjugate();
  col.resize(n, 1);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(col);
  const Eigen::MatrixXcd q = qr.householderQ();
  return q.rightCols(n - 1);
}

}  // namespace

// ---- DomainSpec ----

DomainSpec::DomainSpec(int n, Poly rho, std::string kind)
    : n_(n), rho_(Jet2(std::move(rho))), kind_(std::move(kind)) {
  if (rho_.vars() != n)
    throw std::invalid_argument("domain: rho arity mismatch");
  if (rho_.poly().total_degree() < 1)
    throw std::invalid_argument("domain: rho must be nonconstant");
}

DomainSpec DomainSpec::ball(int n) {
  return DomainSpec(n, Poly::abs2(n) - Poly::constant(n, 1.0), "ball");
}

DomainSpec DomainSpec::ellipsoid(const std::vector<double>& a) {
  const int n = static_cast<int>(a.size());
  Poly rho = Poly::constant(n, -1.0);
  for (int j = 0; j < n; ++j) {
    if (!(a[static_cast<std::size_t>(j)] > 0.0))
      throw std::invalid_argument("ellipsoid: coefficients must be positive");
    rho += Poly::variable(n, j) * Poly::conj_variable(n, j) *
           cd(a[static_cast<std::size_t>(j)]);
  }
  return DomainSpec(n, std::move(rho), "ellipsoid");
}

DomainSpec DomainSpec::perturbed_ball(int n, double eps, const Poly& q) {
  Poly rho = Poly::abs2(n) - Poly::constant(n, 1.0) + q * cd(eps);
  DomainSpec d(n, std::move(rho), "perturbed-ball");
  const double margin = strict_psc_margin(d, 64, 0x5eed);
  if (!(margin > 0.0))
    throw std::invalid_argument(
        "perturbed ball: sampled strict pseudoconvexity margin is not "
        "positive");
  return d;
}

DomainSpec DomainSpec::local_model(int n) {
  Poly rho = Poly::re_variable(n, n - 1);
  for (int j = 0; j + 1 < n; ++j)
    rho += Poly::variable(n, j) * Poly::conj_variable(n, j);
  return DomainSpec(n, std::move(rho), "local-model");
}

Eigen::VectorXcd DomainSpec::project_to_boundary(Eigen::VectorXcd z) const {
  for (int it = 0; it < 80; ++it) {
    const double r = rho_.value(z);
    if (std::abs(r) <= 1e-12) return z;
    const Eigen::VectorXcd g = rho_.grad_z(z);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-16)
      throw std::runtime_error("boundary projection: degenerate gradient");
    // Move along the steepest real direction conj(g); d rho / dt = 2 |g|^2.
    z -= (r / (2.0 * g2)) * g.conjugate();
  }
  if (std::abs(rho_.value(z)) <= 1e-8) return z;
  throw std::runtime_error("boundary projection did not converge");
}

Eigen::VectorXcd DomainSpec::boundary_point(Rng& rng) const {
  const Eigen::VectorXcd origin = Eigen::VectorXcd::Zero(n_);
  if (value(origin) < 0.0) {
    // Star-shaped case: root along a random ray, then polish.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Eigen::VectorXcd u = rng.complex_unit_vector(n_);
      double lo = 0.0, hi = 1.0;
      bool bracketed = false;
      for (int grow = 0; grow < 60; ++grow) {
        if (value(hi * u) > 0.0) {
          bracketed = true;
          break;
        }
        lo = hi;
        hi *= 1.5;
      }
      if (!bracketed) continue;
      for (int half = 0; half < 80; ++half) {
        const double mid = 0.5 * (lo + hi);
        (value(mid * u) > 0.0 ? hi : lo) = mid;
      }
      return project_to_boundary(0.5 * (lo + hi) * u);
    }
    throw std::runtime_error("boundary sampling: no ray crossing found");
  }
  // General case: Newton projection from a random box point.
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Eigen::VectorXcd z = rng.complex_vector(n_, 1.0);
    if (gradient(z).norm() < 1e-6) continue;
    try {
      return project_to_boundary(z);
    } catch (const std::runtime_error&) {
    }
  }
  throw std::runtime_error("boundary sampling failed");
}

std::vector<Eigen::VectorXcd> DomainSpec::boundary_samples(
    int count, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<Eigen::VectorXcd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) out.push_back(boundary_point(rng));
  return out;
}

nlohmann::json DomainSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = "polynomial";
  j["n"] = n_;
  j["rho"] = rho_.poly().to_json();
  j["tag"] = kind_;
  return j;
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball") return ball(j.at("n").get<int>());
  if (kind == "ellipsoid") return ellipsoid(j.at("a").get<std::vector<double>>());
  if (kind == "local-model") return local_model(j.at("n").get<int>());
  if (kind == "perturbed-ball") {
    const int n = j.at("n").get<int>();
    return perturbed_ball(n, j.at("eps").get<double>(),
                          Poly::from_json(j.at("q"), n));
  }
  if (kind == "polynomial") {
    const int n = j.at("n").get<int>();
    return DomainSpec(n, Poly::from_json(j.at("rho"), n),
                      j.value("tag", "polynomial"));
  }
  throw std::invalid_argument("domain spec: unknown kind " + kind);
}

// ---- Hyperplane ----

Hyperplane::Hyperplane(Eigen::VectorXcd normal) : normal_(std::move(normal)) {
  const double norm = normal_.norm();
  if (norm < 1e-10)
    throw std::invalid_argument("hyperplane: normal vector degenerates");
  normal_ /= norm;
}

bool Hyperplane::contains(const Eigen::VectorXcd& v, double tol) const {
  cd sum = 0.0;
  for (int j = 0; j < dim(); ++j) sum += normal_[j] * v[j];
  return std::abs(sum) <= tol * std::max(1.0, v.norm());
}

Eigen::MatrixXcd Hyperplane::basis() const {
  return hyperplane_basis_of(normal_);
}

Hyperplane::Chart Hyperplane::chart() const {
  Chart c;
  int pivot = 0;
  for (int k = 1; k < dim(); ++k)
    if (std::abs(normal_[k]) > std::abs(normal_[pivot])) pivot = k;
  c.pivot = pivot;
  c.w.resize(dim() - 1);
  int idx = 0;
  for (int j = 0; j < dim(); ++j)
    if (j != pivot) c.w[idx++] = normal_[j] / normal_[pivot];
  return c;
}

Hyperplane Hyperplane::from_chart(const Eigen::VectorXcd& w, int pivot) {
  const int n = static_cast<int>(w.size()) + 1;
  Eigen::VectorXcd normal(n);
  int idx = 0;
  for (int j = 0; j < n; ++j) normal[j] = (j == pivot) ? cd(1.0) : w[idx++];
  return Hyperplane(std::move(normal));
}

double projective_distance(const Hyperplane& a, const Hyperplane& b) {
  // Sine of the angle between the lines, formed as an orthogonal residual so
  // that nearly equal lines resolve below sqrt(machine epsilon).
  const cd overlap = b.normal().dot(a.normal());
  return (a.normal() - overlap * b.normal()).norm();
}

// ---- Levi form ----

double levi_form(const DomainSpec& d, const Eigen::VectorXcd& p,
                 const Eigen::VectorXcd& v) {
  const Eigen::MatrixXcd h = d.rho().hess_zzbar(p);
  cd sum = 0.0;
  for (int j = 0; j < d.dim(); ++j)
    for (int k = 0; k < d.dim(); ++k) sum += h(j, k) * v[j] * std::conj(v[k]);
  return sum.real();
}

Eigen::VectorXd restricted_levi_eigenvalues(const DomainSpec& d,
                                            const Eigen::VectorXcd& p) {
  const Eigen::VectorXcd g = d.gradient(p);
  if (g.norm() < 1e-8)
    throw std::runtime_error("restricted Levi form: degenerate boundary");
  const Eigen::MatrixXcd basis = hyperplane_basis_of(g);
  const Eigen::MatrixXcd h = d.rho().hess_zzbar(p);
  // L(v) = v^H h^T v as a Hermitian form; restrict to the tangent columns.
  const Eigen::MatrixXcd restricted =
      basis.adjoint() * h.transpose() * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(restricted);
  return solver.eigenvalues();
}

double strict_psc_margin(const DomainSpec& d, int boundary_samples,
                         std::uint64_t seed) {
  if (d.dim() < 2)
    throw std::invalid_argument(
        "strict pseudoconvexity margin needs dimension >= 2");
  double margin = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXcd& p : d.boundary_samples(boundary_samples, seed))
    margin = std::min(margin, restricted_levi_eigenvalues(d, p)[0]);
  return margin;
}

Hyperplane holomorphic_tangent(const DomainSpec& d, const Eigen::VectorXcd& p) {
  const Eigen::VectorXcd g = d.gradient(p);
  if (g.norm() < 1e-10)
    throw std::runtime_error("holomorphic tangent: vanishing gradient");
  return Hyperplane(g);
}

ChartResult tangent_bundle_chart(const DomainSpec& d,
                                 const Eigen::VectorXcd& p) {
  const Eigen::VectorXcd g = d.gradient(p);
  int pivot = 0;
  for (int k = 1; k < d.dim(); ++k)
    if (std::abs(g[k]) > std::abs(g[pivot])) pivot = k;
  if (std::abs(g[pivot]) < 1e-8)
    throw std::runtime_error("tangent bundle chart: degenerate gradient");
  ChartResult out;
  out.pivot = pivot;
  out.w.resize(d.dim() - 1);
  int idx = 0;
  for (int j = 0; j < d.dim(); ++j)
    if (j != pivot) out.w[idx++] = g[j] / g[pivot];
  return out;
}

EdgeSpec tangent_bundle_edge(const DomainSpec& d, int pivot) {
  const int n = d.dim();
  if (pivot < 0 || pivot >= n)
    throw std::invalid_argument("tangent bundle edge: pivot out of range");
  const int big_n = 2 * n - 1;  // coordinates (z_1..z_n, w-chart entries)
  std::vector<Poly> phi;
  phi.push_back(promote(d.rho().poly(), big_n));
  const Poly dpivot = promote(d.rho().poly().dz(pivot), big_n);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    const Poly dj = promote(d.rho().poly().dz(j), big_n);
    const Poly w = Poly::variable(big_n, n + idx);
    const Poly q = w * dpivot - dj;  // cleared-denominator chart relation
    const Poly qbar = q.conjugate();
    phi.push_back((q + qbar) * cd(0.5));
    phi.push_back((q - qbar) * cd(0.0, -0.5));
    ++idx;
  }
  return EdgeSpec(big_n, std::move(phi));
}

Eigen::VectorXcd tangent_bundle_point(const DomainSpec& d, int pivot,
                                      const Eigen::VectorXcd& p) {
  const Eigen::VectorXcd g = d.gradient(p);
  if (std::abs(g[pivot]) < 1e-8)
    throw std::runtime_error("tangent bundle point: pivot entry degenerates");
  Eigen::VectorXcd out(2 * d.dim() - 1);
  out.head(d.dim()) = p;
  int idx = 0;
  for (int j = 0; j < d.dim(); ++j)
    if (j != pivot) out[d.dim() + idx++] = g[j] / g[pivot];
  return out;
}

// ---- holomorphic maps ----

HolomorphicMap::HolomorphicMap(int dim_in, int dim_out, Fn f, Jac df,
                               std::string name)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      f_(std::move(f)),
      df_(std::move(df)),
      name_(std::move(name)) {}

HolomorphicMap HolomorphicMap::identity(int n) {
  return HolomorphicMap(
      n, n, [](const Eigen::VectorXcd& z) { return z; },
      [n](const Eigen::VectorXcd&) { return Eigen::MatrixXcd::Identity(n, n); },
      "identity");
}

HolomorphicMap HolomorphicMap::unitary(const Eigen::MatrixXcd& u) {
  const int n = static_cast<int>(u.rows());
  return HolomorphicMap(
      n, n, [u](const Eigen::VectorXcd& z) -> Eigen::VectorXcd { return u * z; },
      [u](const Eigen::VectorXcd&) { return u; }, "unitary");
}

HolomorphicMap HolomorphicMap::ball_automorphism(const Eigen::VectorXcd& a) {
  const int n = static_cast<int>(a.size());
  const double a2 = a.squaredNorm();
  if (a2 >= 1.0)
    throw std::invalid_argument("ball automorphism: center must be inside");
  const double s = std::sqrt(1.0 - a2);
  // m = P_a + s Q_a with P_a the projection onto span(a).
  Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n);
  if (a2 > 0.0) m += (1.0 - s) / a2 * (a * a.adjoint());
  auto value = [a, m](const Eigen::VectorXcd& z) -> Eigen::VectorXcd {
    const cd den = 1.0 - a.dot(z);  // 1 - <z, a>
    return (a - m * z) / den;
  };
  auto jac = [a, m, value](const Eigen::VectorXcd& z) -> Eigen::MatrixXcd {
    const cd den = 1.0 - a.dot(z);
    // d phi(z) w = -m w / den + phi(z) <w, a> / den.
    return (-m + value(z) * a.adjoint()) / den;
  };
  return HolomorphicMap(n, n, value, jac, "ball-automorphism");
}

HolomorphicMap HolomorphicMap::compose(const HolomorphicMap& outer,
                                       const HolomorphicMap& inner) {
  if (inner.dim_out() != outer.dim_in())
    throw std::invalid_argument("compose: dimension mismatch");
  auto value = [outer, inner](const Eigen::VectorXcd& z) {
    return outer(inner(z));
  };
  auto jac = [outer, inner](const Eigen::VectorXcd& z) -> Eigen::MatrixXcd {
    return outer.jacobian(inner(z)) * inner.jacobian(z);
  };
  return HolomorphicMap(inner.dim_in(), outer.dim_out(), value, jac,
                        outer.name() + "." + inner.name());
}

double cr_residual(const HolomorphicMap& f,
                   const std::vector<Eigen::VectorXcd>& probes, double step) {
  double worst = 0.0;
  for (const Eigen::VectorXcd& z : probes) {
    const Eigen::MatrixXcd jac = f.jacobian(z);
    for (int j = 0; j < f.dim_in(); ++j) {
      Eigen::VectorXcd zp = z, zm = z, zip = z, zim = z;
      zp[j] += step;
      zm[j] -= step;
      zip[j] += cd(0.0, step);
      zim[j] -= cd(0.0, step);
      const Eigen::VectorXcd dx = (f(zp) - f(zm)) / (2.0 * step);
      const Eigen::VectorXcd dy = (f(zip) - f(zim)) / (2.0 * step);
      const Eigen::VectorXcd dbar = 0.5 * (dx + cd(0.0, 1.0) * dy);
      const Eigen::VectorXcd dz = 0.5 * (dx - cd(0.0, 1.0) * dy);
      worst = std::max(worst, dbar.lpNorm<Eigen::Infinity>());
      worst = std::max(worst,
                       (dz - jac.col(j)).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

std::pair<Eigen::VectorXcd, Hyperplane> lift_map(const MapUnderTest& m,
                                                 const Eigen::VectorXcd& z,
                                                 const Hyperplane& p) {
  const Eigen::MatrixXcd jac = m.map.jacobian(z);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(jac);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv[sv.size() - 1] < 1e-12 * std::max(1.0, sv[0]))
    throw std::runtime_error("lift: singular differential");
  // Image hyperplane coefficients transport by the inverse transpose.
  const Eigen::VectorXcd normal =
      jac.transpose().partialPivLu().solve(p.normal());
  return {m.map(z), Hyperplane(normal)};
}

}  // namespace scv
