#include "scv/kobayashi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "scv/wedge.hpp"

namespace scv {

namespace {

constexpr double kSlack = 1e-9;

// Interior rejection sampler within a centered complex ball.
std::vector<Eigen::VectorXcd> interior_probes(const DomainSpec& d,
                                              double radius, int count,
                                              Rng& rng) {
  std::vector<Eigen::VectorXcd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int attempt = 0; attempt < 3000 * count &&
                        static_cast<int>(out.size()) < count;
       ++attempt) {
    Eigen::VectorXcd w = rng.complex_ball_point(d.dim(), radius);
    if (d.value(w) < 0.0) out.push_back(std::move(w));
  }
  if (static_cast<int>(out.size()) < count)
    throw std::runtime_error("interior probe sampling starved");
  return out;
}

double min_hessian_eigenvalue(const Jet2& f, const Eigen::VectorXcd& w) {
  const Eigen::MatrixXcd h = f.hess_zzbar(w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hessian eigensolve failed");
  return solver.eigenvalues()[0];
}

std::string format_point(const Eigen::VectorXcd& w) {
  std::ostringstream os;
  os << "(";
  for (int j = 0; j < w.size(); ++j) {
    if (j) os << ", ";
    os << w[j].real() << (w[j].imag() < 0 ? "-" : "+")
       << std::abs(w[j].imag()) << "i";
  }
  os << ")";
  return os.str();
}

// Radius of the domain when it is a centered round ball (possibly scaled),
// recovered from the constant complex Hessian of the defining function.
std::optional<double> round_radius(const DomainSpec& d) {
  if (d.kind() != "ball" && d.kind() != "ellipsoid") return std::nullopt;
  const Eigen::MatrixXcd h =
      d.rho().hess_zzbar(Eigen::VectorXcd::Zero(d.dim()));
  const double a = h(0, 0).real();
  if (a <= 0.0) return std::nullopt;
  if ((h - a * Eigen::MatrixXcd::Identity(d.dim(), d.dim())).norm() > 1e-12)
    return std::nullopt;
  return 1.0 / std::sqrt(a);
}

}  // namespace

void MetricQuery::validate() const {
  if (z.size() != domain.dim() || v.size() != domain.dim())
    throw std::invalid_argument("metric query: dimension mismatch");
  if (!(domain.value(z) < 0.0))
    throw std::invalid_argument("metric query: base point not interior");
  if (v.norm() <= 0.0)
    throw std::invalid_argument("metric query: direction must be nonzero");
}

void MetricEstimate::validate(double slack) const {
  if (lower < 0.0) throw std::runtime_error("metric estimate: negative lower");
  if (std::isfinite(upper) && lower > upper + slack)
    throw std::runtime_error("metric estimate: lower exceeds upper");
  if (exact) {
    if (lower > *exact + slack || (std::isfinite(upper) && *exact > upper + slack))
      throw std::runtime_error("metric estimate: exact outside bracket");
  }
}

double boundary_distance(const DomainSpec& d, const Eigen::VectorXcd& z,
                         std::uint64_t seed, int starts) {
  const EdgeSpec level_set(d.dim(), {d.rho().poly()});
  const DistanceResult r = dist_to_edge(level_set, z, Rng(seed), starts);
  if (!r.converged)
    throw std::runtime_error("boundary distance: descent did not converge");
  return r.distance;
}

double upper_bound_inscribed(const MetricQuery& q, std::uint64_t seed) {
  q.validate();
  return q.v.norm() / boundary_distance(q.domain, q.z, seed);
}

double sibony_lower_bracket(const MetricQuery& q, const Jet2& psh, double c1,
                            int probe_count, std::uint64_t seed) {
  if (q.z.size() != q.domain.dim() || q.v.size() != q.domain.dim())
    throw std::invalid_argument("metric query: dimension mismatch");
  if (!(q.domain.value(q.z) < 0.0))
    throw std::invalid_argument("metric query: base point not interior");
  if (q.v.norm() == 0.0) return 0.0;  // zero directions cost nothing
  if (!(c1 > 0.0))
    throw std::invalid_argument("sibony bracket: c1 must be positive");
  const double pv = psh.value(q.z);
  if (!(pv < 0.0))
    throw std::invalid_argument(
        "sibony bracket: certificate not negative at the base point");

  Rng rng(seed);
  std::vector<Eigen::VectorXcd> probes =
      interior_probes(q.domain, 3.0, probe_count, rng);
  probes.push_back(q.z);
  int bad = 0;
  std::string witness;
  for (const Eigen::VectorXcd& w : probes) {
    if (min_hessian_eigenvalue(psh, w) < c1 - 1e-9) {
      if (!bad) witness = format_point(w);
      ++bad;
    }
  }
  if (bad)
    throw std::runtime_error("sibony bracket: hessian certificate fails on " +
                             std::to_string(bad) + " probes, first at " +
                             witness);

  cd pairing(0.0);
  const Eigen::VectorXcd grad = psh.grad_z(q.z);
  for (int j = 0; j < q.z.size(); ++j) pairing += grad[j] * q.v[j];
  const double p2 = pv * pv;
  return c1 * c1 * std::norm(pairing) / p2 + c1 * q.v.squaredNorm() / p2;
}

double localization_lower_bracket(const DomainSpec& domain,
                                  const Eigen::VectorXcd& w,
                                  const Eigen::VectorXcd& xi, const Jet2& u,
                                  double eps, double bound, int probe_count,
                                  std::uint64_t seed) {
  if (w.size() != domain.dim() || xi.size() != domain.dim())
    throw std::invalid_argument("localization bracket: dimension mismatch");
  if (!(domain.value(w) < 0.0) || w.norm() > 2.0)
    throw std::invalid_argument(
        "localization bracket: w must be interior within radius 2");
  if (!(eps > 0.0) || !(bound > 0.0))
    throw std::invalid_argument("localization bracket: need eps, bound > 0");

  Rng rng(seed);
  int bad = 0;
  std::string witness;
  for (const Eigen::VectorXcd& p : interior_probes(domain, 3.0, probe_count, rng)) {
    if (min_hessian_eigenvalue(u, p) < eps - 1e-9) {
      if (!bad) witness = format_point(p);
      ++bad;
    }
  }
  if (bad)
    throw std::runtime_error(
        "localization bracket: psh domination fails on " +
        std::to_string(bad) + " probes, first at " + witness);
  bad = 0;
  for (const Eigen::VectorXcd& p : interior_probes(domain, 2.0, probe_count, rng)) {
    if (std::abs(u.value(p)) > bound + 1e-12) {
      if (!bad) witness = format_point(p);
      ++bad;
    }
  }
  if (bad)
    throw std::runtime_error("localization bracket: |u| bound fails on " +
                             std::to_string(bad) + " probes, first at " +
                             witness);

  const double uw = u.value(w);
  if (!(uw < 0.0))
    throw std::invalid_argument(
        "localization bracket: u not negative at the query point");
  return xi.norm() / std::sqrt(-uw);
}

double exact_metric_disc(cd z, cd v) {
  if (std::abs(z) >= 1.0)
    throw std::invalid_argument("disc metric: |z| must be < 1");
  return std::abs(v) / (1.0 - std::norm(z));
}

double exact_metric_ball(const Eigen::VectorXcd& z, const Eigen::VectorXcd& v) {
  if (z.size() != v.size())
    throw std::invalid_argument("ball metric: dimension mismatch");
  const double z2 = z.squaredNorm();
  if (z2 >= 1.0) throw std::invalid_argument("ball metric: |z| must be < 1");
  const double pairing = std::norm(z.dot(v));
  return std::sqrt((1.0 - z2) * v.squaredNorm() + pairing) / (1.0 - z2);
}

std::optional<double> exact_metric(const DomainSpec& d,
                                   const Eigen::VectorXcd& z,
                                   const Eigen::VectorXcd& v) {
  const std::optional<double> r = round_radius(d);
  if (!r) return std::nullopt;
  return exact_metric_ball(z / *r, v) / *r;
}

// ---- extremal disc search ----

namespace {

// Variable layout for degree d: x[0] = mu (derivative scale), then for each
// k = 2..d the real and imaginary parts of the zeta^k coefficient vector.
struct SearchSpace {
  int n = 0;
  int degree = 1;
  int vars() const { return 1 + 2 * n * (degree - 1); }

  double mu(const Eigen::VectorXd& x) const { return x[0]; }
  cd coeff(const Eigen::VectorXd& x, int k, int j) const {
    const int base = 1 + 2 * n * (k - 2);
    return cd(x[base + j], x[base + n + j]);
  }
};

struct BoundaryGrid {
  Eigen::MatrixXcd powers;  // (samples) x (degree+1)
  explicit BoundaryGrid(int samples, int degree) : powers(samples, degree + 1) {
    for (int s = 0; s < samples; ++s) {
      const cd zeta = std::polar(1.0, 2.0 * M_PI * s / samples);
      cd p(1.0);
      for (int k = 0; k <= degree; ++k) {
        powers(s, k) = p;
        p *= zeta;
      }
    }
  }
};

class PenaltyProblem {
 public:
  PenaltyProblem(const MetricQuery& q, const SearchSpace& space,
                 const BoundaryGrid& grid, double margin)
      : q_(q), space_(space), grid_(grid), margin_(margin) {}

  void assemble(const Eigen::VectorXd& x, int s, Eigen::VectorXcd& h) const {
    h = q_.z + space_.mu(x) * grid_.powers(s, 1) * q_.v;
    for (int k = 2; k <= space_.degree; ++k)
      for (int j = 0; j < space_.n; ++j)
        h[j] += space_.coeff(x, k, j) * grid_.powers(s, k);
  }

  double worst_violation(const Eigen::VectorXd& x) const {
    Eigen::VectorXcd h(space_.n);
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < grid_.powers.rows(); ++s) {
      assemble(x, s, h);
      worst = std::max(worst, q_.domain.value(h));
    }
    return worst;
  }

  double value(const Eigen::VectorXd& x, double weight) const {
    Eigen::VectorXcd h(space_.n);
    double penalty = 0.0;
    for (int s = 0; s < grid_.powers.rows(); ++s) {
      assemble(x, s, h);
      const double g = q_.domain.value(h) + margin_;
      if (g > 0.0) penalty += g * g;
    }
    return -space_.mu(x) + weight * penalty;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double weight) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(space_.vars());
    grad[0] = -1.0;
    Eigen::VectorXcd h(space_.n);
    for (int s = 0; s < grid_.powers.rows(); ++s) {
      assemble(x, s, h);
      const double g = q_.domain.value(h) + margin_;
      if (g <= 0.0) continue;
      const Eigen::VectorXcd rz = q_.domain.gradient(h);
      const double scale = 2.0 * weight * g;
      cd dir(0.0);
      for (int j = 0; j < space_.n; ++j)
        dir += rz[j] * q_.v[j] * grid_.powers(s, 1);
      grad[0] += scale * 2.0 * dir.real();
      for (int k = 2; k <= space_.degree; ++k) {
        const int base = 1 + 2 * space_.n * (k - 2);
        for (int j = 0; j < space_.n; ++j) {
          const cd w = rz[j] * grid_.powers(s, k);
          grad[base + j] += scale * 2.0 * w.real();
          grad[base + space_.n + j] += scale * -2.0 * w.imag();
        }
      }
    }
    return grad;
  }

 private:
  const MetricQuery& q_;
  const SearchSpace& space_;
  const BoundaryGrid& grid_;
  double margin_;
};

// Barzilai-Borwein descent with Armijo backtracking.
Eigen::VectorXd bb_descent(const PenaltyProblem& prob, Eigen::VectorXd x,
                           double weight, int iters) {
  double fx = prob.value(x, weight);
  Eigen::VectorXd g = prob.gradient(x, weight);
  double step = 1e-3 / std::max(1.0, g.norm());
  for (int it = 0; it < iters; ++it) {
    if (g.norm() < 1e-12) break;
    double alpha = step;
    Eigen::VectorXd xn;
    double fn = fx;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x - alpha * g;
      if (xn[0] < 1e-12) xn[0] = 1e-12;  // derivative scale stays positive
      fn = prob.value(xn, weight);
      if (fn < fx - 1e-4 * alpha * g.squaredNorm()) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;
    const Eigen::VectorXd gn = prob.gradient(xn, weight);
    const Eigen::VectorXd dx = xn - x;
    const Eigen::VectorXd dg = gn - g;
    const double dgg = dg.squaredNorm();
    step = dgg > 1e-300 ? std::clamp(std::abs(dx.dot(dg)) / dgg, 1e-9, 1e2)
                        : alpha;
    x = std::move(xn);
    g = gn;
    if (std::abs(fx - fn) < 1e-15 * std::max(1.0, std::abs(fx))) {
      fx = fn;
      break;
    }
    fx = fn;
  }
  return x;
}

}  // namespace

ExtremalDiscResult extremal_disc_search(const MetricQuery& q, int degree,
                                        int restarts, std::uint64_t seed) {
  q.validate();
  if (degree < 1)
    throw std::invalid_argument("extremal search: degree must be >= 1");
  restarts = std::max(restarts, 1);
  const int n = q.domain.dim();
  const int samples = 256;
  const double margin = 1e-6;
  const double dist = boundary_distance(q.domain, q.z, seed ^ 0x5eed);
  const double mu_inscribed = dist / q.v.norm();

  ExtremalDiscResult result;
  result.coefficients = Eigen::MatrixXcd::Zero(n, degree + 1);
  result.coefficients.col(0) = q.z;
  if (q.domain.value(q.z) > -margin) {
    result.value = q.v.norm() / dist;
    result.fallback = true;
    return result;
  }

  const Rng master(seed);
  double best_mu = 0.0;                // certified derivative scale so far
  Eigen::VectorXd best_x;              // in the current degree's layout
  int best_degree = 1;

  for (int d = 1; d <= degree; ++d) {
    const SearchSpace space{n, d};
    const BoundaryGrid grid(samples, d);
    const PenaltyProblem prob(q, space, grid, margin);

    std::vector<Eigen::VectorXd> starts;
    if (best_mu > 0.0) {
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(space.vars());
      warm[0] = best_x[0];
      if (best_degree >= 2)
        warm.segment(1, 2 * n * (best_degree - 1)) =
            best_x.segment(1, 2 * n * (best_degree - 1));
      starts.push_back(std::move(warm));
    }
    for (int r = 0; r < restarts; ++r) {
      Rng rng = master.substream(static_cast<std::uint64_t>(d) * 1000 + r);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(space.vars());
      x[0] = 0.9 * mu_inscribed * (r == 0 ? 1.0 : rng.uniform(0.5, 1.0));
      if (r > 0)
        for (int k = 2; k <= d; ++k) {
          const Eigen::VectorXcd a = rng.complex_vector(n, 0.05 * dist);
          const int base = 1 + 2 * n * (k - 2);
          for (int j = 0; j < n; ++j) {
            x[base + j] = a[j].real();
            x[base + n + j] = a[j].imag();
          }
        }
      starts.push_back(std::move(x));
    }

    for (Eigen::VectorXd& x : starts) {
      for (double weight : {1e2, 1e4, 1e6, 1e8})
        x = bb_descent(prob, x, weight, 400);

      // pull back onto the strictly feasible segment toward the center
      auto worst_at = [&](double tau) {
        const Eigen::VectorXd xt = tau * x;
        return prob.worst_violation(xt);
      };
      double tau = 1.0;
      if (worst_at(1.0) > -margin / 2.0) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          (worst_at(mid) <= -margin / 2.0 ? lo : hi) = mid;
        }
        tau = lo;
      }
      const double mu_cert = tau * x[0];
      if (mu_cert > best_mu) {
        best_mu = mu_cert;
        best_x = tau * x;
        best_degree = d;
      }
    }
  }

  if (best_mu <= 0.0) {
    result.value = q.v.norm() / dist;
    result.fallback = true;
    return result;
  }
  result.value = 1.0 / best_mu;
  result.coefficients.col(1) = best_mu * q.v;
  for (int k = 2; k <= best_degree; ++k) {
    const int base = 1 + 2 * n * (k - 2);
    for (int j = 0; j < n; ++j)
      result.coefficients(j, k) = cd(best_x[base + j], best_x[base + n + j]);
  }
  return result;
}

bool decreasing_property_check(const MapUnderTest& f, const MetricQuery& q) {
  q.validate();
  const Eigen::VectorXcd w = f.map(q.z);
  const Eigen::VectorXcd dv = f.map.jacobian(q.z) * q.v;
  if (!(f.target.value(w) < 0.0))
    throw std::invalid_argument("decreasing check: image not interior");
  if (dv.norm() == 0.0) return true;  // degenerate pushforward costs nothing

  const std::optional<double> source = exact_metric(f.source, q.z, q.v);
  const std::optional<double> target = exact_metric(f.target, w, dv);
  if (source && target) return *target <= *source + kSlack;

  // Bracket fallback: circumscribed ball under-estimates the target side,
  // the inscribed bound over-estimates the source side.
  double circum = 0.0;
  for (const Eigen::VectorXcd& b : f.target.boundary_samples(64, 0xdec))
    circum = std::max(circum, b.norm());
  const double target_lower =
      target ? *target : exact_metric_ball(w / circum, dv) / circum;
  const double source_upper =
      source ? *source
             : upper_bound_inscribed(MetricQuery{f.source, q.z, q.v});
  return target_lower <= source_upper + kSlack;
}

double fitted_sibony_constant(const DomainSpec& d, const Jet2& psh, double c1,
                              int samples, std::uint64_t seed) {
  const std::optional<double> r = round_radius(d);
  if (!r)
    throw std::invalid_argument("constant fitting needs a closed-form domain");
  Rng rng(seed);
  // one certified bracket call validates the hessian probes
  {
    MetricQuery probe{d, Eigen::VectorXcd::Zero(d.dim()),
                      Eigen::VectorXcd::Ones(d.dim())};
    sibony_lower_bracket(probe, psh, c1, 64, seed ^ 0xabc);
  }
  double fit = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXcd z = rng.complex_ball_point(d.dim(), 0.9 * *r);
    const Eigen::VectorXcd v = rng.complex_unit_vector(d.dim());
    const double pv = psh.value(z);
    cd pairing(0.0);
    const Eigen::VectorXcd grad = psh.grad_z(z);
    for (int j = 0; j < d.dim(); ++j) pairing += grad[j] * v[j];
    const double bracket =
        (c1 * c1 * std::norm(pairing) + c1) / (pv * pv);
    fit = std::min(fit, *exact_metric(d, z, v) / bracket);
  }
  return fit;
}

double fitted_localization_constant(const DomainSpec& d, const Jet2& u,
                                    double eps, double bound, int samples,
                                    std::uint64_t seed) {
  const std::optional<double> r = round_radius(d);
  if (!r)
    throw std::invalid_argument("constant fitting needs a closed-form domain");
  Rng rng(seed);
  {
    localization_lower_bracket(d, Eigen::VectorXcd::Zero(d.dim()),
                               Eigen::VectorXcd::Ones(d.dim()), u, eps, bound,
                               64, seed ^ 0xabc);
  }
  double fit = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXcd w =
        rng.complex_ball_point(d.dim(), std::min(0.9 * *r, 1.9));
    const Eigen::VectorXcd xi = rng.complex_unit_vector(d.dim());
    const double uw = u.value(w);
    fit = std::min(fit, *exact_metric(d, w, xi) * std::sqrt(-uw));
  }
  return fit;
}

}  // namespace scv
