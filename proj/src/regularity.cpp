#include "scv/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "scv/kobayashi.hpp"
#include "scv/rng.hpp"

namespace scv {

namespace {

constexpr double kZeroFloor = 1e-300;
constexpr double kNegativityTol = 1e-12;
constexpr double kSubMeanTol = 1e-8;
constexpr double kVanishTol = 1e-2;

std::string format_point(const Eigen::VectorXcd& z) {
  std::ostringstream out;
  out << "(";
  for (int j = 0; j < z.size(); ++j) {
    if (j) out << ", ";
    out << z[j].real() << (z[j].imag() < 0 ? "-" : "+")
        << std::abs(z[j].imag()) << "i";
  }
  out << ")";
  return out.str();
}

// Pooled least squares of log y against log x; vanishing samples drop out,
// all-zero data is the exact-zero case.
ExponentFit fit_samples(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  std::vector<double> lx;
  std::vector<double> ly;
  ExponentFit fit;
  fit.s_min = std::numeric_limits<double>::infinity();
  fit.s_max = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw std::invalid_argument("power-law fit: non-finite sample");
    if (xs[i] <= kZeroFloor || ys[i] <= kZeroFloor) continue;
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    fit.s_min = std::min(fit.s_min, xs[i]);
    fit.s_max = std::max(fit.s_max, xs[i]);
  }
  if (lx.empty()) {
    fit.exact_zero = true;
    fit.s_min = 0.0;
    return fit;
  }
  if (lx.size() < 3)
    throw std::runtime_error("power-law fit: too few positive samples");

  const std::size_t count = lx.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx < 1e-30)
    throw std::invalid_argument("power-law fit: degenerate abscissa");
  fit.exponent = sxy / sxx;
  fit.constant = std::exp(my - fit.exponent * mx);

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double pred = my + fit.exponent * (lx[i] - mx);
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
  fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
  return fit;
}

double checked_nonnegative(double v, const char* what) {
  if (!std::isfinite(v) || v < -kNegativityTol)
    throw std::invalid_argument(std::string(what) +
                                ": negative value on a probe");
  return std::max(v, 0.0);
}

// value <= circle mean + tolerance at seeded interior centers.
void sub_mean_value_check(const std::function<double(cd)>& phi, Rng& rng,
                          int centers, double radius, const char* what) {
  for (int i = 0; i < centers; ++i) {
    const cd z0 = rng.complex_ball_point(1, 0.7)[0];
    double mean = 0.0;
    const int arc = 32;
    for (int k = 0; k < arc; ++k) {
      const double a = 2.0 * std::numbers::pi * k / arc;
      mean += checked_nonnegative(phi(z0 + radius * cd(std::cos(a), std::sin(a))),
                                  what);
    }
    mean /= arc;
    if (checked_nonnegative(phi(z0), what) > mean + kSubMeanTol)
      throw std::invalid_argument(std::string(what) +
                                  ": sub-mean-value property fails");
  }
}

}  // namespace

void RayProfile::validate() const {
  if (base.size() != direction.size())
    throw std::invalid_argument("ray profile: base/direction size mismatch");
  if (s.empty()) throw std::invalid_argument("ray profile: empty distance ladder");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || s[i] <= 0.0)
      throw std::invalid_argument("ray profile: distances must be positive");
    if (i && s[i] >= s[i - 1])
      throw std::invalid_argument("ray profile: distances must decrease");
  }
  if (!value.empty() && value.size() != s.size())
    throw std::invalid_argument("ray profile: value/distance size mismatch");
  for (double v : value)
    if (!std::isfinite(v))
      throw std::invalid_argument("ray profile: non-finite value");
}

Eigen::VectorXcd RayProfile::point(double si) const {
  return base + si * direction;
}

std::vector<double> dyadic_distances(double s0, int count) {
  if (!(s0 > 0.0) || count < 1)
    throw std::invalid_argument("dyadic distances: need s0 > 0, count >= 1");
  std::vector<double> s(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) s[static_cast<std::size_t>(i)] = s0 * std::ldexp(1.0, -i);
  return s;
}

void ExponentFit::validate() const {
  if (!(r2 >= 0.0 && r2 <= 1.0))
    throw std::runtime_error("exponent fit: r2 outside [0,1]");
  if (!std::isfinite(exponent) || !std::isfinite(constant) || constant < 0.0)
    throw std::runtime_error("exponent fit: non-finite or negative fields");
  if (!exact_zero && s_min > s_max)
    throw std::runtime_error("exponent fit: empty sample range");
}

ExponentFit fit_power_law(const std::vector<RayProfile>& rays) {
  if (rays.empty()) throw std::invalid_argument("power-law fit: no rays");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const RayProfile& r : rays) {
    r.validate();
    if (r.value.size() != r.s.size())
      throw std::invalid_argument("power-law fit: ray has no sampled values");
    xs.insert(xs.end(), r.s.begin(), r.s.end());
    ys.insert(ys.end(), r.value.begin(), r.value.end());
  }
  return fit_samples(xs, ys);
}

ExponentFit fit_power_law(const RayProfile& ray) {
  return fit_power_law(std::vector<RayProfile>{ray});
}

ExponentFit vanishing_rate_fit(const std::function<double(cd)>& phi,
                               double arc_lo, double arc_hi, int rays,
                               std::uint64_t seed) {
  if (!(arc_lo < arc_hi) || arc_hi - arc_lo > 2.0 * std::numbers::pi)
    throw std::invalid_argument("vanishing rate: bad arc");
  if (rays < 1) throw std::invalid_argument("vanishing rate: need rays >= 1");

  Rng rng(seed);
  for (int i = 0; i < 64; ++i)
    checked_nonnegative(phi(rng.complex_ball_point(1, 0.9)[0]),
                        "vanishing rate");
  sub_mean_value_check(phi, rng, 16, 0.1, "vanishing rate");

  const std::vector<double> s = dyadic_distances(0.1, 20);
  std::vector<RayProfile> profiles;
  for (int k = 0; k < rays; ++k) {
    const double theta = arc_lo + (arc_hi - arc_lo) * (k + 1) / (rays + 1);
    const cd dir(std::cos(theta), std::sin(theta));
    if (checked_nonnegative(phi((1.0 - 1e-7) * dir), "vanishing rate") >
        kVanishTol)
      throw std::invalid_argument("vanishing rate: phi does not vanish on the arc");
    RayProfile p;
    p.base = Eigen::VectorXcd::Constant(1, dir);
    p.direction = Eigen::VectorXcd::Constant(1, -dir);
    p.s = s;
    p.value.reserve(s.size());
    for (double si : s)
      p.value.push_back(checked_nonnegative(phi((1.0 - si) * dir),
                                            "vanishing rate"));
    profiles.push_back(std::move(p));
  }
  return fit_power_law(profiles);
}

UniformFitSummary edge_vanishing_rate(
    const std::function<double(const Eigen::VectorXcd&)>& psi,
    const DiscFamily& family, int rays, std::uint64_t seed) {
  if (family.members().empty())
    throw std::invalid_argument("edge vanishing rate: empty family");
  if (rays < 1)
    throw std::invalid_argument("edge vanishing rate: need rays >= 1");
  const TotallyRealGraph& graph = family.base().graph;

  UniformFitSummary summary;
  double min_constant = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const std::vector<double> s = dyadic_distances(0.1, 20);
  for (const FamilyMember& m : family.members()) {
    if (!m.converged)
      throw std::invalid_argument("edge vanishing rate: family unsolved");
    const AnalyticDisc disc = family.disc_of(m);
    const auto phi = [&](cd zeta) {
      return psi(disc.evaluate(zeta));
    };
    sub_mean_value_check(phi, rng, 8, 0.08, "edge vanishing rate");

    std::vector<double> dists;
    std::vector<double> vals;
    for (int k = 0; k < rays; ++k) {
      const double theta = std::numbers::pi * (k + 1) / (rays + 1);
      const cd dir(std::cos(theta), std::sin(theta));
      double closest = std::numeric_limits<double>::infinity();
      for (double si : s) {
        const Eigen::VectorXcd w = disc.evaluate((1.0 - si) * dir);
        const Eigen::VectorXd x = w.real();
        const Eigen::VectorXd y = w.imag();
        dists.push_back((x - graph.r(x, y)).norm());
        vals.push_back(checked_nonnegative(psi(w), "edge vanishing rate"));
        closest = vals.back();
      }
      if (closest > kVanishTol)
        throw std::invalid_argument(
            "edge vanishing rate: psi does not vanish at the edge");
    }
    ExponentFit fit = fit_samples(dists, vals);
    if (!fit.exact_zero) {
      summary.min_exponent = std::min(summary.min_exponent, fit.exponent);
      summary.max_constant = std::max(summary.max_constant, fit.constant);
      min_constant = std::min(min_constant, fit.constant);
    }
    summary.member_fits.push_back(std::move(fit));
  }
  if (summary.max_constant > 0.0)
    summary.constant_spread =
        (summary.max_constant - min_constant) / summary.max_constant;
  return summary;
}

HopfReport hopf_ratio(const MapUnderTest& f, int samples, double offset,
                      std::uint64_t seed) {
  if (samples < 1 || !(offset > 0.0))
    throw std::invalid_argument("hopf ratio: need samples >= 1, offset > 0");
  const std::vector<Eigen::VectorXcd> bases =
      f.source.boundary_samples(samples, seed);
  const double offsets[3] = {offset, offset / 4.0, offset / 16.0};
  double sups[3] = {0.0, 0.0, 0.0};
  for (const Eigen::VectorXcd& b : bases) {
    const double len = b.norm();
    if (len < 1e-12)
      throw std::invalid_argument("hopf ratio: boundary sample at the origin");
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXcd z = b * (1.0 - offsets[k] / len);
      const double rho_image = f.target.value(f.map(z));
      if (!(rho_image < 0.0))
        throw std::runtime_error("hopf ratio: properness violation at " +
                                 format_point(z));
      const double dist = boundary_distance(f.source, z, seed ^ 0x4a5);
      sups[k] = std::max(sups[k], -rho_image / dist);
    }
  }
  HopfReport report;
  report.sup_ratio = sups[2];
  report.growth = sups[2] / sups[0];
  report.refinement_stable = report.growth <= 1.25;
  return report;
}

std::vector<RayProfile> normal_rays(const DomainSpec& d, int count, double s0,
                                    int points, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("normal rays: need count >= 1");
  const std::vector<double> s = dyadic_distances(s0, points);
  std::vector<RayProfile> rays;
  rays.reserve(static_cast<std::size_t>(count));
  for (const Eigen::VectorXcd& b : d.boundary_samples(count, seed)) {
    const double len = b.norm();
    if (len < 1e-12)
      throw std::invalid_argument("normal rays: boundary sample at the origin");
    RayProfile p;
    p.base = b;
    p.direction = -b / len;
    p.s = s;
    rays.push_back(std::move(p));
  }
  return rays;
}

ExponentFit blowup_fit(const std::vector<RayProfile>& rays) {
  ExponentFit fit = fit_power_law(rays);
  fit.exponent = -fit.exponent;
  return fit;
}

ExponentFit gradient_exponent_fit(const MapUnderTest& f,
                                  std::vector<RayProfile> rays) {
  for (RayProfile& ray : rays) {
    ray.validate();
    ray.value.clear();
    ray.value.reserve(ray.s.size());
    for (double si : ray.s) {
      const Eigen::MatrixXcd j = f.map.jacobian(ray.point(si));
      if (!j.allFinite())
        throw std::runtime_error("gradient fit: singular jet on a ray");
      const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(j);
      ray.value.push_back(svd.singularValues()(0));
    }
  }
  return blowup_fit(rays);
}

double holder_from_gradient(double beta) {
  if (!(beta >= 0.0) || beta >= 1.0)
    throw std::invalid_argument(
        "gradient exponent outside [0, 1): no Holder conclusion");
  return 1.0 - beta;
}

BootstrapSchedule bootstrap_schedule(double theta, bool wide) {
  const double lo = wide ? 0.0 : 0.5;
  if (!(theta > lo) || !(theta < 1.0))
    throw std::invalid_argument("bootstrap schedule: theta outside range");
  return {1.0 / theta, 1.0 - 1.0 / (2.0 * theta), 1.0 / (2.0 * theta)};
}

PowerCertificate psh_power_check(const Jet2& rho, double theta,
                                 const std::vector<Eigen::VectorXcd>& probes) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("power check: theta outside (0, 1]");
  if (probes.empty()) throw std::invalid_argument("power check: no probes");

  PowerCertificate cert;
  for (const Eigen::VectorXcd& p : probes) {
    const double val = rho.value(p);
    if (!(val >= 1e-6))
      throw std::invalid_argument("power check: probe in the exclusion band");
    const Eigen::MatrixXcd h = rho.hess_zzbar(p);
    const Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> base(sym);
    if (base.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("power check: rho is not psh at a probe");

    const Eigen::VectorXcd g = rho.grad_z(p);
    const Eigen::MatrixXcd powered =
        theta * std::pow(val, theta - 1.0) * sym +
        theta * (theta - 1.0) * std::pow(val, theta - 2.0) * (g * g.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(powered);
    const double lam = es.eigenvalues().minCoeff();
    cert.min_eigenvalue = std::min(cert.min_eigenvalue, lam);
    if (lam < -1e-8) {
      if (!cert.violations) cert.witness = p;
      ++cert.violations;
    }
  }
  cert.pass = cert.violations == 0;
  return cert;
}

ExponentFit modulus_of_continuity_fit(const MapUnderTest& f, int pairs,
                                      std::uint64_t seed) {
  if (pairs < 0) throw std::invalid_argument("modulus fit: pairs < 0");
  const DomainSpec& d = f.source;
  const int n = d.dim();
  const int m = 2 * n;
  if (!(d.value(Eigen::VectorXcd::Zero(n)) < 0.0))
    throw std::invalid_argument("modulus fit: source must contain the origin");

  const auto to_complex = [n](const Eigen::VectorXd& w) {
    Eigen::VectorXcd z(n);
    for (int j = 0; j < n; ++j) z[j] = cd(w[j], w[n + j]);
    return z;
  };
  const auto project = [&](const Eigen::VectorXd& omega) -> Eigen::VectorXcd {
    const Eigen::VectorXcd dir = to_complex(omega.normalized());
    double hi = 1.0;
    while (d.value(hi * dir) < 0.0) {
      hi *= 2.0;
      if (hi > 1e6)
        throw std::invalid_argument("modulus fit: unbounded radial ray");
    }
    double lo = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (d.value(mid * dir) < 0.0 ? lo : hi) = mid;
    }
    return (0.5 * (lo + hi)) * dir;
  };

  // Fixed anchor sites (axis poles plus seeded directions), each with one
  // fixed tangent, so the anchored pairs nest as the separation shrinks.
  Rng rng(seed);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> anchors;
  const auto add_anchor = [&](Eigen::VectorXd omega) {
    omega.normalize();
    Eigen::VectorXd tau = rng.unit_vector(m);
    tau -= tau.dot(omega) * omega;
    if (tau.norm() < 1e-3) return;  // seeded tangent degenerate; skip site
    tau.normalize();
    anchors.emplace_back(std::move(omega), std::move(tau));
  };
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j] = 1.0;
    add_anchor(e);
    add_anchor(-e);
  }
  for (int k = 0; k < 4; ++k) add_anchor(rng.unit_vector(m));

  std::vector<double> seps;
  std::vector<double> vals;
  for (int k = 8; k <= 18; ++k) {
    const double dk = std::ldexp(1.0, -k);
    double sep = 0.0;
    double val = 0.0;
    const auto consider = [&](const Eigen::VectorXd& omega,
                              const Eigen::VectorXd& tau) {
      const double h = dk / 2.0;
      const Eigen::VectorXcd p =
          (1.0 - 1e-8) * project(std::cos(h) * omega + std::sin(h) * tau);
      const Eigen::VectorXcd q =
          (1.0 - 1e-8) * project(std::cos(h) * omega - std::sin(h) * tau);
      const double gap = (f.map(p) - f.map(q)).norm();
      if (gap > val) {
        val = gap;
        sep = (p - q).norm();
      }
    };
    for (const auto& [omega, tau] : anchors) consider(omega, tau);
    for (int i = 0; i < pairs; ++i) {
      const Eigen::VectorXd omega = rng.unit_vector(m);
      Eigen::VectorXd tau = rng.unit_vector(m);
      tau -= tau.dot(omega) * omega;
      if (tau.norm() < 1e-3) continue;
      tau.normalize();
      consider(omega, tau);
    }
    if (val > 0.0 && sep > 0.0) {
      seps.push_back(sep);
      vals.push_back(val);
    }
  }
  return fit_samples(seps, vals);
}

}  // namespace scv
