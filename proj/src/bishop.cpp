#include "scv/bishop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scv {

namespace {

constexpr double kWorkingBox = 1.0;

Eigen::MatrixXd sample_matrix(const std::vector<CircleFunction>& fs) {
  const int n = static_cast<int>(fs.size());
  const int grid = fs.front().size();
  Eigen::MatrixXd m(n, grid);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < grid; ++k)
      m(j, k) = fs[static_cast<std::size_t>(j)].sample(k).real();
  return m;
}

std::vector<CircleFunction> matrix_to_functions(const Eigen::MatrixXd& m) {
  std::vector<CircleFunction> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (int j = 0; j < m.rows(); ++j) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (int k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(j, k);
    out.push_back(CircleFunction::from_real(row));
  }
  return out;
}

Eigen::MatrixXd conjugate_rows(const Eigen::MatrixXd& u) {
  Eigen::MatrixXd out(u.rows(), u.cols());
  for (int j = 0; j < u.rows(); ++j) {
    std::vector<double> row(static_cast<std::size_t>(u.cols()));
    for (int k = 0; k < u.cols(); ++k) row[static_cast<std::size_t>(k)] = u(j, k);
    const CircleFunction t = hilbert_transform(CircleFunction::from_real(row));
    for (int k = 0; k < u.cols(); ++k) out(j, k) = t.sample(k).real();
  }
  return out;
}

// r(u, T(u) + c) + t psi column by column.
Eigen::MatrixXd picard_map(const BishopProblem& p, const Eigen::MatrixXd& u,
                           const Eigen::MatrixXd& psi) {
  const int n = static_cast<int>(u.rows());
  const int grid = static_cast<int>(u.cols());
  const Eigen::MatrixXd tu = conjugate_rows(u);
  Eigen::MatrixXd out(n, grid);
  for (int k = 0; k < grid; ++k) {
    const Eigen::VectorXd x = u.col(k);
    const Eigen::VectorXd y = tu.col(k) + p.c;
    out.col(k) = p.graph.r(x, y);
    for (int j = 0; j < n; ++j) out(j, k) += p.t[j] * psi(j, k);
  }
  return out;
}

struct GoldenResult {
  double arg = 0.0;
  double value = 0.0;
};

// Minimize f over [a, b] by golden-section search.
template <typename F>
GoldenResult golden_min(F f, double a, double b, int iters = 60) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  GoldenResult out;
  out.arg = 0.5 * (a + b);
  out.value = f(out.arg);
  return out;
}

// Distance from a point to an S+ boundary arc: coarse grid pass on the
// stored samples, then golden refinement of the interpolated trace.
double arc_distance(const AnalyticDisc& disc, const Eigen::VectorXcd& point) {
  const int grid = disc.grid_size();
  const int upper = grid / 2;
  int best = 0;
  double best_d = 1e300;
  for (int k = 0; k <= upper; ++k) {
    double d2 = 0.0;
    for (int j = 0; j < disc.dimension(); ++j)
      d2 += std::norm(disc.boundary()[static_cast<std::size_t>(j)].sample(k) -
                      point[j]);
    if (d2 < best_d) {
      best_d = d2;
      best = k;
    }
  }
  const double h = 2.0 * M_PI / grid;
  const double lo = std::max(0.0, (best - 1) * h);
  const double hi = std::min(M_PI, (best + 1) * h);
  const GoldenResult g = golden_min(
      [&](double theta) {
        return (disc.boundary_point(theta) - point).norm();
      },
      lo, hi);
  return g.value;
}

}  // namespace

double bump_psi(double theta) {
  theta = std::fmod(theta, 2.0 * M_PI);
  if (theta < 0.0) theta += 2.0 * M_PI;
  if (theta <= M_PI) return 0.0;
  const double s = (theta - M_PI) * (2.0 * M_PI - theta);
  if (s < 1.5e-3) return 0.0;  // exp(-1/s) underflows double precision
  return -std::exp(-1.0 / s);
}

CircleFunction bump_function(int grid_size) {
  return CircleFunction(grid_size, bump_psi);
}

BishopProblem BishopProblem::standard(TotallyRealGraph graph, Eigen::VectorXd c,
                                      Eigen::VectorXd t, int grid_size,
                                      double tol, int max_iter) {
  BishopProblem p{std::move(graph),
                  std::vector<CircleFunction>(),
                  std::move(c),
                  std::move(t),
                  grid_size,
                  tol,
                  max_iter};
  p.psi.assign(static_cast<std::size_t>(p.graph.dim()),
               bump_function(grid_size));
  p.validate();
  return p;
}

BishopProblem BishopProblem::with_params(Eigen::VectorXd c2,
                                         Eigen::VectorXd t2) const {
  BishopProblem p = *this;
  p.c = std::move(c2);
  p.t = std::move(t2);
  return p;
}

void BishopProblem::validate() const {
  const int n = graph.dim();
  if (static_cast<int>(psi.size()) != n || c.size() != n || t.size() != n)
    throw std::invalid_argument("bishop: field sizes must match the graph");
  for (const CircleFunction& f : psi) {
    if (f.size() != grid_size)
      throw std::invalid_argument("bishop: profile grid mismatch");
    for (int k = 0; k < f.size(); ++k) {
      const double theta = f.theta(k);
      const double v = f.sample(k).real();
      if (theta <= M_PI + 1e-14 && v != 0.0)
        throw std::invalid_argument(
            "bishop: profile must vanish on the upper semicircle");
      if (theta > M_PI + 1e-14 && !(v <= 0.0))
        throw std::invalid_argument(
            "bishop: profile must be nonpositive below");
    }
  }
  for (int j = 0; j < n; ++j)
    if (t[j] < 0.0)
      throw std::invalid_argument("bishop: t components must be >= 0");
}

BishopSolution solve_bishop(const BishopProblem& p) {
  return solve_bishop(
      p, std::vector<CircleFunction>(
             static_cast<std::size_t>(p.graph.dim()),
             CircleFunction::zero(p.grid_size)));
}

BishopSolution solve_bishop(const BishopProblem& p,
                            const std::vector<CircleFunction>& initial) {
  p.validate();
  const Eigen::MatrixXd psi = sample_matrix(p.psi);
  const Eigen::MatrixXd u0 = sample_matrix(initial);

  BishopSolution best;
  for (double damping : {1.0, 0.5}) {
    Eigen::MatrixXd u = u0;
    BishopSolution sol;
    sol.damping = damping;
    double prev = std::numeric_limits<double>::infinity();
    int grow_streak = 0;
    bool diverged = false;
    for (int it = 0; it < p.max_iter; ++it) {
      const Eigen::MatrixXd f = picard_map(p, u, psi);
      const double residual = (u - f).lpNorm<Eigen::Infinity>();
      sol.residual_history.push_back(residual);
      sol.residual = residual;
      sol.iterations = it;
      if (residual <= p.tol) {
        sol.converged = true;
        break;
      }
      grow_streak = residual > prev * 1.02 ? grow_streak + 1 : 0;
      if (grow_streak >= 3) {
        diverged = true;
        break;
      }
      prev = residual;
      u = (1.0 - damping) * u + damping * f;
      if (u.lpNorm<Eigen::Infinity>() > kWorkingBox)
        throw std::runtime_error("bishop: iterates escaped the working box");
    }
    sol.u = matrix_to_functions(u);
    if (sol.converged) return sol;
    best = std::move(sol);
    if (!diverged) break;  // cap reached at this damping: report as-is
  }
  return best;  // divergence report with the residual history
}

double bishop_residual(const BishopProblem& p,
                       const std::vector<CircleFunction>& u) {
  const Eigen::MatrixXd um = sample_matrix(u);
  return (um - picard_map(p, um, sample_matrix(p.psi)))
      .lpNorm<Eigen::Infinity>();
}

AnalyticDisc attached_disc(const BishopProblem& p, const BishopSolution& s) {
  if (!s.converged)
    throw std::runtime_error("attached disc: solver did not converge");
  return analytic_completion(s.u, p.c);
}

AnalyticDisc attached_disc(const BishopProblem& p) {
  return attached_disc(p, solve_bishop(p));
}

double attachment_residual(const AnalyticDisc& d, const TotallyRealGraph& g) {
  if (d.dimension() != g.dim())
    throw std::invalid_argument("attachment: dimension mismatch");
  const int n = d.dimension();
  const int grid = d.grid_size();
  double sup = 0.0;
  Eigen::VectorXd x(n), y(n);
  for (int k = 0; k <= grid / 2; ++k) {
    for (int j = 0; j < n; ++j) {
      const cd v = d.boundary()[static_cast<std::size_t>(j)].sample(k);
      x[j] = v.real();
      y[j] = v.imag();
    }
    sup = std::max(sup, (x - g.r(x, y)).lpNorm<Eigen::Infinity>());
  }
  return sup;
}

double transversality_margin(const AnalyticDisc& d, const TotallyRealGraph& g,
                             double theta) {
  const int n = d.dimension();
  const cd zeta = std::polar(1.0, theta);
  const Eigen::VectorXcd radial = zeta * d.derivative(zeta);
  const double len = radial.norm();
  if (len < 1e-10)
    throw std::runtime_error("transversality: degenerate differential");

  const Eigen::VectorXcd p = d.boundary_point(theta);
  Eigen::VectorXd x(n), y(n);
  for (int j = 0; j < n; ++j) {
    x[j] = p[j].real();
    y[j] = p[j].imag();
  }
  const Eigen::MatrixXcd tangent = g.tangent_basis(x, y);

  Eigen::MatrixXd real_tangent(2 * n, n);
  Eigen::VectorXd v(2 * n);
  for (int j = 0; j < n; ++j) {
    v[j] = radial[j].real() / len;
    v[n + j] = radial[j].imag() / len;
    for (int k = 0; k < n; ++k) {
      real_tangent(j, k) = tangent(j, k).real();
      real_tangent(n + j, k) = tangent(j, k).imag();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(real_tangent);
  const Eigen::MatrixXd q =
      Eigen::MatrixXd(qr.householderQ()).leftCols(n);
  const double offplane = (v - q * (q.transpose() * v)).norm();
  return std::asin(std::clamp(offplane, 0.0, 1.0));
}

// ---- DiscFamily ----

namespace {

FamilyMember make_member(const BishopProblem& base, const Eigen::VectorXd& c,
                         const Eigen::VectorXd& t,
                         const std::vector<CircleFunction>* warm) {
  const BishopProblem p = base.with_params(c, t);
  const BishopSolution s = warm ? solve_bishop(p, *warm) : solve_bishop(p);
  FamilyMember m;
  m.c = c;
  m.t = t;
  m.u = s.u;
  m.iterations = s.iterations;
  m.residual = s.residual;
  m.converged = s.converged;
  if (s.converged) {
    const AnalyticDisc disc = analytic_completion(s.u, c);
    m.attachment = attachment_residual(disc, p.graph);
    try {
      m.transversality = transversality_margin(disc, p.graph, M_PI / 2.0);
    } catch (const std::runtime_error&) {
      m.transversality = 0.0;  // constant discs carry no exit direction
    }
  }
  return m;
}

}  // namespace

DiscFamily DiscFamily::grid(const BishopProblem& base, double c_halfwidth,
                            double t_max, int per_axis) {
  if (per_axis < 2)
    throw std::invalid_argument("disc family: need >= 2 points per axis");
  const int n = base.graph.dim();
  double total = 1.0;
  for (int a = 0; a < 2 * n; ++a) total *= per_axis;
  if (total > 2e5)
    throw std::invalid_argument("disc family: parameter grid too large");

  DiscFamily fam(base);
  fam.c_halfwidth_ = c_halfwidth;
  fam.t_max_ = t_max;
  fam.per_axis_ = per_axis;

  std::vector<int> idx(static_cast<std::size_t>(2 * n), 0);
  const std::vector<CircleFunction>* warm = nullptr;
  while (true) {
    Eigen::VectorXd c(n), t(n);
    for (int j = 0; j < n; ++j) {
      c[j] = -c_halfwidth + 2.0 * c_halfwidth *
                                idx[static_cast<std::size_t>(j)] /
                                (per_axis - 1);
      t[j] = t_max * idx[static_cast<std::size_t>(n + j)] / (per_axis - 1);
    }
    fam.members_.push_back(make_member(base, c, t, warm));
    warm = &fam.members_.back().u;

    int axis = 0;
    while (axis < 2 * n) {
      if (++idx[static_cast<std::size_t>(axis)] < per_axis) break;
      idx[static_cast<std::size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == 2 * n) break;
  }
  return fam;
}

DiscFamily DiscFamily::foliation_slice(const BishopProblem& base,
                                       const Eigen::VectorXd& t0,
                                       double c_halfwidth, int per_axis) {
  const int n = base.graph.dim();
  if (t0.size() != n || t0.norm() < 1e-12)
    throw std::invalid_argument("foliation slice: t0 must be a nonzero vector");
  if (per_axis < 2)
    throw std::invalid_argument("disc family: need >= 2 points per axis");

  DiscFamily fam(base);
  fam.c_halfwidth_ = c_halfwidth;
  fam.t_max_ = t0.lpNorm<Eigen::Infinity>();
  fam.per_axis_ = per_axis;
  fam.is_slice_ = true;
  fam.slice_t_ = t0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(t0);
  fam.slice_axes_ =
      Eigen::MatrixXd(qr.householderQ()).rightCols(n - 1);

  const int leaves = n - 1;
  std::vector<int> idx(static_cast<std::size_t>(std::max(leaves, 1)), 0);
  const std::vector<CircleFunction>* warm = nullptr;
  while (true) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < leaves; ++a)
      c += (-c_halfwidth + 2.0 * c_halfwidth * idx[static_cast<std::size_t>(a)] /
                               (per_axis - 1)) *
           fam.slice_axes_.col(a);
    fam.members_.push_back(make_member(base, c, t0, warm));
    warm = &fam.members_.back().u;
    if (leaves == 0) break;

    int axis = 0;
    while (axis < leaves) {
      if (++idx[static_cast<std::size_t>(axis)] < per_axis) break;
      idx[static_cast<std::size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == leaves) break;
  }
  return fam;
}

DiscFamily DiscFamily::from_parameters(
    const BishopProblem& base,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& params) {
  DiscFamily fam(base);
  for (const auto& [c, t] : params)
    fam.members_.push_back(make_member(base, c, t, nullptr));
  return fam;
}

AnalyticDisc DiscFamily::disc_of(const FamilyMember& m) const {
  return analytic_completion(m.u, m.c);
}

double DiscFamily::leaf_spacing() const {
  if (per_axis_ < 2) return 0.0;
  return 2.0 * c_halfwidth_ / (per_axis_ - 1);
}

// ---- wedge filling ----

FillReport fill_wedge_check(const DiscFamily& f, const WedgeSpec& w,
                            int sample_count, std::uint64_t seed,
                            double box_halfwidth) {
  if (!(w.delta > 0.0))
    throw std::invalid_argument("fill check: requires delta > 0");
  const BishopProblem& base = f.base();
  const int n = base.graph.dim();
  const int params = 2 + 2 * n;  // (Re zeta, Im zeta, c, t)
  const double c_box = f.c_halfwidth() > 0.0 ? f.c_halfwidth() : 0.3;
  const double t_box = f.t_max() > 0.0 ? f.t_max() : 0.3;

  // Probe values per member for picking starting points.
  const std::vector<cd> probes{cd(0.0, 0.0), cd(0.55, 0.0), cd(-0.55, 0.0),
                               cd(0.0, 0.55), cd(0.0, -0.55)};
  std::vector<std::vector<Eigen::VectorXcd>> cache;
  cache.reserve(f.members().size());
  for (const FamilyMember& m : f.members()) {
    std::vector<Eigen::VectorXcd> vals;
    if (m.converged) {
      const AnalyticDisc disc = f.disc_of(m);
      for (const cd& zeta : probes) vals.push_back(disc.evaluate(zeta));
    }
    cache.push_back(std::move(vals));
  }

  Rng rng(seed);
  FillReport report;
  for (int s = 0; s < sample_count; ++s) {
    const Eigen::VectorXcd z = sample_shrunken_point(w, rng, box_halfwidth);
    ++report.attempted;

    std::size_t best_member = 0;
    cd best_zeta = 0.0;
    double best_d = 1e300;
    for (std::size_t m = 0; m < cache.size(); ++m) {
      for (std::size_t q = 0; q < cache[m].size(); ++q) {
        const double d = (cache[m][q] - z).norm();
        if (d < best_d) {
          best_d = d;
          best_member = m;
          best_zeta = probes[q];
        }
      }
    }
    const FamilyMember& start = f.members()[best_member];

    Eigen::VectorXd q(params);
    q[0] = best_zeta.real();
    q[1] = best_zeta.imag();
    q.segment(2, n) = start.c;
    q.segment(2 + n, n) = start.t;
    std::vector<CircleFunction> warm = start.u;

    auto clamp_params = [&](Eigen::VectorXd& v) {
      const double zr = std::hypot(v[0], v[1]);
      if (zr > 0.995) {
        v[0] *= 0.995 / zr;
        v[1] *= 0.995 / zr;
      }
      for (int j = 0; j < n; ++j) {
        v[2 + j] = std::clamp(v[2 + j], -c_box, c_box);
        v[2 + n + j] = std::clamp(v[2 + n + j], 0.0, t_box);
      }
    };

    // Residual at parameters, reusing the latest boundary data as warm start.
    auto eval = [&](const Eigen::VectorXd& v,
                    std::vector<CircleFunction>* u_out) -> Eigen::VectorXcd {
      const BishopProblem p = base.with_params(v.segment(2, n).eval(),
                                               v.segment(2 + n, n).eval());
      const BishopSolution sol = solve_bishop(p, warm);
      if (!sol.converged) return Eigen::VectorXcd();
      if (u_out) *u_out = sol.u;
      const AnalyticDisc disc = analytic_completion(sol.u, p.c);
      return disc.evaluate(cd(v[0], v[1])) - z;
    };

    clamp_params(q);
    Eigen::VectorXcd res = eval(q, &warm);
    bool ok = res.size() > 0;
    for (int step = 0; ok && step < 40; ++step) {
      double rn = res.norm();
      if (rn <= 1e-6) break;

      Eigen::MatrixXd jac(2 * n, params);
      const double h = 1e-6;
      for (int a = 0; a < params; ++a) {
        Eigen::VectorXd qa = q;
        const double dir = (a >= 2 + n && qa[a] + h > t_box) ||
                                   (a >= 2 && a < 2 + n && qa[a] + h > c_box)
                               ? -1.0
                               : 1.0;
        qa[a] += dir * h;
        const Eigen::VectorXcd ra = eval(qa, nullptr);
        if (ra.size() == 0) {
          ok = false;
          break;
        }
        for (int j = 0; j < n; ++j) {
          jac(j, a) = (ra[j].real() - res[j].real()) / (dir * h);
          jac(n + j, a) = (ra[j].imag() - res[j].imag()) / (dir * h);
        }
      }
      if (!ok) break;

      Eigen::VectorXd rhs(2 * n);
      for (int j = 0; j < n; ++j) {
        rhs[j] = -res[j].real();
        rhs[n + j] = -res[j].imag();
      }

      // Least-norm step with an active-set pass: columns whose parameter
      // sits at a bound and whose step points outward are frozen, else the
      // clamp truncates every step and convergence stalls at the box edge.
      std::vector<bool> frozen(static_cast<std::size_t>(params), false);
      Eigen::VectorXd full = Eigen::VectorXd::Zero(params);
      for (int pass = 0; pass < params; ++pass) {
        std::vector<int> free_cols;
        for (int a = 0; a < params; ++a)
          if (!frozen[static_cast<std::size_t>(a)]) free_cols.push_back(a);
        if (free_cols.empty()) break;
        Eigen::MatrixXd jf(2 * n, static_cast<int>(free_cols.size()));
        for (std::size_t i = 0; i < free_cols.size(); ++i)
          jf.col(static_cast<int>(i)) =
              jac.col(free_cols[i]);
        const Eigen::MatrixXd jjt =
            jf * jf.transpose() +
            1e-12 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
        const Eigen::VectorXd sf = jf.transpose() * jjt.ldlt().solve(rhs);
        full.setZero();
        for (std::size_t i = 0; i < free_cols.size(); ++i)
          full[free_cols[i]] = sf[static_cast<int>(i)];

        bool violated = false;
        for (int j = 0; j < n; ++j) {
          const int ca = 2 + j, ta = 2 + n + j;
          if (!frozen[static_cast<std::size_t>(ca)] &&
              ((q[ca] >= c_box - 1e-12 && full[ca] > 0.0) ||
               (q[ca] <= -c_box + 1e-12 && full[ca] < 0.0))) {
            frozen[static_cast<std::size_t>(ca)] = true;
            violated = true;
          }
          if (!frozen[static_cast<std::size_t>(ta)] &&
              ((q[ta] >= t_box - 1e-12 && full[ta] > 0.0) ||
               (q[ta] <= 1e-12 && full[ta] < 0.0))) {
            frozen[static_cast<std::size_t>(ta)] = true;
            violated = true;
          }
        }
        if (!violated) break;
      }

      bool improved = false;
      double alpha = 1.0;
      for (int ls = 0; ls < 8; ++ls) {
        Eigen::VectorXd qn = q + alpha * full;
        clamp_params(qn);
        std::vector<CircleFunction> u_next = warm;
        const Eigen::VectorXcd rn2 = eval(qn, &u_next);
        if (rn2.size() > 0 && rn2.norm() < rn) {
          q = qn;
          res = rn2;
          warm = std::move(u_next);
          improved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!improved) break;
    }

    const bool success = ok && res.size() > 0 && res.norm() <= 1e-6 &&
                         std::hypot(q[0], q[1]) < 1.0;
    if (success)
      ++report.succeeded;
    else
      report.failures.push_back(z);
  }
  report.coverage =
      report.attempted > 0
          ? static_cast<double>(report.succeeded) / report.attempted
          : 0.0;
  return report;
}

// ---- foliation ----

FoliationReport foliation_check(const DiscFamily& f, int samples,
                                std::uint64_t seed) {
  if (f.members().empty())
    throw std::invalid_argument("foliation: empty family");
  FoliationReport report;
  report.leaf_spacing = f.leaf_spacing();

  std::vector<AnalyticDisc> discs;
  for (const FamilyMember& m : f.members()) discs.push_back(f.disc_of(m));

  Rng rng(seed);
  const double pass_tol = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const std::size_t k = rng.uniform_index(discs.size());
    const double theta = rng.uniform(0.15, M_PI - 0.15);
    const Eigen::VectorXcd point = discs[k].boundary_point(theta);
    int mult = 0;
    for (const AnalyticDisc& d : discs)
      if (arc_distance(d, point) <= pass_tol) ++mult;
    report.multiplicities.push_back(mult);
    report.max_multiplicity = std::max(report.max_multiplicity, mult);
  }

  // Mid-leaf probes measure how densely the grid fills its patch of the
  // edge: solved at continuous parameters strictly between grid levels.
  if (f.is_slice()) {
    const int leaves = static_cast<int>(f.slice_axes().cols());
    for (int s = 0; s < std::min(samples, 16); ++s) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(f.base().graph.dim());
      for (int a = 0; a < leaves; ++a)
        c += rng.uniform(-f.c_halfwidth(), f.c_halfwidth()) *
             f.slice_axes().col(a);
      const BishopProblem p = f.base().with_params(c, f.slice_t());
      const BishopSolution sol = solve_bishop(p);
      if (!sol.converged) continue;
      const AnalyticDisc disc = analytic_completion(sol.u, c);
      const Eigen::VectorXcd point =
          disc.boundary_point(rng.uniform(0.15, M_PI - 0.15));
      double nearest = 1e300;
      for (const AnalyticDisc& d : discs)
        nearest = std::min(nearest, arc_distance(d, point));
      report.max_gap = std::max(report.max_gap, nearest);
    }
  }
  return report;
}

// ---- center map regularity ----

SmoothnessReport center_map_smoothness(const DiscFamily& f) {
  if (f.per_axis() < 3)
    throw std::invalid_argument(
        "center map smoothness: needs >= 3 points per axis");
  const BishopProblem& base = f.base();
  const int n = base.graph.dim();

  const Eigen::VectorXd c0 = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd t0 =
      f.is_slice() ? f.slice_t()
                   : Eigen::VectorXd::Constant(n, 0.5 * f.t_max());

  auto center = [&](const Eigen::VectorXd& c,
                    const Eigen::VectorXd& t) -> Eigen::VectorXcd {
    const BishopProblem p = base.with_params(c, t);
    const BishopSolution s = solve_bishop(p);
    if (!s.converged)
      throw std::runtime_error("center map: member solve diverged");
    return analytic_completion(s.u, c).evaluate(0.0);
  };

  SmoothnessReport report;
  const double h0c = f.leaf_spacing();
  const double h0t = f.t_max() / (f.per_axis() - 1);
  for (int level = 0; level < 3; ++level) {
    const double scale = std::pow(0.5, level);
    double sup = 0.0;
    for (int axis = 0; axis < 2 * n; ++axis) {
      const bool is_c = axis < n;
      if (f.is_slice() && !is_c) continue;
      const double h = scale * (is_c ? h0c : h0t);
      Eigen::VectorXd cp = c0, cm = c0, tp = t0, tm = t0;
      if (is_c) {
        cp[axis] += h;
        cm[axis] -= h;
      } else {
        tp[axis - n] += h;
        tm[axis - n] -= h;
      }
      const Eigen::VectorXcd second =
          center(cp, tp) - 2.0 * center(c0, t0) + center(cm, tm);
      sup = std::max(sup, second.lpNorm<Eigen::Infinity>() / (h * h));
    }
    report.spacings.push_back(scale * std::max(h0c, h0t));
    report.second_difference_sup.push_back(sup);
  }
  report.bounded = report.second_difference_sup[2] <=
                   4.0 * report.second_difference_sup[0] + 1e-4;
  return report;
}

}  // namespace scv
