#include "scv/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "scv/bishop.hpp"
#include "scv/circle.hpp"
#include "scv/domains.hpp"
#include "scv/kobayashi.hpp"
#include "scv/regularity.hpp"
#include "scv/rng.hpp"
#include "scv/wedge.hpp"

namespace scv {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr double kSelftestTol = 1e-10;

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
  }
}

double number_field(const json& j, const char* key, double fallback,
                    const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number())
    throw std::invalid_argument(where + "." + key + ": expected a number");
  return v.get<double>();
}

int int_field(const json& j, const char* key, int fallback,
              const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw std::invalid_argument(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string string_field(const json& j, const char* key,
                         const std::string& fallback,
                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string())
    throw std::invalid_argument(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string fmt_real_vector(const Eigen::VectorXd& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) {
    if (i) s += ' ';
    s += csv_number(x[i]);
  }
  return s;
}

std::string fmt_complex_vector(const Eigen::VectorXcd& z) {
  std::string s;
  for (int i = 0; i < z.size(); ++i) {
    if (i) s += ' ';
    s += csv_number(z[i].real());
    s += ' ';
    s += csv_number(z[i].imag());
  }
  return s;
}

json version_block() {
  char eigen[32];
  std::snprintf(eigen, sizeof eigen, "%d.%d.%d", EIGEN_WORLD_VERSION,
                EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  char njson[32];
  std::snprintf(njson, sizeof njson, "%d.%d.%d", NLOHMANN_JSON_VERSION_MAJOR,
                NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH);
  return json{{"scvlab", kVersion},
              {"eigen", eigen},
              {"nlohmann_json", njson},
              {"compiler", __VERSION__}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Per-kind result collected before the manifest is assembled.
struct KindResult {
  std::vector<std::string> artifacts;
  json summary = json::object();
  std::vector<std::string> warnings;
  std::string witness;  // nonempty = certificate failure
};

void emit_csv(const fs::path& dir, const std::string& name, const CsvTable& t,
              KindResult& r) {
  write_csv(dir / name, t);
  r.artifacts.push_back(name);
}

// ---------------------------------------------------------------------------
// discs

DiscsParams discs_from_json(const json& j) {
  const std::string w = "discs";
  require_keys(j,
               {"graph", "eps", "delta", "dimension", "grid_size", "tol",
                "max_iter", "c_halfwidth", "t_max", "per_axis", "fill_samples",
                "foliation_samples", "box_halfwidth"},
               w);
  DiscsParams p;
  p.graph = string_field(j, "graph", p.graph, w);
  p.eps = number_field(j, "eps", p.eps, w);
  p.delta = number_field(j, "delta", p.delta, w);
  p.dimension = int_field(j, "dimension", p.dimension, w);
  p.grid_size = int_field(j, "grid_size", p.grid_size, w);
  p.tol = number_field(j, "tol", p.tol, w);
  p.max_iter = int_field(j, "max_iter", p.max_iter, w);
  p.c_halfwidth = number_field(j, "c_halfwidth", p.c_halfwidth, w);
  p.t_max = number_field(j, "t_max", p.t_max, w);
  p.per_axis = int_field(j, "per_axis", p.per_axis, w);
  p.fill_samples = int_field(j, "fill_samples", p.fill_samples, w);
  p.foliation_samples = int_field(j, "foliation_samples", p.foliation_samples, w);
  p.box_halfwidth = number_field(j, "box_halfwidth", p.box_halfwidth, w);
  return p;
}

json discs_to_json(const DiscsParams& p) {
  return json{{"graph", p.graph},
              {"eps", p.eps},
              {"delta", p.delta},
              {"dimension", p.dimension},
              {"grid_size", p.grid_size},
              {"tol", p.tol},
              {"max_iter", p.max_iter},
              {"c_halfwidth", p.c_halfwidth},
              {"t_max", p.t_max},
              {"per_axis", p.per_axis},
              {"fill_samples", p.fill_samples},
              {"foliation_samples", p.foliation_samples},
              {"box_halfwidth", p.box_halfwidth}};
}

void run_discs(const ExperimentConfig& cfg, const fs::path& dir,
               std::uint64_t seed, KindResult& r) {
  const DiscsParams& p = cfg.discs;
  const int n = p.dimension;
  const TotallyRealGraph g = p.graph == "flat"
                                 ? TotallyRealGraph::zero(n)
                                 : TotallyRealGraph::quadratic(n, p.eps);
  const BishopProblem base =
      BishopProblem::standard(g, Eigen::VectorXd::Zero(n),
                              Eigen::VectorXd::Zero(n), p.grid_size, p.tol,
                              p.max_iter);
  const DiscFamily fam = DiscFamily::grid(base, p.c_halfwidth, p.t_max,
                                          p.per_axis);

  CsvTable family;
  family.header = {"c",        "t",
                   "iterations", "residual",
                   "attachment_residual", "transversality_margin"};
  int converged = 0;
  int unconverged_at = -1;
  double max_residual = 0.0, max_attachment = 0.0;
  double min_transversality = 0.0;
  bool any_margin = false;
  for (const FamilyMember& m : fam.members()) {
    family.rows.push_back({fmt_real_vector(m.c), fmt_real_vector(m.t),
                           std::to_string(m.iterations),
                           csv_number(m.residual), csv_number(m.attachment),
                           csv_number(m.transversality)});
    converged += m.converged;
    if (!m.converged && unconverged_at < 0)
      unconverged_at = static_cast<int>(family.rows.size()) - 1;
    max_residual = std::max(max_residual, m.residual);
    max_attachment = std::max(max_attachment, m.attachment);
    if (m.transversality > 0.0) {
      min_transversality = any_margin
                               ? std::min(min_transversality, m.transversality)
                               : m.transversality;
      any_margin = true;
    }
  }
  emit_csv(dir, "family.csv", family, r);
  r.summary["members"] = family.rows.size();
  r.summary["converged"] = converged;
  r.summary["max_residual"] = max_residual;
  r.summary["max_attachment_residual"] = max_attachment;
  r.summary["min_transversality_margin"] = min_transversality;
  if (unconverged_at >= 0) {
    const FamilyMember& m = fam.members()[static_cast<std::size_t>(unconverged_at)];
    r.witness = "unconverged family member at row " +
                std::to_string(unconverged_at) + ": c = [" +
                fmt_real_vector(m.c) + "], t = [" + fmt_real_vector(m.t) +
                "], residual = " + csv_number(m.residual);
    return;
  }

  const WedgeSpec w{g.as_edge_spec(), p.delta};
  const FillReport fill =
      fill_wedge_check(fam, w, p.fill_samples, seed ^ 0xf111u, p.box_halfwidth);
  if (!fill.failures.empty()) {
    CsvTable fails;
    fails.header = {"point"};
    for (const auto& z : fill.failures)
      fails.rows.push_back({fmt_complex_vector(z)});
    emit_csv(dir, "fill_failures.csv", fails, r);
    r.warnings.push_back(std::to_string(fill.failures.size()) +
                         " wedge samples failed the family inversion");
  }

  Eigen::VectorXd t0(n);
  for (int i = 0; i < n; ++i) t0[i] = p.t_max * (1.0 - 0.25 * (i % 2));
  const DiscFamily slice =
      DiscFamily::foliation_slice(base, t0, 0.8 * p.c_halfwidth, p.per_axis);
  const FoliationReport fol =
      foliation_check(slice, p.foliation_samples, seed ^ 0xf01u);
  CsvTable folcsv;
  folcsv.header = {"sample", "multiplicity"};
  std::map<int, int> histogram;
  int off_leaf = 0;
  for (std::size_t i = 0; i < fol.multiplicities.size(); ++i) {
    folcsv.rows.push_back(
        {std::to_string(i), std::to_string(fol.multiplicities[i])});
    ++histogram[fol.multiplicities[i]];
    off_leaf += fol.multiplicities[i] != 1;
  }
  emit_csv(dir, "foliation.csv", folcsv, r);
  if (off_leaf > 0)
    r.warnings.push_back(std::to_string(off_leaf) +
                         " foliation samples have multiplicity != 1");

  CsvTable sum;
  sum.header = {"fill_attempted", "fill_succeeded", "coverage",
                "max_multiplicity", "max_gap", "leaf_spacing"};
  sum.rows.push_back({std::to_string(fill.attempted),
                      std::to_string(fill.succeeded), csv_number(fill.coverage),
                      std::to_string(fol.max_multiplicity),
                      csv_number(fol.max_gap), csv_number(fol.leaf_spacing)});
  emit_csv(dir, "fill.csv", sum, r);

  json histo = json::object();
  for (const auto& [mult, count] : histogram)
    histo[std::to_string(mult)] = count;
  r.summary["fill_attempted"] = fill.attempted;
  r.summary["fill_succeeded"] = fill.succeeded;
  r.summary["coverage"] = fill.coverage;
  r.summary["foliation_multiplicities"] = histo;
  r.summary["max_multiplicity"] = fol.max_multiplicity;
  r.summary["max_gap"] = fol.max_gap;
  r.summary["leaf_spacing"] = fol.leaf_spacing;
}

// ---------------------------------------------------------------------------
// kobayashi

KobayashiParams kobayashi_from_json(const json& j) {
  const std::string w = "kobayashi";
  require_keys(j, {"domain", "dimension", "samples", "degree", "restarts",
                   "radius"},
               w);
  KobayashiParams p;
  p.domain = string_field(j, "domain", p.domain, w);
  p.dimension = int_field(j, "dimension", p.dimension, w);
  p.samples = int_field(j, "samples", p.samples, w);
  p.degree = int_field(j, "degree", p.degree, w);
  p.restarts = int_field(j, "restarts", p.restarts, w);
  p.radius = number_field(j, "radius", p.radius, w);
  return p;
}

json kobayashi_to_json(const KobayashiParams& p) {
  return json{{"domain", p.domain},   {"dimension", p.dimension},
              {"samples", p.samples}, {"degree", p.degree},
              {"restarts", p.restarts}, {"radius", p.radius}};
}

void run_kobayashi(const ExperimentConfig& cfg, const fs::path& dir,
                   std::uint64_t seed, KindResult& r) {
  const KobayashiParams& p = cfg.kobayashi;
  const int n = p.domain == "disc" ? 1 : p.dimension;
  const DomainSpec d = DomainSpec::ball(n);

  CsvTable sweep;
  sweep.header = {"z",     "v",
                  "lower_bracket", "fitted_constant",
                  "exact", "disc_search_upper",
                  "inscribed_upper"};
  Rng root(seed);
  double fitted_min = std::numeric_limits<double>::infinity();
  double max_search_gap = 0.0;
  int violations = 0;
  int fallbacks = 0;
  for (int i = 0; i < p.samples; ++i) {
    Rng s = root.substream(static_cast<std::uint64_t>(i));
    const MetricQuery q{d, s.complex_ball_point(n, p.radius),
                        s.complex_unit_vector(n)};
    const double exact = exact_metric(d, q.z, q.v).value();
    const double bracket = sibony_lower_bracket(
        q, d.rho(), 1.0, 64, seed ^ (0x51b00u + static_cast<unsigned>(i)));
    const double ratio = exact / bracket;
    const ExtremalDiscResult search = extremal_disc_search(
        q, p.degree, p.restarts,
        seed ^ (0xd15c0u + 977u * static_cast<unsigned>(i)));
    const double inscribed =
        upper_bound_inscribed(q, seed ^ (0x1a50u + static_cast<unsigned>(i)));
    sweep.rows.push_back({fmt_complex_vector(q.z), fmt_complex_vector(q.v),
                          csv_number(bracket), csv_number(ratio),
                          csv_number(exact), csv_number(search.value),
                          csv_number(inscribed)});
    fallbacks += search.fallback;
    const bool bad_inscribed = exact > inscribed * (1.0 + 1e-9) + 1e-12;
    const bool bad_search = exact > search.value + 1e-6 * (1.0 + exact);
    if ((bad_inscribed || bad_search) && r.witness.empty())
      r.witness = "sandwich violation at sample " + std::to_string(i) +
                  ": exact = " + csv_number(exact) + ", disc_search_upper = " +
                  csv_number(search.value) + ", inscribed_upper = " +
                  csv_number(inscribed);
    violations += bad_inscribed || bad_search;
    fitted_min = std::min(fitted_min, ratio);
    max_search_gap =
        std::max(max_search_gap, std::abs(search.value - exact) / exact);
  }
  emit_csv(dir, "sweep.csv", sweep, r);
  if (fallbacks > 0)
    r.warnings.push_back(std::to_string(fallbacks) +
                         " disc searches fell back to the inscribed bound");
  r.summary["samples"] = p.samples;
  r.summary["fitted_sibony_constant"] = fitted_min;
  r.summary["sandwich_violations"] = violations;
  r.summary["max_search_gap"] = max_search_gap;
}

// ---------------------------------------------------------------------------
// regularity

RegularityParams regularity_from_json(const json& j) {
  const std::string w = "regularity";
  require_keys(j, {"thetas", "rays", "points", "s0", "noise"}, w);
  RegularityParams p;
  if (j.contains("thetas")) {
    const json& ts = j.at("thetas");
    if (!ts.is_array())
      throw std::invalid_argument(w + ".thetas: expected an array");
    p.thetas.clear();
    for (const json& t : ts) {
      if (!t.is_number())
        throw std::invalid_argument(w + ".thetas: expected numbers");
      p.thetas.push_back(t.get<double>());
    }
  }
  p.rays = int_field(j, "rays", p.rays, w);
  p.points = int_field(j, "points", p.points, w);
  p.s0 = number_field(j, "s0", p.s0, w);
  p.noise = number_field(j, "noise", p.noise, w);
  return p;
}

json regularity_to_json(const RegularityParams& p) {
  return json{{"thetas", p.thetas},
              {"rays", p.rays},
              {"points", p.points},
              {"s0", p.s0},
              {"noise", p.noise}};
}

void run_regularity(const ExperimentConfig& cfg, const fs::path& dir,
                    std::uint64_t seed, KindResult& r) {
  const RegularityParams& p = cfg.regularity;
  CsvTable fits;
  fits.header = {"theta",
                 "alpha_theory",
                 "gradient_exponent_theory",
                 "fitted_gradient_exponent",
                 "fitted_alpha",
                 "constant",
                 "r2",
                 "s_min",
                 "s_max"};
  Rng root(seed);
  double max_alpha_error = 0.0;
  int out_of_range = 0;
  for (std::size_t k = 0; k < p.thetas.size(); ++k) {
    const double theta = p.thetas[k];
    const BootstrapSchedule sched = bootstrap_schedule(theta);
    std::vector<RayProfile> rays;
    CsvTable ray_table;
    ray_table.header = {"ray", "s", "value"};
    for (int ray = 0; ray < p.rays; ++ray) {
      Rng s = root.substream(1024 * k + static_cast<std::uint64_t>(ray));
      RayProfile prof;
      prof.base = Eigen::VectorXcd::Zero(1);
      prof.direction = Eigen::VectorXcd::Ones(1);
      prof.s = dyadic_distances(p.s0, p.points);
      for (double si : prof.s)
        prof.value.push_back(std::pow(si, -sched.gradient_exponent) *
                             (1.0 + p.noise * s.uniform(-1.0, 1.0)));
      prof.validate();
      for (std::size_t i = 0; i < prof.s.size(); ++i)
        ray_table.rows.push_back({std::to_string(ray), csv_number(prof.s[i]),
                                  csv_number(prof.value[i])});
      rays.push_back(std::move(prof));
    }
    char name[48];
    std::snprintf(name, sizeof name, "rays_%02u.csv",
                  static_cast<unsigned>(k));
    emit_csv(dir, name, ray_table, r);

    const ExponentFit fit = blowup_fit(rays);
    double fitted_alpha = std::numeric_limits<double>::quiet_NaN();
    if (fit.exponent >= 0.0 && fit.exponent < 1.0) {
      fitted_alpha = holder_from_gradient(fit.exponent);
      max_alpha_error =
          std::max(max_alpha_error, std::abs(fitted_alpha - sched.alpha));
    } else {
      ++out_of_range;
    }
    fits.rows.push_back({csv_number(theta), csv_number(sched.alpha),
                         csv_number(sched.gradient_exponent),
                         csv_number(fit.exponent), csv_number(fitted_alpha),
                         csv_number(fit.constant), csv_number(fit.r2),
                         csv_number(fit.s_min), csv_number(fit.s_max)});
  }
  emit_csv(dir, "fits.csv", fits, r);
  if (out_of_range > 0)
    r.warnings.push_back(std::to_string(out_of_range) +
                         " fitted gradient exponents left [0, 1)");
  r.summary["thetas"] = p.thetas.size();
  r.summary["max_alpha_error"] = max_alpha_error;
}

// ---------------------------------------------------------------------------
// domains-audit

DomainsAuditParams audit_from_json(const json& j) {
  const std::string w = "domains-audit";
  require_keys(j, {"domains", "boundary_samples"}, w);
  DomainsAuditParams p;
  if (j.contains("domains")) {
    const json& ds = j.at("domains");
    if (!ds.is_array())
      throw std::invalid_argument(w + ".domains: expected an array");
    for (const json& d : ds) p.domains.push_back(d);
  }
  p.boundary_samples = int_field(j, "boundary_samples", p.boundary_samples, w);
  return p;
}

json audit_to_json(const DomainsAuditParams& p) {
  return json{{"domains", p.domains},
              {"boundary_samples", p.boundary_samples}};
}

void run_domains_audit(const ExperimentConfig& cfg, const fs::path& dir,
                       std::uint64_t seed, KindResult& r) {
  const DomainsAuditParams& p = cfg.audit;
  std::vector<DomainSpec> domains;
  if (p.domains.empty()) {
    domains.push_back(DomainSpec::ball(2));
    domains.push_back(DomainSpec::ellipsoid({1.0, 4.0}));
  } else {
    for (const json& d : p.domains) domains.push_back(DomainSpec::from_json(d));
  }

  CsvTable audit;
  audit.header = {"index", "kind", "dimension", "psc_margin",
                  "genericity_margin"};
  double min_margin = std::numeric_limits<double>::infinity();
  double min_genericity = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const DomainSpec& d = domains[i];
    const double margin = strict_psc_margin(
        d, p.boundary_samples, seed ^ (0xa0d0u + static_cast<unsigned>(i)));
    const Eigen::VectorXcd pstar =
        d.boundary_samples(1, seed ^ (0xb0b0u + static_cast<unsigned>(i)))[0];
    const ChartResult chart = tangent_bundle_chart(d, pstar);
    const EdgeSpec edge = tangent_bundle_edge(d, chart.pivot);
    const Eigen::VectorXcd lifted = tangent_bundle_point(d, chart.pivot, pstar);
    const double genericity = genericity_margin(edge, lifted);
    audit.rows.push_back({std::to_string(i), d.kind(),
                          std::to_string(d.dim()), csv_number(margin),
                          csv_number(genericity)});
    char name[48];
    std::snprintf(name, sizeof name, "wedge_edge_%02u.json",
                  static_cast<unsigned>(i));
    write_text(dir / name, edge.to_json().dump(2) + "\n");
    r.artifacts.push_back(name);
    min_margin = std::min(min_margin, margin);
    min_genericity = std::min(min_genericity, genericity);
    if (margin <= 0.0 && r.witness.empty())
      r.witness = "strict pseudoconvexity fails for domain " +
                  std::to_string(i) + " (" + d.kind() +
                  "): margin = " + csv_number(margin);
    if (genericity <= 1e-12 && r.witness.empty())
      r.witness = "tangent-bundle edge of domain " + std::to_string(i) + " (" +
                  d.kind() + ") degenerates: margin = " + csv_number(genericity);
  }
  emit_csv(dir, "audit.csv", audit, r);
  r.summary["domains"] = domains.size();
  r.summary["min_psc_margin"] = min_margin;
  r.summary["min_genericity_margin"] = min_genericity;
}

// ---------------------------------------------------------------------------
// selftest

void run_selftest(const fs::path& dir, KindResult& r) {
  const std::vector<SelftestRow> rows = selftest_rows();
  CsvTable t;
  t.header = {"degree", "hilbert_error", "poisson_error", "involution_error"};
  double max_h = 0.0, max_p = 0.0, max_i = 0.0;
  int worst = 0;
  for (const SelftestRow& row : rows) {
    t.rows.push_back({std::to_string(row.degree), csv_number(row.hilbert_error),
                      csv_number(row.poisson_error),
                      csv_number(row.involution_error)});
    const double err = std::max(
        {row.hilbert_error, row.poisson_error, row.involution_error});
    if (err > std::max({max_h, max_p, max_i})) worst = row.degree;
    max_h = std::max(max_h, row.hilbert_error);
    max_p = std::max(max_p, row.poisson_error);
    max_i = std::max(max_i, row.involution_error);
  }
  emit_csv(dir, "selftest.csv", t, r);
  r.summary["degrees"] = rows.size();
  r.summary["max_hilbert_error"] = max_h;
  r.summary["max_poisson_error"] = max_p;
  r.summary["max_involution_error"] = max_i;
  if (std::max({max_h, max_p, max_i}) > kSelftestTol)
    r.witness = "circle calculus exactness fails at degree " +
                std::to_string(worst) + ": max error = " +
                csv_number(std::max({max_h, max_p, max_i}));
}

}  // namespace

// ---------------------------------------------------------------------------
// config

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::discs: return "discs";
    case ExperimentKind::kobayashi: return "kobayashi";
    case ExperimentKind::regularity: return "regularity";
    case ExperimentKind::domains_audit: return "domains-audit";
    case ExperimentKind::selftest: return "selftest";
  }
  throw std::logic_error("unreachable experiment kind");
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "discs") return ExperimentKind::discs;
  if (name == "kobayashi") return ExperimentKind::kobayashi;
  if (name == "regularity") return ExperimentKind::regularity;
  if (name == "domains-audit") return ExperimentKind::domains_audit;
  if (name == "selftest") return ExperimentKind::selftest;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: expected a JSON object");
  if (!j.contains("kind"))
    throw std::invalid_argument("config: missing 'kind'");
  if (!j.at("kind").is_string())
    throw std::invalid_argument("config: 'kind' must be a string");
  ExperimentConfig cfg;
  cfg.kind = parse_kind(j.at("kind").get<std::string>());

  std::vector<std::string> allowed = {"kind", "seed", "out"};
  if (cfg.kind != ExperimentKind::selftest)
    allowed.push_back(kind_name(cfg.kind));
  require_keys(j, allowed, "config");

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() ||
        (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw std::invalid_argument(
          "config: 'seed' must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.out_dir = string_field(j, "out", cfg.out_dir, "config");

  switch (cfg.kind) {
    case ExperimentKind::discs:
      if (j.contains("discs")) cfg.discs = discs_from_json(j.at("discs"));
      break;
    case ExperimentKind::kobayashi:
      if (j.contains("kobayashi"))
        cfg.kobayashi = kobayashi_from_json(j.at("kobayashi"));
      break;
    case ExperimentKind::regularity:
      if (j.contains("regularity"))
        cfg.regularity = regularity_from_json(j.at("regularity"));
      break;
    case ExperimentKind::domains_audit:
      if (j.contains("domains-audit"))
        cfg.audit = audit_from_json(j.at("domains-audit"));
      break;
    case ExperimentKind::selftest:
      break;
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j{{"kind", kind_name(kind)}, {"out", out_dir}};
  if (seed) j["seed"] = *seed;
  switch (kind) {
    case ExperimentKind::discs: j["discs"] = discs_to_json(discs); break;
    case ExperimentKind::kobayashi:
      j["kobayashi"] = kobayashi_to_json(kobayashi);
      break;
    case ExperimentKind::regularity:
      j["regularity"] = regularity_to_json(regularity);
      break;
    case ExperimentKind::domains_audit:
      j["domains-audit"] = audit_to_json(audit);
      break;
    case ExperimentKind::selftest: break;
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (out_dir.empty())
    throw std::invalid_argument("config: output directory is empty");
  if (!seed && kind != ExperimentKind::selftest)
    throw std::invalid_argument("config: 'seed' is mandatory for sampling "
                                "experiments");
  switch (kind) {
    case ExperimentKind::discs: {
      const DiscsParams& p = discs;
      if (p.graph != "flat" && p.graph != "perturbed")
        throw std::invalid_argument("discs.graph: expected flat | perturbed");
      if (p.dimension < 1 || p.dimension > 3)
        throw std::invalid_argument("discs.dimension: expected 1..3");
      if (p.grid_size < 16 || p.grid_size > 4096 || p.grid_size % 2 != 0)
        throw std::invalid_argument("discs.grid_size: expected even, 16..4096");
      if (!(p.tol > 0.0) || !(p.eps >= 0.0))
        throw std::invalid_argument("discs: tol must be positive, eps >= 0");
      if (p.max_iter < 1)
        throw std::invalid_argument("discs.max_iter: expected >= 1");
      if (!(p.delta > 0.0) || !(p.delta < 1.0))
        throw std::invalid_argument("discs.delta: expected 0 < delta < 1");
      if (!(p.c_halfwidth > 0.0) || !(p.t_max > 0.0))
        throw std::invalid_argument("discs: c_halfwidth and t_max must be "
                                    "positive");
      if (p.per_axis < 2 || p.per_axis > 9)
        throw std::invalid_argument("discs.per_axis: expected 2..9");
      if (p.fill_samples < 1 || p.fill_samples > 100000)
        throw std::invalid_argument("discs.fill_samples: expected 1..100000");
      if (p.foliation_samples < 1 || p.foliation_samples > 100000)
        throw std::invalid_argument(
            "discs.foliation_samples: expected 1..100000");
      if (!(p.box_halfwidth > 0.0))
        throw std::invalid_argument("discs.box_halfwidth: expected > 0");
      break;
    }
    case ExperimentKind::kobayashi: {
      const KobayashiParams& p = kobayashi;
      if (p.domain != "disc" && p.domain != "ball")
        throw std::invalid_argument("kobayashi.domain: expected disc | ball");
      if (p.dimension < 1 || p.dimension > 4)
        throw std::invalid_argument("kobayashi.dimension: expected 1..4");
      if (p.samples < 1 || p.samples > 100000)
        throw std::invalid_argument("kobayashi.samples: expected 1..100000");
      if (p.degree < 1 || p.degree > 8)
        throw std::invalid_argument("kobayashi.degree: expected 1..8");
      if (p.restarts < 1 || p.restarts > 16)
        throw std::invalid_argument("kobayashi.restarts: expected 1..16");
      if (!(p.radius > 0.0) || !(p.radius <= 0.999))
        throw std::invalid_argument("kobayashi.radius: expected 0 < r <= "
                                    "0.999");
      break;
    }
    case ExperimentKind::regularity: {
      const RegularityParams& p = regularity;
      if (p.thetas.empty())
        throw std::invalid_argument("regularity.thetas: expected at least one");
      for (double t : p.thetas)
        if (!(t > 0.5) || !(t < 1.0))
          throw std::invalid_argument(
              "regularity.thetas: expected 1/2 < theta < 1");
      if (p.rays < 1 || p.rays > 64)
        throw std::invalid_argument("regularity.rays: expected 1..64");
      if (p.points < 4 || p.points > 200)
        throw std::invalid_argument("regularity.points: expected 4..200");
      if (!(p.s0 > 0.0) || !(p.s0 <= 0.5))
        throw std::invalid_argument("regularity.s0: expected 0 < s0 <= 0.5");
      if (!(p.noise >= 0.0) || !(p.noise < 0.5))
        throw std::invalid_argument("regularity.noise: expected 0 <= noise < "
                                    "0.5");
      break;
    }
    case ExperimentKind::domains_audit: {
      const DomainsAuditParams& p = audit;
      if (p.boundary_samples < 4 || p.boundary_samples > 100000)
        throw std::invalid_argument(
            "domains-audit.boundary_samples: expected 4..100000");
      for (const json& d : p.domains)
        if (!d.is_object())
          throw std::invalid_argument(
              "domains-audit.domains: expected domain spec objects");
      break;
    }
    case ExperimentKind::selftest: break;
  }
}

// ---------------------------------------------------------------------------
// run / report

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  if (opt.jobs < 0)
    throw std::invalid_argument("jobs: expected >= 0 (0 = available cores)");
  const std::uint64_t seed = cfg.seed.value_or(0);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  const auto start = std::chrono::steady_clock::now();
  KindResult r;
  try {
    switch (cfg.kind) {
      case ExperimentKind::discs: run_discs(cfg, dir, seed, r); break;
      case ExperimentKind::kobayashi: run_kobayashi(cfg, dir, seed, r); break;
      case ExperimentKind::regularity: run_regularity(cfg, dir, seed, r); break;
      case ExperimentKind::domains_audit:
        run_domains_audit(cfg, dir, seed, r);
        break;
      case ExperimentKind::selftest: run_selftest(dir, r); break;
    }
  } catch (const std::runtime_error& e) {
    r.witness = e.what();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  RunOutcome o;
  o.warnings = r.warnings;
  if (!r.witness.empty()) {
    o.exit_code = 2;
    o.witness = r.witness;
  } else if (opt.strict && !r.warnings.empty()) {
    o.exit_code = 2;
    o.witness = "strict mode: " + r.warnings.front();
    for (std::size_t i = 1; i < r.warnings.size(); ++i)
      o.witness += "; " + r.warnings[i];
  }

  write_text(dir / "summary.json", r.summary.dump(2) + "\n");
  r.artifacts.push_back("summary.json");
  if (o.exit_code == 2) {
    const json witness{{"kind", kind_name(cfg.kind)}, {"reason", o.witness}};
    write_text(dir / "witness.json", witness.dump(2) + "\n");
    r.artifacts.push_back("witness.json");
  }

  const int jobs = opt.jobs > 0
                       ? opt.jobs
                       : static_cast<int>(std::thread::hardware_concurrency());
  json manifest{{"kind", kind_name(cfg.kind)},
                {"config", cfg.to_json()},
                {"jobs", jobs},
                {"strict", opt.strict},
                {"versions", version_block()},
                {"wall_time_seconds", wall},
                {"artifacts", r.artifacts},
                {"summary", r.summary},
                {"warnings", r.warnings},
                {"exit_code", o.exit_code}};
  if (cfg.seed) manifest["seed"] = *cfg.seed;
  o.manifest_path = dir / "manifest.json";
  write_text(o.manifest_path, manifest.dump(2) + "\n");
  o.manifest = std::move(manifest);
  return o;
}

namespace {

void print_fit_table(const CsvTable& fits, std::ostream& out) {
  const int ct = fits.column("theta");
  const int ca = fits.column("alpha_theory");
  const int cf = fits.column("fitted_alpha");
  out << "  theta   alpha(theta)   fitted alpha\n";
  char line[96];
  for (std::size_t i = 0; i < fits.rows.size(); ++i) {
    std::snprintf(line, sizeof line, "  %-7.4f %-14.6f %-12.6f\n",
                  fits.number(static_cast<int>(i), ct),
                  fits.number(static_cast<int>(i), ca),
                  fits.number(static_cast<int>(i), cf));
    out << line;
  }
  out << "  target: |fitted alpha - alpha(theta)| <= 0.03\n";
}

}  // namespace

int report_manifest(const fs::path& manifest_path, std::ostream& out,
                    std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) {
    err << "cannot read manifest: " << manifest_path.string() << "\n";
    return 1;
  }
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    err << "manifest is not valid JSON: " << e.what() << "\n";
    return 1;
  }
  const fs::path dir = manifest_path.parent_path();
  for (const json& name : m.value("artifacts", json::array())) {
    if (!name.is_string() || !fs::exists(dir / name.get<std::string>())) {
      err << "missing artifact: " << name.dump() << "\n";
      return 1;
    }
  }

  const std::string kind = m.value("kind", "");
  out << "kind: " << kind << "\n";
  if (m.contains("seed")) out << "seed: " << m["seed"].dump() << "\n";
  if (m.contains("wall_time_seconds"))
    out << "wall time: " << m["wall_time_seconds"].dump() << " s\n";

  try {
    if (kind == "regularity") {
      print_fit_table(read_csv(dir / "fits.csv"), out);
    } else if (kind == "kobayashi") {
      const CsvTable sweep = read_csv(dir / "sweep.csv");
      const int ce = sweep.column("exact");
      const int cs = sweep.column("disc_search_upper");
      const int ci = sweep.column("inscribed_upper");
      const int cr = sweep.column("fitted_constant");
      int violations = 0;
      double fitted = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
        const int row = static_cast<int>(i);
        const double exact = sweep.number(row, ce);
        violations +=
            exact > sweep.number(row, ci) * (1.0 + 1e-9) + 1e-12 ||
            exact > sweep.number(row, cs) + 1e-6 * (1.0 + exact);
        fitted = std::min(fitted, sweep.number(row, cr));
      }
      out << "samples: " << sweep.rows.size() << "\n";
      out << "sandwich violations: " << violations << " (expected 0)\n";
      out << "fitted sibony constant: " << csv_number(fitted)
          << " (target: positive, stable under resampling)\n";
    } else if (kind == "discs") {
      const CsvTable fill = read_csv(dir / "fill.csv");
      const CsvTable family = read_csv(dir / "family.csv");
      out << "family members: " << family.rows.size() << "\n";
      if (!fill.rows.empty()) {
        out << "coverage: " << fill.rows[0][fill.column("coverage")]
            << " (fill_succeeded/fill_attempted = "
            << fill.rows[0][fill.column("fill_succeeded")] << "/"
            << fill.rows[0][fill.column("fill_attempted")] << ")\n";
        out << "max foliation multiplicity: "
            << fill.rows[0][fill.column("max_multiplicity")]
            << " (expected 1)\n";
      }
      const int cres = family.column("residual");
      double max_res = 0.0;
      for (std::size_t i = 0; i < family.rows.size(); ++i)
        max_res =
            std::max(max_res, family.number(static_cast<int>(i), cres));
      out << "max residual: " << csv_number(max_res) << "\n";
    } else if (kind == "domains-audit") {
      const CsvTable audit = read_csv(dir / "audit.csv");
      const int ck = audit.column("kind");
      const int cm = audit.column("psc_margin");
      const int cg = audit.column("genericity_margin");
      for (std::size_t i = 0; i < audit.rows.size(); ++i) {
        out << "  " << audit.rows[i][static_cast<std::size_t>(ck)]
            << ": psc margin " << audit.rows[i][static_cast<std::size_t>(cm)]
            << ", genericity " << audit.rows[i][static_cast<std::size_t>(cg)]
            << " (target: both positive)\n";
      }
    } else if (kind == "selftest") {
      const CsvTable t = read_csv(dir / "selftest.csv");
      double worst = 0.0;
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (int c = 1; c < static_cast<int>(t.header.size()); ++c)
          worst = std::max(worst, t.number(static_cast<int>(i), c));
      out << "degrees: " << t.rows.size() << "\n";
      out << "max calculus error: " << csv_number(worst)
          << " (target: <= 1e-10)\n";
    }
  } catch (const std::exception& e) {
    err << "cannot summarize artifacts: " << e.what() << "\n";
    return 1;
  }

  for (const json& w : m.value("warnings", json::array()))
    out << "warning: " << w.get<std::string>() << "\n";
  if (m.value("exit_code", 0) != 0)
    out << "run reported certificate failures (exit code "
        << m.value("exit_code", 0) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// selftest rows

std::vector<SelftestRow> selftest_rows(int grid_size, int max_degree) {
  if (grid_size < 16 || max_degree < 1 || max_degree > grid_size / 4)
    throw std::invalid_argument(
        "selftest: expected grid_size >= 16 and 1 <= max_degree <= "
        "grid_size/4");
  std::vector<SelftestRow> out;
  for (int d = 1; d <= max_degree; ++d) {
    std::vector<double> a(static_cast<std::size_t>(d) + 1);
    std::vector<double> b(static_cast<std::size_t>(d) + 1);
    a[0] = 0.3;
    for (int k = 1; k <= d; ++k) {
      a[static_cast<std::size_t>(k)] = 1.0 / (k + 1.0);
      b[static_cast<std::size_t>(k)] = 1.0 / (k + 2.0);
    }
    const auto value = [&](double r, double th) {
      double s = a[0];
      for (int k = 1; k <= d; ++k)
        s += std::pow(r, k) * (a[static_cast<std::size_t>(k)] * std::cos(k * th) +
                               b[static_cast<std::size_t>(k)] * std::sin(k * th));
      return s;
    };
    const auto conjugate = [&](double th) {
      double s = 0.0;
      for (int k = 1; k <= d; ++k)
        s += a[static_cast<std::size_t>(k)] * std::sin(k * th) -
             b[static_cast<std::size_t>(k)] * std::cos(k * th);
      return s;
    };
    const CircleFunction u(grid_size, [&](double th) { return value(1.0, th); });
    const CircleFunction tu = hilbert_transform(u);
    const CircleFunction ttu = hilbert_transform(tu);
    const cd mean = u.mean();
    SelftestRow row;
    row.degree = d;
    for (int k = 0; k < grid_size; ++k) {
      const double th = u.theta(k);
      row.hilbert_error =
          std::max(row.hilbert_error, std::abs(tu.sample(k) - conjugate(th)));
      row.involution_error = std::max(
          row.involution_error, std::abs(ttu.sample(k) + u.sample(k) - mean));
    }
    for (const auto& [rr, phi] :
         {std::pair{0.6, 0.3}, std::pair{0.35, 2.1}, std::pair{0.85, -1.2}}) {
      const cd zeta = std::polar(rr, phi);
      row.poisson_error = std::max(
          row.poisson_error, std::abs(poisson_extend(u, zeta) - value(rr, phi)));
    }
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

double CsvTable::number(int row, int col) const {
  if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= rows.size() ||
      static_cast<std::size_t>(col) >= rows[static_cast<std::size_t>(row)].size())
    throw std::invalid_argument("csv: cell out of range");
  return std::strtod(
      rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)].c_str(),
      nullptr);
}

std::string csv_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(const fs::path& path, const CsvTable& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const auto line = [&f](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].find_first_of(",\"\n") != std::string::npos)
        throw std::logic_error("csv cells must not need quoting");
      if (i) f << ',';
      f << cells[i];
    }
    f << '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw std::logic_error("csv row width differs from the header");
    line(row);
  }
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      cells.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw std::runtime_error("empty csv: " + path.string());
  return t;
}

// ---------------------------------------------------------------------------
// CLI commands

int cmd_run(const std::string& config_path,
            const std::optional<std::uint64_t>& seed_override,
            const std::optional<std::string>& out_override, int jobs,
            bool strict, std::ostream& out, std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) {
    err << "cannot read config: " << config_path << "\n";
    return 1;
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    err << "config is not valid JSON: " << e.what() << "\n";
    return 1;
  }
  try {
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    const RunOutcome o = run_experiment(cfg, RunOptions{jobs, strict});
    for (const std::string& w : o.warnings) out << "warning: " << w << "\n";
    out << o.manifest["summary"].dump(2) << "\n";
    out << "manifest: " << o.manifest_path.string() << "\n";
    if (o.exit_code == 2) err << "certificate failure: " << o.witness << "\n";
    return o.exit_code;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_report(const std::string& manifest_path, std::ostream& out,
               std::ostream& err) {
  return report_manifest(fs::path(manifest_path), out, err);
}

int cmd_selftest(std::ostream& out, std::ostream& err) {
  const std::vector<SelftestRow> rows = selftest_rows();
  double worst = 0.0;
  int worst_degree = 0;
  for (const SelftestRow& r : rows) {
    const double e =
        std::max({r.hilbert_error, r.poisson_error, r.involution_error});
    if (e > worst) {
      worst = e;
      worst_degree = r.degree;
    }
  }
  out << "circle calculus exactness on trig polynomials, degrees 1.."
      << rows.size() << "\n";
  out << "max error: " << csv_number(worst) << " at degree " << worst_degree
      << " (target: <= 1e-10)\n";
  if (worst > kSelftestTol) {
    err << "selftest failed: error " << csv_number(worst) << " exceeds 1e-10\n";
    return 2;
  }
  out << "selftest passed\n";
  return 0;
}

}  // namespace scv
