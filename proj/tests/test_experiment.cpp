#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scv/experiment.hpp"
#include "scv/wedge.hpp"

using scv::CsvTable;
using scv::ExperimentConfig;
using scv::ExperimentKind;
using scv::RunOptions;
using scv::RunOutcome;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("scv_exp_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(bool(f));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json small_discs(const std::string& out) {
  return json{{"kind", "discs"},
              {"seed", 7},
              {"out", out},
              {"discs",
               {{"graph", "flat"},
                {"dimension", 1},
                {"grid_size", 64},
                {"per_axis", 3},
                {"fill_samples", 40},
                {"foliation_samples", 20}}}};
}

json small_kobayashi(const std::string& out, int seed = 11) {
  return json{{"kind", "kobayashi"},
              {"seed", seed},
              {"out", out},
              {"kobayashi", {{"domain", "disc"}, {"samples", 10}, {"degree", 2}}}};
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("experiment kinds round-trip by name") {
  for (const ExperimentKind k :
       {ExperimentKind::discs, ExperimentKind::kobayashi,
        ExperimentKind::regularity, ExperimentKind::domains_audit,
        ExperimentKind::selftest}) {
    CHECK(scv::parse_kind(scv::kind_name(k)) == k);
  }
  CHECK(scv::kind_name(ExperimentKind::domains_audit) == "domains-audit");
  CHECK_THROWS_AS(scv::parse_kind("bogus"), std::invalid_argument);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  const json good = small_discs("x");
  CHECK_NOTHROW(ExperimentConfig::from_json(good));

  json j = good;
  j["extra"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

  j = good;
  j["discs"]["bogus"] = 2;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

  j = good;  // block for a different kind counts as unknown
  j["kobayashi"] = json::object();
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

  j = good;
  j.erase("seed");
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  CHECK_NOTHROW(ExperimentConfig::from_json(json{{"kind", "selftest"}}));

  j = good;
  j["seed"] = -3;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j["seed"] = "42";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

  j = good;
  j["discs"]["grid_size"] = 63.5;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = good;
  j["discs"]["graph"] = 4;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = good;
  j["discs"]["graph"] = "spiky";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = good;
  j["discs"]["per_axis"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = good;
  j["discs"]["delta"] = 0.0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"seed", 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"kind", 3}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()),
                  std::invalid_argument);

  json reg{{"kind", "regularity"},
           {"seed", 1},
           {"regularity", {{"thetas", {0.5}}}}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(reg), std::invalid_argument);
  reg["regularity"]["thetas"] = {0.75};
  CHECK_NOTHROW(ExperimentConfig::from_json(reg));

  json kob = small_kobayashi("x");
  kob["kobayashi"]["radius"] = 1.5;
  CHECK_THROWS_AS(ExperimentConfig::from_json(kob), std::invalid_argument);
  kob = small_kobayashi("x");
  kob["kobayashi"]["domain"] = "annulus";
  CHECK_THROWS_AS(ExperimentConfig::from_json(kob), std::invalid_argument);
}

TEST_CASE("config round-trips through json") {
  const std::vector<json> samples = {
      small_discs("a"),
      small_kobayashi("b"),
      json{{"kind", "regularity"},
           {"seed", 9},
           {"out", "c"},
           {"regularity", {{"thetas", {0.6, 0.8}}, {"rays", 2}}}},
      json{{"kind", "domains-audit"},
           {"seed", 4},
           {"out", "d"},
           {"domains-audit", {{"boundary_samples", 16}}}},
      json{{"kind", "selftest"}, {"out", "e"}}};
  for (const json& j : samples) {
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);
    const json echoed = cfg.to_json();
    const ExperimentConfig again = ExperimentConfig::from_json(echoed);
    CHECK(again.to_json() == echoed);
    CHECK(again.kind == cfg.kind);
    CHECK(again.out_dir == cfg.out_dir);
    CHECK(again.seed == cfg.seed);
  }
}

TEST_CASE("discs run writes the family table and coverage summary") {
  const fs::path dir = fresh_dir("discs");
  const ExperimentConfig cfg =
      ExperimentConfig::from_json(small_discs(dir.string()));
  const RunOutcome o = scv::run_experiment(cfg);
  CHECK(o.exit_code == 0);
  CHECK(o.warnings.empty());

  const CsvTable family = scv::read_csv(dir / "family.csv");
  CHECK(family.header ==
        std::vector<std::string>{"c", "t", "iterations", "residual",
                                 "attachment_residual",
                                 "transversality_margin"});
  CHECK(family.rows.size() == 9);  // per_axis^2 at dimension 1
  const int it = family.column("iterations");
  const int res = family.column("residual");
  for (std::size_t i = 0; i < family.rows.size(); ++i) {
    // Warm starts can land exactly, so at most one Picard step is needed.
    CHECK(family.number(static_cast<int>(i), it) <= 1.0);
    CHECK(family.number(static_cast<int>(i), res) == 0.0);  // flat is exact
  }

  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("coverage").get<double>() == doctest::Approx(1.0));
  CHECK(summary.at("max_multiplicity").get<int>() == 1);
  CHECK(summary.at("converged").get<int>() == 9);
  CHECK(summary.at("foliation_multiplicities").at("1").get<int>() == 20);

  CHECK(o.manifest.at("kind") == "discs");
  CHECK(o.manifest.at("exit_code") == 0);
  CHECK(o.manifest.at("seed") == 7);
  CHECK(o.manifest.at("config") == cfg.to_json());
  for (const json& name : o.manifest.at("artifacts"))
    CHECK(fs::exists(dir / name.get<std::string>()));
  CHECK(fs::exists(o.manifest_path));
}

TEST_CASE("identical config and seed reproduce csv bytes") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  json ja = small_discs(a.string());
  json jb = small_discs(b.string());
  scv::run_experiment(ExperimentConfig::from_json(ja));
  scv::run_experiment(ExperimentConfig::from_json(jb));
  for (const char* name : {"family.csv", "foliation.csv", "fill.csv",
                           "summary.json"})
    CHECK(slurp(a / name) == slurp(b / name));

  const fs::path ka = fresh_dir("det_ka");
  const fs::path kb = fresh_dir("det_kb");
  const fs::path kc = fresh_dir("det_kc");
  scv::run_experiment(ExperimentConfig::from_json(small_kobayashi(ka.string())));
  scv::run_experiment(ExperimentConfig::from_json(small_kobayashi(kb.string())));
  scv::run_experiment(
      ExperimentConfig::from_json(small_kobayashi(kc.string(), 12)));
  CHECK(slurp(ka / "sweep.csv") == slurp(kb / "sweep.csv"));
  CHECK(slurp(ka / "sweep.csv") != slurp(kc / "sweep.csv"));  // seed matters
}

TEST_CASE("kobayashi sweep satisfies the sandwich on every row") {
  const fs::path dir = fresh_dir("kob");
  const RunOutcome o = scv::run_experiment(
      ExperimentConfig::from_json(small_kobayashi(dir.string())));
  CHECK(o.exit_code == 0);

  const CsvTable sweep = scv::read_csv(dir / "sweep.csv");
  CHECK(sweep.header ==
        std::vector<std::string>{"z", "v", "lower_bracket", "fitted_constant",
                                 "exact", "disc_search_upper",
                                 "inscribed_upper"});
  CHECK(sweep.rows.size() == 10);
  double min_ratio = 1e300;
  for (int i = 0; i < 10; ++i) {
    const double bracket = sweep.number(i, 2);
    const double ratio = sweep.number(i, 3);
    const double exact = sweep.number(i, 4);
    const double search = sweep.number(i, 5);
    const double inscribed = sweep.number(i, 6);
    CHECK(bracket > 0.0);
    CHECK(ratio == doctest::Approx(exact / bracket).epsilon(1e-12));
    CHECK(exact <= inscribed * (1.0 + 1e-9) + 1e-12);
    CHECK(exact <= search + 1e-6 * (1.0 + exact));
    min_ratio = std::min(min_ratio, ratio);
  }
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("sandwich_violations").get<int>() == 0);
  CHECK(summary.at("fitted_sibony_constant").get<double>() ==
        doctest::Approx(min_ratio).epsilon(1e-12));
}

TEST_CASE("regularity run recovers the scheduled exponents") {
  const fs::path dir = fresh_dir("reg");
  const json j{{"kind", "regularity"},
               {"seed", 3},
               {"out", dir.string()},
               {"regularity", {{"thetas", {0.6, 0.75, 0.9}}, {"rays", 3}}}};
  const RunOutcome o = scv::run_experiment(ExperimentConfig::from_json(j));
  CHECK(o.exit_code == 0);

  const CsvTable fits = scv::read_csv(dir / "fits.csv");
  CHECK(fits.rows.size() == 3);
  const int ca = fits.column("alpha_theory");
  const int cf = fits.column("fitted_alpha");
  const int cr = fits.column("r2");
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(fits.number(i, cf) - fits.number(i, ca)) <= 0.01);
    CHECK(fits.number(i, cr) >= 0.999);
  }
  const CsvTable rays = scv::read_csv(dir / "rays_00.csv");
  CHECK(rays.rows.size() == 3 * 20);  // rays x points
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("max_alpha_error").get<double>() <= 0.01);
}

TEST_CASE("domains audit certifies margins and exports wedge edges") {
  const fs::path dir = fresh_dir("audit");
  const json j{{"kind", "domains-audit"}, {"seed", 5}, {"out", dir.string()}};
  const RunOutcome o = scv::run_experiment(ExperimentConfig::from_json(j));
  CHECK(o.exit_code == 0);

  const CsvTable audit = scv::read_csv(dir / "audit.csv");
  CHECK(audit.rows.size() == 2);  // built-in ball + ellipsoid
  const int cm = audit.column("psc_margin");
  const int cg = audit.column("genericity_margin");
  for (int i = 0; i < 2; ++i) {
    CHECK(audit.number(i, cm) > 0.9);
    CHECK(audit.number(i, cg) > 0.5);
  }

  const json edge_json = json::parse(slurp(dir / "wedge_edge_00.json"));
  const scv::EdgeSpec edge = scv::EdgeSpec::from_json(edge_json);
  CHECK(edge.ambient_dim() == 3);  // (z, w) in C^2 x C^1
  CHECK(edge.codim() == 3);
  CHECK(edge.to_json() == edge_json);
}

TEST_CASE("selftest rows are exact and the runner records them") {
  const std::vector<scv::SelftestRow> rows = scv::selftest_rows(256, 8);
  CHECK(rows.size() == 8);
  for (const scv::SelftestRow& r : rows) {
    CHECK(r.hilbert_error < 1e-10);
    CHECK(r.poisson_error < 1e-10);
    CHECK(r.involution_error < 1e-10);
  }
  CHECK_THROWS_AS(scv::selftest_rows(256, 65), std::invalid_argument);
  CHECK_THROWS_AS(scv::selftest_rows(8, 2), std::invalid_argument);

  const fs::path dir = fresh_dir("selftest");
  const json j{{"kind", "selftest"}, {"out", dir.string()}};
  const RunOutcome o = scv::run_experiment(ExperimentConfig::from_json(j));
  CHECK(o.exit_code == 0);
  CHECK(scv::read_csv(dir / "selftest.csv").rows.size() == 64);
  CHECK(!o.manifest.contains("seed"));
}

TEST_CASE("certificate failures exit 2 with a witness dump") {
  const fs::path dir = fresh_dir("fail");
  const json j{{"kind", "discs"},
               {"seed", 7},
               {"out", dir.string()},
               {"discs",
                {{"graph", "perturbed"},
                 {"eps", 0.05},
                 {"dimension", 1},
                 {"grid_size", 64},
                 {"per_axis", 2},
                 {"max_iter", 1},
                 {"fill_samples", 5},
                 {"foliation_samples", 5}}}};
  const RunOutcome o = scv::run_experiment(ExperimentConfig::from_json(j));
  CHECK(o.exit_code == 2);
  CHECK(o.witness.find("unconverged") != std::string::npos);
  CHECK(fs::exists(dir / "family.csv"));  // artifacts persist on failure
  const json witness = json::parse(slurp(dir / "witness.json"));
  CHECK(witness.at("reason").get<std::string>() == o.witness);
  CHECK(o.manifest.at("exit_code") == 2);
}

TEST_CASE("report summarizes a manifest without touching artifacts") {
  const fs::path dir = fresh_dir("report");
  const RunOutcome o = scv::run_experiment(
      ExperimentConfig::from_json(small_discs(dir.string())));
  REQUIRE(o.exit_code == 0);

  std::vector<std::pair<fs::path, std::string>> before;
  for (const json& name : o.manifest.at("artifacts")) {
    const fs::path p = dir / name.get<std::string>();
    before.emplace_back(p, slurp(p));
  }
  std::ostringstream out, err;
  CHECK(scv::report_manifest(o.manifest_path, out, err) == 0);
  CHECK(out.str().find("kind: discs") != std::string::npos);
  CHECK(out.str().find("coverage: 1") != std::string::npos);
  CHECK(err.str().empty());
  for (const auto& [p, bytes] : before) CHECK(slurp(p) == bytes);

  std::ostringstream out2, err2;
  CHECK(scv::report_manifest(dir / "nope.json", out2, err2) == 1);
  CHECK(!err2.str().empty());

  fs::remove(dir / "family.csv");
  std::ostringstream out3, err3;
  CHECK(scv::report_manifest(o.manifest_path, out3, err3) == 1);
  CHECK(err3.str().find("missing artifact") != std::string::npos);
}

TEST_CASE("report prints the regularity fit table") {
  const fs::path dir = fresh_dir("report_reg");
  const json j{{"kind", "regularity"},
               {"seed", 3},
               {"out", dir.string()},
               {"regularity", {{"thetas", {0.6}}, {"rays", 2}}}};
  const RunOutcome o = scv::run_experiment(ExperimentConfig::from_json(j));
  REQUIRE(o.exit_code == 0);
  std::ostringstream out, err;
  CHECK(scv::report_manifest(o.manifest_path, out, err) == 0);
  CHECK(out.str().find("alpha(theta)") != std::string::npos);
  CHECK(out.str().find("0.6") != std::string::npos);
}

TEST_CASE("cli commands map errors to exit codes") {
  std::ostringstream out, err;
  CHECK(scv::cmd_run("definitely_missing.json", {}, {}, 0, false, out, err) ==
        1);
  CHECK(err.str().find("cannot read config") != std::string::npos);

  const fs::path dir = fresh_dir("cli");
  const fs::path bad = dir / "bad.json";
  {
    std::ofstream f(bad);
    f << "{broken";
  }
  std::ostringstream out2, err2;
  CHECK(scv::cmd_run(bad.string(), {}, {}, 0, false, out2, err2) == 1);
  CHECK(err2.str().find("not valid JSON") != std::string::npos);

  const fs::path cfg_path = dir / "discs.json";
  const fs::path run_a = dir / "run_a";
  {
    std::ofstream f(cfg_path);
    f << small_discs(run_a.string()).dump(2);
  }
  std::ostringstream out3, err3;
  CHECK(scv::cmd_run(cfg_path.string(), {}, {}, 0, false, out3, err3) == 0);
  CHECK(out3.str().find("manifest:") != std::string::npos);
  CHECK(err3.str().empty());

  // Overrides redirect the artifacts and reseed the run.
  const fs::path run_b = dir / "run_b";
  std::ostringstream out4, err4;
  CHECK(scv::cmd_run(cfg_path.string(), std::uint64_t{99}, run_b.string(), 0,
                     false, out4, err4) == 0);
  const json manifest = json::parse(slurp(run_b / "manifest.json"));
  CHECK(manifest.at("seed") == 99);

  std::ostringstream out5, err5;
  CHECK(scv::cmd_selftest(out5, err5) == 0);
  CHECK(out5.str().find("selftest passed") != std::string::npos);
}

}  // TEST_SUITE
