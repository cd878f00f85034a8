#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scv {

enum class ExperimentKind { discs, kobayashi, regularity, domains_audit, selftest };

std::string kind_name(ExperimentKind k);
ExperimentKind parse_kind(const std::string& name);

// Attached-disc family sweep: grid of Bishop solves over (c, t), wedge
// filling, and a foliation slice.
struct DiscsParams {
  std::string graph = "flat";  // flat | perturbed
  double eps = 0.05;           // graph perturbation size
  double delta = 0.2;          // wedge shrink factor
  int dimension = 2;
  int grid_size = 256;
  double tol = 1e-11;
  int max_iter = 200;
  double c_halfwidth = 0.3;
  double t_max = 0.3;
  int per_axis = 3;
  int fill_samples = 500;
  int foliation_samples = 100;
  double box_halfwidth = 0.1;
};

// Metric sandwich sweep: per sample a lower bracket, the closed form, a
// polynomial-disc upper bound, and the inscribed-ball upper bound.
struct KobayashiParams {
  std::string domain = "disc";  // disc | ball
  int dimension = 2;            // ambient dimension for "ball"
  int samples = 200;
  int degree = 2;
  int restarts = 1;
  double radius = 0.95;  // interior sampling radius
};

// Gradient-blowup recovery over a theta grid: synthetic rays at the
// scheduled rate, refit, and map back to a Holder exponent.
struct RegularityParams {
  std::vector<double> thetas = {0.55, 0.6, 0.65, 0.7, 0.75,
                                0.8,  0.85, 0.9, 0.95};
  int rays = 4;
  int points = 20;
  double s0 = 0.1;
  double noise = 0.02;
};

// Pseudoconvexity and genericity audit over a list of domain specs; also
// exports each tangent-bundle edge as a wedge-edge JSON spec.
struct DomainsAuditParams {
  std::vector<nlohmann::json> domains;  // DomainSpec JSON; empty = built-ins
  int boundary_samples = 64;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::selftest;
  std::optional<std::uint64_t> seed;  // mandatory except for selftest
  std::string out_dir = "scvlab-out";
  DiscsParams discs;
  KobayashiParams kobayashi;
  RegularityParams regularity;
  DomainsAuditParams audit;

  // Strict schema: unknown keys anywhere are rejected, and only the block
  // matching `kind` may be present.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // round-trips through from_json
  void validate() const;
};

struct RunOptions {
  int jobs = 0;         // parallelism cap; 0 = available cores
  bool strict = false;  // certificate warnings become failures
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 certificate/hypothesis failure
  std::filesystem::path manifest_path;
  nlohmann::json manifest;
  std::vector<std::string> warnings;
  std::string witness;  // nonempty iff exit_code == 2
};

// Executes the experiment, writing CSV artifacts, summary.json, and
// manifest.json under cfg.out_dir. CSV bytes depend only on (config, seed).
// Caller errors throw std::invalid_argument; numerical certificate failures
// return exit_code 2 with a witness dump instead of throwing.
RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const RunOptions& opt = {});

// Prints a human-readable summary of a finished run; reads artifacts only.
// Returns 0, or 1 when the manifest or a listed artifact is missing.
int report_manifest(const std::filesystem::path& manifest_path,
                    std::ostream& out, std::ostream& err);

struct SelftestRow {
  int degree = 0;
  double hilbert_error = 0.0;
  double poisson_error = 0.0;
  double involution_error = 0.0;
};

// Circle-calculus exactness sweep on trig polynomials: conjugate function,
// interior Poisson values, and the involution T(T(u)) = -(u - mean).
std::vector<SelftestRow> selftest_rows(int grid_size = 256,
                                       int max_degree = 64);

// RFC-style CSV with a header row, '.' decimal separator, '\n' line ends.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  double number(int row, int col) const;
};

std::string csv_number(double x);  // shortest exact round-trip form
void write_csv(const std::filesystem::path& path, const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& path);

// Command entry points used by the CLI binary; argument parsing stays in
// main(). Exit codes: 0 success, 1 usage/schema errors, 2 certificate
// failures.
int cmd_run(const std::string& config_path,
            const std::optional<std::uint64_t>& seed_override,
            const std::optional<std::string>& out_override, int jobs,
            bool strict, std::ostream& out, std::ostream& err);
int cmd_report(const std::string& manifest_path, std::ostream& out,
               std::ostream& err);
int cmd_selftest(std::ostream& out, std::ostream& err);

}  // namespace scv
