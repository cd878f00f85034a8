#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "scv/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scvlab: seeded experiments on attached analytic discs,\n"
               "invariant-metric brackets, and boundary regularity fits"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int jobs = 0;
  bool strict = false;
  CLI::App* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("config", config_path, "JSON config path")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--jobs", jobs,
                  "Parallelism cap (default: available cores)");
  run->add_flag("--strict", strict,
                "Turn certificate warnings into failures");

  std::string manifest_path;
  CLI::App* report = app.add_subcommand("report", "Summarize a run manifest");
  report->add_option("manifest", manifest_path, "manifest.json path")
      ->required();

  app.add_subcommand("selftest", "Run the circle-calculus exactness suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (run->parsed())
    return scv::cmd_run(config_path, seed, out_dir, jobs, strict, std::cout,
                        std::cerr);
  if (report->parsed())
    return scv::cmd_report(manifest_path, std::cout, std::cerr);
  return scv::cmd_selftest(std::cout, std::cerr);
}
