// polymerlab: batch front door for the chain-dynamics experiment harness.
//
//   polymerlab run <config.json>      execute one experiment
//   polymerlab list [--json]          experiment catalog
//   polymerlab replay <report.json>   re-run from an embedded config and
//                                     verify bitwise metric reproduction
//
// Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 config/runtime error.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "polymerlab/experiments.hpp"

using namespace polymerlab;

namespace {

int cmd_run(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }
  try {
    const ExperimentReport rep = run_experiment(cfg);
    std::cout << cfg.experiment << ": " << verdict_name(rep.verdict)
              << " (report in " << cfg.output_dir << ")\n";
    return verdict_exit_code(rep.verdict);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

int cmd_list(bool as_json) {
  const auto& catalog = experiment_catalog();
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : catalog)
      j.push_back({{"name", e.name}, {"summary", e.summary},
                   {"params", e.param_keys}});
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  for (const auto& e : catalog) {
    std::printf("%-26s %s\n", e.name.c_str(), e.summary.c_str());
    std::printf("%-26s   params: %s\n", "", e.param_keys.c_str());
  }
  return 0;
}

int cmd_replay(const std::string& report_path, std::size_t extend_seeds) {
  ExperimentReport original;
  try {
    original = load_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load report: " << e.what() << "\n";
    return 3;
  }
  if (original.code_version != kCodeVersion) {
    std::cerr << "replay refused: report from code version "
              << original.code_version << ", this binary is " << kCodeVersion
              << "\n";
    return 3;
  }
  try {
    auto j = nlohmann::json::parse(original.config_json);
    if (extend_seeds > 0) {
      std::vector<std::uint64_t> seeds = original.seeds;
      const std::uint64_t base = seeds.empty() ? 0 : seeds.back();
      for (std::size_t i = 1; i <= extend_seeds; ++i) seeds.push_back(base + i);
      j["seeds"] = seeds;
    }
    const RunConfig cfg = parse_run_config(j);
    const ExperimentReport fresh = run_experiment(cfg);
    if (extend_seeds > 0) {
      std::cout << cfg.experiment << ": " << verdict_name(fresh.verdict)
                << " with " << cfg.seeds.size() << " seeds (merged run)\n";
      return verdict_exit_code(fresh.verdict);
    }
    if (!metrics_identical(original, fresh)) {
      std::cerr << "replay mismatch: metrics differ from the recorded report\n";
      return 1;
    }
    std::cout << cfg.experiment << ": replay reproduced all metrics bitwise ("
              << verdict_name(fresh.verdict) << ")\n";
    return verdict_exit_code(fresh.verdict);
  } catch (const std::exception& e) {
    std::cerr << "replay error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chain-dynamics simulation lab"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "path to the run config")->required();

  bool as_json = false;
  auto* list = app.add_subcommand("list", "list available experiments");
  list->add_flag("--json", as_json, "machine-readable output");

  std::string report_path;
  std::size_t extend = 0;
  auto* replay = app.add_subcommand(
      "replay", "re-run a report's config and verify bitwise reproduction");
  replay->add_option("report", report_path, "path to a report JSON")->required();
  replay->add_option("--seeds-extend", extend,
                     "append this many fresh seeds and merge instead of verifying");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path);
  if (list->parsed()) return cmd_list(as_json);
  if (replay->parsed()) return cmd_replay(report_path, extend);
  return 3;
}
