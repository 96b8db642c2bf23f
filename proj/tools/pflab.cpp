// Command-line front end: run, validate and report experiments.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "pfl/errors.hpp"
#include "pfl/experiments.hpp"
#include "pfl/io.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override) {
  const pfl::ExperimentConfig cfg = pfl::load_config(config_path);
  const std::filesystem::path dir = out_override.empty() ? cfg.output_dir : out_override;
  const pfl::RunResult result = pfl::run_experiment(cfg);
  pfl::write_run(cfg, result, dir);
  std::cout << pfl::render_summary(result.summary) << "artifacts in " << dir.string() << "\n";
  return result.summary.all_passed() ? 0 : 1;
}

int cmd_validate(const std::string& config_path) {
  const auto problems = pfl::validate_config(nlohmann::json::parse(pfl::read_text(config_path)));
  if (problems.empty()) {
    std::cout << config_path << ": ok\n";
    return 0;
  }
  for (const auto& p : problems) std::cout << config_path << ": " << p << "\n";
  return 1;
}

int cmd_report(const std::string& run_dir) {
  const auto j = nlohmann::json::parse(pfl::read_text(std::filesystem::path(run_dir) / "summary.json"));
  const auto summary = pfl::summary_from_json(j);
  std::cout << pfl::render_summary(summary);
  return summary.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field boundary counterexample laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_dir, "Override the configured output directory");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Re-render the summary of a finished run");
  report->add_option("run_dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*validate) return cmd_validate(config_path);
    if (*report) return cmd_report(run_dir);
  } catch (const pfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
