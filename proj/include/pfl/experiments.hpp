#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pfl/field.hpp"

namespace pfl {

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  int n = 2;
  std::vector<double> eps;
  nlohmann::json grid = nlohmann::json::object();
  nlohmann::json solver = nlohmann::json::object();
  nlohmann::json params = nlohmann::json::object();
  std::string output_dir;
  std::uint64_t seed = 1;
  int workers = 1;
  nlohmann::json raw;
};

// Field-level messages; empty means the config is usable.
std::vector<std::string> validate_config(const nlohmann::json& config);
// Throws ConfigError with every validation message joined.
ExperimentConfig parse_config(const nlohmann::json& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Assertion {
  std::string id;
  std::string property;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;
  bool passed = false;
  std::string detail;
};

struct VerificationSummary {
  std::string experiment;
  std::vector<Assertion> assertions;

  bool all_passed() const;
  const Assertion* find(const std::string& id) const;
};

struct SweepRow {
  std::string experiment;
  int n = 0;
  double eps = 0.0;
  std::optional<double> theta_or_omega, F_unit, S_eps, W_eps, F_eps_penalized, sup_u, mass_total,
      mass_in_R1, mass_in_R2, mass_outside_Reps, boundary_layer_mass, hoelder_boundary,
      hoelder_interior, residual;
  std::optional<int> iterations;
};

struct RunResult {
  VerificationSummary summary;
  std::vector<SweepRow> rows;
  // Per-eps fields, named by file stem.
  std::vector<std::pair<std::string, ScalarField>> fields;
};

// Runs the experiment in memory. Solver failures are rethrown with the eps
// that failed in the message.
RunResult run_experiment(const ExperimentConfig& config);

// Writes config echo, sweep.csv, fields/, summary.json and manifest.json.
void write_run(const ExperimentConfig& config, const RunResult& result,
               const std::filesystem::path& dir);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string render_summary(const VerificationSummary& summary);
nlohmann::json to_json(const VerificationSummary& summary);
VerificationSummary summary_from_json(const nlohmann::json& j);

// Worker cap from PFL_WORKERS, if set to a positive integer.
std::optional<int> worker_cap_from_env();

}  // namespace pfl
