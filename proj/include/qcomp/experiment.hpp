#pragma once

// Config-driven experiment runner behind the qcomp command line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qcomp {

/// Dimension caps applied before any pipeline runs.
struct Guards {
  std::size_t max_l = 20;
  std::size_t max_dim = 4096;     // largest d^l handled densely
  std::size_t max_trials = 100000;
  std::size_t max_povm_dim = 1024;
};

struct ExperimentConfig {
  nlohmann::json source;  // the config as given (after overrides)
  std::string pipeline;   // info, typicality, one-shot, net, discriminate, convert, capacity, bsst
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  Guards guards;

  /// Throws InvalidInput on malformed configs (missing seed, unknown pipeline, ...).
  static ExperimentConfig parse(nlohmann::json j, std::optional<std::uint64_t> seed_override = std::nullopt,
                                std::optional<std::size_t> threads_override = std::nullopt);
  static ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt,
                               std::optional<std::size_t> threads_override = std::nullopt);

  /// SHA-256 of the canonical JSON dump.
  std::string hash() const;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct ExperimentReport {
  nlohmann::json summary;
  Table table;
  /// Per-trial records (Monte Carlo pipelines) including runtimes.
  std::optional<Table> trials;
  /// Names of invariants that failed on this run.
  std::vector<std::string> failed_assertions;
};

struct ValidationResult {
  bool ok = true;
  bool guard_rejected = false;
  double estimated_bytes = 0.0;
  std::vector<std::string> diagnostics;
};

/// Dry run: guard checks and a memory estimate. Throws InvalidInput on
/// malformed parameters.
ValidationResult validate(const ExperimentConfig& config);

/// Runs the configured pipeline. Throws GuardExceeded, InvalidInput or
/// InvariantViolation.
ExperimentReport run(const ExperimentConfig& config);

/// CSV with numbers printed to 12 significant digits.
std::string to_csv(const Table& table);

/// Writes report.json, report.csv and (when present) trials.csv into `out_dir`.
void write_reports(const ExperimentConfig& config, const ExperimentReport& report, const std::string& out_dir,
                   double wall_clock_ms);

/// Version string embedded in reports.
std::string artifact_version();

}  // namespace qcomp
