// Command line front end: runs one experiment config and writes reports.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

#include "qcomp/errors.hpp"
#include "qcomp/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitGuard = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcomp: compound quantum channel coding experiments"};
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool validate_only = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "output directory for report.json / report.csv");
  app.add_option("--threads", threads, "worker threads for Monte Carlo loops");
  app.add_flag("--validate", validate_only, "check guards and estimate memory without running");
  app.set_version_flag("--version", qcomp::artifact_version());
  CLI11_PARSE(app, argc, argv);

  try {
    const qcomp::ExperimentConfig cfg = qcomp::ExperimentConfig::load(config_path, seed, threads);
    if (validate_only) {
      const qcomp::ValidationResult v = qcomp::validate(cfg);
      for (const auto& line : v.diagnostics) std::cout << line << "\n";
      return v.guard_rejected ? kExitGuard : (v.ok ? kExitOk : kExitInvalid);
    }
    const auto start = std::chrono::steady_clock::now();
    const qcomp::ExperimentReport rep = qcomp::run(cfg);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    qcomp::write_reports(cfg, rep, out_dir, ms);
    std::cout << rep.summary.dump(2) << "\n";
    if (!rep.failed_assertions.empty()) {
      for (const auto& name : rep.failed_assertions) std::cerr << "assertion failed: " << name << "\n";
      return kExitInvariant;
    }
    return kExitOk;
  } catch (const qcomp::GuardExceeded& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return kExitGuard;
  } catch (const qcomp::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const qcomp::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const qcomp::DimensionMismatch& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}
