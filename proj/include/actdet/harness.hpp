#pragma once

#include "actdet/io.hpp"
#include "actdet/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace actdet {

struct TrialSolverOutcome {
  VectorXd gamma_hat;
  double final_cost = 0.0;
  int sweeps = 0;
  bool converged = false;
  int numerical_faults = 0;
  double wall_ms = 0.0;
  std::uint64_t consumed_hash = 0;
  double err_l2 = 0.0;   // ||gamma_hat - gamma_true||_2
  double err_linf = 0.0; // ||gamma_hat - gamma_true||_inf
};

struct TrialResult {
  int index = 0;
  std::uint64_t seed_key = 0;  // derived activity-stream key, for reference
  bool ok = true;
  std::string fault;
  ActivityPattern truth;
  std::vector<TrialSolverOutcome> solvers;
};

struct SolverAggregate {
  std::string name;
  RocCurve roc;
  double mean_err_l2 = 0.0;
  double median_err_l2 = 0.0;
  double mean_err_linf = 0.0;
  double median_err_linf = 0.0;
  double mean_sweeps = 0.0;
};

struct RunRecord {
  RunConfig config;
  std::vector<double> nu_grid;
  std::vector<TrialResult> trials;
  int flagged_trials = 0;
  // One entry per requested solver; empty when no trial survived.
  std::vector<SolverAggregate> aggregates;
};

// Seeded Monte Carlo over config.trials independent trials. Pilots are drawn
// once per scenario unless fixed_pilots is false; every solver within a trial
// consumes the identical sample covariance. Trials may run on multiple
// threads; the outcome is a pure function of the config.
RunRecord run_scenario(const RunConfig& config);

enum class SweepParameter { M, Kc, Ac, SnrDb, Dc };
SweepParameter sweep_parameter_from_string(const std::string& s);
std::string to_string(SweepParameter p);

struct SweepOutcome {
  std::vector<RunRecord> records;
  std::vector<std::pair<double, std::string>> skipped;  // (value, reason)
};

// One run per value, same master seed throughout so cross-value comparisons
// share randomness structure where dimensions permit. Invalid derived
// configs are skipped and reported.
SweepOutcome sweep_parameter(const RunConfig& base, SweepParameter parameter,
                             const std::vector<double>& values);

struct ManifestEntry {
  std::string name;
  std::uint64_t bytes = 0;
  std::uint64_t fnv64 = 0;
};

struct EmitFormats {
  bool csv = true;
  bool json_summary = true;
};

// Writes roc_<solver>.csv per aggregated estimator, summary.json, and
// manifest.txt (name, size, FNV-1a hash per emitted file). With zero valid
// trials only the summary (carrying the flagged count) is emitted.
std::vector<ManifestEntry> emit_results(const RunRecord& record,
                                        const std::filesystem::path& out_dir,
                                        EmitFormats formats = {});

}  // namespace actdet
