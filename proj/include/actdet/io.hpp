#pragma once

#include "actdet/estimators.hpp"
#include "actdet/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace actdet {

// Key-value configuration: one `key = value` pair per line, '#' comments.
// Unknown keys are rejected.
struct RunConfig {
  ScenarioConfig scenario;
  SolverOptions solver;  // shared template; kind is set per requested solver
  std::vector<EstimatorKind> solvers = {EstimatorKind::Ml, EstimatorKind::Mmv,
                                        EstimatorKind::Nnls};
  int trials = 50;
  bool fixed_pilots = true;
  int threads = 0;  // 0 = hardware concurrency
  int nu_grid_points = 100;
  double nu_grid_min = 1e-4;
  double nu_grid_max = 1e2;
};

std::map<std::string, std::string> parse_key_values(const std::string& text);
RunConfig run_config_from_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_text(const RunConfig& cfg);

// Complex matrix container: 8-byte magic "ACTDCM01", u64 rows, u64 cols,
// then column-major entries as interleaved little-endian f64 (re, im).
void write_matrix_binary(const std::filesystem::path& path, const MatrixXcd& m);
MatrixXcd read_matrix_binary(const std::filesystem::path& path);

// Debug CSV: one matrix row per line, cells formatted as re<sign>im j.
void write_matrix_csv(const std::filesystem::path& path, const MatrixXcd& m);

// Estimate export: header "index,value", one row per user.
void write_gamma_csv(const std::filesystem::path& path, const VectorXd& gamma);

// Solver diagnostics (per-sweep cost trace included) plus the final estimate
// as a JSON document.
std::string diagnostics_to_json(const SolveDiagnostics& diagnostics,
                                const VectorXd& gamma_hat);

std::string format_double(double v);  // >= 10 significant digits, locale-free

}  // namespace actdet
