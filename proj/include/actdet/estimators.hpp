#pragma once

#include "actdet/types.hpp"

#include <cstdint>
#include <vector>

namespace actdet {

enum class EstimatorKind { Ml, Mmv, Nnls };
enum class CoordinateOrder { RandomPermutationPerSweep, Cyclic };

std::string to_string(EstimatorKind k);
std::string to_string(CoordinateOrder o);
EstimatorKind estimator_kind_from_string(const std::string& s);
CoordinateOrder coordinate_order_from_string(const std::string& s);

struct SolverOptions {
  EstimatorKind kind = EstimatorKind::Ml;
  int max_sweeps = 1000;
  // Convergence threshold on the largest coordinate step within a sweep.
  // Negative means "use 1e-6 * sigma2".
  double tol = -1.0;
  CoordinateOrder order = CoordinateOrder::RandomPermutationPerSweep;
  // MMV regularizer; negative means "use sigma2".
  double rho = -1.0;
  // Full recomputation of Sigma and its inverse every this many sweeps.
  int reinversion_period = 1;
  // Seed of the per-sweep permutation stream (random order only).
  std::uint64_t shuffle_seed = 0;

  double effective_tol(double sigma2) const { return tol >= 0.0 ? tol : 1e-6 * sigma2; }
  double effective_rho(double sigma2) const { return rho > 0.0 ? rho : sigma2; }
  void validate(double sigma2) const;
};

// Mutable coordinate-descent state: the iterate, the model covariance
// Sigma = A diag(gamma) A^H + base I (base = sigma2 for ML/NNLS, rho for
// MMV), its inverse maintained by rank-1 updates, and the running cost.
struct EstimatorState {
  EstimatorKind kind = EstimatorKind::Ml;
  double base = 0.0;
  double sigma2 = 0.0;
  VectorXd gamma;
  MatrixXcd sigma;
  MatrixXcd sigma_inv;
  double cost = 0.0;
  int sweep_count = 0;
  int fault_count = 0;

  // Scratch for the hot per-coordinate path.
  VectorXcd u, v;
};

// log|A diag(gamma) A^H + sigma2 I| + tr((A diag(gamma) A^H + sigma2 I)^-1 S).
double ml_cost(const VectorXd& gamma, const PilotMatrix& pilots, double sigma2,
               const SampleCovariance& sigma_hat);

// tr(diag(gamma)) + tr((A diag(gamma) A^H + rho I)^-1 S).
double mmv_cost(const VectorXd& gamma, const PilotMatrix& pilots, double rho,
                const SampleCovariance& sigma_hat);

// || S - A diag(gamma) A^H - sigma2 I ||_F^2.
double nnls_cost(const VectorXd& gamma, const PilotMatrix& pilots, double sigma2,
                 const SampleCovariance& sigma_hat);

// Dispatch on kind; rho is only consulted for MMV.
double cost_of(EstimatorKind kind, const VectorXd& gamma, const PilotMatrix& pilots,
               double sigma2, double rho, const SampleCovariance& sigma_hat);

// Fresh state at the given iterate (gamma = 0 when init is null): exact
// Sigma, inverse and cost.
EstimatorState make_state(const PilotMatrix& pilots, const SampleCovariance& sigma_hat,
                          double sigma2, const SolverOptions& opts,
                          const VectorXd* init_gamma = nullptr);

// Rebuild Sigma from gamma, re-invert, and recompute the cost exactly.
void refresh_state(EstimatorState& state, const PilotMatrix& pilots,
                   const SampleCovariance& sigma_hat);

// One coordinate-wise exact minimization of the per-kind objective along
// gamma_k, clamped so gamma stays nonnegative. Applies the step to gamma,
// Sigma (rank-1) and Sigma_inv (Sherman-Morrison) and returns it. A
// non-positive Sherman-Morrison denominator is treated as a numerical fault
// and answered with a full re-inversion.
double coord_update(EstimatorState& state, int k, const PilotMatrix& pilots,
                    const SampleCovariance& sigma_hat, const SolverOptions& opts);

// (Sigma + d a a^H)^-1 from Sigma^-1 via Sherman-Morrison.
// Requires 1 + d a^H Sigma^-1 a > 0.
MatrixXcd rank1_update_inverse(const MatrixXcd& sigma_inv, const VectorXcd& a, double d);

struct SolveDiagnostics {
  std::vector<double> sweep_costs;  // cost after each completed sweep
  double final_cost = 0.0;
  int sweeps = 0;
  bool converged = false;
  double last_max_step = 0.0;
  int numerical_faults = 0;
  std::uint64_t consumed_hash = 0;  // FNV-1a of the covariance actually read
};

struct SolveResult {
  VectorXd gamma_hat;
  SolveDiagnostics diagnostics;
};

// Coordinate-wise descent over all kc coordinates per sweep until the largest
// step falls below tol or max_sweeps is reached. Non-convergence is reported
// through the diagnostics, never thrown.
SolveResult run_coordinate_descent(const SampleCovariance& sigma_hat,
                                   const PilotMatrix& pilots, double sigma2,
                                   const SolverOptions& opts,
                                   const VectorXd* warm_start = nullptr);

std::uint64_t fnv1a64(const void* data, std::size_t bytes);
std::uint64_t hash_matrix(const MatrixXcd& m);

}  // namespace actdet
