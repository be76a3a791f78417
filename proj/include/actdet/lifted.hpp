#pragma once

#include "actdet/types.hpp"

namespace actdet {

// dc^2 x kc matrix whose column k is vec(a_k a_k^H), column-major stacking.
struct LiftedMatrix {
  MatrixXcd entries;
  int dc = 0;
};

LiftedMatrix build_lifted_matrix(const PilotMatrix& pilots);

// Column-major stacking of a square matrix.
VectorXcd vec_column_major(const MatrixXcd& m);

// Number of singular values above rel_threshold * sigma_max. For random
// unit-modulus pilots this is min(kc, dc(dc-1)+1): the dc diagonal rows of
// the lifted matrix are all ones and collapse to a single direction. This is
// the operational identifiability diagnostic; independently of it, support
// sizes at or above dc(dc+1)/2, the affine dimension of the PSD cone, are
// never identifiable.
int lifted_rank(const LiftedMatrix& lifted, double rel_threshold = 1e-8);

struct NnlsOracleResult {
  VectorXd gamma;
  double cost = 0.0;  // || sigma_hat_vec - lifted gamma - sigma2 vec(I) ||^2
  double grad_map_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

// Projected gradient on min_{gamma >= 0} ||s - A gamma - sigma2 vec(I)||^2
// with fixed step 1/L, L the squared spectral norm of the lifted matrix.
// Stops when the gradient-mapping norm drops below grad_tol.
NnlsOracleResult nnls_oracle(const VectorXcd& sigma_hat_vec, const LiftedMatrix& lifted,
                             double sigma2, int max_iters = 200000,
                             double grad_tol = 1e-10);

struct GroupLassoResult {
  MatrixXcd x;                  // kc x m minimizer
  VectorXd row_norms_scaled;    // ||x_row|| / sqrt(m)
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
};

// Proximal gradient (row-wise shrinkage) on
//   min_X 0.5 ||A X - Y||_F^2 + rho sqrt(m) ||X||_{2,1}.
GroupLassoResult l21_group_lasso_oracle(const ObservationBlock& obs,
                                        const PilotMatrix& pilots, double rho,
                                        int max_iters = 100000, double tol = 1e-12);

// Constants of the NNLS recovery bound, derived from the RIP parameter.
struct TheoremParams {
  double delta = 0.5;
  double c_prime = 1.0;
  int s = 1;
  double lambda_const = 1.0;

  double denom() const { return std::sqrt(1.0 - delta * delta) - delta / 4.0; }
  double rho() const { return delta / denom(); }
  double tau_prime() const { return std::sqrt(1.0 + delta) / denom(); }
  double big_c() const { return (1.0 + rho()) * (1.0 + rho()) / (1.0 - rho()); }
  double big_d() const { return (3.0 + rho()) / (1.0 - rho()); }

  void validate() const;
};

struct ScalingLawResult {
  bool satisfied = false;
  double lhs = 0.0;  // dc (dc - 1)
  double rhs = 0.0;  // c' delta^-2 s log^2(e kc / s)
};

ScalingLawResult scaling_law_check(int dc, int kc, int s, const TheoremParams& params);

// l1 norm of gamma beyond its s largest-magnitude entries.
double l1_tail(const VectorXd& gamma, int s);

// Right-hand side of the recovery bound for 1 <= p <= 2:
//   2C/s^(1-1/p) * tail + 2D/s^(1/2-1/p) * (1 + lambda tau' sqrt(dc)/sqrt(dc-1)) * d_norm/dc.
double error_bound_rhs(const VectorXd& gamma_true, double d_norm, double p,
                       const TheoremParams& params, int dc);

// Predicted Frobenius deviation of the sample covariance: tr(Sigma)/sqrt(m).
double covariance_error_prediction(const SampleCovariance& sigma, int m);

// Line-oriented machine-readable report of the scaling law and the derived
// constants: one "key value" pair per line.
std::string theory_report(int dc, int kc, int s, const TheoremParams& params);

}  // namespace actdet
