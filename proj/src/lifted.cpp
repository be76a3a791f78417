#include "actdet/lifted.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace actdet {

namespace {

double spectral_norm(const MatrixXcd& m) {
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

}  // namespace

LiftedMatrix build_lifted_matrix(const PilotMatrix& pilots) {
  const auto dc = pilots.dc();
  const auto kc = pilots.kc();
  LiftedMatrix lifted;
  lifted.dc = static_cast<int>(dc);
  lifted.entries.resize(dc * dc, kc);
  for (Eigen::Index k = 0; k < kc; ++k) {
    const auto a = pilots.entries.col(k);
    for (Eigen::Index j = 0; j < dc; ++j)
      for (Eigen::Index i = 0; i < dc; ++i)
        lifted.entries(i + j * dc, k) = a[i] * std::conj(a[j]);
  }
  return lifted;
}

VectorXcd vec_column_major(const MatrixXcd& m) {
  return Eigen::Map<const VectorXcd>(m.data(), m.size());
}

int lifted_rank(const LiftedMatrix& lifted, double rel_threshold) {
  Eigen::JacobiSVD<MatrixXcd> svd(lifted.entries);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = rel_threshold * sv[0];
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  return rank;
}

NnlsOracleResult nnls_oracle(const VectorXcd& sigma_hat_vec, const LiftedMatrix& lifted,
                             double sigma2, int max_iters, double grad_tol) {
  const auto kc = lifted.entries.cols();
  const auto dc = lifted.dc;
  if (sigma_hat_vec.size() != lifted.entries.rows())
    throw std::invalid_argument("vectorized covariance has wrong length");

  // Constant part of the residual: s - sigma2 vec(I).
  VectorXcd target = sigma_hat_vec;
  for (int i = 0; i < dc; ++i) target[i + i * static_cast<Eigen::Index>(dc)] -= sigma2;

  const double lips = std::pow(spectral_norm(lifted.entries), 2);
  const double step = 1.0 / lips;

  NnlsOracleResult result;
  result.gamma = VectorXd::Zero(kc);
  VectorXcd residual = target;  // target - lifted * gamma
  VectorXd grad(kc), next(kc);

  for (int it = 1; it <= max_iters; ++it) {
    // f = 0.5 ||residual||^2, so grad_k = -Re(<column_k, residual>).
    grad.noalias() = -(lifted.entries.adjoint() * residual).real();
    next = (result.gamma - step * grad).cwiseMax(0.0);
    result.grad_map_norm = (result.gamma - next).norm() / step;
    result.gamma.swap(next);
    residual.noalias() = target - lifted.entries * result.gamma;
    result.iters = it;
    if (result.grad_map_norm <= grad_tol) {
      result.converged = true;
      break;
    }
  }
  result.cost = residual.squaredNorm();
  return result;
}

GroupLassoResult l21_group_lasso_oracle(const ObservationBlock& obs,
                                        const PilotMatrix& pilots, double rho,
                                        int max_iters, double tol) {
  const auto kc = pilots.kc();
  const auto m = obs.y.cols();
  if (obs.y.rows() != pilots.dc())
    throw std::invalid_argument("observation rows do not match pilot dimension");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");

  const double lips = std::pow(spectral_norm(pilots.entries), 2);
  const double step = 1.0 / lips;
  const double shrink = step * rho * std::sqrt(static_cast<double>(m));

  GroupLassoResult result;
  result.x = MatrixXcd::Zero(kc, m);
  MatrixXcd grad(kc, m), next(kc, m), residual(pilots.dc(), m);

  for (int it = 1; it <= max_iters; ++it) {
    residual.noalias() = pilots.entries * result.x - obs.y;
    grad.noalias() = pilots.entries.adjoint() * residual;
    next = result.x - step * grad;
    for (Eigen::Index i = 0; i < kc; ++i) {
      const double norm = next.row(i).norm();
      if (norm <= shrink)
        next.row(i).setZero();
      else
        next.row(i) *= 1.0 - shrink / norm;
    }
    const double change = (next - result.x).norm();
    result.x.swap(next);
    result.iters = it;
    if (change <= tol * std::max(1.0, result.x.norm())) {
      result.converged = true;
      break;
    }
  }

  residual.noalias() = pilots.entries * result.x - obs.y;
  double l21 = 0.0;
  result.row_norms_scaled.resize(kc);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < kc; ++i) {
    const double norm = result.x.row(i).norm();
    l21 += norm;
    result.row_norms_scaled[i] = norm * inv_sqrt_m;
  }
  result.objective = 0.5 * residual.squaredNorm() +
                     rho * std::sqrt(static_cast<double>(m)) * l21;
  return result;
}

void TheoremParams::validate() const {
  if (!(delta > 0.0 && delta < 4.0 / std::sqrt(41.0)))
    throw std::invalid_argument("delta must lie in (0, 4/sqrt(41))");
  if (!(c_prime > 0.0)) throw std::invalid_argument("c_prime must be > 0");
  if (s < 1) throw std::invalid_argument("s must be >= 1");
  if (!(lambda_const > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(rho() < 1.0)) throw std::invalid_argument("derived rho must be < 1");
}

ScalingLawResult scaling_law_check(int dc, int kc, int s, const TheoremParams& params) {
  params.validate();
  if (dc < 1 || kc < 1 || s < 1 || s > kc)
    throw std::invalid_argument("need dc >= 1 and 1 <= s <= kc");
  ScalingLawResult result;
  result.lhs = static_cast<double>(dc) * (dc - 1);
  const double log_term = 1.0 + std::log(static_cast<double>(kc) / s);
  result.rhs = params.c_prime / (params.delta * params.delta) * s * log_term * log_term;
  result.satisfied = result.lhs >= result.rhs;
  return result;
}

double l1_tail(const VectorXd& gamma, int s) {
  if (s < 0) throw std::invalid_argument("s must be >= 0");
  if (s >= gamma.size()) return 0.0;
  std::vector<double> mags(gamma.size());
  for (Eigen::Index i = 0; i < gamma.size(); ++i) mags[i] = std::abs(gamma[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double tail = 0.0;
  for (std::size_t i = static_cast<std::size_t>(s); i < mags.size(); ++i) tail += mags[i];
  return tail;
}

double error_bound_rhs(const VectorXd& gamma_true, double d_norm, double p,
                       const TheoremParams& params, int dc) {
  params.validate();
  if (dc <= 1) throw std::invalid_argument("dc must be > 1");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("p must lie in [1, 2]");
  const double s = static_cast<double>(params.s);
  const double term1 =
      2.0 * params.big_c() / std::pow(s, 1.0 - 1.0 / p) * l1_tail(gamma_true, params.s);
  const double antenna_factor =
      1.0 + params.lambda_const * params.tau_prime() * std::sqrt(static_cast<double>(dc)) /
                std::sqrt(static_cast<double>(dc - 1));
  const double term2 =
      2.0 * params.big_d() / std::pow(s, 0.5 - 1.0 / p) * antenna_factor * d_norm / dc;
  return term1 + term2;
}

double covariance_error_prediction(const SampleCovariance& sigma, int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  return sigma.sigma_hat.trace().real() / std::sqrt(static_cast<double>(m));
}

std::string theory_report(int dc, int kc, int s, const TheoremParams& params) {
  const ScalingLawResult law = scaling_law_check(dc, kc, s, params);
  char buf[96];
  std::string out;
  auto line = [&](const char* key, double value) {
    std::snprintf(buf, sizeof(buf), "%s %.12g\n", key, value);
    out += buf;
  };
  line("check_theory.dc", dc);
  line("check_theory.kc", kc);
  line("check_theory.s", s);
  line("check_theory.delta", params.delta);
  line("check_theory.c_prime", params.c_prime);
  line("check_theory.lambda", params.lambda_const);
  line("scaling_law.lhs", law.lhs);
  line("scaling_law.rhs", law.rhs);
  out += std::string("scaling_law.satisfied ") + (law.satisfied ? "1" : "0") + "\n";
  line("constants.rho", params.rho());
  line("constants.tau_prime", params.tau_prime());
  line("constants.c", params.big_c());
  line("constants.d", params.big_d());
  return out;
}

}  // namespace actdet
