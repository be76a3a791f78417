#include "actdet/estimators.hpp"

#include "actdet/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace actdet {

namespace {

constexpr double kShermanMorrisonFloor = 1e-12;

// Sigma = base I + sum_k gamma_k a_k a_k^H, exactly Hermitian.
MatrixXcd build_model_covariance(const VectorXd& gamma, const PilotMatrix& pilots,
                                 double base) {
  const auto dc = pilots.dc();
  std::vector<int> active;
  for (int k = 0; k < gamma.size(); ++k)
    if (gamma[k] != 0.0) active.push_back(k);

  MatrixXcd sigma = MatrixXcd::Zero(dc, dc);
  if (!active.empty()) {
    MatrixXcd scaled(dc, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j)
      scaled.col(static_cast<Eigen::Index>(j)) =
          std::sqrt(gamma[active[j]]) * pilots.entries.col(active[j]);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  }
  MatrixXcd full = sigma.selfadjointView<Eigen::Lower>();
  full += base * MatrixXcd::Identity(dc, dc);
  return full;
}

double logdet_and_trace_term(const MatrixXcd& sigma, const MatrixXcd& sigma_hat,
                             double* trace_term) {
  Eigen::LLT<MatrixXcd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("model covariance lost positive definiteness");
  double logdet = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i).real());
  if (trace_term) *trace_term = llt.solve(sigma_hat).trace().real();
  return logdet;
}

void check_nonnegative(const VectorXd& gamma) {
  if ((gamma.array() < 0.0).any())
    throw std::invalid_argument("gamma must be componentwise nonnegative");
}

}  // namespace

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Ml: return "ml";
    case EstimatorKind::Mmv: return "mmv";
    case EstimatorKind::Nnls: return "nnls";
  }
  return "?";
}

std::string to_string(CoordinateOrder o) {
  return o == CoordinateOrder::Cyclic ? "cyclic" : "random_permutation_per_sweep";
}

EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "ml") return EstimatorKind::Ml;
  if (s == "mmv") return EstimatorKind::Mmv;
  if (s == "nnls") return EstimatorKind::Nnls;
  throw std::invalid_argument("unknown estimator kind: " + s);
}

CoordinateOrder coordinate_order_from_string(const std::string& s) {
  if (s == "cyclic") return CoordinateOrder::Cyclic;
  if (s == "random_permutation_per_sweep") return CoordinateOrder::RandomPermutationPerSweep;
  throw std::invalid_argument("unknown coordinate_order: " + s);
}

void SolverOptions::validate(double sigma2) const {
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (effective_tol(sigma2) < 0.0) throw std::invalid_argument("tol must be >= 0");
  if (reinversion_period < 1) throw std::invalid_argument("reinversion_period must be >= 1");
  if (kind == EstimatorKind::Mmv && !(effective_rho(sigma2) > 0.0))
    throw std::invalid_argument("rho must be > 0 for MMV");
}

double ml_cost(const VectorXd& gamma, const PilotMatrix& pilots, double sigma2,
               const SampleCovariance& sigma_hat) {
  check_nonnegative(gamma);
  const MatrixXcd sigma = build_model_covariance(gamma, pilots, sigma2);
  double trace_term = 0.0;
  const double logdet = logdet_and_trace_term(sigma, sigma_hat.sigma_hat, &trace_term);
  return logdet + trace_term;
}

double mmv_cost(const VectorXd& gamma, const PilotMatrix& pilots, double rho,
                const SampleCovariance& sigma_hat) {
  check_nonnegative(gamma);
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  const MatrixXcd sigma = build_model_covariance(gamma, pilots, rho);
  double trace_term = 0.0;
  logdet_and_trace_term(sigma, sigma_hat.sigma_hat, &trace_term);
  return gamma.sum() + trace_term;
}

double nnls_cost(const VectorXd& gamma, const PilotMatrix& pilots, double sigma2,
                 const SampleCovariance& sigma_hat) {
  check_nonnegative(gamma);
  const MatrixXcd sigma = build_model_covariance(gamma, pilots, sigma2);
  return (sigma_hat.sigma_hat - sigma).squaredNorm();
}

double cost_of(EstimatorKind kind, const VectorXd& gamma, const PilotMatrix& pilots,
               double sigma2, double rho, const SampleCovariance& sigma_hat) {
  switch (kind) {
    case EstimatorKind::Ml: return ml_cost(gamma, pilots, sigma2, sigma_hat);
    case EstimatorKind::Mmv: return mmv_cost(gamma, pilots, rho, sigma_hat);
    case EstimatorKind::Nnls: return nnls_cost(gamma, pilots, sigma2, sigma_hat);
  }
  throw std::logic_error("unreachable estimator kind");
}

void refresh_state(EstimatorState& state, const PilotMatrix& pilots,
                   const SampleCovariance& sigma_hat) {
  const auto dc = pilots.dc();
  state.sigma = build_model_covariance(state.gamma, pilots, state.base);
  Eigen::LLT<MatrixXcd> llt(state.sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("model covariance lost positive definiteness");
  state.sigma_inv = llt.solve(MatrixXcd::Identity(dc, dc));

  switch (state.kind) {
    case EstimatorKind::Ml: {
      double logdet = 0.0;
      const auto& l = llt.matrixLLT();
      for (Eigen::Index i = 0; i < dc; ++i) logdet += 2.0 * std::log(l(i, i).real());
      state.cost = logdet + trace_product_hermitian(state.sigma_inv, sigma_hat.sigma_hat);
      break;
    }
    case EstimatorKind::Mmv:
      state.cost =
          state.gamma.sum() + trace_product_hermitian(state.sigma_inv, sigma_hat.sigma_hat);
      break;
    case EstimatorKind::Nnls:
      state.cost = (sigma_hat.sigma_hat - state.sigma).squaredNorm();
      break;
  }
}

EstimatorState make_state(const PilotMatrix& pilots, const SampleCovariance& sigma_hat,
                          double sigma2, const SolverOptions& opts,
                          const VectorXd* init_gamma) {
  opts.validate(sigma2);
  EstimatorState state;
  state.kind = opts.kind;
  state.sigma2 = sigma2;
  state.base = opts.kind == EstimatorKind::Mmv ? opts.effective_rho(sigma2) : sigma2;
  if (init_gamma) {
    if (init_gamma->size() != pilots.kc())
      throw std::invalid_argument("warm start has wrong length");
    check_nonnegative(*init_gamma);
    state.gamma = *init_gamma;
  } else {
    state.gamma = VectorXd::Zero(pilots.kc());
  }
  state.u.resize(pilots.dc());
  state.v.resize(pilots.dc());
  refresh_state(state, pilots, sigma_hat);
  return state;
}

double coord_update(EstimatorState& state, int k, const PilotMatrix& pilots,
                    const SampleCovariance& sigma_hat, const SolverOptions& opts) {
  (void)opts;
  if (k < 0 || k >= state.gamma.size())
    throw std::invalid_argument("coordinate index out of range");
  const auto a = pilots.entries.col(k);
  const double gk = state.gamma[k];

  double s1 = 0.0;          // a^H Sigma^-1 a
  double s2 = 0.0;          // a^H Sigma^-1 S Sigma^-1 a
  double unconstrained = 0.0;
  double fit_gap = 0.0;     // a^H (S - Sigma) a, NNLS only
  double norm4 = 0.0;

  state.u.noalias() = state.sigma_inv * a;
  s1 = a.dot(state.u).real();
  if (!(s1 > 0.0)) {
    // Inverse drifted off the PD cone; rebuild and retry once.
    ++state.fault_count;
    refresh_state(state, pilots, sigma_hat);
    state.u.noalias() = state.sigma_inv * a;
    s1 = a.dot(state.u).real();
    if (!(s1 > 0.0)) throw std::runtime_error("Sigma^-1 not positive definite");
  }

  switch (state.kind) {
    case EstimatorKind::Ml: {
      state.v.noalias() = sigma_hat.sigma_hat * state.u;
      s2 = std::max(0.0, state.u.dot(state.v).real());
      unconstrained = (s2 - s1) / (s1 * s1);
      break;
    }
    case EstimatorKind::Mmv: {
      state.v.noalias() = sigma_hat.sigma_hat * state.u;
      s2 = std::max(0.0, state.u.dot(state.v).real());
      unconstrained = (std::sqrt(s2) - 1.0) / s1;
      break;
    }
    case EstimatorKind::Nnls: {
      state.v.noalias() = sigma_hat.sigma_hat * a;
      const double t_hat = a.dot(state.v).real();
      state.v.noalias() = state.sigma * a;
      const double t_cur = a.dot(state.v).real();
      fit_gap = t_hat - t_cur;
      const double n2 = a.squaredNorm();
      norm4 = n2 * n2;
      unconstrained = fit_gap / norm4;
      break;
    }
  }

  const bool clamped = unconstrained < -gk;
  const double d = clamped ? -gk : unconstrained;
  if (d == 0.0) {
    state.gamma[k] = clamped ? 0.0 : gk;
    return 0.0;
  }

  const double denom = 1.0 + d * s1;

  // Running cost, updated with pre-step quantities.
  switch (state.kind) {
    case EstimatorKind::Ml:
      state.cost += std::log1p(d * s1) - d * s2 / denom;
      break;
    case EstimatorKind::Mmv:
      state.cost += d - d * s2 / denom;
      break;
    case EstimatorKind::Nnls:
      state.cost += -2.0 * d * fit_gap + d * d * norm4;
      break;
  }

  state.gamma[k] = clamped ? 0.0 : gk + d;
  state.sigma.noalias() += (d * a) * a.adjoint();

  if (denom <= kShermanMorrisonFloor) {
    // Unreachable with the clamp in exact arithmetic; recover numerically.
    ++state.fault_count;
    refresh_state(state, pilots, sigma_hat);
    return d;
  }
  state.sigma_inv.noalias() -= (d / denom) * (state.u * state.u.adjoint());
  return d;
}

MatrixXcd rank1_update_inverse(const MatrixXcd& sigma_inv, const VectorXcd& a, double d) {
  const VectorXcd u = sigma_inv * a;
  const double denom = 1.0 + d * a.dot(u).real();
  if (denom <= kShermanMorrisonFloor)
    throw std::runtime_error("Sherman-Morrison denominator below the numerical floor");
  return sigma_inv - (d / denom) * (u * u.adjoint());
}

SolveResult run_coordinate_descent(const SampleCovariance& sigma_hat,
                                   const PilotMatrix& pilots, double sigma2,
                                   const SolverOptions& opts,
                                   const VectorXd* warm_start) {
  opts.validate(sigma2);
  validate_covariance(sigma_hat.sigma_hat);

  SolveResult result;
  result.diagnostics.consumed_hash = hash_matrix(sigma_hat.sigma_hat);

  EstimatorState state = make_state(pilots, sigma_hat, sigma2, opts, warm_start);
  const double tol = opts.effective_tol(sigma2);
  const int kc = static_cast<int>(pilots.kc());

  std::vector<int> order(kc);
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle(opts.shuffle_seed);

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    if (opts.order == CoordinateOrder::RandomPermutationPerSweep) {
      for (int j = kc - 1; j > 0; --j) {
        const auto pick = static_cast<int>(shuffle.below(static_cast<std::uint64_t>(j) + 1));
        std::swap(order[j], order[pick]);
      }
    }

    double max_step = 0.0;
    for (int k : order) {
      const double d = coord_update(state, k, pilots, sigma_hat, opts);
      max_step = std::max(max_step, std::abs(d));
    }
    state.sweep_count = sweep;

    if (sweep % opts.reinversion_period == 0) refresh_state(state, pilots, sigma_hat);

    result.diagnostics.sweep_costs.push_back(state.cost);
    result.diagnostics.last_max_step = max_step;
    if (max_step < tol) {
      result.diagnostics.converged = true;
      break;
    }
  }

  result.diagnostics.sweeps = state.sweep_count;
  result.diagnostics.final_cost = state.cost;
  result.diagnostics.numerical_faults = state.fault_count;
  result.gamma_hat = std::move(state.gamma);
  return result;
}

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t hash_matrix(const MatrixXcd& m) {
  return fnv1a64(m.data(), sizeof(cplx) * static_cast<std::size_t>(m.size()));
}

}  // namespace actdet
