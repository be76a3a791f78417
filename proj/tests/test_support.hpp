#pragma once

#include "actdet/estimators.hpp"
#include "actdet/model.hpp"
#include "actdet/rng.hpp"

#include <functional>

namespace actdet::testing {

// Golden-section search for the minimizer of a unimodal function on [lo, hi].
// Extended precision keeps the ordinal-comparison floor below the 1e-6
// tolerance the update checks use, even on nearly flat coordinates.
inline double golden_section_min(const std::function<long double(long double)>& f,
                                 long double lo, long double hi, int iters = 220) {
  const long double inv_phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = lo, b = hi;
  long double c = b - inv_phi * (b - a);
  long double d = a + inv_phi * (b - a);
  long double fc = f(c), fd = f(d);
  for (int i = 0;
       i < iters && b - a > 1e-15L * (1.0L + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

struct Scenario {
  ScenarioConfig cfg;
  PilotMatrix pilots;
  ActivityPattern activity;
  ChannelMatrix channel;
  ObservationBlock obs;
  SampleCovariance sigma_hat;
};

inline Scenario make_scenario(int dc, int kc, int ac, int m, std::uint64_t seed,
                              double snr_db = 10.0, double sigma2 = 1.0,
                              ChannelKind channel = ChannelKind::SpatiallyWhite,
                              double m_eff_fraction = 0.5) {
  Scenario s;
  s.cfg.dc = dc;
  s.cfg.kc = kc;
  s.cfg.ac = ac;
  s.cfg.m = m;
  s.cfg.sigma2 = sigma2;
  s.cfg.snr_db_active = snr_db;
  s.cfg.channel_kind = channel;
  s.cfg.m_eff_fraction = channel == ChannelKind::UlaBlock ? m_eff_fraction : 1.0;
  s.cfg.rng_seed = seed;

  auto pilot_rng = RngStream::derive(seed, StreamKind::Pilots);
  auto activity_rng = RngStream::derive(seed, StreamKind::Activity);
  auto channel_rng = RngStream::derive(seed, StreamKind::Channel);
  auto noise_rng = RngStream::derive(seed, StreamKind::Noise);

  s.pilots = generate_pilots(s.cfg, pilot_rng);
  s.activity = generate_activity(s.cfg, activity_rng);
  s.channel = generate_channel(s.cfg, channel_rng);
  s.obs = synthesize_observation(s.pilots, s.activity, s.channel, s.cfg, noise_rng);
  s.sigma_hat = sample_covariance(s.obs);
  return s;
}

// Sparse-ish nonnegative vector for solver-state fixtures.
inline VectorXd random_nonneg_gamma(Eigen::Index kc, RngStream& rng,
                                    double density = 0.3, double scale = 3.0) {
  VectorXd gamma = VectorXd::Zero(kc);
  for (Eigen::Index k = 0; k < kc; ++k)
    if (rng.uniform01() < density) gamma[k] = scale * std::abs(rng.normal());
  return gamma;
}

// Scalars of the per-coordinate 1-D objective, computed by fresh dense
// factorizations (never by the solver's incrementally maintained inverse).
struct CoordinateScalars {
  double s1 = 0.0;     // a^H Sigma^-1 a
  double s2 = 0.0;     // a^H Sigma^-1 S Sigma^-1 a
  double fit_gap = 0.0;  // a^H (S - Sigma) a
  double norm4 = 0.0;  // ||a||^4
  double d0 = 0.0;     // left domain edge of the log term
};

inline CoordinateScalars dense_coordinate_scalars(const VectorXd& gamma, int k,
                                                  const PilotMatrix& pilots,
                                                  double base,
                                                  const SampleCovariance& sigma_hat) {
  MatrixXcd sigma = base * MatrixXcd::Identity(pilots.dc(), pilots.dc());
  for (Eigen::Index j = 0; j < gamma.size(); ++j)
    if (gamma[j] != 0.0)
      sigma.noalias() +=
          gamma[j] * pilots.entries.col(j) * pilots.entries.col(j).adjoint();
  const VectorXcd a = pilots.entries.col(k);
  const VectorXcd u = sigma.llt().solve(a);
  CoordinateScalars out;
  out.s1 = a.dot(u).real();
  out.s2 = u.dot(sigma_hat.sigma_hat * u).real();
  out.fit_gap = a.dot(sigma_hat.sigma_hat * a).real() - a.dot(sigma * a).real();
  const double n2 = a.squaredNorm();
  out.norm4 = n2 * n2;
  out.d0 = -1.0 / out.s1;
  return out;
}

// Per-coordinate objective as a function of the step d, with the constant
// term dropped (it does not move the minimizer but would swamp the numeric
// search in double precision).
inline std::function<long double(long double)> coordinate_objective(
    EstimatorKind kind, const CoordinateScalars& c) {
  const long double s1 = c.s1, s2 = c.s2, gap = c.fit_gap, n4 = c.norm4;
  switch (kind) {
    case EstimatorKind::Ml:
      return [s1, s2](long double d) {
        return std::log1p(d * s1) - d * s2 / (1.0L + d * s1);
      };
    case EstimatorKind::Mmv:
      return [s1, s2](long double d) { return d - d * s2 / (1.0L + d * s1); };
    case EstimatorKind::Nnls:
      return [gap, n4](long double d) { return -2.0L * d * gap + d * d * n4; };
  }
  throw std::logic_error("unreachable estimator kind");
}

// Feasible per-coordinate step minimizer found numerically: the oracle the
// closed-form updates are checked against.
inline double numeric_coordinate_minimizer(EstimatorKind kind, const VectorXd& gamma,
                                           int k, const PilotMatrix& pilots,
                                           double sigma2, double rho,
                                           const SampleCovariance& sigma_hat) {
  const double base = kind == EstimatorKind::Mmv ? rho : sigma2;
  const CoordinateScalars scalars =
      dense_coordinate_scalars(gamma, k, pilots, base, sigma_hat);
  const double gk = gamma[k];
  double lo = -gk;
  if (kind != EstimatorKind::Nnls)
    lo = std::max(lo, scalars.d0 + 1e-9 * (1.0 + std::abs(scalars.d0)));
  const double hi = lo + 1e4;
  return golden_section_min(coordinate_objective(kind, scalars), lo, hi);
}

}  // namespace actdet::testing
