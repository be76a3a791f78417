#include "actdet/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace actdet {

PilotMatrix generate_pilots(const ScenarioConfig& cfg, RngStream& rng) {
  cfg.validate();
  PilotMatrix pilots;
  pilots.entries.resize(cfg.dc, cfg.kc);
  switch (cfg.pilot_kind) {
    case PilotKind::UnitModulusRandomPhase:
      for (int k = 0; k < cfg.kc; ++k)
        for (int i = 0; i < cfg.dc; ++i) {
          const double phase = 2.0 * M_PI * rng.uniform01();
          pilots.entries(i, k) = cplx(std::cos(phase), std::sin(phase));
        }
      break;
    case PilotKind::ComplexGaussianNormalized:
      for (int k = 0; k < cfg.kc; ++k) {
        for (int i = 0; i < cfg.dc; ++i) pilots.entries(i, k) = rng.cnormal();
        const double norm = pilots.entries.col(k).norm();
        if (norm == 0.0) throw std::runtime_error("degenerate zero pilot draw");
        pilots.entries.col(k) *= std::sqrt(static_cast<double>(cfg.dc)) / norm;
      }
      break;
  }
  return pilots;
}

ActivityPattern generate_activity(const ScenarioConfig& cfg, RngStream& rng) {
  cfg.validate();
  ActivityPattern pattern;
  pattern.gamma = VectorXd::Zero(cfg.kc);

  // Partial Fisher-Yates: the first ac slots end up a uniform subset.
  std::vector<int> idx(cfg.kc);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < cfg.ac; ++j) {
    const auto swap_with = j + static_cast<int>(rng.below(cfg.kc - j));
    std::swap(idx[j], idx[swap_with]);
  }
  pattern.support.assign(idx.begin(), idx.begin() + cfg.ac);
  std::sort(pattern.support.begin(), pattern.support.end());

  const double gain = cfg.active_gain();
  for (int k : pattern.support) pattern.gamma[k] = gain;
  return pattern;
}

VectorXd ula_power_profile(int m, int m_eff, int i0) {
  if (m_eff < 1 || m_eff > m) throw std::invalid_argument("m_eff must lie in [1, m]");
  if (i0 < 0 || i0 >= m) throw std::invalid_argument("i0 must lie in [0, m)");
  VectorXd beta = VectorXd::Zero(m);
  const double level = static_cast<double>(m) / m_eff;
  for (int j = 0; j < m_eff; ++j) beta[(i0 + j) % m] = level;
  return beta;
}

ChannelMatrix generate_channel(const ScenarioConfig& cfg, RngStream& rng) {
  cfg.validate();
  ChannelMatrix channel;
  channel.entries.resize(cfg.kc, cfg.m);

  if (cfg.channel_kind == ChannelKind::SpatiallyWhite) {
    for (int k = 0; k < cfg.kc; ++k)
      for (int j = 0; j < cfg.m; ++j) channel.entries(k, j) = rng.cnormal();
    return channel;
  }

  // ULA: unitary DFT steering matrix, one wrapped angular block per user.
  const int m = cfg.m;
  const int m_eff = cfg.m_eff();
  MatrixXcd dft(m, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const double ang = -2.0 * M_PI * static_cast<double>(r) * c / m;
      dft(r, c) = scale * cplx(std::cos(ang), std::sin(ang));
    }

  const double level = std::sqrt(static_cast<double>(m) / m_eff);
  VectorXcd w(m);
  for (int k = 0; k < cfg.kc; ++k) {
    const int i0 = static_cast<int>(rng.below(m));
    w.setZero();
    for (int j = 0; j < m_eff; ++j) w[(i0 + j) % m] = level * rng.cnormal();
    channel.entries.row(k) = (dft * w).transpose();
  }
  return channel;
}

ObservationBlock synthesize_observation(const PilotMatrix& pilots,
                                        const ActivityPattern& activity,
                                        const ChannelMatrix& channel,
                                        const ScenarioConfig& cfg,
                                        RngStream& noise_rng) {
  const auto dc = pilots.dc();
  const auto kc = pilots.kc();
  if (activity.gamma.size() != kc)
    throw std::invalid_argument("activity length does not match pilot count");
  if (channel.entries.rows() != kc)
    throw std::invalid_argument("channel rows do not match pilot count");
  if (dc != cfg.dc || channel.entries.cols() != cfg.m)
    throw std::invalid_argument("dimensions do not match the scenario config");

  ObservationBlock obs;
  obs.y.noalias() =
      pilots.entries * (activity.gamma.cwiseSqrt().asDiagonal() * channel.entries);

  const double std_dev = std::sqrt(cfg.sigma2);
  for (Eigen::Index j = 0; j < obs.y.cols(); ++j)
    for (Eigen::Index i = 0; i < obs.y.rows(); ++i)
      obs.y(i, j) += std_dev * noise_rng.cnormal();
  return obs;
}

SampleCovariance true_covariance(const PilotMatrix& pilots,
                                 const ActivityPattern& activity,
                                 double sigma2) {
  if (activity.gamma.size() != pilots.kc())
    throw std::invalid_argument("activity length does not match pilot count");
  const auto dc = pilots.dc();
  const MatrixXcd scaled = pilots.entries * activity.gamma.cwiseSqrt().asDiagonal();
  MatrixXcd sigma = MatrixXcd::Zero(dc, dc);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  SampleCovariance cov;
  cov.sigma_hat = sigma.selfadjointView<Eigen::Lower>();
  cov.sigma_hat += sigma2 * MatrixXcd::Identity(dc, dc);
  return cov;
}

SampleCovariance sample_covariance(const ObservationBlock& obs) {
  const auto dc = obs.y.rows();
  const auto m = obs.y.cols();
  if (m < 1) throw std::invalid_argument("observation needs at least one column");
  MatrixXcd sigma = MatrixXcd::Zero(dc, dc);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(obs.y, 1.0 / static_cast<double>(m));
  SampleCovariance cov;
  cov.sigma_hat = sigma.selfadjointView<Eigen::Lower>();
  return cov;
}

double snr_of_user(double gamma_k, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  return gamma_k / sigma2;
}

}  // namespace actdet
