#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace actdet {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

enum class PilotKind { UnitModulusRandomPhase, ComplexGaussianNormalized };
enum class ChannelKind { SpatiallyWhite, UlaBlock };

std::string to_string(PilotKind k);
std::string to_string(ChannelKind k);
PilotKind pilot_kind_from_string(const std::string& s);
ChannelKind channel_kind_from_string(const std::string& s);

// Everything needed to draw one synthetic activity-detection scenario.
struct ScenarioConfig {
  int dc = 0;  // signal dimensions per coherence block (pilot length)
  int kc = 0;  // potential users sharing the block
  int ac = 0;  // active users per slot
  int m = 0;   // base-station antennas
  double sigma2 = 1.0;
  double snr_db_active = 10.0;  // per-active-user SNR, sets the common gain
  PilotKind pilot_kind = PilotKind::UnitModulusRandomPhase;
  ChannelKind channel_kind = ChannelKind::SpatiallyWhite;
  double m_eff_fraction = 1.0;  // active angular fraction, ula_block only
  std::uint64_t rng_seed = 0;

  // Channel strength of an active user: sigma2 * 10^(snr_db/10).
  double active_gain() const {
    return sigma2 * std::pow(10.0, snr_db_active / 10.0);
  }

  int m_eff() const;

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

// dc x kc pilot codebook; column k is the signature of user k, every column
// normalized to squared norm dc.
struct PilotMatrix {
  MatrixXcd entries;

  Eigen::Index dc() const { return entries.rows(); }
  Eigen::Index kc() const { return entries.cols(); }
};

// Nonnegative per-user channel strengths gamma_k = b_k * g_k together with
// the active support.
struct ActivityPattern {
  VectorXd gamma;
  std::vector<int> support;  // sorted, gamma[k] > 0 iff k in support
};

// kc x m channel realization; row k is the antenna-domain channel of user k.
struct ChannelMatrix {
  MatrixXcd entries;
};

// dc x m received block Y.
struct ObservationBlock {
  MatrixXcd y;
};

// dc x dc Hermitian PSD covariance (sample or exact); the sufficient
// statistic every estimator consumes.
struct SampleCovariance {
  MatrixXcd sigma_hat;
};

bool is_hermitian(const MatrixXcd& m, double tol = 1e-12);

// Hermitian to 1e-12 (relative) and min eigenvalue >= -1e-10 * trace.
// Throws std::invalid_argument otherwise.
void validate_covariance(const MatrixXcd& sigma);

// Frobenius inner-product trace tr(P Q) for Hermitian P, Q; O(dc^2).
double trace_product_hermitian(const MatrixXcd& p, const MatrixXcd& q);

}  // namespace actdet
