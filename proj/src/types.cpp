#include "actdet/types.hpp"

#include <stdexcept>

namespace actdet {

std::string to_string(PilotKind k) {
  switch (k) {
    case PilotKind::UnitModulusRandomPhase: return "unit_modulus_random_phase";
    case PilotKind::ComplexGaussianNormalized: return "complex_gaussian_normalized";
  }
  return "?";
}

std::string to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::SpatiallyWhite: return "spatially_white";
    case ChannelKind::UlaBlock: return "ula_block";
  }
  return "?";
}

PilotKind pilot_kind_from_string(const std::string& s) {
  if (s == "unit_modulus_random_phase") return PilotKind::UnitModulusRandomPhase;
  if (s == "complex_gaussian_normalized") return PilotKind::ComplexGaussianNormalized;
  throw std::invalid_argument("unknown pilot_kind: " + s);
}

ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "spatially_white") return ChannelKind::SpatiallyWhite;
  if (s == "ula_block") return ChannelKind::UlaBlock;
  throw std::invalid_argument("unknown channel_kind: " + s);
}

int ScenarioConfig::m_eff() const {
  return static_cast<int>(std::llround(m_eff_fraction * m));
}

void ScenarioConfig::validate() const {
  if (dc < 1) throw std::invalid_argument("dc must be >= 1");
  if (kc < 1) throw std::invalid_argument("kc must be >= 1");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (ac < 0 || ac > kc) throw std::invalid_argument("ac must satisfy 0 <= ac <= kc");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  if (!std::isfinite(snr_db_active)) throw std::invalid_argument("snr_db_active must be finite");
  if (channel_kind == ChannelKind::UlaBlock) {
    if (!(m_eff_fraction > 0.0 && m_eff_fraction <= 1.0))
      throw std::invalid_argument("m_eff_fraction must lie in (0, 1]");
    const int eff = m_eff();
    if (eff < 1 || eff > m)
      throw std::invalid_argument("m_eff_fraction * m must round to an integer in [1, m]");
  }
}

bool is_hermitian(const MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

void validate_covariance(const MatrixXcd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw std::invalid_argument("covariance must be square");
  if (!is_hermitian(sigma))
    throw std::invalid_argument("covariance is not Hermitian to 1e-12");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sigma, Eigen::EigenvaluesOnly);
  const double trace = sigma.trace().real();
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, trace))
    throw std::invalid_argument("covariance is not PSD");
}

double trace_product_hermitian(const MatrixXcd& p, const MatrixXcd& q) {
  // tr(PQ) = sum_ij P_ij conj(Q_ij) when Q is Hermitian.
  return p.cwiseProduct(q.conjugate()).sum().real();
}

}  // namespace actdet
