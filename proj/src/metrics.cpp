#include "actdet/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace actdet {

DetectionOutcome threshold_detect(const VectorXd& gamma_hat, double sigma2, double nu) {
  if (nu < 0.0) throw std::invalid_argument("nu must be >= 0");
  DetectionOutcome outcome;
  outcome.nu = nu;
  const double cut = nu * sigma2;
  for (Eigen::Index k = 0; k < gamma_hat.size(); ++k)
    if (gamma_hat[k] > cut) outcome.estimated_active.push_back(static_cast<int>(k));
  return outcome;
}

Rates detection_rates(const ActivityPattern& truth, const DetectionOutcome& outcome,
                      int kc) {
  for (int k : outcome.estimated_active)
    if (k < 0 || k >= kc) throw std::invalid_argument("estimated index out of range");
  for (int k : truth.support)
    if (k < 0 || k >= kc) throw std::invalid_argument("truth index out of range");

  const int ac = static_cast<int>(truth.support.size());
  int hits = 0;
  {
    auto it = truth.support.begin();
    for (int k : outcome.estimated_active) {
      it = std::lower_bound(it, truth.support.end(), k);
      if (it != truth.support.end() && *it == k) ++hits;
    }
  }
  const int false_alarms = static_cast<int>(outcome.estimated_active.size()) - hits;

  Rates rates;
  rates.p_d = ac == 0 ? 1.0 : static_cast<double>(hits) / ac;
  rates.p_fa = kc == ac ? 0.0 : static_cast<double>(false_alarms) / (kc - ac);
  return rates;
}

std::vector<double> default_nu_grid(int points, double lo, double hi) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
  return grid;
}

RocCurve roc_sweep(const std::vector<std::pair<VectorXd, ActivityPattern>>& per_trial,
                   double sigma2, const std::vector<double>& nu_grid) {
  if (per_trial.empty()) throw std::invalid_argument("roc_sweep needs at least one trial");
  if (nu_grid.size() < 2) throw std::invalid_argument("nu grid needs at least 2 points");
  if (!std::is_sorted(nu_grid.begin(), nu_grid.end()))
    throw std::invalid_argument("nu grid must be sorted ascending");

  RocCurve curve;
  curve.trials = static_cast<int>(per_trial.size());
  curve.points.reserve(nu_grid.size());
  for (double nu : nu_grid) {
    double sum_pd = 0.0, sum_pfa = 0.0;
    for (const auto& [gamma_hat, truth] : per_trial) {
      const auto kc = static_cast<int>(gamma_hat.size());
      const Rates r = detection_rates(truth, threshold_detect(gamma_hat, sigma2, nu), kc);
      sum_pd += r.p_d;
      sum_pfa += r.p_fa;
    }
    curve.points.push_back({nu, sum_pd / curve.trials, sum_pfa / curve.trials});
  }
  return curve;
}

double p_d_at_p_fa(const RocCurve& curve, double target_p_fa) {
  if (curve.points.empty()) throw std::invalid_argument("empty ROC curve");
  // p_fa is non-increasing along the grid; walk from the high-p_fa end.
  const auto& pts = curve.points;
  if (target_p_fa >= pts.front().p_fa) return pts.front().p_d;
  if (target_p_fa <= pts.back().p_fa) return pts.back().p_d;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double hi = pts[i].p_fa, lo = pts[i + 1].p_fa;
    if (hi >= target_p_fa && target_p_fa >= lo) {
      if (hi == lo) return std::max(pts[i].p_d, pts[i + 1].p_d);
      const double w = (target_p_fa - lo) / (hi - lo);
      return w * pts[i].p_d + (1.0 - w) * pts[i + 1].p_d;
    }
  }
  return pts.back().p_d;
}

}  // namespace actdet
