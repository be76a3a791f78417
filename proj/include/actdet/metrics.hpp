#pragma once

#include "actdet/types.hpp"

#include <utility>
#include <vector>

namespace actdet {

// Estimated active set at a given threshold multiplier nu.
struct DetectionOutcome {
  std::vector<int> estimated_active;  // sorted; {k : gamma_hat[k] > nu sigma2}
  double nu = 0.0;
};

// Strict inequality: equality with the threshold counts as inactive.
DetectionOutcome threshold_detect(const VectorXd& gamma_hat, double sigma2, double nu);

struct Rates {
  double p_d = 0.0;
  double p_fa = 0.0;
};

// p_d = |truth ∩ estimate| / ac (1 when ac = 0),
// p_fa = |estimate \ truth| / (kc - ac) (0 when ac = kc).
Rates detection_rates(const ActivityPattern& truth, const DetectionOutcome& outcome,
                      int kc);

struct RocPoint {
  double nu = 0.0;
  double p_d = 0.0;
  double p_fa = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ordered by ascending nu
  int trials = 0;
};

// 100 logarithmically spaced thresholds over [1e-4, 1e2] by default.
std::vector<double> default_nu_grid(int points = 100, double lo = 1e-4, double hi = 1e2);

// Rates averaged over trials, one curve point per grid value. Both rates are
// non-increasing along the grid.
RocCurve roc_sweep(const std::vector<std::pair<VectorXd, ActivityPattern>>& per_trial,
                   double sigma2, const std::vector<double>& nu_grid);

// Detection probability at the given false-alarm rate, linearly interpolated
// along the curve; clamped at the curve ends.
double p_d_at_p_fa(const RocCurve& curve, double target_p_fa);

}  // namespace actdet
