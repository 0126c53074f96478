#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cts/core.hpp"

namespace cts {

struct OlsFit {
  Eigen::VectorXd coeffs;
  double rss = 0.0;
  long n_obs = 0;
  long n_params = 0;
};

struct GrangerResult {
  long cause = -1;
  long effect = -1;
  long lag = 0;
  double f_stat = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // RSS_u == 0; f_stat then holds DBL_MAX
};

struct LagScan {
  long cause = -1;
  long effect = -1;
  std::vector<GrangerResult> results;  // lags 1..L_max in order
  long best_lag = 0;                   // argmin p_value, ties -> smallest lag

  const GrangerResult& best() const { return results[best_lag - 1]; }
};

// Minimum-norm least squares via a rank-revealing orthogonal factorization.
OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);

// P(F_{d1,d2} <= f) through the regularized incomplete beta function.
double f_cdf(double f, long d1, long d2);

// Upper tail P(F_{d1,d2} > f) and its logarithm, computed directly from the
// continued fraction rather than as 1 - f_cdf, so tails far below DBL_MIN
// keep their ordering. p-values come from f_sf; the scan ranks lags by
// f_log_sf.
double f_sf(double f, long d1, long d2);
double f_log_sf(double f, long d1, long d2);

// Restricted model: intercept + p own lags of effect. Unrestricted adds the
// single regressor cause[t - lag]. Both are fitted on the identical sample
// t in [max(p, lag) + 1, T].
GrangerResult granger_test(const Eigen::VectorXd& effect,
                           const Eigen::VectorXd& cause, long lag,
                           long ar_order);

LagScan scan_pair(const Eigen::VectorXd& effect, const Eigen::VectorXd& cause,
                  long L_max, long ar_order);

// All ordered pairs (cause j, effect i), j != i, with indices filled in.
std::vector<LagScan> scan_all_pairs(const TimeSeriesMatrix& data, long L_max,
                                    long ar_order);

// Per-scan threshold giving family-wise size alpha over an L_max-lag scan.
double sidak_threshold(double alpha, long L_max);

}  // namespace cts
