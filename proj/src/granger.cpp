#include "cts/granger.hpp"

#include <cfloat>
#include <cmath>

namespace cts {

OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
  if (design.rows() != target.size())
    throw validation_error("fit_ols: design rows != target length");
  if (design.rows() <= design.cols())
    throw validation_error("fit_ols: need more observations than regressors");
  if (!design.allFinite() || !target.allFinite())
    throw validation_error("fit_ols: non-finite input");
  OlsFit fit;
  fit.coeffs = design.completeOrthogonalDecomposition().solve(target);
  fit.rss = (target - design * fit.coeffs).squaredNorm();
  fit.n_obs = design.rows();
  fit.n_params = design.cols();
  return fit;
}

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double beta_inc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// ln(1 - I_x(a,b)). In the swapped branch the tail is the directly computed
// quantity, so it keeps full precision down to arbitrarily small tails
// instead of cancelling against 1.
double log_beta_tail(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return -HUGE_VAL;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    double inc = std::exp(ln_front) * betacf(a, b, x) / a;
    return std::log1p(-std::min(inc, 1.0));
  }
  return ln_front + std::log(betacf(b, a, 1.0 - x)) - std::log(b);
}

void check_f_args(double f, long d1, long d2, const char* who) {
  if (std::isnan(f)) throw validation_error(std::string(who) + ": non-finite f");
  if (f < 0) throw validation_error(std::string(who) + ": f must be >= 0");
  if (d1 < 1 || d2 < 1)
    throw validation_error(std::string(who) + ": degrees must be >= 1");
}

double f_tail_x(double f, long d1, long d2) {
  if (f > DBL_MAX / static_cast<double>(d1)) return 1.0;
  return d1 * f / (d1 * f + d2);
}

}  // namespace

double f_cdf(double f, long d1, long d2) {
  check_f_args(f, d1, d2, "f_cdf");
  if (std::isinf(f)) return 1.0;
  if (f == 0.0) return 0.0;
  const double x = f_tail_x(f, d1, d2);
  return std::clamp(beta_inc(d1 / 2.0, d2 / 2.0, x), 0.0, 1.0);
}

double f_log_sf(double f, long d1, long d2) {
  check_f_args(f, d1, d2, "f_log_sf");
  if (std::isinf(f)) return -HUGE_VAL;
  if (f == 0.0) return 0.0;
  return log_beta_tail(d1 / 2.0, d2 / 2.0, f_tail_x(f, d1, d2));
}

double f_sf(double f, long d1, long d2) {
  return std::exp(f_log_sf(f, d1, d2));
}

GrangerResult granger_test(const Eigen::VectorXd& effect,
                           const Eigen::VectorXd& cause, long lag,
                           long ar_order) {
  const long T = effect.size();
  const long p = ar_order;
  if (lag < 1) throw validation_error("granger_test: lag must be >= 1");
  if (p < 1) throw validation_error("granger_test: ar_order must be >= 1");
  if (cause.size() != T)
    throw validation_error("granger_test: column lengths differ");
  if (T <= p + lag + 2)
    throw validation_error("granger_test: series too short (need T > p + lag + 2)");
  const long m = std::max(p, lag);
  const long n = T - m;
  const long k_u = p + 2;
  Eigen::MatrixXd design(n, k_u);
  Eigen::VectorXd y(n);
  for (long r = 0; r < n; ++r) {
    const long t = m + r;
    y(r) = effect(t);
    design(r, 0) = 1.0;
    for (long k = 1; k <= p; ++k) design(r, k) = effect(t - k);
    design(r, k_u - 1) = cause(t - lag);
  }
  OlsFit restricted = fit_ols(design.leftCols(k_u - 1), y);
  OlsFit unrestricted = fit_ols(design, y);
  GrangerResult res;
  res.lag = lag;
  if (unrestricted.rss <= 0.0) {
    res.f_stat = DBL_MAX;
    res.p_value = 0.0;
    res.degenerate = true;
    return res;
  }
  const double num = std::max(0.0, restricted.rss - unrestricted.rss);
  res.f_stat = num / (unrestricted.rss / static_cast<double>(n - k_u));
  res.p_value = f_sf(res.f_stat, 1, n - k_u);
  return res;
}

LagScan scan_pair(const Eigen::VectorXd& effect, const Eigen::VectorXd& cause,
                  long L_max, long ar_order) {
  if (L_max < 1) throw validation_error("scan_pair: L_max must be >= 1");
  if (effect.size() <= ar_order + L_max + 2)
    throw validation_error("scan_pair: series too short (need T > p + L_max + 2)");
  const long T = effect.size();
  LagScan scan;
  scan.results.reserve(L_max);
  scan.best_lag = 1;
  // Ranking runs in the log domain: strong edges at T ~ 5000 push p-values
  // far below DBL_MIN, where the stored doubles flush to 0 and would turn
  // the smallest-lag tie rule into a systematic bias toward early lags.
  double best_lp = HUGE_VAL;
  for (long lag = 1; lag <= L_max; ++lag) {
    scan.results.push_back(granger_test(effect, cause, lag, ar_order));
    const GrangerResult& r = scan.results.back();
    const long d2 = (T - std::max(ar_order, lag)) - (ar_order + 2);
    const double lp =
        r.degenerate ? -HUGE_VAL : f_log_sf(r.f_stat, 1, d2);
    if (lp < best_lp) {
      best_lp = lp;
      scan.best_lag = lag;
    }
  }
  return scan;
}

std::vector<LagScan> scan_all_pairs(const TimeSeriesMatrix& data, long L_max,
                                    long ar_order) {
  std::vector<Eigen::VectorXd> cols(data.N);
  for (long v = 0; v < data.N; ++v) {
    cols[v].resize(data.T);
    for (long t = 0; t < data.T; ++t) cols[v](t) = data.at(t, v);
  }
  std::vector<LagScan> scans;
  for (long i = 0; i < data.N; ++i) {
    for (long j = 0; j < data.N; ++j) {
      if (i == j) continue;
      LagScan s = scan_pair(cols[i], cols[j], L_max, ar_order);
      s.cause = j;
      s.effect = i;
      for (auto& r : s.results) {
        r.cause = j;
        r.effect = i;
      }
      scans.push_back(std::move(s));
    }
  }
  return scans;
}

double sidak_threshold(double alpha, long L_max) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("sidak_threshold: alpha must be in (0,1)");
  if (L_max < 1) throw validation_error("sidak_threshold: L_max must be >= 1");
  return 1.0 - std::pow(1.0 - alpha, 1.0 / static_cast<double>(L_max));
}

}  // namespace cts
