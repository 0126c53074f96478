#include "cts/sampler.hpp"

#include <cmath>
#include <limits>

namespace cts {

std::vector<double> shift_cause(const std::vector<double>& cause, long delta) {
  const long T = static_cast<long>(cause.size());
  if (delta < 0) throw validation_error("shift_cause: delta must be >= 0");
  if (delta >= T) throw validation_error("shift_cause: delta >= series length");
  std::vector<double> out(cause.size());
  for (long t = 0; t < delta; ++t)
    out[t] = std::numeric_limits<double>::quiet_NaN();
  for (long t = delta; t < T; ++t) out[t] = cause[t - delta];
  return out;
}

namespace {

SampleSet build_impl(const CauseEffectPair& pair, const WindowSpec& window,
                     const std::string& dataset_id, bool synchronized_pair) {
  const long T = pair.effect_series.size();
  const long C = window.context_len;
  const long H = window.horizon;
  const long delta = synchronized_pair ? pair.lag : 0;
  if (C < 1 || H < 1 || window.stride < 1)
    throw validation_error("build_samples: window must have C, H, stride >= 1");
  if (pair.cause_series.size() != T)
    throw validation_error("build_samples: pair series lengths differ");
  const long count = window_count(T, C, H, delta, window.stride);
  if (count == 0)
    throw validation_error(
        "build_samples: series too short, need T >= " +
        std::to_string(C + H + delta) + " but T = " + std::to_string(T));
  SampleSet set;
  set.window = window;
  set.dataset_id = dataset_id;
  set.effect = pair.effect;
  set.cause = pair.cause;
  set.lag = pair.lag;
  set.synchronized_pair = synchronized_pair;
  set.samples.reserve(count);
  for (long t = C + delta; t <= T - H; t += window.stride) {
    WindowSample s;
    s.anchor = t;
    s.effect_ctx.resize(C);
    s.sync_cause_ctx.resize(C);
    s.raw_cause_ctx.resize(C);
    s.target.resize(H);
    for (long k = 0; k < C; ++k) {
      s.effect_ctx[k] = pair.effect_series(t - C + k);
      s.raw_cause_ctx[k] = pair.cause_series(t - C + k);
      s.sync_cause_ctx[k] = pair.cause_series(t - C - delta + k);
    }
    for (long h = 0; h < H; ++h) s.target[h] = pair.effect_series(t + h);
    set.samples.push_back(std::move(s));
  }
  return set;
}

}  // namespace

SampleSet build_samples(const CauseEffectPair& pair, const WindowSpec& window,
                        const std::string& dataset_id) {
  if (pair.lag < 0) throw validation_error("build_samples: negative lag");
  return build_impl(pair, window, dataset_id, true);
}

SampleSet build_samples_nonsync(const CauseEffectPair& pair,
                                const WindowSpec& window,
                                const std::string& dataset_id) {
  return build_impl(pair, window, dataset_id, false);
}

SplitSet split(const SampleSet& set, double r_train, double r_test,
               double r_val, long purge_gap) {
  if (std::abs(r_train + r_test + r_val - 1.0) > 1e-9)
    throw validation_error("split: ratios must sum to 1");
  const long n = static_cast<long>(set.samples.size());
  if (purge_gap < 0)
    purge_gap = set.window.context_len + set.window.horizon - 1;
  // purge_gap counts anchors; with stride > 1 that spans fewer samples.
  const long gap_samples =
      (purge_gap + set.window.stride - 1) / set.window.stride;
  const long usable = n - 2 * gap_samples;
  if (usable < 3)
    throw validation_error("split: too few samples (" + std::to_string(n) +
                           ") for purge gap " + std::to_string(purge_gap));
  const long n_train = std::lround(r_train * usable);
  const long n_test = std::lround(r_test * usable);
  const long n_val = usable - n_train - n_test;
  if (n_train < 1 || n_test < 1 || n_val < 1)
    throw validation_error("split: a partition would be empty");
  SplitSet out;
  out.purge_gap = purge_gap;
  auto slice = [&](long lo, long hi) {
    SampleSet part = set;
    part.samples.assign(set.samples.begin() + lo, set.samples.begin() + hi);
    return part;
  };
  out.train = slice(0, n_train);
  out.test = slice(n_train + gap_samples, n_train + gap_samples + n_test);
  out.validation = slice(n_train + n_test + 2 * gap_samples, n);
  return out;
}

std::string samples_to_text(const SampleSet& set) {
  std::string out;
  auto emit = [&](const std::vector<double>& v) {
    for (double x : v) {
      out += ' ';
      out += format_double(x);
    }
  };
  for (const auto& s : set.samples) {
    out += std::to_string(s.anchor);
    emit(s.effect_ctx);
    emit(s.sync_cause_ctx);
    emit(s.raw_cause_ctx);
    emit(s.target);
    out += '\n';
  }
  return out;
}

}  // namespace cts
