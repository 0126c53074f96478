#pragma once

#include <string>
#include <vector>

#include "cts/core.hpp"
#include "cts/graph.hpp"

namespace cts {

// One anchor t: contexts cover [t-C, t), the synchronized cause channel
// covers [t-C-delta, t-delta), the target covers [t, t+H).
struct WindowSample {
  std::vector<double> effect_ctx;
  std::vector<double> sync_cause_ctx;
  std::vector<double> raw_cause_ctx;
  std::vector<double> target;
  long anchor = 0;
};

struct SampleSet {
  std::vector<WindowSample> samples;  // ordered by anchor
  WindowSpec window;
  std::string dataset_id;
  long effect = -1;
  long cause = -1;
  long lag = 0;
  bool synchronized_pair = false;
};

struct SplitSet {
  SampleSet train;
  SampleSet test;
  SampleSet validation;
  long purge_gap = 0;
};

// out[t] = cause[t - delta] for t >= delta; earlier entries are NaN markers
// (consumers exclude them through the anchor rule, never impute).
std::vector<double> shift_cause(const std::vector<double>& cause, long delta);

SampleSet build_samples(const CauseEffectPair& pair, const WindowSpec& window,
                        const std::string& dataset_id = "");

// Same shapes with the synchronized channel replaced by a second raw-cause
// copy; anchors start at C since no shifted history is consumed.
SampleSet build_samples_nonsync(const CauseEffectPair& pair,
                                const WindowSpec& window,
                                const std::string& dataset_id = "");

// Chronological contiguous train/test/validation blocks with purge_gap
// anchors dropped at each boundary. purge_gap < 0 selects the default
// C + H - 1.
SplitSet split(const SampleSet& set, double r_train = 0.7,
               double r_test = 0.2, double r_val = 0.1, long purge_gap = -1);

// Line-delimited export: anchor, then the three channels and target.
std::string samples_to_text(const SampleSet& set);

}  // namespace cts
