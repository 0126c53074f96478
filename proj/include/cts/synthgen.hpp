#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cts/core.hpp"

namespace cts {

struct CausalEdge {
  long cause = 0;
  long effect = 0;
  long lag = 1;
  double coeff = 0.0;
};

struct CausalSpec {
  long n_vars = 0;
  std::vector<CausalEdge> edges;
  std::vector<double> noise_std;

  long max_lag() const;
  void validate() const;
};

// One AR(1) self-edge per variable plus cross_edge_count distinct cross
// edges; lags uniform in [1, max_lag], coefficient magnitudes in
// [coeff_lo, coeff_hi] with random sign on cross edges.
CausalSpec sample_spec(long n_vars, long max_lag, long cross_edge_count,
                       double coeff_lo, double coeff_hi, uint64_t seed);

// Rescales coefficients so every effect's incoming |coeff| sum is <= 0.9,
// a sufficient boundedness condition under bounded noise.
CausalSpec stabilize(const CausalSpec& spec);

// Linear recurrence with Gaussian innovations; the first max_lag steps are
// pure noise, then max_lag + 500 burn-in steps are generated and discarded
// before the T returned steps.
TimeSeriesMatrix generate(const CausalSpec& spec, long T, uint64_t seed);

// Acyclic two-tier family used by the experiment runners: persistent AR(1)
// source variables driving weakly autocorrelated sinks through one strong
// positive lagged edge each. Acyclic structure keeps the recurrence stable
// for any coupling strength, so this family is generated directly.
CausalSpec source_sink_spec(long n_vars, long max_lag, uint64_t seed,
                            long lag_lo = 30);

std::string spec_to_json(const CausalSpec& spec);
CausalSpec spec_from_json(const std::string& text);

}  // namespace cts
