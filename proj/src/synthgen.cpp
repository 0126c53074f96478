#include "cts/synthgen.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "nlohmann/json.hpp"

namespace cts {

long CausalSpec::max_lag() const {
  long m = 0;
  for (const auto& e : edges) m = std::max(m, e.lag);
  return m;
}

void CausalSpec::validate() const {
  if (n_vars < 1) throw validation_error("spec needs n_vars >= 1");
  if (static_cast<long>(noise_std.size()) != n_vars)
    throw validation_error("noise_std length must equal n_vars");
  for (double s : noise_std)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw validation_error("noise_std entries must be finite and >= 0");
  for (const auto& e : edges) {
    if (e.cause < 0 || e.cause >= n_vars || e.effect < 0 || e.effect >= n_vars)
      throw validation_error("edge variable index out of range");
    if (e.lag < 1) throw validation_error("edge lag must be >= 1");
    if (!std::isfinite(e.coeff))
      throw validation_error("edge coefficient must be finite");
  }
}

CausalSpec sample_spec(long n_vars, long max_lag, long cross_edge_count,
                       double coeff_lo, double coeff_hi, uint64_t seed) {
  if (n_vars < 2) throw validation_error("sample_spec needs n_vars >= 2");
  if (max_lag < 1) throw validation_error("sample_spec needs max_lag >= 1");
  if (!(0.0 < coeff_lo && coeff_lo <= coeff_hi))
    throw validation_error("coefficient range must satisfy 0 < lo <= hi");
  const long max_cross = n_vars * (n_vars - 1);
  if (cross_edge_count < 0 || cross_edge_count > max_cross)
    throw validation_error("cross_edge_count must be in [0, " +
                           std::to_string(max_cross) + "]");
  Rng rng(seed);
  CausalSpec spec;
  spec.n_vars = n_vars;
  spec.noise_std.assign(static_cast<size_t>(n_vars), 1.0);
  for (long v = 0; v < n_vars; ++v) {
    double c = rng.uniform(coeff_lo, coeff_hi);
    if (rng.uniform(0.0, 1.0) < 0.5) c = -c;
    spec.edges.push_back({v, v, 1, c});
  }
  std::set<std::pair<long, long>> used;
  while (static_cast<long>(used.size()) < cross_edge_count) {
    long j = rng.uniform_int(0, n_vars - 1);
    long i = rng.uniform_int(0, n_vars - 1);
    if (j == i || !used.insert({j, i}).second) continue;
    long lag = rng.uniform_int(1, max_lag);
    double c = rng.uniform(coeff_lo, coeff_hi);
    if (rng.uniform(0.0, 1.0) < 0.5) c = -c;
    spec.edges.push_back({j, i, lag, c});
  }
  return spec;
}

CausalSpec stabilize(const CausalSpec& spec) {
  spec.validate();
  CausalSpec out = spec;
  for (long v = 0; v < spec.n_vars; ++v) {
    double sum = 0.0;
    for (const auto& e : spec.edges)
      if (e.effect == v) sum += std::abs(e.coeff);
    if (sum <= 0.9) continue;
    const double gamma = 0.9 / sum;
    for (auto& e : out.edges)
      if (e.effect == v) e.coeff *= gamma;
  }
  return out;
}

TimeSeriesMatrix generate(const CausalSpec& spec, long T, uint64_t seed) {
  spec.validate();
  if (T < 1) throw validation_error("generate needs T >= 1");
  const long m = spec.max_lag();
  const long burn = m + 500;
  const long total = m + burn + T;
  const long N = spec.n_vars;
  Rng rng(seed);
  std::vector<double> buf(static_cast<size_t>(total) * N, 0.0);
  for (long t = 0; t < total; ++t) {
    for (long v = 0; v < N; ++v) {
      double x = spec.noise_std[v] > 0.0 ? rng.normal(0.0, spec.noise_std[v])
                                         : 0.0;
      if (t >= m) {
        for (const auto& e : spec.edges)
          if (e.effect == v) x += e.coeff * buf[(t - e.lag) * N + e.cause];
      }
      if (std::abs(x) > 1e6)
        throw std::runtime_error(
            "generated series diverged (|value| > 1e6) at step " +
            std::to_string(t) + " for spec with " + std::to_string(N) +
            " vars, " + std::to_string(spec.edges.size()) + " edges");
      buf[t * N + v] = x;
    }
  }
  TimeSeriesMatrix out;
  out.T = T;
  out.N = N;
  out.names.reserve(N);
  for (long v = 0; v < N; ++v) out.names.push_back("x" + std::to_string(v));
  out.values.assign(buf.begin() + (m + burn) * N, buf.end());
  out.validate();
  return out;
}

CausalSpec source_sink_spec(long n_vars, long max_lag, uint64_t seed,
                            long lag_lo) {
  if (n_vars < 3) throw validation_error("source_sink_spec needs n_vars >= 3");
  if (lag_lo < 1 || lag_lo > max_lag)
    throw validation_error("source_sink_spec needs 1 <= lag_lo <= max_lag");
  Rng rng(seed);
  const long n_sources = n_vars >= 4 ? 2 : 1;
  const double phi = 0.95;
  const double sd_source = 1.0 / std::sqrt(1.0 - phi * phi);
  CausalSpec spec;
  spec.n_vars = n_vars;
  spec.noise_std.assign(static_cast<size_t>(n_vars), 1.0);
  for (long v = 0; v < n_sources; ++v) spec.edges.push_back({v, v, 1, phi});
  for (long v = n_sources; v < n_vars; ++v) {
    spec.edges.push_back({v, v, 1, rng.uniform(0.02, 0.1)});
    const double b = rng.uniform(0.75, 0.95);
    const long src = rng.uniform_int(0, n_sources - 1);
    const long lag = rng.uniform_int(lag_lo, max_lag);
    spec.edges.push_back({src, v, lag, b});
    spec.noise_std[v] = rng.uniform(0.7, 1.2) * b * sd_source;
  }
  return spec;
}

std::string spec_to_json(const CausalSpec& spec) {
  nlohmann::json j;
  j["n_vars"] = spec.n_vars;
  j["noise_std"] = spec.noise_std;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : spec.edges)
    j["edges"].push_back({{"cause", e.cause},
                          {"effect", e.effect},
                          {"lag", e.lag},
                          {"coeff", e.coeff}});
  return j.dump(2) + "\n";
}

CausalSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("spec JSON parse error: ") + e.what());
  }
  CausalSpec spec;
  try {
    spec.n_vars = j.at("n_vars").get<long>();
    spec.noise_std = j.at("noise_std").get<std::vector<double>>();
    for (const auto& je : j.at("edges")) {
      CausalEdge e;
      e.cause = je.at("cause").get<long>();
      e.effect = je.at("effect").get<long>();
      e.lag = je.at("lag").get<long>();
      e.coeff = je.at("coeff").get<double>();
      spec.edges.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("spec JSON schema error: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace cts
