#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cts/core.hpp"
#include "cts/granger.hpp"

namespace cts {

struct GraphEdge {
  long cause = 0;
  long effect = 0;
  long lag = 1;
  double p_value = 0.0;
  double f_stat = 0.0;
};

struct CausalGraph {
  std::vector<std::string> nodes;
  std::vector<GraphEdge> edges;  // sorted by (effect, cause)

  void validate() const;
};

struct CauseEffectPair {
  long effect = 0;
  long cause = 0;
  long lag = 1;
  Eigen::VectorXd effect_series;
  Eigen::VectorXd cause_series;
};

// Keeps each scan's best lag iff its p-value passes alpha.
CausalGraph build_graph(const std::vector<LagScan>& scans, double alpha,
                        std::vector<std::string> nodes);

std::vector<CauseEffectPair> enumerate_pairs(const CausalGraph& graph,
                                             const TimeSeriesMatrix& data);

// Four triples per edge under the urn:cts scheme, lines sorted
// lexicographically, trailing newline. Node names and f_stat are not part
// of the N-Triples vocabulary; import reconstructs nodes as var{k}.
std::string export_ntriples(const CausalGraph& graph);
CausalGraph import_ntriples(const std::string& text);

std::string graph_to_json(const CausalGraph& graph);
CausalGraph graph_from_json(const std::string& text);

}  // namespace cts
