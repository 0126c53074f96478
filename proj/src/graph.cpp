#include "cts/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "nlohmann/json.hpp"

namespace cts {

void CausalGraph::validate() const {
  const long n = static_cast<long>(nodes.size());
  std::set<std::pair<long, long>> seen;
  for (const auto& e : edges) {
    if (e.cause < 0 || e.cause >= n || e.effect < 0 || e.effect >= n)
      throw validation_error("graph edge index out of range");
    if (e.cause == e.effect)
      throw validation_error("graph must not contain self-edges");
    if (e.lag < 1) throw validation_error("graph edge lag must be >= 1");
    if (!(e.p_value >= 0.0 && e.p_value <= 1.0))
      throw validation_error("graph edge p_value must be in [0,1]");
    if (!seen.insert({e.cause, e.effect}).second)
      throw validation_error("duplicate edge for ordered pair (" +
                             std::to_string(e.cause) + "," +
                             std::to_string(e.effect) + ")");
  }
}

CausalGraph build_graph(const std::vector<LagScan>& scans, double alpha,
                        std::vector<std::string> nodes) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("build_graph: alpha must be in (0,1)");
  std::set<std::pair<long, long>> seen;
  CausalGraph g;
  g.nodes = std::move(nodes);
  for (const auto& s : scans) {
    if (!seen.insert({s.cause, s.effect}).second)
      throw validation_error("build_graph: duplicate scan for pair (" +
                             std::to_string(s.cause) + "," +
                             std::to_string(s.effect) + ")");
    const GrangerResult& b = s.best();
    if (b.p_value <= alpha)
      g.edges.push_back({s.cause, s.effect, s.best_lag, b.p_value, b.f_stat});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.effect, a.cause) < std::tie(b.effect, b.cause);
  });
  g.validate();
  return g;
}

std::vector<CauseEffectPair> enumerate_pairs(const CausalGraph& graph,
                                             const TimeSeriesMatrix& data) {
  graph.validate();
  std::vector<CauseEffectPair> pairs;
  pairs.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    const long ci = data.column_index(graph.nodes[e.cause]);
    const long ei = data.column_index(graph.nodes[e.effect]);
    CauseEffectPair p;
    p.effect = e.effect;
    p.cause = e.cause;
    p.lag = e.lag;
    p.effect_series.resize(data.T);
    p.cause_series.resize(data.T);
    for (long t = 0; t < data.T; ++t) {
      p.effect_series(t) = data.at(t, ei);
      p.cause_series(t) = data.at(t, ci);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string export_ntriples(const CausalGraph& graph) {
  graph.validate();
  std::vector<std::string> lines;
  for (const auto& e : graph.edges) {
    const std::string subj = "<urn:cts:edge/" + std::to_string(e.cause) + "-" +
                             std::to_string(e.effect) + ">";
    lines.push_back(subj + " <urn:cts:cause> <urn:cts:var/" +
                    std::to_string(e.cause) + "> .");
    lines.push_back(subj + " <urn:cts:effect> <urn:cts:var/" +
                    std::to_string(e.effect) + "> .");
    lines.push_back(subj + " <urn:cts:lag> \"" + std::to_string(e.lag) +
                    "\"^^<http://www.w3.org/2001/XMLSchema#integer> .");
    lines.push_back(subj + " <urn:cts:pValue> \"" + format_double(e.p_value) +
                    "\"^^<http://www.w3.org/2001/XMLSchema#double> .");
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

namespace {

// Pulls the token out of "<urn:cts:edge/J-I>" or a typed literal.
std::pair<long, long> parse_edge_subject(const std::string& subj) {
  const std::string prefix = "<urn:cts:edge/";
  if (subj.rfind(prefix, 0) != 0 || subj.back() != '>')
    throw validation_error("N-Triples: bad edge subject " + subj);
  const std::string body = subj.substr(prefix.size(), subj.size() - prefix.size() - 1);
  const auto dash = body.find('-');
  if (dash == std::string::npos)
    throw validation_error("N-Triples: bad edge subject " + subj);
  return {std::stol(body.substr(0, dash)), std::stol(body.substr(dash + 1))};
}

std::string parse_literal(const std::string& obj) {
  const auto q1 = obj.find('"');
  const auto q2 = obj.rfind('"');
  if (q1 == std::string::npos || q2 <= q1)
    throw validation_error("N-Triples: bad literal " + obj);
  return obj.substr(q1 + 1, q2 - q1 - 1);
}

}  // namespace

CausalGraph import_ntriples(const std::string& text) {
  std::map<std::pair<long, long>, GraphEdge> edges;
  std::map<std::pair<long, long>, int> seen_preds;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string subj, pred, obj, dot;
    ls >> subj >> pred >> obj >> dot;
    if (dot != ".")
      throw validation_error("N-Triples: line not terminated by ' .': " + line);
    auto [j, i] = parse_edge_subject(subj);
    GraphEdge& e = edges[{j, i}];
    e.cause = j;
    e.effect = i;
    e.f_stat = std::numeric_limits<double>::quiet_NaN();
    if (pred == "<urn:cts:lag>") {
      e.lag = std::stol(parse_literal(obj));
      seen_preds[{j, i}] |= 1;
    } else if (pred == "<urn:cts:pValue>") {
      e.p_value = parse_double(parse_literal(obj));
      seen_preds[{j, i}] |= 2;
    } else if (pred == "<urn:cts:cause>") {
      seen_preds[{j, i}] |= 4;
    } else if (pred == "<urn:cts:effect>") {
      seen_preds[{j, i}] |= 8;
    } else {
      throw validation_error("N-Triples: unknown predicate " + pred);
    }
  }
  for (const auto& [k, mask] : seen_preds)
    if (mask != 15)
      throw validation_error("N-Triples: incomplete edge record for pair (" +
                             std::to_string(k.first) + "," +
                             std::to_string(k.second) + ")");
  CausalGraph g;
  long max_idx = -1;
  for (const auto& [k, e] : edges) max_idx = std::max({max_idx, e.cause, e.effect});
  for (long v = 0; v <= max_idx; ++v) g.nodes.push_back("var" + std::to_string(v));
  for (const auto& [k, e] : edges) g.edges.push_back(e);
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.effect, a.cause) < std::tie(b.effect, b.cause);
  });
  g.validate();
  return g;
}

std::string graph_to_json(const CausalGraph& graph) {
  graph.validate();
  nlohmann::json j;
  j["nodes"] = graph.nodes;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    nlohmann::json je = {{"cause", e.cause},
                         {"effect", e.effect},
                         {"lag", e.lag},
                         {"p_value", e.p_value}};
    if (std::isfinite(e.f_stat))
      je["f_stat"] = e.f_stat;
    else
      je["f_stat"] = nullptr;
    j["edges"].push_back(je);
  }
  return j.dump(2) + "\n";
}

CausalGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("graph JSON parse error: ") + e.what());
  }
  CausalGraph g;
  try {
    g.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& je : j.at("edges")) {
      GraphEdge e;
      e.cause = je.at("cause").get<long>();
      e.effect = je.at("effect").get<long>();
      e.lag = je.at("lag").get<long>();
      e.p_value = je.at("p_value").get<double>();
      e.f_stat = je.at("f_stat").is_null()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : je.at("f_stat").get<double>();
      g.edges.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("graph JSON schema error: ") + e.what());
  }
  g.validate();
  return g;
}

}  // namespace cts
