// cts: causal time-series pipeline driver.
//
// Subcommands cover the pipeline stages end to end: generate synthetic
// data, discover lagged cause-effect edges, enumerate pairs, build window
// samples, train and evaluate forecasters, and run the two experiments.
// Every run materializes its effective config (defaults overlaid with the
// config file, then CLI flags) into <outdir>/<run-id>/config.json, where
// run-id is a 64-bit FNV-1a hash of that config. Re-running any command
// from its persisted config reproduces the run's files bytewise.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.
// Logs go to standard error; the run directory path goes to standard out.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cts/core.hpp"
#include "cts/eval.hpp"
#include "cts/forecast.hpp"
#include "cts/granger.hpp"
#include "cts/graph.hpp"
#include "cts/sampler.hpp"
#include "cts/synthgen.hpp"
#include "nlohmann/json.hpp"

namespace {

using nlohmann::json;

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cts::validation_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

// Overlays one config-file value onto its default slot, enforcing the
// default's type. Integer slots reject fractional numbers; array slots are
// validated element by element against the default's element type.
void assign_checked(json& slot, const json& value, const std::string& path) {
  if (slot.is_number_float()) {
    if (!value.is_number())
      throw cts::validation_error("config key \"" + path +
                                  "\": expected a number");
    slot = value.get<double>();
  } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
    if (!value.is_number_integer() && !value.is_number_unsigned())
      throw cts::validation_error("config key \"" + path +
                                  "\": expected an integer");
    if (slot.is_number_unsigned()) {
      if (value.is_number_integer() && value.get<int64_t>() < 0)
        throw cts::validation_error("config key \"" + path +
                                    "\": expected a non-negative integer");
      slot = value.get<uint64_t>();
    } else {
      slot = value.get<int64_t>();
    }
  } else if (slot.is_string()) {
    if (!value.is_string())
      throw cts::validation_error("config key \"" + path +
                                  "\": expected a string");
    slot = value.get<std::string>();
  } else if (slot.is_array()) {
    if (!value.is_array())
      throw cts::validation_error("config key \"" + path +
                                  "\": expected an array");
    json proto = slot.empty() ? json() : slot[0];
    json out = json::array();
    for (size_t k = 0; k < value.size(); ++k) {
      json cell = proto;
      assign_checked(cell, value[k], path + "[" + std::to_string(k) + "]");
      out.push_back(cell);
    }
    slot = out;
  } else {
    throw cts::validation_error("config key \"" + path +
                                "\": unsupported value");
  }
}

void merge_config_file(json& cfg, const std::string& path) {
  json file;
  try {
    file = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw cts::validation_error("config " + path + ": " + e.what());
  }
  if (!file.is_object())
    throw cts::validation_error("config " + path + ": expected a JSON object");
  for (const auto& [key, value] : file.items()) {
    if (!cfg.contains(key))
      throw cts::validation_error("config " + path + ": unknown key \"" + key +
                                  "\"");
    assign_checked(cfg.at(key), value, key);
  }
}

// The hash covers the effective config exactly as persisted, so a re-run
// from config.json lands in the same run-id regardless of --outdir.
std::string run_id(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(cfg.dump()));
  return buf;
}

std::string make_run_dir(const std::string& outdir, const json& cfg) {
  const std::string dir = outdir + "/" + run_id(cfg);
  std::filesystem::create_directories(dir);
  write_file(dir + "/config.json", cfg.dump(2) + "\n");
  return dir;
}

std::string require_path(const json& cfg, const std::string& key) {
  const std::string value = cfg.at(key).get<std::string>();
  if (value.empty())
    throw cts::validation_error("missing required option --" + key);
  return value;
}

cts::CausalGraph load_graph(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 3 && path.substr(path.size() - 3) == ".nt")
    return cts::import_ntriples(text);
  return cts::graph_from_json(text);
}

cts::WindowSpec window_from(const json& cfg) {
  return {cfg.at("context").get<long>(), cfg.at("horizon").get<long>(),
          cfg.at("stride").get<long>()};
}

bool sync_variant(const json& cfg) {
  const std::string v = cfg.at("variant").get<std::string>();
  if (v == "sync") return true;
  if (v == "nonsync") return false;
  throw cts::validation_error("variant must be sync or nonsync, got \"" + v +
                              "\"");
}

cts::TrainConfig train_config_from(const json& cfg) {
  cts::TrainConfig tc;
  tc.epochs = cfg.at("epochs").get<long>();
  tc.batch_size = cfg.at("batch_size").get<long>();
  tc.learning_rate = cfg.at("learning_rate").get<double>();
  tc.ridge_lambda = cfg.at("ridge_lambda").get<double>();
  tc.hidden_units = cfg.at("hidden_units").get<long>();
  tc.seed = cfg.contains("seed") ? cfg.at("seed").get<uint64_t>() : 0;
  tc.validate();
  return tc;
}

struct PooledVariant {
  cts::ScaledSampleSet train, test, val;
  std::vector<cts::ScaledSampleSet> per_pair_test;
};

PooledVariant pooled_variant(const std::vector<cts::CauseEffectPair>& pairs,
                             const cts::WindowSpec& window, bool sync,
                             const std::string& dataset_id) {
  std::vector<cts::ScaledSampleSet> tr, te, va;
  for (const auto& pair : pairs) {
    cts::SampleSet set = sync
                             ? cts::build_samples(pair, window, dataset_id)
                             : cts::build_samples_nonsync(pair, window,
                                                          dataset_id);
    cts::SplitSet parts = cts::split(set);
    tr.push_back(cts::scale_set(parts.train, 0.0));
    te.push_back(cts::scale_set(parts.test, 0.0));
    va.push_back(cts::scale_set(parts.validation, 0.0));
  }
  PooledVariant out{cts::concat_sets(tr), cts::concat_sets(te),
                    cts::concat_sets(va), te};
  return out;
}

// ---------------------------------------------------------------- stages

int cmd_generate(const json& cfg, const std::string& outdir) {
  const long vars = cfg.at("vars").get<long>();
  if (vars < 2)
    throw cts::validation_error("generate needs --vars >= 2 for cross edges");
  const uint64_t seed = cfg.at("seed").get<uint64_t>();
  cts::CausalSpec spec = cts::stabilize(cts::sample_spec(
      vars, cfg.at("max_lag").get<long>(), cfg.at("cross_edges").get<long>(),
      cfg.at("coeff_lo").get<double>(), cfg.at("coeff_hi").get<double>(),
      cts::derive_seed(seed, 1)));
  cts::TimeSeriesMatrix data =
      cts::generate(spec, cfg.at("steps").get<long>(), cts::derive_seed(seed, 2));
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/spec.json", cts::spec_to_json(spec));
  cts::save_csv(data, dir + "/dataset.csv");
  std::fprintf(stderr, "[cts] generate: %ld vars, %ld steps, %zu edges\n",
               data.N, data.T, spec.edges.size());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_discover(const json& cfg, const std::string& outdir) {
  cts::TimeSeriesMatrix data = cts::load_csv(require_path(cfg, "input"));
  const long max_lag = cfg.at("max_lag").get<long>();
  const double alpha = cfg.at("alpha").get<double>();
  auto scans =
      cts::scan_all_pairs(data, max_lag, cfg.at("ar_order").get<long>());
  cts::CausalGraph graph = cts::build_graph(
      scans, cts::sidak_threshold(alpha, max_lag), data.names);
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/graph.json", cts::graph_to_json(graph));
  write_file(dir + "/graph.nt", cts::export_ntriples(graph));
  std::fprintf(stderr, "[cts] discover: %zu edges across %zu scans\n",
               graph.edges.size(), scans.size());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_pairs(const json& cfg, const std::string& outdir) {
  cts::TimeSeriesMatrix data = cts::load_csv(require_path(cfg, "input"));
  cts::CausalGraph graph = load_graph(require_path(cfg, "graph"));
  auto pairs = cts::enumerate_pairs(graph, data);
  json out;
  out["n_pairs"] = pairs.size();
  out["pairs"] = json::array();
  for (const auto& p : pairs)
    out["pairs"].push_back({{"cause", p.cause},
                            {"effect", p.effect},
                            {"lag", p.lag},
                            {"cause_name", graph.nodes[p.cause]},
                            {"effect_name", graph.nodes[p.effect]},
                            {"series_len", p.effect_series.size()}});
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/pairs.json", out.dump(2) + "\n");
  std::fprintf(stderr, "[cts] pairs: %zu cause-effect pairs\n", pairs.size());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_build_samples(const json& cfg, const std::string& outdir) {
  cts::TimeSeriesMatrix data = cts::load_csv(require_path(cfg, "input"));
  cts::CausalGraph graph = load_graph(require_path(cfg, "graph"));
  const cts::WindowSpec window = window_from(cfg);
  const bool sync = sync_variant(cfg);
  auto pairs = cts::enumerate_pairs(graph, data);
  if (pairs.empty())
    throw cts::validation_error("graph has no edges; nothing to build");
  const std::string dir = make_run_dir(outdir, cfg);
  json manifest;
  manifest["variant"] = cfg.at("variant");
  manifest["window"] = {{"context", window.context_len},
                        {"horizon", window.horizon},
                        {"stride", window.stride}};
  manifest["sets"] = json::array();
  for (const auto& pair : pairs) {
    cts::SampleSet set =
        sync ? cts::build_samples(pair, window, "d0")
             : cts::build_samples_nonsync(pair, window, "d0");
    const std::string name = "samples_e" + std::to_string(pair.effect) +
                             "_c" + std::to_string(pair.cause) + ".txt";
    write_file(dir + "/" + name, cts::samples_to_text(set));
    manifest["sets"].push_back({{"file", name},
                                {"cause", pair.cause},
                                {"effect", pair.effect},
                                {"lag", pair.lag},
                                {"n_samples", set.samples.size()}});
  }
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  std::fprintf(stderr, "[cts] build-samples: %zu sets under %s\n",
               pairs.size(), dir.c_str());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_train(const json& cfg, const std::string& outdir) {
  cts::TimeSeriesMatrix data = cts::load_csv(require_path(cfg, "input"));
  cts::CausalGraph graph = load_graph(require_path(cfg, "graph"));
  const cts::WindowSpec window = window_from(cfg);
  auto pairs = cts::enumerate_pairs(graph, data);
  if (pairs.empty())
    throw cts::validation_error("graph has no edges; nothing to train on");
  PooledVariant v = pooled_variant(pairs, window, sync_variant(cfg), "d0");
  const cts::ModelKind kind =
      cts::model_kind_from_string(cfg.at("model").get<std::string>());
  const cts::TrainConfig tc = train_config_from(cfg);
  cts::ForecastModel model;
  switch (kind) {
    case cts::ModelKind::naive:
      model = cts::make_naive(window.context_len, window.horizon);
      break;
    case cts::ModelKind::ridge:
      model = cts::train_ridge(v.train, tc.ridge_lambda);
      break;
    case cts::ModelKind::mlp:
      model = cts::train_mlp(v.train, v.val, tc);
      break;
  }
  const double val_mape = cts::evaluate(model, v.val);
  const std::string dir = make_run_dir(outdir, cfg);
  cts::save_checkpoint(model, dir + "/model.ckpt");
  json metrics = {{"model", cts::to_string(kind)},
                  {"n_train", v.train.size()},
                  {"n_val", v.val.size()},
                  {"val_mape", val_mape}};
  write_file(dir + "/metrics.json", metrics.dump(2) + "\n");
  std::fprintf(stderr, "[cts] train: %s on %ld windows, val MAPE %.4f\n",
               cts::to_string(kind).c_str(), v.train.size(), val_mape);
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_evaluate(const json& cfg, const std::string& outdir) {
  cts::TimeSeriesMatrix data = cts::load_csv(require_path(cfg, "input"));
  cts::CausalGraph graph = load_graph(require_path(cfg, "graph"));
  cts::ForecastModel model =
      cts::load_checkpoint(require_path(cfg, "checkpoint"));
  const cts::WindowSpec window = window_from(cfg);
  if (model.input_dim != 3 * window.context_len ||
      model.output_dim != window.horizon)
    throw cts::validation_error(
        "checkpoint dims do not match --context/--horizon");
  auto pairs = cts::enumerate_pairs(graph, data);
  if (pairs.empty())
    throw cts::validation_error("graph has no edges; nothing to evaluate");
  const double eps_floor = cfg.at("eps_floor").get<double>();
  PooledVariant v = pooled_variant(pairs, window, sync_variant(cfg), "d0");
  json out;
  out["model"] = cts::to_string(model.kind);
  out["n_test"] = v.test.size();
  out["mape"] = cts::evaluate(model, v.test, eps_floor);
  out["per_pair"] = json::array();
  for (size_t k = 0; k < pairs.size(); ++k)
    out["per_pair"].push_back(
        {{"cause", pairs[k].cause},
         {"effect", pairs[k].effect},
         {"lag", pairs[k].lag},
         {"n_test", v.per_pair_test[k].size()},
         {"mape", cts::evaluate(model, v.per_pair_test[k], eps_floor)}});
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/eval.json", out.dump(2) + "\n");
  std::fprintf(stderr, "[cts] evaluate: test MAPE %.4f over %ld windows\n",
               out["mape"].get<double>(), v.test.size());
  std::printf("%s\n", dir.c_str());
  return 0;
}

std::vector<uint64_t> seeds_from(const json& cfg) {
  std::vector<uint64_t> seeds;
  for (const auto& s : cfg.at("seeds")) seeds.push_back(s.get<uint64_t>());
  return seeds;
}

int cmd_exp1(const json& cfg, const std::string& outdir) {
  cts::Exp1Config ec;
  ec.n_datasets = cfg.at("datasets").get<long>();
  ec.n_vars = cfg.at("vars").get<long>();
  ec.T = cfg.at("steps").get<long>();
  ec.horizon = cfg.at("horizon").get<long>();
  ec.context = cfg.at("context").get<long>();
  ec.max_lag = cfg.at("max_lag").get<long>();
  ec.ar_order = cfg.at("ar_order").get<long>();
  ec.stride = cfg.at("stride").get<long>();
  ec.discovery_alpha = cfg.at("discovery_alpha").get<double>();
  ec.eps_floor = cfg.at("eps_floor").get<double>();
  ec.seeds = seeds_from(cfg);
  ec.models.clear();
  for (const auto& m : cfg.at("models"))
    ec.models.push_back(cts::model_kind_from_string(m.get<std::string>()));
  ec.train = train_config_from(cfg);
  cts::EvalReport report = cts::run_experiment1(ec);
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/report.json", cts::report_to_json(report));
  write_file(dir + "/report.txt", cts::report_to_text(report));
  std::fprintf(stderr, "[cts] exp1: report under %s\n", dir.c_str());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_exp2(const json& cfg, const std::string& outdir) {
  cts::Exp2Config ec;
  ec.n_source = cfg.at("sources").get<long>();
  ec.n_vars = cfg.at("vars").get<long>();
  ec.T = cfg.at("steps").get<long>();
  ec.horizon = cfg.at("horizon").get<long>();
  ec.context = cfg.at("context").get<long>();
  ec.max_lag = cfg.at("max_lag").get<long>();
  ec.stride = cfg.at("stride").get<long>();
  ec.eps_floor = cfg.at("eps_floor").get<double>();
  ec.seeds = seeds_from(cfg);
  ec.train = train_config_from(cfg);
  cts::EvalReport report = cts::run_experiment2(ec);
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/report.json", cts::report_to_json(report));
  write_file(dir + "/report.txt", cts::report_to_text(report));
  std::fprintf(stderr, "[cts] exp2: report under %s\n", dir.c_str());
  std::printf("%s\n", dir.c_str());
  return 0;
}

int cmd_export_graph(const json& cfg, const std::string& outdir) {
  cts::CausalGraph graph = load_graph(require_path(cfg, "input"));
  const std::string dir = make_run_dir(outdir, cfg);
  write_file(dir + "/graph.json", cts::graph_to_json(graph));
  write_file(dir + "/graph.nt", cts::export_ntriples(graph));
  std::fprintf(stderr, "[cts] export-graph: %zu edges re-serialized\n",
               graph.edges.size());
  std::printf("%s\n", dir.c_str());
  return 0;
}

// ------------------------------------------------------------- plumbing

struct StageBinding {
  CLI::App* app = nullptr;
  json defaults;
  std::string config_path;
  std::string outdir = "runs";
  long jobs = 1;
  struct Override {
    std::string key;
    CLI::Option* opt;
    std::function<json()> value;
  };
  std::vector<Override> overrides;
  int (*run)(const json&, const std::string&) = nullptr;
};

// Adds a flag bound to a config key; when the flag is given it overrides
// the file value.
template <class T>
void bind_key(StageBinding& b, const std::string& key, T initial,
              const std::string& help) {
  b.defaults[key] = initial;
  auto holder = std::make_shared<T>(initial);
  CLI::Option* opt =
      b.app->add_option("--" + key, *holder, help)->capture_default_str();
  b.overrides.push_back({key, opt, [holder]() { return json(*holder); }});
}

void bind_common(StageBinding& b) {
  b.app->add_option("--config", b.config_path,
                    "JSON config file; flags override file values");
  b.app->add_option("--outdir", b.outdir, "artifact root directory")
      ->capture_default_str();
  b.app->add_option("--jobs", b.jobs,
                    "worker cap (stages currently run sequentially)")
      ->capture_default_str();
}

json effective_config(StageBinding& b, const std::string& command) {
  json cfg = b.defaults;
  cfg["command"] = command;
  if (!b.config_path.empty()) merge_config_file(cfg, b.config_path);
  if (cfg.at("command").get<std::string>() != command)
    throw cts::validation_error("config is for command \"" +
                                cfg.at("command").get<std::string>() +
                                "\", not \"" + command + "\"");
  for (auto& ov : b.overrides)
    if (ov.opt->count() > 0) cfg[ov.key] = ov.value();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal time-series pipeline"};
  app.require_subcommand(1);

  std::map<std::string, StageBinding> stages;
  auto stage = [&](const std::string& name, const std::string& desc,
                   int (*run)(const json&, const std::string&))
      -> StageBinding& {
    StageBinding& b = stages[name];
    b.app = app.add_subcommand(name, desc);
    b.run = run;
    bind_common(b);
    return b;
  };

  {
    auto& b = stage("generate", "sample a causal spec and synthesize a dataset",
                    cmd_generate);
    bind_key(b, "seed", uint64_t{1}, "root seed");
    bind_key(b, "vars", long{5}, "number of variables");
    bind_key(b, "steps", long{5000}, "rows to generate");
    bind_key(b, "max_lag", long{200}, "maximum edge lag");
    bind_key(b, "cross_edges", long{1}, "cross-variable edge count");
    bind_key(b, "coeff_lo", 0.5, "coefficient magnitude lower bound");
    bind_key(b, "coeff_hi", 0.9, "coefficient magnitude upper bound");
  }
  {
    auto& b = stage("discover",
                    "scan all ordered pairs for lagged Granger edges",
                    cmd_discover);
    bind_key(b, "input", std::string{}, "dataset CSV path");
    bind_key(b, "alpha", 0.01, "family-wise level per lag scan");
    bind_key(b, "max_lag", long{200}, "scan lags 1..max_lag");
    bind_key(b, "ar_order", long{5}, "own-lag order of the restricted model");
  }
  {
    auto& b = stage("pairs", "enumerate cause-effect pairs from a graph",
                    cmd_pairs);
    bind_key(b, "input", std::string{}, "dataset CSV path");
    bind_key(b, "graph", std::string{}, "graph document (.json or .nt)");
  }
  {
    auto& b = stage("build-samples",
                    "materialize context/horizon windows per pair",
                    cmd_build_samples);
    bind_key(b, "input", std::string{}, "dataset CSV path");
    bind_key(b, "graph", std::string{}, "graph document (.json or .nt)");
    bind_key(b, "context", long{30}, "context length C");
    bind_key(b, "horizon", long{10}, "forecast horizon H");
    bind_key(b, "stride", long{1}, "anchor stride");
    bind_key(b, "variant", std::string{"sync"}, "sync or nonsync channels");
  }
  {
    auto& b = stage("train", "train one forecaster on pooled pair windows",
                    cmd_train);
    bind_key(b, "input", std::string{}, "dataset CSV path");
    bind_key(b, "graph", std::string{}, "graph document (.json or .nt)");
    bind_key(b, "model", std::string{"ridge"}, "naive, ridge, or mlp");
    bind_key(b, "variant", std::string{"sync"}, "sync or nonsync channels");
    bind_key(b, "context", long{30}, "context length C");
    bind_key(b, "horizon", long{10}, "forecast horizon H");
    bind_key(b, "stride", long{1}, "anchor stride");
    bind_key(b, "epochs", long{100}, "mlp training epochs");
    bind_key(b, "batch_size", long{256}, "mlp minibatch size");
    bind_key(b, "learning_rate", 1e-3, "mlp Adam step size");
    bind_key(b, "ridge_lambda", 1e-3, "ridge penalty");
    bind_key(b, "hidden_units", long{64}, "mlp hidden width");
    bind_key(b, "seed", uint64_t{1}, "training seed");
  }
  {
    auto& b = stage("evaluate", "score a checkpoint on the test partition",
                    cmd_evaluate);
    bind_key(b, "input", std::string{}, "dataset CSV path");
    bind_key(b, "graph", std::string{}, "graph document (.json or .nt)");
    bind_key(b, "checkpoint", std::string{}, "model checkpoint path");
    bind_key(b, "variant", std::string{"sync"}, "sync or nonsync channels");
    bind_key(b, "context", long{30}, "context length C");
    bind_key(b, "horizon", long{10}, "forecast horizon H");
    bind_key(b, "stride", long{1}, "anchor stride");
    bind_key(b, "eps_floor", 0.01, "MAPE denominator floor");
  }
  {
    auto& b = stage("exp1",
                    "synchronized vs non-synchronized forecasting sweep",
                    cmd_exp1);
    bind_key(b, "datasets", long{10}, "datasets per seed");
    bind_key(b, "vars", long{5}, "variables per dataset");
    bind_key(b, "steps", long{5000}, "rows per dataset");
    bind_key(b, "horizon", long{10}, "forecast horizon H");
    bind_key(b, "context", long{30}, "context length C");
    bind_key(b, "max_lag", long{200}, "edge lag bound and scan depth");
    bind_key(b, "ar_order", long{5}, "own-lag order for discovery");
    bind_key(b, "stride", long{1}, "anchor stride");
    bind_key(b, "discovery_alpha", 1e-12,
             "per-scan level for in-pipeline discovery");
    bind_key(b, "eps_floor", 0.01, "MAPE denominator floor");
    bind_key(b, "models", std::vector<std::string>{"ridge", "mlp"},
             "models to train");
    bind_key(b, "seeds", std::vector<uint64_t>{1, 2, 3}, "experiment seeds");
    bind_key(b, "epochs", long{100}, "mlp training epochs");
    bind_key(b, "batch_size", long{256}, "mlp minibatch size");
    bind_key(b, "learning_rate", 1e-3, "mlp Adam step size");
    bind_key(b, "ridge_lambda", 1e-3, "ridge penalty");
    bind_key(b, "hidden_units", long{64}, "mlp hidden width");
  }
  {
    auto& b = stage("exp2", "transfer pre-training against target-only",
                    cmd_exp2);
    bind_key(b, "sources", long{20}, "source datasets for pre-training");
    bind_key(b, "vars", long{5}, "variables per dataset");
    bind_key(b, "steps", long{5000}, "rows per dataset");
    bind_key(b, "horizon", long{10}, "forecast horizon H");
    bind_key(b, "context", long{30}, "context length C");
    bind_key(b, "max_lag", long{200}, "edge lag bound");
    bind_key(b, "stride", long{1}, "anchor stride");
    bind_key(b, "eps_floor", 0.01, "MAPE denominator floor");
    bind_key(b, "seeds", std::vector<uint64_t>{1, 2, 3}, "experiment seeds");
    bind_key(b, "epochs", long{100}, "mlp training epochs");
    bind_key(b, "batch_size", long{256}, "mlp minibatch size");
    bind_key(b, "learning_rate", 1e-3, "mlp Adam step size");
    bind_key(b, "ridge_lambda", 1e-3, "ridge penalty (unused by mlp)");
    bind_key(b, "hidden_units", long{64}, "mlp hidden width");
  }
  {
    auto& b = stage("export-graph",
                    "re-serialize a graph document to JSON and N-Triples",
                    cmd_export_graph);
    bind_key(b, "input", std::string{}, "graph document (.json or .nt)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (auto& [name, b] : stages) {
    if (!b.app->parsed()) continue;
    try {
      json cfg = effective_config(b, name);
      return b.run(cfg, b.outdir);
    } catch (const cts::validation_error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }
  return 1;
}
