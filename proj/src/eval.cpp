#include "cts/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "cts/granger.hpp"
#include "cts/synthgen.hpp"

namespace cts {

double mape(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
            double eps_floor) {
  if (pred.size() != truth.size())
    throw validation_error("mape: length mismatch");
  if (pred.size() == 0) throw validation_error("mape: empty vectors");
  if (!pred.allFinite() || !truth.allFinite())
    throw validation_error("mape: non-finite input");
  double acc = 0.0;
  for (long k = 0; k < pred.size(); ++k)
    acc += std::abs(pred(k) - truth(k)) /
           std::max(std::abs(truth(k)), eps_floor);
  return 100.0 * acc / static_cast<double>(pred.size());
}

std::vector<double> per_sample_mapes(const ForecastModel& model,
                                     const ScaledSampleSet& test,
                                     double eps_floor) {
  if (test.size() == 0) throw validation_error("evaluate: empty test set");
  Eigen::MatrixXd pred = predict_batch(model, test.X);
  std::vector<double> out;
  out.reserve(test.size());
  for (long r = 0; r < test.size(); ++r)
    out.push_back(mape(pred.row(r), test.Y.row(r), eps_floor));
  return out;
}

double evaluate(const ForecastModel& model, const ScaledSampleSet& test,
                double eps_floor) {
  const auto mapes = per_sample_mapes(model, test, eps_floor);
  double acc = 0.0;
  for (double m : mapes) acc += m;
  return acc / static_cast<double>(mapes.size());
}

namespace {

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double diff_pct_of(double ns, double s) {
  return ns == 0.0 ? 0.0 : 100.0 * (ns - s) / ns;
}

EvalRow make_row(const std::string& label, double ns, double s) {
  return {label, ns, s, diff_pct_of(ns, s)};
}

struct VariantSplits {
  ScaledSampleSet train, test, val;
};

// Scale, split per pair with the default purge gap, then pool partitions
// across pairs.
VariantSplits pooled_splits(const std::vector<CauseEffectPair>& pairs,
                            const WindowSpec& window, bool synchronized_pair,
                            const std::string& dataset_id) {
  std::vector<ScaledSampleSet> tr, te, va;
  for (const auto& pair : pairs) {
    SampleSet set = synchronized_pair
                        ? build_samples(pair, window, dataset_id)
                        : build_samples_nonsync(pair, window, dataset_id);
    SplitSet parts = split(set);
    tr.push_back(scale_set(parts.train, 0.0));
    te.push_back(scale_set(parts.test, 0.0));
    va.push_back(scale_set(parts.validation, 0.0));
  }
  return {concat_sets(tr), concat_sets(te), concat_sets(va)};
}

ForecastModel train_model(ModelKind kind, const VariantSplits& v,
                          const TrainConfig& config) {
  switch (kind) {
    case ModelKind::naive:
      return make_naive(v.train.window.context_len, v.train.window.horizon);
    case ModelKind::ridge:
      return train_ridge(v.train, config.ridge_lambda);
    case ModelKind::mlp:
      return train_mlp(v.train, v.val, config);
  }
  throw std::runtime_error("unknown model kind");
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

nlohmann::json train_config_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"ridge_lambda", t.ridge_lambda},
          {"hidden_units", t.hidden_units},
          {"seed", t.seed}};
}

}  // namespace

EvalReport run_experiment1(const Exp1Config& config) {
  if (config.n_datasets < 1 || config.seeds.empty() || config.models.empty())
    throw validation_error("run_experiment1: empty datasets, seeds, or models");
  EvalReport report;
  report.experiment = "exp1";
  report.seeds = config.seeds;
  report.note =
      "headline MAPEs pool all test windows per model within a seed and "
      "average across seeds; dataset_mean_diff_pct averages the per-dataset "
      "diff_pct over every (seed, dataset)";
  report.config = {{"n_datasets", config.n_datasets},
                   {"n_vars", config.n_vars},
                   {"T", config.T},
                   {"horizon", config.horizon},
                   {"context", config.context},
                   {"max_lag", config.max_lag},
                   {"ar_order", config.ar_order},
                   {"stride", config.stride},
                   {"discovery_alpha", config.discovery_alpha},
                   {"eps_floor", config.eps_floor},
                   {"train", train_config_json(config.train)},
                   {"seeds", config.seeds}};
  {
    auto names = nlohmann::json::array();
    for (auto m : config.models) names.push_back(to_string(m));
    report.config["models"] = names;
  }
  const WindowSpec window{config.context, config.horizon, config.stride};
  const double threshold =
      sidak_threshold(config.discovery_alpha, config.max_lag);
  std::map<std::string, std::vector<double>> all_dataset_diffs;
  std::map<std::string, std::vector<double>> seed_mape_ns, seed_mape_s;

  for (uint64_t seed : config.seeds) {
    SeedEval se;
    se.seed = seed;
    std::map<std::string, std::vector<double>> pool_ns, pool_s;
    for (long d = 0; d < config.n_datasets; ++d) {
      const auto t0 = std::chrono::steady_clock::now();
      DatasetEval de;
      de.index = d;
      CausalSpec spec = source_sink_spec(config.n_vars, config.max_lag,
                                         derive_seed(seed, 100 + d));
      TimeSeriesMatrix data = generate(spec, config.T, derive_seed(seed, 200 + d));
      TimeSeriesMatrix span;
      span.N = data.N;
      span.T = (config.T * 7) / 10;
      span.names = data.names;
      span.values.assign(data.values.begin(),
                         data.values.begin() + span.T * span.N);
      auto scans = scan_all_pairs(span, config.max_lag, config.ar_order);
      CausalGraph graph = build_graph(scans, threshold, data.names);
      if (graph.edges.empty()) {
        de.note = "no edges discovered; dataset skipped";
        se.datasets.push_back(de);
        std::fprintf(stderr, "[exp1] seed %llu dataset %ld: no edges (%.1fs)\n",
                     static_cast<unsigned long long>(seed), d, elapsed_s(t0));
        continue;
      }
      auto pairs = enumerate_pairs(graph, data);
      de.n_pairs = static_cast<long>(pairs.size());
      const std::string ds_id = "d" + std::to_string(d);
      VariantSplits sync_v = pooled_splits(pairs, window, true, ds_id);
      VariantSplits nons_v = pooled_splits(pairs, window, false, ds_id);
      for (ModelKind kind : config.models) {
        TrainConfig tc = config.train;
        tc.seed = derive_seed(seed, 300 + d);
        ForecastModel m_s = train_model(kind, sync_v, tc);
        ForecastModel m_n = train_model(kind, nons_v, tc);
        auto mapes_s = per_sample_mapes(m_s, sync_v.test, config.eps_floor);
        auto mapes_n = per_sample_mapes(m_n, nons_v.test, config.eps_floor);
        const std::string label = to_string(kind);
        de.rows.push_back(make_row(label, mean(mapes_n), mean(mapes_s)));
        all_dataset_diffs[label].push_back(de.rows.back().diff_pct);
        auto& pn = pool_ns[label];
        pn.insert(pn.end(), mapes_n.begin(), mapes_n.end());
        auto& ps = pool_s[label];
        ps.insert(ps.end(), mapes_s.begin(), mapes_s.end());
      }
      se.datasets.push_back(de);
      std::fprintf(stderr,
                   "[exp1] seed %llu dataset %ld: %ld pairs, %.1fs\n",
                   static_cast<unsigned long long>(seed), d, de.n_pairs,
                   elapsed_s(t0));
    }
    for (ModelKind kind : config.models) {
      const std::string label = to_string(kind);
      se.pooled.push_back(
          make_row(label, mean(pool_ns[label]), mean(pool_s[label])));
      seed_mape_ns[label].push_back(se.pooled.back().mape_nonsync);
      seed_mape_s[label].push_back(se.pooled.back().mape_sync);
    }
    report.per_seed.push_back(std::move(se));
  }
  for (ModelKind kind : config.models) {
    const std::string label = to_string(kind);
    report.rows.push_back(
        make_row(label, mean(seed_mape_ns[label]), mean(seed_mape_s[label])));
    report.dataset_mean_diff_pct[label] = mean(all_dataset_diffs[label]);
  }
  return report;
}

EvalReport run_experiment2(const Exp2Config& config) {
  if (config.n_source < 0 || config.seeds.empty())
    throw validation_error("run_experiment2: bad source count or seeds");
  EvalReport report;
  report.experiment = "exp2";
  report.seeds = config.seeds;
  report.note =
      "target-test MAPEs per variant, averaged across seeds; sources and "
      "target use ground-truth edges";
  report.config = {{"n_source", config.n_source},
                   {"n_vars", config.n_vars},
                   {"T", config.T},
                   {"horizon", config.horizon},
                   {"context", config.context},
                   {"max_lag", config.max_lag},
                   {"stride", config.stride},
                   {"eps_floor", config.eps_floor},
                   {"train", train_config_json(config.train)},
                   {"seeds", config.seeds}};
  const WindowSpec window{config.context, config.horizon, config.stride};

  auto dataset_variant = [&](const CausalSpec& spec,
                             const TimeSeriesMatrix& data, bool sync,
                             const std::string& ds_id)
      -> std::vector<ScaledSampleSet> {
    std::vector<ScaledSampleSet> out;
    for (const auto& e : spec.edges) {
      if (e.cause == e.effect) continue;
      CauseEffectPair pair;
      pair.cause = e.cause;
      pair.effect = e.effect;
      pair.lag = e.lag;
      pair.effect_series.resize(data.T);
      pair.cause_series.resize(data.T);
      for (long t = 0; t < data.T; ++t) {
        pair.effect_series(t) = data.at(t, e.effect);
        pair.cause_series(t) = data.at(t, e.cause);
      }
      SampleSet set = sync ? build_samples(pair, window, ds_id)
                           : build_samples_nonsync(pair, window, ds_id);
      out.push_back(scale_set(set, 0.0));
    }
    return out;
  };

  std::map<std::string, std::vector<double>> seed_vals;
  for (uint64_t seed : config.seeds) {
    SeedEval se;
    se.seed = seed;
    CausalSpec target_spec =
        source_sink_spec(config.n_vars, config.max_lag, derive_seed(seed, 999));
    TimeSeriesMatrix target_data =
        generate(target_spec, config.T, derive_seed(seed, 1999));

    std::map<std::string, double> cells;
    for (bool sync : {true, false}) {
      std::vector<ScaledSampleSet> source_sets;
      for (long d = 0; d < config.n_source; ++d) {
        CausalSpec spec = source_sink_spec(config.n_vars, config.max_lag,
                                           derive_seed(seed, 100 + d));
        TimeSeriesMatrix data =
            generate(spec, config.T, derive_seed(seed, 200 + d));
        auto sets = dataset_variant(spec, data, sync, "s" + std::to_string(d));
        source_sets.insert(source_sets.end(), sets.begin(), sets.end());
      }
      std::vector<ScaledSampleSet> t_tr, t_te, t_va;
      for (const auto& e : target_spec.edges) {
        if (e.cause == e.effect) continue;
        CauseEffectPair pair;
        pair.cause = e.cause;
        pair.effect = e.effect;
        pair.lag = e.lag;
        pair.effect_series.resize(target_data.T);
        pair.cause_series.resize(target_data.T);
        for (long t = 0; t < target_data.T; ++t) {
          pair.effect_series(t) = target_data.at(t, e.effect);
          pair.cause_series(t) = target_data.at(t, e.cause);
        }
        SampleSet set = sync ? build_samples(pair, window, "t")
                             : build_samples_nonsync(pair, window, "t");
        SplitSet parts = split(set);
        t_tr.push_back(scale_set(parts.train, 0.0));
        t_te.push_back(scale_set(parts.test, 0.0));
        t_va.push_back(scale_set(parts.validation, 0.0));
      }
      ScaledSampleSet target_train = concat_sets(t_tr);
      ScaledSampleSet target_test = concat_sets(t_te);
      ScaledSampleSet target_val = concat_sets(t_va);
      TrainConfig tc = config.train;
      tc.seed = derive_seed(seed, sync ? 51 : 52);
      const std::string variant = sync ? "sync" : "nonsync";
      if (config.n_source > 0) {
        ForecastModel ft =
            pretrain_finetune(source_sets, target_train, target_val, tc);
        cells["finetuned_" + variant] =
            evaluate(ft, target_test, config.eps_floor);
      }
      ForecastModel to = train_mlp(target_train, target_val, tc);
      cells["target_only_" + variant] =
          evaluate(to, target_test, config.eps_floor);
    }
    if (config.n_source == 0)
      se.datasets.push_back(
          {0, 0, "no source datasets; pre-train rows omitted", {}});
    if (config.n_source > 0)
      se.pooled.push_back(make_row("finetuned", cells["finetuned_nonsync"],
                                   cells["finetuned_sync"]));
    se.pooled.push_back(make_row("target_only", cells["target_only_nonsync"],
                                 cells["target_only_sync"]));
    for (const auto& [k, v] : cells) seed_vals[k].push_back(v);
    report.per_seed.push_back(std::move(se));
    std::fprintf(stderr, "[exp2] seed %llu done\n",
                 static_cast<unsigned long long>(seed));
  }
  if (config.n_source > 0)
    report.rows.push_back(make_row("finetuned",
                                   mean(seed_vals["finetuned_nonsync"]),
                                   mean(seed_vals["finetuned_sync"])));
  report.rows.push_back(make_row("target_only",
                                 mean(seed_vals["target_only_nonsync"]),
                                 mean(seed_vals["target_only_sync"])));
  return report;
}

std::string report_to_text(const EvalReport& report) {
  std::string out;
  char buf[256];
  out += "experiment: " + report.experiment + "\n";
  out += "seeds:";
  for (uint64_t s : report.seeds) out += " " + std::to_string(s);
  out += "\nnote: " + report.note + "\n\n";
  std::snprintf(buf, sizeof buf, "%-14s %14s %14s %10s\n", "model",
                "mape_nonsync", "mape_sync", "diff_pct");
  out += buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-14s %14.4f %14.4f %9.2f%%\n",
                  r.label.c_str(), r.mape_nonsync, r.mape_sync, r.diff_pct);
    out += buf;
  }
  if (!report.dataset_mean_diff_pct.empty()) {
    out += "\nmean diff_pct across (seed, dataset):\n";
    for (const auto& [label, v] : report.dataset_mean_diff_pct) {
      std::snprintf(buf, sizeof buf, "  %-12s %9.2f%%\n", label.c_str(), v);
      out += buf;
    }
  }
  for (const auto& se : report.per_seed) {
    out += "\nseed " + std::to_string(se.seed) + "\n";
    for (const auto& r : se.pooled) {
      std::snprintf(buf, sizeof buf, "  pooled %-12s %14.4f %14.4f %9.2f%%\n",
                    r.label.c_str(), r.mape_nonsync, r.mape_sync, r.diff_pct);
      out += buf;
    }
    for (const auto& de : se.datasets) {
      if (!de.note.empty()) {
        out += "  dataset " + std::to_string(de.index) + ": " + de.note + "\n";
        continue;
      }
      for (const auto& r : de.rows) {
        std::snprintf(buf, sizeof buf,
                      "  dataset %-3ld %-12s %14.4f %14.4f %9.2f%%\n",
                      de.index, r.label.c_str(), r.mape_nonsync, r.mape_sync,
                      r.diff_pct);
        out += buf;
      }
    }
  }
  return out;
}

namespace {

nlohmann::json row_json(const EvalRow& r) {
  return {{"label", r.label},
          {"mape_nonsync", r.mape_nonsync},
          {"mape_sync", r.mape_sync},
          {"diff_pct", r.diff_pct}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["config"] = report.config;
  j["seeds"] = report.seeds;
  j["note"] = report.note;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) j["rows"].push_back(row_json(r));
  if (!report.dataset_mean_diff_pct.empty())
    j["dataset_mean_diff_pct"] = report.dataset_mean_diff_pct;
  j["per_seed"] = nlohmann::json::array();
  for (const auto& se : report.per_seed) {
    nlohmann::json js;
    js["seed"] = se.seed;
    js["pooled"] = nlohmann::json::array();
    for (const auto& r : se.pooled) js["pooled"].push_back(row_json(r));
    js["datasets"] = nlohmann::json::array();
    for (const auto& de : se.datasets) {
      nlohmann::json jd;
      jd["index"] = de.index;
      jd["n_pairs"] = de.n_pairs;
      if (!de.note.empty()) jd["note"] = de.note;
      jd["rows"] = nlohmann::json::array();
      for (const auto& r : de.rows) jd["rows"].push_back(row_json(r));
      js["datasets"].push_back(jd);
    }
    j["per_seed"].push_back(js);
  }
  return j.dump(2) + "\n";
}

}  // namespace cts
