#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "cts/forecast.hpp"
#include "nlohmann/json.hpp"

namespace cts {

struct EvalRow {
  std::string label;
  double mape_nonsync = 0.0;
  double mape_sync = 0.0;
  double diff_pct = 0.0;  // 100 * (nonsync - sync) / nonsync
};

struct DatasetEval {
  long index = 0;
  long n_pairs = 0;
  std::string note;
  std::vector<EvalRow> rows;
};

struct SeedEval {
  uint64_t seed = 0;
  std::vector<DatasetEval> datasets;
  std::vector<EvalRow> pooled;  // all test windows of the seed, per model
};

struct EvalReport {
  std::string experiment;
  nlohmann::json config;
  std::vector<uint64_t> seeds;
  std::vector<SeedEval> per_seed;
  std::vector<EvalRow> rows;  // cross-seed averages of the pooled MAPEs
  std::map<std::string, double> dataset_mean_diff_pct;
  std::string note;
};

double mape(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
            double eps_floor = 0.01);

std::vector<double> per_sample_mapes(const ForecastModel& model,
                                     const ScaledSampleSet& test,
                                     double eps_floor = 0.01);

// Mean of per-sample MAPEs over the test partition.
double evaluate(const ForecastModel& model, const ScaledSampleSet& test,
                double eps_floor = 0.01);

struct Exp1Config {
  long n_datasets = 10;
  long n_vars = 5;
  long T = 5000;
  long horizon = 10;
  long context = 30;
  long max_lag = 200;
  long ar_order = 5;
  long stride = 1;
  double discovery_alpha = 1e-12;  // per-scan, Sidak-adjusted over max_lag
  double eps_floor = 0.01;
  std::vector<ModelKind> models = {ModelKind::ridge, ModelKind::mlp};
  std::vector<uint64_t> seeds = {1, 2, 3};
  TrainConfig train;
};

struct Exp2Config {
  long n_source = 20;  // full-scale reference: 100
  long n_vars = 5;
  long T = 5000;
  long horizon = 10;
  long context = 30;
  long max_lag = 200;
  long stride = 1;
  double eps_floor = 0.01;
  std::vector<uint64_t> seeds = {1, 2, 3};
  TrainConfig train;
};

// Generate -> discover on the train span -> enumerate pairs -> build both
// sample variants -> split per pair -> pool -> train per model -> evaluate.
EvalReport run_experiment1(const Exp1Config& config);

// Pretrain on pooled sources, fine-tune on the target, compare against
// target-only baselines on the target test split (both variants).
EvalReport run_experiment2(const Exp2Config& config);

std::string report_to_text(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace cts
