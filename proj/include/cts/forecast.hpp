#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "cts/core.hpp"
#include "cts/sampler.hpp"

namespace cts {

enum class ModelKind { naive, ridge, mlp };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct TrainConfig {
  long epochs = 100;         // full-scale reference: 500
  long batch_size = 256;     // full-scale reference: 1024
  double learning_rate = 1e-3;
  double ridge_lambda = 1e-3;
  long hidden_units = 64;
  uint64_t seed = 0;

  void validate() const;
};

struct ForecastModel {
  ModelKind kind = ModelKind::naive;
  long input_dim = 0;   // 3*C
  long output_dim = 0;  // H
  long hidden = 0;      // mlp only
  std::vector<double> params;
  TrainConfig config;

  long expected_param_count() const;
};

struct ScaledSample {
  std::vector<double> x;  // 3 channels, C each
  std::vector<double> y;  // H targets in effect-channel scale
  std::array<double, 3> ch_min{};
  std::array<double, 3> ch_max{};
};

struct ScaledSampleSet {
  Eigen::MatrixXd X;       // n x 3C
  Eigen::MatrixXd Y;       // n x H
  Eigen::MatrixXd ch_min;  // n x 3
  Eigen::MatrixXd ch_max;  // n x 3
  std::vector<long> anchors;
  WindowSpec window;
  std::string dataset_id;
  long effect = -1;
  long cause = -1;
  long lag = 0;
  bool synchronized_pair = false;

  long size() const { return X.rows(); }
};

// Context channels scale independently over their own C values; the target
// uses the effect channel's (min, max) since future statistics are unknown
// at prediction time.
ScaledSample scale_sample(const WindowSample& sample, double eps_floor = 0.0);
ScaledSampleSet scale_set(const SampleSet& set, double eps_floor = 0.0);
std::vector<double> invert_target(const ScaledSample& s,
                                  const std::vector<double>& scaled_y);

ScaledSampleSet concat_sets(const std::vector<ScaledSampleSet>& sets);

ForecastModel make_naive(long context_len, long horizon);
ForecastModel train_ridge(const ScaledSampleSet& train, double lambda = 1e-3);
ForecastModel train_mlp(const ScaledSampleSet& train,
                        const ScaledSampleSet& val, const TrainConfig& config);

// Pooled-source pretraining (tail 10% of the pool held out for best-epoch
// selection), then fine-tuning on the target at 0.1x learning rate for 0.5x
// epochs with early stopping on target_val.
ForecastModel pretrain_finetune(const std::vector<ScaledSampleSet>& sources,
                                const ScaledSampleSet& target_train,
                                const ScaledSampleSet& target_val,
                                const TrainConfig& config);

Eigen::VectorXd predict(const ForecastModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd predict_batch(const ForecastModel& model,
                              const Eigen::MatrixXd& X);

// Mean over rows of 0.5*||prediction - y||^2, the training objective.
double mlp_loss(const ForecastModel& model, const Eigen::MatrixXd& X,
                const Eigen::MatrixXd& Y);
std::pair<double, std::vector<double>> mlp_loss_and_grad(
    const ForecastModel& model, const Eigen::MatrixXd& X,
    const Eigen::MatrixXd& Y);

void save_checkpoint(const ForecastModel& model, const std::string& path);
ForecastModel load_checkpoint(const std::string& path);

}  // namespace cts
