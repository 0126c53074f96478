#include "cts/forecast.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cts {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::naive: return "naive";
    case ModelKind::ridge: return "ridge";
    case ModelKind::mlp: return "mlp";
  }
  throw std::runtime_error("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "naive") return ModelKind::naive;
  if (s == "ridge") return ModelKind::ridge;
  if (s == "mlp") return ModelKind::mlp;
  throw validation_error("unknown model kind: " + s);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw validation_error("epochs must be >= 0");
  if (batch_size < 1) throw validation_error("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw validation_error("learning_rate must be > 0");
  if (!(ridge_lambda > 0)) throw validation_error("ridge_lambda must be > 0");
  if (hidden_units < 1) throw validation_error("hidden_units must be >= 1");
}

long ForecastModel::expected_param_count() const {
  switch (kind) {
    case ModelKind::naive:
      return 0;
    case ModelKind::ridge:
      return (input_dim + 1) * output_dim;
    case ModelKind::mlp:
      return input_dim * hidden + hidden + hidden * output_dim + output_dim;
  }
  throw std::runtime_error("unknown model kind");
}

ScaledSample scale_sample(const WindowSample& sample, double eps_floor) {
  const long C = static_cast<long>(sample.effect_ctx.size());
  std::vector<double> flat;
  flat.reserve(3 * C);
  flat.insert(flat.end(), sample.effect_ctx.begin(), sample.effect_ctx.end());
  flat.insert(flat.end(), sample.sync_cause_ctx.begin(),
              sample.sync_cause_ctx.end());
  flat.insert(flat.end(), sample.raw_cause_ctx.begin(),
              sample.raw_cause_ctx.end());
  ScaledWindow w = minmax_scale(flat, 3, eps_floor);
  ScaledSample out;
  out.x = std::move(w.scaled);
  for (int c = 0; c < 3; ++c) {
    out.ch_min[c] = w.ch_min[c];
    out.ch_max[c] = w.ch_max[c];
  }
  const double lo = out.ch_min[0], hi = out.ch_max[0];
  out.y.resize(sample.target.size());
  for (size_t h = 0; h < sample.target.size(); ++h)
    out.y[h] = hi - lo <= eps_floor ? 0.5 : (sample.target[h] - lo) / (hi - lo);
  return out;
}

std::vector<double> invert_target(const ScaledSample& s,
                                  const std::vector<double>& scaled_y) {
  const double lo = s.ch_min[0], hi = s.ch_max[0];
  std::vector<double> out(scaled_y.size());
  for (size_t h = 0; h < scaled_y.size(); ++h)
    out[h] = lo + scaled_y[h] * (hi - lo);
  return out;
}

ScaledSampleSet scale_set(const SampleSet& set, double eps_floor) {
  const long n = static_cast<long>(set.samples.size());
  if (n == 0) throw validation_error("scale_set: empty sample set");
  const long C = set.window.context_len;
  const long H = set.window.horizon;
  ScaledSampleSet out;
  out.X.resize(n, 3 * C);
  out.Y.resize(n, H);
  out.ch_min.resize(n, 3);
  out.ch_max.resize(n, 3);
  out.anchors.reserve(n);
  out.window = set.window;
  out.dataset_id = set.dataset_id;
  out.effect = set.effect;
  out.cause = set.cause;
  out.lag = set.lag;
  out.synchronized_pair = set.synchronized_pair;
  for (long r = 0; r < n; ++r) {
    ScaledSample s = scale_sample(set.samples[r], eps_floor);
    for (long k = 0; k < 3 * C; ++k) out.X(r, k) = s.x[k];
    for (long h = 0; h < H; ++h) out.Y(r, h) = s.y[h];
    for (int c = 0; c < 3; ++c) {
      out.ch_min(r, c) = s.ch_min[c];
      out.ch_max(r, c) = s.ch_max[c];
    }
    out.anchors.push_back(set.samples[r].anchor);
  }
  return out;
}

ScaledSampleSet concat_sets(const std::vector<ScaledSampleSet>& sets) {
  if (sets.empty()) throw validation_error("concat_sets: no sets");
  long n = 0;
  for (const auto& s : sets) {
    n += s.size();
    if (s.X.cols() != sets[0].X.cols() || s.Y.cols() != sets[0].Y.cols())
      throw validation_error("concat_sets: incompatible shapes");
  }
  ScaledSampleSet out = sets[0];
  out.X.resize(n, sets[0].X.cols());
  out.Y.resize(n, sets[0].Y.cols());
  out.ch_min.resize(n, 3);
  out.ch_max.resize(n, 3);
  out.anchors.clear();
  out.anchors.reserve(n);
  long r = 0;
  for (const auto& s : sets) {
    out.X.middleRows(r, s.size()) = s.X;
    out.Y.middleRows(r, s.size()) = s.Y;
    out.ch_min.middleRows(r, s.size()) = s.ch_min;
    out.ch_max.middleRows(r, s.size()) = s.ch_max;
    out.anchors.insert(out.anchors.end(), s.anchors.begin(), s.anchors.end());
    r += s.size();
  }
  if (sets.size() > 1) {
    out.dataset_id = "pooled";
    out.effect = out.cause = -1;
    out.lag = 0;
  }
  return out;
}

ForecastModel make_naive(long context_len, long horizon) {
  ForecastModel m;
  m.kind = ModelKind::naive;
  m.input_dim = 3 * context_len;
  m.output_dim = horizon;
  return m;
}

ForecastModel train_ridge(const ScaledSampleSet& train, double lambda) {
  if (train.size() == 0) throw validation_error("train_ridge: empty train set");
  if (!(lambda > 0)) throw validation_error("train_ridge: lambda must be > 0");
  const long n = train.size();
  const long d = train.X.cols();
  if (n < d + 1)
    std::fprintf(stderr,
                 "[warn] train_ridge: %ld samples for %ld regressors\n", n,
                 d + 1);
  Eigen::MatrixXd A(n, d + 1);
  A.leftCols(d) = train.X;
  A.col(d).setOnes();
  Eigen::MatrixXd M = A.transpose() * A;
  for (long k = 0; k < d; ++k) M(k, k) += lambda;  // bias stays unpenalized
  Eigen::MatrixXd W = M.ldlt().solve(A.transpose() * train.Y);
  ForecastModel m;
  m.kind = ModelKind::ridge;
  m.input_dim = d;
  m.output_dim = train.Y.cols();
  m.config.ridge_lambda = lambda;
  m.params.resize((d + 1) * m.output_dim);
  for (long r = 0; r < d + 1; ++r)
    for (long c = 0; c < m.output_dim; ++c)
      m.params[r * m.output_dim + c] = W(r, c);
  return m;
}

namespace {

struct MlpViews {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>> W1, W2;
  Eigen::Map<Eigen::VectorXd> b1, b2;

  MlpViews(double* p, long in, long hid, long out)
      : W1(p, in, hid),
        W2(p + in * hid + hid, hid, out),
        b1(p + in * hid, hid),
        b2(p + in * hid + hid + hid * out, out) {}
};

Eigen::MatrixXd mlp_forward(const ForecastModel& m, const Eigen::MatrixXd& X,
                            Eigen::MatrixXd* hidden_out = nullptr) {
  MlpViews v(const_cast<double*>(m.params.data()), m.input_dim, m.hidden,
             m.output_dim);
  Eigen::MatrixXd h =
      ((X * v.W1).rowwise() + v.b1.transpose()).cwiseMax(0.0);
  Eigen::MatrixXd out = (h * v.W2).rowwise() + v.b2.transpose();
  if (hidden_out) *hidden_out = std::move(h);
  return out;
}

ForecastModel train_mlp_from(std::vector<double> init_params,
                             const ScaledSampleSet& train,
                             const ScaledSampleSet& val,
                             const TrainConfig& config, Rng& rng) {
  ForecastModel m;
  m.kind = ModelKind::mlp;
  m.input_dim = train.X.cols();
  m.output_dim = train.Y.cols();
  m.hidden = config.hidden_units;
  m.config = config;
  m.params = std::move(init_params);
  if (static_cast<long>(m.params.size()) != m.expected_param_count())
    throw validation_error("train_mlp: parameter vector size mismatch");

  const long n = train.size();
  const long P = static_cast<long>(m.params.size());
  std::vector<double> adam_m(P, 0.0), adam_v(P, 0.0);
  long adam_t = 0;

  double best_val = mlp_loss(m, val.X, val.Y);
  std::vector<double> best_params = m.params;
  if (!std::isfinite(best_val))
    throw std::runtime_error("train_mlp: non-finite validation loss at epoch 0");

  std::vector<long> order(n);
  for (long k = 0; k < n; ++k) order[k] = k;

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    for (long start = 0; start < n; start += config.batch_size) {
      const long bs = std::min(config.batch_size, n - start);
      Eigen::MatrixXd Xb(bs, m.input_dim), Yb(bs, m.output_dim);
      for (long r = 0; r < bs; ++r) {
        Xb.row(r) = train.X.row(order[start + r]);
        Yb.row(r) = train.Y.row(order[start + r]);
      }
      Eigen::MatrixXd h;
      Eigen::MatrixXd out = mlp_forward(m, Xb, &h);
      Eigen::MatrixXd g = (out - Yb) / static_cast<double>(bs);
      if (!g.allFinite())
        throw std::runtime_error("train_mlp: training diverged at epoch " +
                                 std::to_string(epoch));
      MlpViews v(m.params.data(), m.input_dim, m.hidden, m.output_dim);
      Eigen::MatrixXd gW2 = h.transpose() * g;
      Eigen::VectorXd gb2 = g.colwise().sum();
      Eigen::MatrixXd gh = g * v.W2.transpose();
      gh = (h.array() > 0.0).select(gh, 0.0);
      Eigen::MatrixXd gW1 = Xb.transpose() * gh;
      Eigen::VectorXd gb1 = gh.colwise().sum();

      std::vector<double> grad(P);
      MlpViews gv(grad.data(), m.input_dim, m.hidden, m.output_dim);
      gv.W1 = gW1;
      gv.b1 = gb1;
      gv.W2 = gW2;
      gv.b2 = gb2;

      ++adam_t;
      const double b1c = 1.0 - std::pow(0.9, adam_t);
      const double b2c = 1.0 - std::pow(0.999, adam_t);
      for (long k = 0; k < P; ++k) {
        adam_m[k] = 0.9 * adam_m[k] + 0.1 * grad[k];
        adam_v[k] = 0.999 * adam_v[k] + 0.001 * grad[k] * grad[k];
        m.params[k] -= config.learning_rate * (adam_m[k] / b1c) /
                       (std::sqrt(adam_v[k] / b2c) + 1e-8);
      }
    }
    const double vl = mlp_loss(m, val.X, val.Y);
    if (!std::isfinite(vl))
      throw std::runtime_error("train_mlp: training diverged at epoch " +
                               std::to_string(epoch));
    if (vl < best_val) {
      best_val = vl;
      best_params = m.params;
    }
  }
  m.params = std::move(best_params);
  return m;
}

}  // namespace

ForecastModel train_mlp(const ScaledSampleSet& train,
                        const ScaledSampleSet& val,
                        const TrainConfig& config) {
  config.validate();
  if (train.size() == 0) throw validation_error("train_mlp: empty train set");
  if (val.size() == 0) throw validation_error("train_mlp: empty validation set");
  if (train.X.cols() != val.X.cols() || train.Y.cols() != val.Y.cols())
    throw validation_error("train_mlp: train/val shape mismatch");
  const long in = train.X.cols(), out = train.Y.cols(),
             hid = config.hidden_units;
  Rng rng(config.seed);
  std::vector<double> params(in * hid + hid + hid * out + out, 0.0);
  const double lim1 = std::sqrt(6.0 / static_cast<double>(in + hid));
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hid + out));
  for (long k = 0; k < in * hid; ++k) params[k] = rng.uniform(-lim1, lim1);
  double* w2 = params.data() + in * hid + hid;
  for (long k = 0; k < hid * out; ++k) w2[k] = rng.uniform(-lim2, lim2);
  return train_mlp_from(std::move(params), train, val, config, rng);
}

ForecastModel pretrain_finetune(const std::vector<ScaledSampleSet>& sources,
                                const ScaledSampleSet& target_train,
                                const ScaledSampleSet& target_val,
                                const TrainConfig& config) {
  if (sources.empty())
    throw validation_error("pretrain_finetune: empty source pool");
  config.validate();
  ScaledSampleSet pool = concat_sets(sources);
  const long n = pool.size();
  const long n_val = std::max<long>(1, n / 10);
  if (n - n_val < 1)
    throw validation_error("pretrain_finetune: source pool too small");
  auto slice = [&](long lo, long hi) {
    ScaledSampleSet s = pool;
    const long len = hi - lo;
    s.X = pool.X.middleRows(lo, len).eval();
    s.Y = pool.Y.middleRows(lo, len).eval();
    s.ch_min = pool.ch_min.middleRows(lo, len).eval();
    s.ch_max = pool.ch_max.middleRows(lo, len).eval();
    s.anchors.assign(pool.anchors.begin() + lo, pool.anchors.begin() + hi);
    return s;
  };
  ForecastModel pre = train_mlp(slice(0, n - n_val), slice(n - n_val, n), config);
  TrainConfig ft = config;
  ft.learning_rate = config.learning_rate * 0.1;
  ft.epochs = config.epochs / 2;
  Rng rng(derive_seed(config.seed, 0x66696e65));  // distinct fine-tune stream
  ForecastModel tuned =
      train_mlp_from(std::move(pre.params), target_train, target_val, ft, rng);
  return tuned;
}

Eigen::MatrixXd predict_batch(const ForecastModel& model,
                              const Eigen::MatrixXd& X) {
  if (X.cols() != model.input_dim)
    throw validation_error("predict: input width " + std::to_string(X.cols()) +
                           " != model input_dim " +
                           std::to_string(model.input_dim));
  if (static_cast<long>(model.params.size()) != model.expected_param_count())
    throw validation_error("predict: corrupt parameter vector");
  switch (model.kind) {
    case ModelKind::naive: {
      const long C = model.input_dim / 3;
      Eigen::MatrixXd out(X.rows(), model.output_dim);
      for (long r = 0; r < X.rows(); ++r) out.row(r).setConstant(X(r, C - 1));
      return out;
    }
    case ModelKind::ridge: {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          W(model.params.data(), model.input_dim + 1, model.output_dim);
      return (X * W.topRows(model.input_dim)).rowwise() +
             W.row(model.input_dim);
    }
    case ModelKind::mlp:
      return mlp_forward(model, X);
  }
  throw std::runtime_error("unknown model kind");
}

Eigen::VectorXd predict(const ForecastModel& model, const Eigen::VectorXd& x) {
  Eigen::MatrixXd out = predict_batch(model, x.transpose());
  return out.row(0);
}

double mlp_loss(const ForecastModel& model, const Eigen::MatrixXd& X,
                const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd out = predict_batch(model, X);
  return 0.5 * (out - Y).squaredNorm() / static_cast<double>(X.rows());
}

std::pair<double, std::vector<double>> mlp_loss_and_grad(
    const ForecastModel& model, const Eigen::MatrixXd& X,
    const Eigen::MatrixXd& Y) {
  if (model.kind != ModelKind::mlp)
    throw validation_error("mlp_loss_and_grad: model is not an mlp");
  const long n = X.rows();
  Eigen::MatrixXd h;
  Eigen::MatrixXd out = mlp_forward(model, X, &h);
  const double loss = 0.5 * (out - Y).squaredNorm() / static_cast<double>(n);
  Eigen::MatrixXd g = (out - Y) / static_cast<double>(n);
  MlpViews v(const_cast<double*>(model.params.data()), model.input_dim,
             model.hidden, model.output_dim);
  std::vector<double> grad(model.params.size());
  MlpViews gv(grad.data(), model.input_dim, model.hidden, model.output_dim);
  gv.W2 = h.transpose() * g;
  gv.b2 = g.colwise().sum();
  Eigen::MatrixXd gh = g * v.W2.transpose();
  gh = (h.array() > 0.0).select(gh, 0.0);
  gv.W1 = X.transpose() * gh;
  gv.b1 = gh.colwise().sum();
  return {loss, std::move(grad)};
}

void save_checkpoint(const ForecastModel& model, const std::string& path) {
  if (static_cast<long>(model.params.size()) != model.expected_param_count())
    throw validation_error("save_checkpoint: corrupt parameter vector");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "cts-checkpoint v1\n";
  out << "kind " << to_string(model.kind) << '\n';
  out << "input_dim " << model.input_dim << '\n';
  out << "output_dim " << model.output_dim << '\n';
  out << "hidden " << model.hidden << '\n';
  out << "epochs " << model.config.epochs << '\n';
  out << "batch_size " << model.config.batch_size << '\n';
  out << "learning_rate " << format_double(model.config.learning_rate) << '\n';
  out << "ridge_lambda " << format_double(model.config.ridge_lambda) << '\n';
  out << "hidden_units " << model.config.hidden_units << '\n';
  out << "seed " << model.config.seed << '\n';
  out << "params " << model.params.size() << '\n';
  for (double p : model.params) out << format_double(p) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

ForecastModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "cts-checkpoint v1")
    throw validation_error(path + ": not a checkpoint file");
  ForecastModel m;
  long n_params = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, value;
    ls >> key >> value;
    if (key == "kind") m.kind = model_kind_from_string(value);
    else if (key == "input_dim") m.input_dim = std::stol(value);
    else if (key == "output_dim") m.output_dim = std::stol(value);
    else if (key == "hidden") m.hidden = std::stol(value);
    else if (key == "epochs") m.config.epochs = std::stol(value);
    else if (key == "batch_size") m.config.batch_size = std::stol(value);
    else if (key == "learning_rate") m.config.learning_rate = parse_double(value);
    else if (key == "ridge_lambda") m.config.ridge_lambda = parse_double(value);
    else if (key == "hidden_units") m.config.hidden_units = std::stol(value);
    else if (key == "seed") m.config.seed = std::stoull(value);
    else if (key == "params") { n_params = std::stol(value); break; }
    else throw validation_error(path + ": unknown checkpoint key " + key);
  }
  if (n_params < 0) throw validation_error(path + ": missing params section");
  m.params.reserve(n_params);
  for (long k = 0; k < n_params; ++k) {
    if (!std::getline(in, line))
      throw validation_error(path + ": truncated parameter section");
    m.params.push_back(parse_double(line));
  }
  if (static_cast<long>(m.params.size()) != m.expected_param_count())
    throw validation_error(path + ": parameter count does not match dims");
  return m;
}

}  // namespace cts
