// Copyright 2026 The Safeplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "safeplan/dynamics_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "safeplan/rng.h"

namespace safeplan {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;
// soft bounds on the predicted log-variance
constexpr double kMinLogVar = -10.0;
constexpr double kMaxLogVar = 1.0;

double Softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void CheckPermutation(const std::vector<int>& order, int dim) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(sorted.size()) != dim || sorted[i] != i) {
      throw std::invalid_argument(
          "dim_order must be a permutation of the observation dimensions");
    }
  }
}

}  // namespace

// ------------------------------------------------------------------- Trace

void Trace::BeginEpoch() { epoch_starts_.push_back(transitions_.size()); }

void Trace::Append(Transition transition) {
  if (epoch_starts_.empty()) BeginEpoch();
  transitions_.push_back(std::move(transition));
}

std::span<const Transition> Trace::epoch(int index) const {
  const std::size_t begin = epoch_starts_.at(index);
  const std::size_t end = index + 1 < num_epochs()
                              ? epoch_starts_[index + 1]
                              : transitions_.size();
  return {transitions_.data() + begin, end - begin};
}

Observation TransitionModel::Predict(const ObservationRef& obs,
                                     double action) const {
  const Eigen::MatrixXd column = obs;
  const double actions[1] = {action};
  return PredictBatch(column, actions).col(0);
}

// -------------------------------------------------------------- Normalizer

Normalizer Normalizer::Fit(const Eigen::MatrixXd& columns) {
  Normalizer norm;
  const double n = static_cast<double>(columns.cols());
  norm.mean = columns.rowwise().mean();
  norm.std.resize(columns.rows());
  for (Eigen::Index i = 0; i < columns.rows(); ++i) {
    const double var =
        n > 0 ? (columns.row(i).array() - norm.mean[i]).square().sum() / n
              : 0.0;
    norm.std[i] = std::max(std::sqrt(var), kStdFloor);
  }
  return norm;
}

Eigen::MatrixXd Normalizer::Normalize(const Eigen::MatrixXd& x) const {
  return ((x.colwise() - mean).array().colwise() / std.array()).matrix();
}

Eigen::MatrixXd Normalizer::Denormalize(const Eigen::MatrixXd& z) const {
  return ((z.array().colwise() * std.array()).matrix().colwise() + mean);
}

// ----------------------------------------------------------- DynamicsModel

DynamicsModel::DynamicsModel(int observation_dim, ActionSpace action_space,
                             TrainConfig config)
    : observation_dim_(observation_dim),
      action_space_(std::move(action_space)),
      config_(std::move(config)) {
  if (observation_dim_ <= 0) {
    throw std::invalid_argument("observation_dim must be positive");
  }
  dim_order_ = config_.dim_order;
  if (dim_order_.empty()) {
    dim_order_.resize(observation_dim_);
    std::iota(dim_order_.begin(), dim_order_.end(), 0);
  }
  CheckPermutation(dim_order_, observation_dim_);

  const std::vector<int> hidden(config_.hidden_layers, config_.hidden_units);
  const int outputs = config_.loss == ModelLoss::kGaussianNll ? 2 : 1;
  for (int p = 0; p < observation_dim_; ++p) {
    nets_.emplace_back(base_input_dim() + p, hidden, outputs);
  }
  input_norm_.mean = Eigen::VectorXd::Zero(base_input_dim());
  input_norm_.std = Eigen::VectorXd::Ones(base_input_dim());
  target_norm_.mean = Eigen::VectorXd::Zero(observation_dim_);
  target_norm_.std = Eigen::VectorXd::Ones(observation_dim_);
  clamp_low_ = Eigen::VectorXd::Constant(observation_dim_, -std::numeric_limits<double>::max());
  clamp_high_ = Eigen::VectorXd::Constant(observation_dim_, std::numeric_limits<double>::max());
}

int DynamicsModel::base_input_dim() const {
  return observation_dim_ + action_space_.encoded_dim();
}

void DynamicsModel::InitializeNets(std::uint64_t seed) {
  Rng rng(Mix64(seed));
  for (Mlp& net : nets_) net.Initialize(rng);
  initialized_ = true;
}

void DynamicsModel::ZeroParameters() {
  for (Mlp& net : nets_) net.SetZero();
  initialized_ = true;
}

Eigen::MatrixXd DynamicsModel::EncodeInputs(
    const Eigen::MatrixXd& obs, std::span<const double> actions) const {
  if (obs.rows() != observation_dim_ ||
      static_cast<std::size_t>(obs.cols()) != actions.size()) {
    throw std::invalid_argument("observation/action batch shape mismatch");
  }
  const int action_dim = action_space_.encoded_dim();
  Eigen::MatrixXd x(base_input_dim(), obs.cols());
  x.topRows(observation_dim_) = obs;
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    double encoded[16];
    if (action_dim > 16) throw std::invalid_argument("action set too large");
    action_space_.Encode(actions[j], encoded);
    for (int k = 0; k < action_dim; ++k) x(observation_dim_ + k, j) = encoded[k];
  }
  return x;
}

double DynamicsModel::SubnetLoss(const Eigen::MatrixXd& output,
                                 const Eigen::VectorXd& target,
                                 Eigen::MatrixXd* grad) const {
  const Eigen::Index batch = output.cols();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  if (grad != nullptr) grad->resize(output.rows(), batch);
  if (config_.loss == ModelLoss::kMse) {
    for (Eigen::Index j = 0; j < batch; ++j) {
      const double r = target[j] - output(0, j);
      loss += r * r;
      if (grad != nullptr) (*grad)(0, j) = -2.0 * r * inv_batch;
    }
    return loss * inv_batch;
  }
  for (Eigen::Index j = 0; j < batch; ++j) {
    const double raw = output(1, j);
    const double upper = kMaxLogVar - Softplus(kMaxLogVar - raw);
    const double log_var = kMinLogVar + Softplus(upper - kMinLogVar);
    const double dlog_var = Sigmoid(kMaxLogVar - raw) * Sigmoid(upper - kMinLogVar);
    const double r = target[j] - output(0, j);
    const double precision = std::exp(-log_var);
    loss += 0.5 * (log_var + r * r * precision);
    if (grad != nullptr) {
      (*grad)(0, j) = -r * precision * inv_batch;
      (*grad)(1, j) = 0.5 * (1.0 - r * r * precision) * dlog_var * inv_batch;
    }
  }
  return loss * inv_batch;
}

TrainReport DynamicsModel::Train(const Trace& trace, std::uint64_t seed) {
  if (trace.empty()) throw std::invalid_argument("cannot train on empty trace");
  const auto& all = trace.transitions();
  const std::size_t n = all.size();
  std::size_t holdout = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * config_.holdout_fraction));
  if (holdout >= n) holdout = 0;
  const std::size_t train = n - holdout;

  const int d = observation_dim_;
  Eigen::MatrixXd states(d, train);
  Eigen::MatrixXd deltas(d, train);
  std::vector<double> actions(train);
  for (std::size_t j = 0; j < train; ++j) {
    if (all[j].s.size() != d || all[j].s_next.size() != d) {
      throw std::invalid_argument("transition dimension mismatch");
    }
    states.col(j) = all[j].s;
    deltas.col(j) = all[j].s_next - all[j].s;
    actions[j] = all[j].a;
  }
  const Eigen::MatrixXd inputs = EncodeInputs(states, actions);
  input_norm_ = Normalizer::Fit(inputs);
  target_norm_ = Normalizer::Fit(deltas);
  for (int i = 0; i < d; ++i) {
    double lo = HUGE_VAL;
    double hi = -HUGE_VAL;
    for (std::size_t j = 0; j < train; ++j) {
      lo = std::min(lo, all[j].s_next[i]);
      hi = std::max(hi, all[j].s_next[i]);
    }
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * config_.clamp_range_factor;
    clamp_low_[i] = center - half;
    clamp_high_[i] = center + half;
  }

  if (!initialized_ || config_.from_scratch) InitializeNets(seed);
  trained_ = true;

  const std::span<const Transition> train_span(all.data(), train);
  const std::span<const Transition> holdout_span(all.data() + train, holdout);

  TrainReport report;
  report.train_size = train;
  report.holdout_size = holdout;
  report.initial_holdout_mse = holdout > 0 ? Mse(holdout_span) : 0.0;

  // rows: normalized inputs, then normalized targets in autoregressive order
  const int base = base_input_dim();
  Eigen::MatrixXd stacked(base + d, train);
  stacked.topRows(base) = input_norm_.Normalize(inputs);
  const Eigen::MatrixXd targets = target_norm_.Normalize(deltas);
  for (int p = 0; p < d; ++p) stacked.row(base + p) = targets.row(dim_order_[p]);

  AdamConfig adam_config{config_.learning_rate, config_.beta1, config_.beta2,
                         config_.epsilon};
  std::vector<Adam> optimizers;
  optimizers.reserve(nets_.size());
  for (const Mlp& net : nets_) optimizers.emplace_back(net, adam_config);

  Rng rng(DeriveSeed(seed, Stream::kModel, 0x5348u));
  std::vector<Eigen::Index> order(train);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch_size =
      static_cast<std::size_t>(std::max(1, config_.batch_size));

  Mlp::Cache cache;
  Eigen::MatrixXd grad_out;
  for (int pass = 0; pass < config_.passes; ++pass) {
    for (std::size_t i = train; i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    }
    double pass_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < train; start += batch_size) {
      const std::size_t stop = std::min(train, start + batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + start,
                                          order.begin() + stop);
      const Eigen::MatrixXd batch = stacked(Eigen::all, idx);
      double batch_loss = 0.0;
      for (int p = 0; p < d; ++p) {
        const Eigen::MatrixXd out =
            nets_[p].Forward(batch.topRows(base + p), &cache);
        const Eigen::VectorXd target = batch.row(base + p).transpose();
        batch_loss += SubnetLoss(out, target, &grad_out);
        auto grads = nets_[p].ZeroGradients();
        nets_[p].Backward(cache, grad_out, &grads);
        optimizers[p].Step(grads, &nets_[p]);
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "dynamics model diverged: non-finite loss at pass " << pass
            << ", batch starting at " << start << " of " << train
            << " transitions";
        throw ModelDivergence(msg.str());
      }
      pass_loss += batch_loss;
      ++batches;
    }
    report.pass_losses.push_back(pass_loss / batches);
  }

  report.train_mse = Mse(train_span);
  report.holdout_mse = holdout > 0 ? Mse(holdout_span) : 0.0;
  return report;
}

Eigen::MatrixXd DynamicsModel::PredictBatch(
    const Eigen::MatrixXd& obs, std::span<const double> actions) const {
  if (!trained_) throw std::logic_error("dynamics model used before training");
  const int base = base_input_dim();
  const int d = observation_dim_;
  Eigen::MatrixXd stacked(base + d, obs.cols());
  stacked.topRows(base) = input_norm_.Normalize(EncodeInputs(obs, actions));
  for (int p = 0; p < d; ++p) {
    // conditioned on the predictions of the dims ordered before p
    stacked.row(base + p) = nets_[p].Forward(stacked.topRows(base + p)).row(0);
  }
  Eigen::MatrixXd normalized(d, obs.cols());
  for (int p = 0; p < d; ++p) normalized.row(dim_order_[p]) = stacked.row(base + p);
  Eigen::MatrixXd next = obs + target_norm_.Denormalize(normalized);
  for (int i = 0; i < d; ++i) {
    next.row(i) = next.row(i).cwiseMax(clamp_low_[i]).cwiseMin(clamp_high_[i]);
  }
  return next;
}

double DynamicsModel::Mse(std::span<const Transition> transitions) const {
  if (transitions.empty()) return 0.0;
  const Eigen::Index n = static_cast<Eigen::Index>(transitions.size());
  Eigen::MatrixXd states(observation_dim_, n);
  Eigen::MatrixXd next(observation_dim_, n);
  std::vector<double> actions(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    states.col(j) = transitions[j].s;
    next.col(j) = transitions[j].s_next;
    actions[j] = transitions[j].a;
  }
  const Eigen::MatrixXd predicted = PredictBatch(states, actions);
  return (predicted - next).squaredNorm() / static_cast<double>(next.size());
}

GradientCheckResult DynamicsModel::GradientCheck(std::uint64_t seed,
                                                 int samples, double step,
                                                 bool zero_targets) const {
  Rng rng(DeriveSeed(seed, Stream::kTest, 0x6763u));
  GradientCheckResult result;
  for (int p = 0; p < observation_dim_; ++p) {
    Mlp net = nets_[p];
    if (!initialized_) net.Initialize(rng);
    Eigen::MatrixXd x(net.input_dim(), samples);
    Eigen::VectorXd target(samples);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = StandardNormal(rng);
      target[j] = zero_targets ? 0.0 : StandardNormal(rng);
    }

    Mlp::Cache cache;
    Eigen::MatrixXd grad_out;
    SubnetLoss(net.Forward(x, &cache), target, &grad_out);
    auto grads = net.ZeroGradients();
    net.Backward(cache, grad_out, &grads);
    const Eigen::VectorXd analytic = Flatten(grads);

    // mark which flattened entries are biases
    std::vector<bool> is_bias;
    for (const DenseLayer& layer : net.layers()) {
      is_bias.insert(is_bias.end(), layer.weight.size(), false);
      is_bias.insert(is_bias.end(), layer.bias.size(), true);
    }

    Eigen::VectorXd params = net.GetParameters();
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + step;
      net.SetParameters(params);
      const double plus = SubnetLoss(net.Forward(x), target, nullptr);
      params[i] = saved - step;
      net.SetParameters(params);
      const double minus = SubnetLoss(net.Forward(x), target, nullptr);
      params[i] = saved;

      const double numeric = (plus - minus) / (2.0 * step);
      const double abs_error = std::abs(numeric - analytic[i]);
      const double scale =
          std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
      result.max_abs_error = std::max(result.max_abs_error, abs_error);
      result.max_rel_error = std::max(result.max_rel_error, abs_error / scale);
      if (is_bias[i]) {
        result.max_bias_abs_error =
            std::max(result.max_bias_abs_error, abs_error);
      }
      ++result.parameters_checked;
    }
  }
  return result;
}

// ------------------------------------------------------------- checkpoints

namespace {

json VectorToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void DynamicsModel::Save(const std::filesystem::path& path) const {
  json doc;
  doc["format"] = "safeplan.dynamics_model";
  doc["version"] = kCheckpointVersion;
  doc["observation_dim"] = observation_dim_;
  doc["action_space"] = {{"discrete", action_space_.discrete},
                         {"low", action_space_.low},
                         {"high", action_space_.high},
                         {"values", action_space_.values}};
  doc["config"] = {{"hidden_layers", config_.hidden_layers},
                   {"hidden_units", config_.hidden_units},
                   {"loss", config_.loss == ModelLoss::kMse ? "mse" : "gaussian_nll"},
                   {"clamp_range_factor", config_.clamp_range_factor}};
  doc["dim_order"] = dim_order_;
  doc["trained"] = trained_;
  doc["input_norm"] = {{"mean", VectorToJson(input_norm_.mean)},
                       {"std", VectorToJson(input_norm_.std)}};
  doc["target_norm"] = {{"mean", VectorToJson(target_norm_.mean)},
                        {"std", VectorToJson(target_norm_.std)}};
  doc["clamp_low"] = VectorToJson(clamp_low_);
  doc["clamp_high"] = VectorToJson(clamp_high_);
  json nets = json::array();
  for (const Mlp& net : nets_) nets.push_back(VectorToJson(net.GetParameters()));
  doc["subnetworks"] = nets;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

DynamicsModel DynamicsModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json doc = json::parse(in);
  if (doc.value("format", "") != "safeplan.dynamics_model" ||
      doc.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error(path.string() + " is not a supported checkpoint");
  }
  const json& as = doc.at("action_space");
  ActionSpace space =
      as.at("discrete").get<bool>()
          ? ActionSpace::Discrete(as.at("values").get<std::vector<double>>())
          : ActionSpace::Continuous(as.at("low").get<double>(),
                                    as.at("high").get<double>());
  TrainConfig config;
  const json& cfg = doc.at("config");
  config.hidden_layers = cfg.at("hidden_layers").get<int>();
  config.hidden_units = cfg.at("hidden_units").get<int>();
  config.loss = cfg.at("loss").get<std::string>() == "mse" ? ModelLoss::kMse
                                                           : ModelLoss::kGaussianNll;
  config.clamp_range_factor = cfg.at("clamp_range_factor").get<double>();
  config.dim_order = doc.at("dim_order").get<std::vector<int>>();

  DynamicsModel model(doc.at("observation_dim").get<int>(), std::move(space),
                      config);
  model.input_norm_.mean = VectorFromJson(doc.at("input_norm").at("mean"));
  model.input_norm_.std = VectorFromJson(doc.at("input_norm").at("std"));
  model.target_norm_.mean = VectorFromJson(doc.at("target_norm").at("mean"));
  model.target_norm_.std = VectorFromJson(doc.at("target_norm").at("std"));
  model.clamp_low_ = VectorFromJson(doc.at("clamp_low"));
  model.clamp_high_ = VectorFromJson(doc.at("clamp_high"));
  const json& nets = doc.at("subnetworks");
  if (nets.size() != model.nets_.size()) {
    throw std::runtime_error("checkpoint subnetwork count mismatch");
  }
  for (std::size_t p = 0; p < model.nets_.size(); ++p) {
    model.nets_[p].SetParameters(VectorFromJson(nets[p]));
  }
  model.initialized_ = true;
  model.trained_ = doc.at("trained").get<bool>();
  return model;
}

}  // namespace safeplan
