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

#ifndef SAFEPLAN_DYNAMICS_MODEL_H_
#define SAFEPLAN_DYNAMICS_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safeplan/environments.h"
#include "safeplan/mlp.h"

namespace safeplan {

// One real-system step (s, a, r, c, s').
struct Transition {
  Observation s;
  double a = 0.0;
  double r = 0.0;
  int c = 0;
  Observation s_next;
};

// Growing dataset of transitions with epoch boundaries.
class Trace {
 public:
  void BeginEpoch();
  void Append(Transition transition);

  std::size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }
  int num_epochs() const { return static_cast<int>(epoch_starts_.size()); }

  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::size_t>& epoch_starts() const { return epoch_starts_; }
  std::span<const Transition> epoch(int index) const;

 private:
  std::vector<Transition> transitions_;
  std::vector<std::size_t> epoch_starts_;
};

// Thrown when training produces a non-finite loss.
class ModelDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that maps (observation, action) to a next observation. Planners
// roll candidates out through this interface.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual int observation_dim() const = 0;
  // obs: observation_dim x n; one action per column.
  virtual Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                                       std::span<const double> actions) const = 0;

  Observation Predict(const ObservationRef& obs, double action) const;
};

enum class ModelLoss { kGaussianNll, kMse };

struct TrainConfig {
  int hidden_layers = 2;
  int hidden_units = 50;
  double learning_rate = 1e-3;
  int passes = 300;
  int batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double holdout_fraction = 0.1;
  ModelLoss loss = ModelLoss::kGaussianNll;
  // Re-initialize weights on every Train call instead of fine-tuning.
  bool from_scratch = false;
  // Autoregressive output order; empty means 0..d-1.
  std::vector<int> dim_order;
  // Predictions are clamped to this many training ranges around the center.
  double clamp_range_factor = 10.0;
};

struct TrainReport {
  double train_mse = 0.0;
  double holdout_mse = 0.0;
  // Hold-out MSE of the network before this call's first pass.
  double initial_holdout_mse = 0.0;
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
  // Mean minibatch loss of every pass.
  std::vector<double> pass_losses;
};

// Per-feature affine normalization with a floored scale.
struct Normalizer {
  static constexpr double kStdFloor = 1e-8;

  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Normalizer Fit(const Eigen::MatrixXd& columns);
  Eigen::MatrixXd Normalize(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd Denormalize(const Eigen::MatrixXd& z) const;
};

struct GradientCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  // Largest absolute error restricted to bias parameters.
  double max_bias_abs_error = 0.0;
  int parameters_checked = 0;
};

// Deterministic deep autoregressive network: one small net per observation
// dimension, each predicting the normalized state delta of its dimension from
// (s, a) and the deltas of the dimensions ordered before it. Each net has a
// Gaussian head (mean, log-variance); prediction uses the mean only.
class DynamicsModel final : public TransitionModel {
 public:
  DynamicsModel(int observation_dim, ActionSpace action_space,
                TrainConfig config = {});

  int observation_dim() const override { return observation_dim_; }
  const ActionSpace& action_space() const { return action_space_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<int>& dim_order() const { return dim_order_; }
  bool trained() const { return trained_; }

  // Fits all subnetworks on the leading (1 - holdout_fraction) part of the
  // trace. Deterministic for a given seed.
  TrainReport Train(const Trace& trace, std::uint64_t seed);

  // Throws std::logic_error when the model has never been trained.
  Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                               std::span<const double> actions) const override;

  // Mean squared one-step prediction error in observation units.
  double Mse(std::span<const Transition> transitions) const;

  // Analytic vs central-difference gradients of the training loss on random
  // normalized inputs; an untrained model is checked at a fresh random
  // initialization. With zero_targets the targets are all zero.
  GradientCheckResult GradientCheck(std::uint64_t seed, int samples = 10,
                                    double step = 1e-5,
                                    bool zero_targets = false) const;

  void ZeroParameters();
  const std::vector<Mlp>& subnetworks() const { return nets_; }
  const Normalizer& input_normalizer() const { return input_norm_; }
  const Normalizer& target_normalizer() const { return target_norm_; }

  void Save(const std::filesystem::path& path) const;
  static DynamicsModel Load(const std::filesystem::path& path);

 private:
  int base_input_dim() const;
  void InitializeNets(std::uint64_t seed);
  Eigen::MatrixXd EncodeInputs(const Eigen::MatrixXd& obs,
                               std::span<const double> actions) const;
  // Loss of one subnet on a batch; fills dL/doutput when grad != nullptr.
  double SubnetLoss(const Eigen::MatrixXd& output, const Eigen::VectorXd& target,
                    Eigen::MatrixXd* grad) const;

  int observation_dim_;
  ActionSpace action_space_;
  TrainConfig config_;
  std::vector<int> dim_order_;
  std::vector<Mlp> nets_;
  Normalizer input_norm_;
  Normalizer target_norm_;
  Eigen::VectorXd clamp_low_;
  Eigen::VectorXd clamp_high_;
  bool initialized_ = false;
  bool trained_ = false;
};

}  // namespace safeplan

#endif  // SAFEPLAN_DYNAMICS_MODEL_H_
