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

#ifndef SAFEPLAN_MLP_H_
#define SAFEPLAN_MLP_H_

#include <vector>

#include <Eigen/Core>

#include "safeplan/rng.h"

namespace safeplan {

// Fully connected layer: y = W x + b, samples stored as columns.
struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Feed-forward network with tanh hidden units and a linear output layer.
class Mlp {
 public:
  // Per-layer pre-activation outputs kept for backpropagation.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  };

  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim);

  // Glorot-uniform weights, zero biases.
  void Initialize(Rng& rng);
  void SetZero();

  int input_dim() const;
  int output_dim() const;
  int num_parameters() const;

  Eigen::VectorXd GetParameters() const;
  void SetParameters(const Eigen::VectorXd& params);

  // x: input_dim x batch. Returns output_dim x batch.
  using Input = Eigen::Ref<const Eigen::MatrixXd>;
  Eigen::MatrixXd Forward(const Input& x) const;
  Eigen::MatrixXd Forward(const Input& x, Cache* cache) const;

  // Accumulates dL/dparams into `grads` (same shapes as layers()) given
  // dL/doutput for the batch cached by the matching Forward call.
  void Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                std::vector<DenseLayer>* grads) const;

  std::vector<DenseLayer> ZeroGradients() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

// Flattening helpers shared by gradient checking and serialization.
Eigen::VectorXd Flatten(const std::vector<DenseLayer>& layers);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const Mlp& net, AdamConfig config);
  void Step(const std::vector<DenseLayer>& grads, Mlp* net);

 private:
  AdamConfig config_;
  std::vector<DenseLayer> first_moment_;
  std::vector<DenseLayer> second_moment_;
  long step_ = 0;
};

}  // namespace safeplan

#endif  // SAFEPLAN_MLP_H_
