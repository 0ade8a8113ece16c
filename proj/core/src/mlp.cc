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

#include "safeplan/mlp.h"

#include <cmath>
#include <stdexcept>

namespace safeplan {

namespace {

// tanh through the vectorized exp: 1 - 2 / (exp(2x) + 1).
Eigen::MatrixXd Tanh(const Eigen::MatrixXd& x) {
  return (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix();
}

}  // namespace

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim) {
  if (input_dim <= 0 || output_dim <= 0) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  int in = input_dim;
  for (int width : hidden) {
    layers_.push_back({Eigen::MatrixXd::Zero(width, in),
                       Eigen::VectorXd::Zero(width)});
    in = width;
  }
  layers_.push_back({Eigen::MatrixXd::Zero(output_dim, in),
                     Eigen::VectorXd::Zero(output_dim)});
}

void Mlp::Initialize(Rng& rng) {
  for (DenseLayer& layer : layers_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() +
                                            layer.weight.cols()));
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        layer.weight(i, j) = UniformReal(rng, -limit, limit);
      }
    }
    layer.bias.setZero();
  }
}

void Mlp::SetZero() {
  for (DenseLayer& layer : layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

int Mlp::num_parameters() const {
  int n = 0;
  for (const DenseLayer& layer : layers_) {
    n += static_cast<int>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

Eigen::VectorXd Flatten(const std::vector<DenseLayer>& layers) {
  Eigen::Index n = 0;
  for (const DenseLayer& layer : layers) {
    n += layer.weight.size() + layer.bias.size();
  }
  Eigen::VectorXd flat(n);
  Eigen::Index offset = 0;
  for (const DenseLayer& layer : layers) {
    flat.segment(offset, layer.weight.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.weight.data(),
                                          layer.weight.size());
    offset += layer.weight.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

Eigen::VectorXd Mlp::GetParameters() const { return Flatten(layers_); }

void Mlp::SetParameters(const Eigen::VectorXd& params) {
  if (params.size() != num_parameters()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  Eigen::Index offset = 0;
  for (DenseLayer& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()) =
        params.segment(offset, layer.weight.size());
    offset += layer.weight.size();
    layer.bias = params.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

Eigen::MatrixXd Mlp::Forward(const Input& x) const {
  return Forward(x, nullptr);
}

Eigen::MatrixXd Mlp::Forward(const Input& x, Cache* cache) const {
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("network input has wrong dimension");
  }
  if (cache != nullptr) cache->inputs.clear();
  Eigen::MatrixXd h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (cache != nullptr) cache->inputs.push_back(h);
    Eigen::MatrixXd z = layers_[k].weight * h;
    z.colwise() += layers_[k].bias;
    h = (k + 1 < layers_.size()) ? Tanh(z) : std::move(z);
  }
  return h;
}

std::vector<DenseLayer> Mlp::ZeroGradients() const {
  std::vector<DenseLayer> grads;
  grads.reserve(layers_.size());
  for (const DenseLayer& layer : layers_) {
    grads.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(),
                                           layer.weight.cols()),
                     Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return grads;
}

void Mlp::Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                   std::vector<DenseLayer>* grads) const {
  Eigen::MatrixXd delta = grad_output;  // dL/dz of the current layer
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Eigen::MatrixXd& input = cache.inputs[k];
    (*grads)[k].weight.noalias() += delta * input.transpose();
    (*grads)[k].bias += delta.rowwise().sum();
    if (k == 0) break;
    // input to layer k is tanh output of layer k-1
    Eigen::MatrixXd back = layers_[k].weight.transpose() * delta;
    delta = (back.array() * (1.0 - input.array().square())).matrix();
  }
}

Adam::Adam(const Mlp& net, AdamConfig config)
    : config_(config),
      first_moment_(net.ZeroGradients()),
      second_moment_(net.ZeroGradients()) {}

void Adam::Step(const std::vector<DenseLayer>& grads, Mlp* net) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const double lr = config_.learning_rate * std::sqrt(c2) / c1;
  // epsilon scaled so it matches the textbook bias-corrected update
  const double eps = config_.epsilon * std::sqrt(c2);
  auto& layers = net->mutable_layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m.array() = config_.beta1 * m.array() + (1.0 - config_.beta1) * g.array();
      v.array() = config_.beta2 * v.array() +
                  (1.0 - config_.beta2) * g.array().square();
      param.array() -= lr * m.array() / (v.array().sqrt() + eps);
    };
    update(layers[k].weight, first_moment_[k].weight, second_moment_[k].weight,
           grads[k].weight);
    update(layers[k].bias, first_moment_[k].bias, second_moment_[k].bias,
           grads[k].bias);
  }
}

}  // namespace safeplan
