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

#include "safeplan/policies.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeplan {

namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int PolicyArchitecture::num_parameters() const {
  int n = 0;
  int in = input_dim;
  for (int width : hidden) {
    n += width * in + width;
    in = width;
  }
  return n + output_dim() * in + output_dim();
}

PolicyArchitecture DefaultPolicyArchitecture(const EnvSpec& spec) {
  PolicyArchitecture arch;
  arch.input_dim = spec.observation_dim;
  arch.action_space = spec.action_space;
  arch.hidden = spec.action_space.discrete ? std::vector<int>{5, 5}
                                           : std::vector<int>{5};
  return arch;
}

Policy::Policy(PolicyArchitecture architecture, Eigen::VectorXd params)
    : architecture_(std::move(architecture)), params_(std::move(params)) {
  if (params_.size() != architecture_.num_parameters()) {
    throw std::invalid_argument("policy parameter count does not match architecture");
  }
}

double Policy::Act(const ObservationRef& obs) const {
  if (obs.size() != architecture_.input_dim) {
    throw std::invalid_argument("policy input has wrong dimension");
  }
  Eigen::VectorXd h = obs;
  Eigen::Index offset = 0;
  auto layer = [&](int out) {
    const Eigen::Index in = h.size();
    const Eigen::Map<const Eigen::MatrixXd> weight(params_.data() + offset, out, in);
    offset += out * in;
    const Eigen::Map<const Eigen::VectorXd> bias(params_.data() + offset, out);
    offset += out;
    Eigen::VectorXd z = weight * h + bias;
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = Sigmoid(z[k]);
    h = std::move(z);
  };
  for (int width : architecture_.hidden) layer(width);
  layer(architecture_.output_dim());

  const ActionSpace& space = architecture_.action_space;
  if (!space.discrete) return space.low + (space.high - space.low) * h[0];
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < h.size(); ++k) {
    if (h[k] > h[best]) best = k;
  }
  return space.values[best];
}

Policy SamplePolicy(Rng& rng, const PolicyArchitecture& architecture) {
  Eigen::VectorXd params(architecture.num_parameters());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] = UniformReal(rng, -kPolicyInitRange, kPolicyInitRange);
  }
  return Policy(architecture, std::move(params));
}

Policy Vary(Rng& rng, const Policy& parent, double sigma) {
  Eigen::VectorXd params = parent.params();
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] += sigma * StandardNormal(rng);
  }
  return Policy(parent.architecture(), std::move(params));
}

int BinIndex(double x, double low, double high, int bins) {
  if (!(x > low)) return 0;  // also catches NaN
  if (x >= high) return bins - 1;
  const int index = static_cast<int>(std::floor(bins * (x - low) / (high - low)));
  return std::clamp(index, 0, bins - 1);
}

BehaviorDescriptor DescriptorFromPoint(const EnvSpec& spec,
                                       std::array<double, 2> point,
                                       int grid_size) {
  BehaviorDescriptor desc;
  for (int k = 0; k < 2; ++k) {
    const double v = std::isnan(point[k]) ? spec.behavior_low[k] : point[k];
    desc.b[k] = std::clamp(v, spec.behavior_low[k], spec.behavior_high[k]);
  }
  desc.i = BinIndex(desc.b[0], spec.behavior_low[0], spec.behavior_high[0], grid_size);
  desc.j = BinIndex(desc.b[1], spec.behavior_low[1], spec.behavior_high[1], grid_size);
  return desc;
}

BehaviorDescriptor ComputeBehaviorDescriptor(
    const Task& task, std::span<const Observation> trajectory, int grid_size,
    BehaviorReduction reduction) {
  if (trajectory.empty()) {
    throw std::invalid_argument("behavior descriptor needs a non-empty trajectory");
  }
  std::array<double, 2> point{};
  if (reduction == BehaviorReduction::kFinalState) {
    point = task.Project(trajectory.back());
  } else {
    for (const Observation& obs : trajectory) {
      const auto p = task.Project(obs);
      point[0] += p[0];
      point[1] += p[1];
    }
    point[0] /= static_cast<double>(trajectory.size());
    point[1] /= static_cast<double>(trajectory.size());
  }
  return DescriptorFromPoint(task.spec(), point, grid_size);
}

}  // namespace safeplan
