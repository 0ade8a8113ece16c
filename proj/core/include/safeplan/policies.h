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

#ifndef SAFEPLAN_POLICIES_H_
#define SAFEPLAN_POLICIES_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "safeplan/environments.h"
#include "safeplan/rng.h"

namespace safeplan {

// Sigmoid network mapping an observation to an action. A continuous space
// uses one output unit scaled onto [low, high]; a discrete space uses one
// unit per member and takes the argmax (lowest index on ties).
struct PolicyArchitecture {
  int input_dim = 0;
  std::vector<int> hidden;
  ActionSpace action_space;

  int output_dim() const {
    return action_space.discrete ? static_cast<int>(action_space.values.size())
                                 : 1;
  }
  int num_parameters() const;
};

// One hidden layer for the pendulum, two for the acrobot, 5 units each.
PolicyArchitecture DefaultPolicyArchitecture(const EnvSpec& spec);

class Policy {
 public:
  Policy(PolicyArchitecture architecture, Eigen::VectorXd params);

  double Act(const ObservationRef& obs) const;

  const PolicyArchitecture& architecture() const { return architecture_; }
  const Eigen::VectorXd& params() const { return params_; }

 private:
  PolicyArchitecture architecture_;
  Eigen::VectorXd params_;  // per layer: weights (column-major), then biases
};

inline constexpr double kPolicyInitRange = 1.0;

// Parameters i.i.d. uniform in [-1, 1].
Policy SamplePolicy(Rng& rng, const PolicyArchitecture& architecture);

// Child with Gaussian noise of standard deviation sigma on every parameter.
Policy Vary(Rng& rng, const Policy& parent, double sigma);

enum class BehaviorReduction { kFinalState, kMeanState };

struct BehaviorDescriptor {
  std::array<double, 2> b{};
  int i = 0;
  int j = 0;

  int Cell(int grid_size) const { return i * grid_size + j; }
};

// Uniform binning of x over [low, high]; out-of-range values are clamped and
// the upper bound falls into the last bin.
int BinIndex(double x, double low, double high, int bins);

// Projects a simulated trajectory onto the task's behavior space and maps it
// to a grid cell.
BehaviorDescriptor ComputeBehaviorDescriptor(
    const Task& task, std::span<const Observation> trajectory,
    int grid_size = 50,
    BehaviorReduction reduction = BehaviorReduction::kFinalState);

BehaviorDescriptor DescriptorFromPoint(const EnvSpec& spec,
                                       std::array<double, 2> point,
                                       int grid_size);

}  // namespace safeplan

#endif  // SAFEPLAN_POLICIES_H_
