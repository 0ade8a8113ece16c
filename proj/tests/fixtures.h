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

#ifndef SAFEPLAN_TESTS_FIXTURES_H_
#define SAFEPLAN_TESTS_FIXTURES_H_

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <utility>

#include <Eigen/Core>

#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/rng.h"

namespace safeplan::testing {

// predict(s, a) = s.
class IdentityModel final : public TransitionModel {
 public:
  explicit IdentityModel(int dim) : dim_(dim) {}
  int observation_dim() const override { return dim_; }
  Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                               std::span<const double>) const override {
    return obs;
  }

 private:
  int dim_;
};

// The simulator itself, seen through the model interface.
class SimulatorModel final : public TransitionModel {
 public:
  explicit SimulatorModel(const Environment& env) : env_(env) {}
  int observation_dim() const override { return env_.spec().observation_dim; }
  Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                               std::span<const double> actions) const override {
    Eigen::MatrixXd out(obs.rows(), obs.cols());
    for (Eigen::Index i = 0; i < obs.cols(); ++i) {
      out.col(i) = env_.Step(StateOf(obs.col(i)), actions[i])
                       .next_state.observation;
    }
    return out;
  }

 private:
  EnvState StateOf(const Eigen::VectorXd& o) const {
    Eigen::VectorXd internal;
    if (o.size() == 3) {
      internal.resize(2);
      internal << std::atan2(o[1], o[0]), o[2];
    } else {
      internal.resize(4);
      internal << std::atan2(o[1], o[0]), std::atan2(o[3], o[2]), o[4], o[5];
    }
    return env_.MakeState(internal);
  }
  const Environment& env_;
};

// Observation (flag, step, last action). The flag latches to 1 when the very
// first action of a rollout is positive.
class FirstActionModel final : public TransitionModel {
 public:
  int observation_dim() const override { return 3; }
  Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                               std::span<const double> actions) const override {
    Eigen::MatrixXd out = obs;
    for (Eigen::Index i = 0; i < obs.cols(); ++i) {
      if (obs(1, i) == 0.0) out(0, i) = actions[i] > 0.0 ? 1.0 : 0.0;
      out(1, i) = obs(1, i) + 1.0;
      out(2, i) = actions[i];
    }
    return out;
  }
};

// Scores observations of FirstActionModel with a caller-supplied reward of
// the last action; cost is the latched flag.
class FixtureTask final : public Task {
 public:
  explicit FixtureTask(std::function<double(double step, double action)> reward,
                       ActionSpace space = ActionSpace::Continuous(-2.0, 2.0))
      : reward_(std::move(reward)) {
    spec_.name = "fixture";
    spec_.action_space = std::move(space);
    spec_.observation_dim = 3;
    spec_.reward_min = -10.0;
    spec_.reward_max = 10.0;
    spec_.behavior_low = {-2.0, -2.0};
    spec_.behavior_high = {2.0, 2.0};
  }
  const EnvSpec& spec() const override { return spec_; }
  RewardCost Evaluate(const ObservationRef& obs, double action) const override {
    // obs[1] counts steps taken, so the first predicted state has obs[1] = 1
    return {reward_(obs[1] - 1.0, action), obs[0] > 0.5 ? 1 : 0};
  }
  std::array<double, 2> Project(const ObservationRef& obs) const override {
    return {obs[0], obs[2]};
  }

 private:
  std::function<double(double, double)> reward_;
  EnvSpec spec_;
};

// s' = 0.9 s + 0.1 a on a 2-D state with a in [-1, 1], in episodes of 100.
inline Trace LinearSystemTrace(int transitions, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kTest, 0x4c);
  Trace trace;
  Eigen::Vector2d s;
  for (int t = 0; t < transitions; ++t) {
    if (t % 100 == 0) {
      trace.BeginEpoch();
      s << UniformReal(rng, -1.0, 1.0), UniformReal(rng, -1.0, 1.0);
    }
    const double a = UniformReal(rng, -1.0, 1.0);
    const Eigen::Vector2d next = 0.9 * s + Eigen::Vector2d::Constant(0.1 * a);
    trace.Append(Transition{s, a, 0.0, 0, next});
    s = next;
  }
  return trace;
}

// s' = s for random s in [-1, 1]^2 and random actions.
inline Trace ConstantSystemTrace(int transitions, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kTest, 0x43);
  Trace trace;
  trace.BeginEpoch();
  for (int t = 0; t < transitions; ++t) {
    Eigen::Vector2d s(UniformReal(rng, -1.0, 1.0), UniformReal(rng, -1.0, 1.0));
    trace.Append(Transition{s, UniformReal(rng, -1.0, 1.0), 0.0, 0, s});
  }
  return trace;
}

}  // namespace safeplan::testing

#endif  // SAFEPLAN_TESTS_FIXTURES_H_
