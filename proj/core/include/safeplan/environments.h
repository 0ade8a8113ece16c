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

#ifndef SAFEPLAN_ENVIRONMENTS_H_
#define SAFEPLAN_ENVIRONMENTS_H_

#include <array>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace safeplan {

using Observation = Eigen::VectorXd;
using ObservationRef = Eigen::Ref<const Eigen::VectorXd>;

struct ActionSpace {
  bool discrete = false;
  double low = -1.0;
  double high = 1.0;
  std::vector<double> values;  // members of a discrete space, in index order

  static ActionSpace Continuous(double low, double high);
  static ActionSpace Discrete(std::vector<double> values);

  bool Contains(double action) const;
  // Index of a discrete action, or -1 when it is not a member.
  int IndexOf(double action) const;
  double Clamp(double action) const;
  // Width of the action encoding fed to the dynamics model.
  int encoded_dim() const {
    return discrete ? static_cast<int>(values.size()) : 1;
  }
  void Encode(double action, double* out) const;
};

struct EnvSpec {
  std::string name;
  ActionSpace action_space;
  int observation_dim = 0;
  int episode_length = 200;
  // bounds of the per-step reward, used for histogram binning
  double reward_min = 0.0;
  double reward_max = 0.0;
  // axis-aligned bounds of the 2-D behavior projection
  std::array<double, 2> behavior_low{};
  std::array<double, 2> behavior_high{};
};

struct RewardCost {
  double reward = 0.0;
  int cost = 0;
};

struct EnvState {
  Eigen::VectorXd internal;  // generalized coordinates then velocities
  Observation observation;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  int cost = 0;
};

// Everything a planner needs to score model-predicted observations. Real
// environments implement it; tests substitute analytic fixtures.
class Task {
 public:
  virtual ~Task() = default;
  virtual const EnvSpec& spec() const = 0;
  // Reward and safety cost of arriving in `obs` after applying `action`.
  virtual RewardCost Evaluate(const ObservationRef& obs,
                              double action) const = 0;
  // 2-D behavior projection of an observation (unclamped).
  virtual std::array<double, 2> Project(const ObservationRef& obs) const = 0;
};

class Environment : public Task {
 public:
  virtual EnvState Reset(std::uint64_t seed) const = 0;
  // Pure: no internal state is mutated, so distinct states may be stepped
  // concurrently.
  virtual StepOutcome Step(const EnvState& state, double action) const = 0;
  virtual int Unsafe(const EnvState& state) const = 0;
  virtual EnvState MakeState(const Eigen::VectorXd& internal) const = 0;
};

// Wraps an angle into [-pi, pi].
double WrapAngle(double angle);

inline constexpr double kDegree = std::numbers::pi / 180.0;

struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;
  double unsafe_low = 20.0 * kDegree;
  double unsafe_high = 30.0 * kDegree;
  int episode_length = 200;
};

// Swing-up pendulum, theta = 0 upright. Unsafe while the wrapped angle lies
// in the closed band [unsafe_low, unsafe_high].
class SafePendulum final : public Environment {
 public:
  explicit SafePendulum(PendulumParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  const PendulumParams& params() const { return params_; }

  RewardCost Evaluate(const ObservationRef& obs, double action) const override;
  std::array<double, 2> Project(const ObservationRef& obs) const override;

  EnvState Reset(std::uint64_t seed) const override;
  StepOutcome Step(const EnvState& state, double action) const override;
  int Unsafe(const EnvState& state) const override;
  EnvState MakeState(const Eigen::VectorXd& internal) const override;

  // (theta, theta_dot) convenience constructor.
  EnvState MakeState(double theta, double theta_dot) const;

  double Reward(double theta, double theta_dot, double torque) const;
  int UnsafeAngle(double theta) const;

 private:
  PendulumParams params_;
  EnvSpec spec_;
};

struct AcrobotParams {
  double dt = 0.2;
  double link_length_1 = 1.0;
  double link_length_2 = 1.0;
  double link_mass_1 = 1.0;
  double link_mass_2 = 1.0;
  double link_com_1 = 0.5;
  double link_com_2 = 0.5;
  double link_moi = 1.0;
  double gravity = 9.8;
  double max_vel_1 = 4.0 * std::numbers::pi;
  double max_vel_2 = 9.0 * std::numbers::pi;
  double unsafe_height = 3.0;
  int episode_length = 200;
};

// Two-link acrobot with torque on the second joint. Both angles are zero in
// the hanging rest position; reward is the tip height above that position.
class SafeAcrobot final : public Environment {
 public:
  explicit SafeAcrobot(AcrobotParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  const AcrobotParams& params() const { return params_; }

  RewardCost Evaluate(const ObservationRef& obs, double action) const override;
  std::array<double, 2> Project(const ObservationRef& obs) const override;

  EnvState Reset(std::uint64_t seed) const override;
  StepOutcome Step(const EnvState& state, double action) const override;
  int Unsafe(const EnvState& state) const override;
  EnvState MakeState(const Eigen::VectorXd& internal) const override;

  EnvState MakeState(double theta0, double theta1, double theta_dot0,
                     double theta_dot1) const;

  // Height of the tip above the hanging position, in [0, 4] for unit links.
  double TipHeight(double theta0, double theta1) const;
  int UnsafeHeight(double height) const;

  // Time derivative of (theta0, theta1, theta_dot0, theta_dot1).
  Eigen::Vector4d Derivatives(const Eigen::Vector4d& s, double torque) const;

 private:
  AcrobotParams params_;
  EnvSpec spec_;
};

struct EnvParams {
  PendulumParams pendulum;
  AcrobotParams acrobot;
};

inline constexpr std::string_view kSafePendulum = "safe_pendulum";
inline constexpr std::string_view kSafeAcrobot = "safe_acrobot";

// Throws std::invalid_argument for unknown names.
std::unique_ptr<Environment> MakeEnvironment(std::string_view name,
                                             const EnvParams& params = {});

}  // namespace safeplan

#endif  // SAFEPLAN_ENVIRONMENTS_H_
