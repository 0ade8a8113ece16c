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

#include "safeplan/environments.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "safeplan/rng.h"

namespace safeplan {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

ActionSpace ActionSpace::Continuous(double low, double high) {
  if (!(low < high)) throw std::invalid_argument("empty action interval");
  ActionSpace space;
  space.discrete = false;
  space.low = low;
  space.high = high;
  return space;
}

ActionSpace ActionSpace::Discrete(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty discrete action set");
  ActionSpace space;
  space.discrete = true;
  space.low = *std::min_element(values.begin(), values.end());
  space.high = *std::max_element(values.begin(), values.end());
  space.values = std::move(values);
  return space;
}

bool ActionSpace::Contains(double action) const {
  if (discrete) return IndexOf(action) >= 0;
  return action >= low && action <= high;
}

int ActionSpace::IndexOf(double action) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == action) return static_cast<int>(i);
  }
  return -1;
}

double ActionSpace::Clamp(double action) const {
  return std::clamp(action, low, high);
}

void ActionSpace::Encode(double action, double* out) const {
  if (!discrete) {
    out[0] = action;
    return;
  }
  const int index = IndexOf(action);
  if (index < 0) {
    throw std::invalid_argument("action " + std::to_string(action) +
                                " is not a member of the discrete space");
  }
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = 0.0;
  out[index] = 1.0;
}

double WrapAngle(double angle) {
  return std::remainder(angle, 2.0 * kPi);
}

// ---------------------------------------------------------------- pendulum

SafePendulum::SafePendulum(PendulumParams params) : params_(params) {
  spec_.name = std::string(kSafePendulum);
  spec_.action_space =
      ActionSpace::Continuous(-params_.max_torque, params_.max_torque);
  spec_.observation_dim = 3;
  spec_.episode_length = params_.episode_length;
  spec_.reward_min = -(kPi * kPi + 0.1 * params_.max_speed * params_.max_speed +
                       0.001 * params_.max_torque * params_.max_torque);
  spec_.reward_max = 0.0;
  spec_.behavior_low = {-kPi, -params_.max_speed};
  spec_.behavior_high = {kPi, params_.max_speed};
}

double SafePendulum::Reward(double theta, double theta_dot,
                            double torque) const {
  const double th = WrapAngle(theta);
  return -(th * th + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
}

int SafePendulum::UnsafeAngle(double theta) const {
  const double th = WrapAngle(theta);
  return (th >= params_.unsafe_low && th <= params_.unsafe_high) ? 1 : 0;
}

RewardCost SafePendulum::Evaluate(const ObservationRef& obs,
                                  double action) const {
  const double theta = std::atan2(obs[1], obs[0]);
  const double torque = spec_.action_space.Clamp(action);
  return {Reward(theta, obs[2], torque), UnsafeAngle(theta)};
}

std::array<double, 2> SafePendulum::Project(const ObservationRef& obs) const {
  return {std::atan2(obs[1], obs[0]), obs[2]};
}

EnvState SafePendulum::MakeState(const Eigen::VectorXd& internal) const {
  if (internal.size() != 2) {
    throw std::invalid_argument("pendulum state has 2 coordinates");
  }
  EnvState state;
  state.internal = internal;
  state.observation.resize(3);
  state.observation << std::cos(internal[0]), std::sin(internal[0]),
      internal[1];
  return state;
}

EnvState SafePendulum::MakeState(double theta, double theta_dot) const {
  return MakeState(Eigen::Vector2d(theta, theta_dot));
}

EnvState SafePendulum::Reset(std::uint64_t seed) const {
  Rng rng(seed);
  const double theta = UniformReal(rng, -kPi, kPi);
  const double theta_dot = UniformReal(rng, -1.0, 1.0);
  return MakeState(theta, theta_dot);
}

StepOutcome SafePendulum::Step(const EnvState& state, double action) const {
  const double torque = spec_.action_space.Clamp(action);
  const double g = params_.gravity;
  const double m = params_.mass;
  const double l = params_.length;
  const double theta = state.internal[0];
  const double theta_dot = state.internal[1];

  // semi-implicit Euler: velocity first, then position with the new velocity
  double new_theta_dot =
      theta_dot + (3.0 * g / (2.0 * l) * std::sin(theta) +
                   3.0 / (m * l * l) * torque) *
                      params_.dt;
  new_theta_dot =
      std::clamp(new_theta_dot, -params_.max_speed, params_.max_speed);
  const double new_theta = WrapAngle(theta + new_theta_dot * params_.dt);

  StepOutcome out;
  out.next_state = MakeState(new_theta, new_theta_dot);
  out.reward = Reward(new_theta, new_theta_dot, torque);
  out.cost = UnsafeAngle(new_theta);
  return out;
}

int SafePendulum::Unsafe(const EnvState& state) const {
  return UnsafeAngle(state.internal[0]);
}

// ----------------------------------------------------------------- acrobot

SafeAcrobot::SafeAcrobot(AcrobotParams params) : params_(params) {
  spec_.name = std::string(kSafeAcrobot);
  spec_.action_space = ActionSpace::Discrete({-1.0, 0.0, 1.0});
  spec_.observation_dim = 6;
  spec_.episode_length = params_.episode_length;
  spec_.reward_min = 0.0;
  spec_.reward_max = 2.0 * (params_.link_length_1 + params_.link_length_2);
  spec_.behavior_low = {-kPi, -kPi};
  spec_.behavior_high = {kPi, kPi};
}

double SafeAcrobot::TipHeight(double theta0, double theta1) const {
  const double l1 = params_.link_length_1;
  const double l2 = params_.link_length_2;
  return (l1 + l2) - l1 * std::cos(theta0) - l2 * std::cos(theta0 + theta1);
}

int SafeAcrobot::UnsafeHeight(double height) const {
  return height > params_.unsafe_height ? 1 : 0;
}

RewardCost SafeAcrobot::Evaluate(const ObservationRef& obs,
                                 double /*action*/) const {
  const double l1 = params_.link_length_1;
  const double l2 = params_.link_length_2;
  // cos(theta0 + theta1) from the observed sines and cosines
  const double cos_sum = obs[0] * obs[2] - obs[1] * obs[3];
  const double height = (l1 + l2) - l1 * obs[0] - l2 * cos_sum;
  return {height, UnsafeHeight(height)};
}

std::array<double, 2> SafeAcrobot::Project(const ObservationRef& obs) const {
  return {std::atan2(obs[1], obs[0]), std::atan2(obs[3], obs[2])};
}

EnvState SafeAcrobot::MakeState(const Eigen::VectorXd& internal) const {
  if (internal.size() != 4) {
    throw std::invalid_argument("acrobot state has 4 coordinates");
  }
  EnvState state;
  state.internal = internal;
  state.observation.resize(6);
  state.observation << std::cos(internal[0]), std::sin(internal[0]),
      std::cos(internal[1]), std::sin(internal[1]), internal[2], internal[3];
  return state;
}

EnvState SafeAcrobot::MakeState(double theta0, double theta1,
                                double theta_dot0, double theta_dot1) const {
  return MakeState(Eigen::Vector4d(theta0, theta1, theta_dot0, theta_dot1));
}

EnvState SafeAcrobot::Reset(std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::Vector4d s;
  for (int i = 0; i < 4; ++i) s[i] = UniformReal(rng, -0.1, 0.1);
  return MakeState(s);
}

Eigen::Vector4d SafeAcrobot::Derivatives(const Eigen::Vector4d& s,
                                         double torque) const {
  const double m1 = params_.link_mass_1;
  const double m2 = params_.link_mass_2;
  const double l1 = params_.link_length_1;
  const double lc1 = params_.link_com_1;
  const double lc2 = params_.link_com_2;
  const double i1 = params_.link_moi;
  const double i2 = params_.link_moi;
  const double g = params_.gravity;
  const double theta1 = s[0];
  const double theta2 = s[1];
  const double dtheta1 = s[2];
  const double dtheta2 = s[3];

  const double d1 = m1 * lc1 * lc1 +
                    m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) +
                    i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
  const double phi1 =
      -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
      2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 -
       m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

StepOutcome SafeAcrobot::Step(const EnvState& state, double action) const {
  if (spec_.action_space.IndexOf(action) < 0) {
    throw std::invalid_argument("invalid acrobot action " +
                                std::to_string(action));
  }
  const double dt = params_.dt;
  const Eigen::Vector4d s0 = state.internal;
  const Eigen::Vector4d k1 = Derivatives(s0, action);
  const Eigen::Vector4d k2 = Derivatives(s0 + 0.5 * dt * k1, action);
  const Eigen::Vector4d k3 = Derivatives(s0 + 0.5 * dt * k2, action);
  const Eigen::Vector4d k4 = Derivatives(s0 + dt * k3, action);
  Eigen::Vector4d s1 = s0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  s1[0] = WrapAngle(s1[0]);
  s1[1] = WrapAngle(s1[1]);
  s1[2] = std::clamp(s1[2], -params_.max_vel_1, params_.max_vel_1);
  s1[3] = std::clamp(s1[3], -params_.max_vel_2, params_.max_vel_2);

  StepOutcome out;
  out.next_state = MakeState(s1);
  out.reward = TipHeight(s1[0], s1[1]);
  out.cost = UnsafeHeight(out.reward);
  return out;
}

int SafeAcrobot::Unsafe(const EnvState& state) const {
  return UnsafeHeight(TipHeight(state.internal[0], state.internal[1]));
}

std::unique_ptr<Environment> MakeEnvironment(std::string_view name,
                                             const EnvParams& params) {
  if (name == kSafePendulum) {
    return std::make_unique<SafePendulum>(params.pendulum);
  }
  if (name == kSafeAcrobot) {
    return std::make_unique<SafeAcrobot>(params.acrobot);
  }
  throw std::invalid_argument("unknown environment '" + std::string(name) +
                              "'");
}

}  // namespace safeplan
