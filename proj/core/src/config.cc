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

#include "safeplan/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace safeplan {

using nlohmann::json;

namespace {

// Reads `key` into `field` when present and records it as consumed.
template <typename T>
void Read(const json& j, const char* key, T* field, std::set<std::string>* seen) {
  seen->insert(key);
  if (j.contains(key)) *field = j.at(key).get<T>();
}

void RejectUnknown(const json& j, const std::set<std::string>& seen,
                   const std::string& where) {
  for (const auto& item : j.items()) {
    if (!seen.count(item.key())) {
      throw std::invalid_argument("unknown config field '" + where +
                                  item.key() + "'");
    }
  }
}

json PendulumJson(const PendulumParams& p) {
  return json{{"gravity", p.gravity},       {"mass", p.mass},
              {"length", p.length},         {"dt", p.dt},
              {"max_torque", p.max_torque}, {"max_speed", p.max_speed},
              {"unsafe_low", p.unsafe_low}, {"unsafe_high", p.unsafe_high}};
}

void ReadPendulum(const json& j, PendulumParams* p) {
  std::set<std::string> seen;
  Read(j, "gravity", &p->gravity, &seen);
  Read(j, "mass", &p->mass, &seen);
  Read(j, "length", &p->length, &seen);
  Read(j, "dt", &p->dt, &seen);
  Read(j, "max_torque", &p->max_torque, &seen);
  Read(j, "max_speed", &p->max_speed, &seen);
  Read(j, "unsafe_low", &p->unsafe_low, &seen);
  Read(j, "unsafe_high", &p->unsafe_high, &seen);
  RejectUnknown(j, seen, "physics.");
}

json AcrobotJson(const AcrobotParams& p) {
  return json{{"dt", p.dt},
              {"link_length_1", p.link_length_1},
              {"link_length_2", p.link_length_2},
              {"link_mass_1", p.link_mass_1},
              {"link_mass_2", p.link_mass_2},
              {"link_com_1", p.link_com_1},
              {"link_com_2", p.link_com_2},
              {"link_moi", p.link_moi},
              {"gravity", p.gravity},
              {"max_vel_1", p.max_vel_1},
              {"max_vel_2", p.max_vel_2},
              {"unsafe_height", p.unsafe_height}};
}

void ReadAcrobot(const json& j, AcrobotParams* p) {
  std::set<std::string> seen;
  Read(j, "dt", &p->dt, &seen);
  Read(j, "link_length_1", &p->link_length_1, &seen);
  Read(j, "link_length_2", &p->link_length_2, &seen);
  Read(j, "link_mass_1", &p->link_mass_1, &seen);
  Read(j, "link_mass_2", &p->link_mass_2, &seen);
  Read(j, "link_com_1", &p->link_com_1, &seen);
  Read(j, "link_com_2", &p->link_com_2, &seen);
  Read(j, "link_moi", &p->link_moi, &seen);
  Read(j, "gravity", &p->gravity, &seen);
  Read(j, "max_vel_1", &p->max_vel_1, &seen);
  Read(j, "max_vel_2", &p->max_vel_2, &seen);
  Read(j, "unsafe_height", &p->unsafe_height, &seen);
  RejectUnknown(j, seen, "physics.");
}

std::string_view ReductionName(BehaviorReduction r) {
  return r == BehaviorReduction::kFinalState ? "final_state" : "mean_state";
}

BehaviorReduction ParseReduction(const std::string& s) {
  if (s == "final_state") return BehaviorReduction::kFinalState;
  if (s == "mean_state") return BehaviorReduction::kMeanState;
  throw std::invalid_argument("unknown behavior reduction '" + s + "'");
}

json PlannerJson(const PlannerConfig& c) {
  return json{
      {"kind", PlannerName(c.kind)},
      {"horizon", c.horizon},
      {"gamma", c.gamma},
      {"num_sequences", c.num_sequences},
      {"num_policies", c.num_policies},
      {"initial_policies", c.initial_policies},
      {"policies_per_iteration", c.policies_per_iteration},
      {"grid_size", c.grid_size},
      {"variation_sigma", c.variation_sigma},
      {"behavior_reduction", ReductionName(c.behavior_reduction)},
      {"policy_hidden", c.policy_hidden},
      {"cem_sequences", c.cem_sequences},
      {"cem_elites", c.cem_elites},
      {"cem_iterations", c.cem_iterations},
      {"cem_std_floor", c.cem_std_floor},
      {"cem_smoothing", c.cem_smoothing},
      {"cost_tolerance", c.cost_tolerance},
  };
}

void ReadPlanner(const json& j, PlannerConfig* c) {
  std::set<std::string> seen;
  std::string kind(PlannerName(c->kind));
  Read(j, "kind", &kind, &seen);
  c->kind = ParsePlannerKind(kind);
  Read(j, "horizon", &c->horizon, &seen);
  Read(j, "gamma", &c->gamma, &seen);
  Read(j, "num_sequences", &c->num_sequences, &seen);
  Read(j, "num_policies", &c->num_policies, &seen);
  Read(j, "initial_policies", &c->initial_policies, &seen);
  Read(j, "policies_per_iteration", &c->policies_per_iteration, &seen);
  Read(j, "grid_size", &c->grid_size, &seen);
  Read(j, "variation_sigma", &c->variation_sigma, &seen);
  std::string reduction(ReductionName(c->behavior_reduction));
  Read(j, "behavior_reduction", &reduction, &seen);
  c->behavior_reduction = ParseReduction(reduction);
  Read(j, "policy_hidden", &c->policy_hidden, &seen);
  Read(j, "cem_sequences", &c->cem_sequences, &seen);
  Read(j, "cem_elites", &c->cem_elites, &seen);
  Read(j, "cem_iterations", &c->cem_iterations, &seen);
  Read(j, "cem_std_floor", &c->cem_std_floor, &seen);
  Read(j, "cem_smoothing", &c->cem_smoothing, &seen);
  Read(j, "cost_tolerance", &c->cost_tolerance, &seen);
  RejectUnknown(j, seen, "planner.");
}

json ModelJson(const TrainConfig& c) {
  return json{
      {"hidden_layers", c.hidden_layers},
      {"hidden_units", c.hidden_units},
      {"learning_rate", c.learning_rate},
      {"passes", c.passes},
      {"batch_size", c.batch_size},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"holdout_fraction", c.holdout_fraction},
      {"loss", c.loss == ModelLoss::kMse ? "mse" : "gaussian_nll"},
      {"from_scratch", c.from_scratch},
      {"dim_order", c.dim_order},
      {"clamp_range_factor", c.clamp_range_factor},
  };
}

void ReadModel(const json& j, TrainConfig* c) {
  std::set<std::string> seen;
  Read(j, "hidden_layers", &c->hidden_layers, &seen);
  Read(j, "hidden_units", &c->hidden_units, &seen);
  Read(j, "learning_rate", &c->learning_rate, &seen);
  Read(j, "passes", &c->passes, &seen);
  Read(j, "batch_size", &c->batch_size, &seen);
  Read(j, "beta1", &c->beta1, &seen);
  Read(j, "beta2", &c->beta2, &seen);
  Read(j, "epsilon", &c->epsilon, &seen);
  Read(j, "holdout_fraction", &c->holdout_fraction, &seen);
  std::string loss = c->loss == ModelLoss::kMse ? "mse" : "gaussian_nll";
  Read(j, "loss", &loss, &seen);
  if (loss == "mse") {
    c->loss = ModelLoss::kMse;
  } else if (loss == "gaussian_nll") {
    c->loss = ModelLoss::kGaussianNll;
  } else {
    throw std::invalid_argument("unknown model loss '" + loss + "'");
  }
  Read(j, "from_scratch", &c->from_scratch, &seen);
  Read(j, "dim_order", &c->dim_order, &seen);
  Read(j, "clamp_range_factor", &c->clamp_range_factor, &seen);
  RejectUnknown(j, seen, "model.");
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

}  // namespace

std::string_view ProfileName(Profile profile) {
  return profile == Profile::kPaper ? "paper" : "desk";
}

Profile ParseProfile(std::string_view name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw std::invalid_argument("unknown profile '" + std::string(name) + "'");
}

double DefaultRewardThreshold(std::string_view env) {
  if (env == kSafePendulum) return -2.5;
  if (env == kSafeAcrobot) return 1.6;
  throw std::invalid_argument("unknown environment '" + std::string(env) + "'");
}

void ApplyProfile(ExperimentConfig* config, Profile profile) {
  config->profile = profile;
  if (profile == Profile::kPaper) {
    config->epochs = 50;
    config->seeds = {0, 1, 2, 3, 4};
  } else {
    config->epochs = 20;
    config->seeds = {0, 1, 2};
  }
}

ExperimentConfig DefaultConfig(std::string_view env, Profile profile) {
  ExperimentConfig config;
  config.env = std::string(env);
  config.reward_threshold = DefaultRewardThreshold(env);
  ApplyProfile(&config, profile);
  return config;
}

void Validate(const ExperimentConfig& config) {
  const auto environment = MakeEnvironment(config.env, config.env_params);
  const EnvSpec& spec = environment->spec();
  const PlannerConfig& p = config.planner;
  const TrainConfig& m = config.model;

  Require(config.epochs >= 0, "epochs must be >= 0");
  Require(config.episode_length > 0, "episode_length must be positive");
  Require(!config.seeds.empty(), "seeds must not be empty");
  std::set<std::uint64_t> unique(config.seeds.begin(), config.seeds.end());
  Require(unique.size() == config.seeds.size(), "seeds must be distinct");
  Require(std::isfinite(config.reward_threshold),
          "reward_threshold must be finite");
  Require(!config.output_dir.empty(), "output_dir must not be empty");

  Require(p.horizon > 0, "planner.horizon must be positive");
  Require(p.gamma > 0.0 && p.gamma <= 1.0, "planner.gamma must be in (0, 1]");
  Require(p.num_sequences > 0, "planner.num_sequences must be positive");
  Require(p.num_policies > 0, "planner.num_policies must be positive");
  Require(p.initial_policies > 0 && p.initial_policies <= p.num_policies,
          "planner.initial_policies must be in [1, num_policies]");
  Require(p.policies_per_iteration > 0,
          "planner.policies_per_iteration must be positive");
  Require(p.grid_size > 0, "planner.grid_size must be positive");
  Require(p.variation_sigma >= 0.0, "planner.variation_sigma must be >= 0");
  for (int units : p.policy_hidden) {
    Require(units > 0, "planner.policy_hidden entries must be positive");
  }
  Require(p.cem_sequences > 0, "planner.cem_sequences must be positive");
  Require(p.cem_elites > 0 && p.cem_elites <= p.cem_sequences,
          "planner.cem_elites must be in [1, cem_sequences]");
  Require(p.cem_iterations >= 0, "planner.cem_iterations must be >= 0");
  Require(p.cem_std_floor >= 0.0, "planner.cem_std_floor must be >= 0");
  if (spec.action_space.discrete) {
    Require(p.cem_smoothing > 0.0,
            "planner.cem_smoothing must be positive for a discrete action space");
  }
  Require(p.cost_tolerance >= 0.0, "planner.cost_tolerance must be >= 0");

  Require(m.hidden_layers >= 0, "model.hidden_layers must be >= 0");
  Require(m.hidden_units > 0, "model.hidden_units must be positive");
  Require(m.learning_rate > 0.0, "model.learning_rate must be positive");
  Require(m.passes >= 0, "model.passes must be >= 0");
  Require(m.batch_size > 0, "model.batch_size must be positive");
  Require(m.holdout_fraction >= 0.0 && m.holdout_fraction < 1.0,
          "model.holdout_fraction must be in [0, 1)");
  Require(m.clamp_range_factor > 0.0, "model.clamp_range_factor must be positive");
  if (!m.dim_order.empty()) {
    std::vector<int> sorted = m.dim_order;
    std::sort(sorted.begin(), sorted.end());
    bool permutation = static_cast<int>(sorted.size()) == spec.observation_dim;
    for (int i = 0; permutation && i < spec.observation_dim; ++i) {
      permutation = sorted[i] == i;
    }
    Require(permutation, "model.dim_order must permute the observation dims");
  }
}

std::string ConfigToJson(const ExperimentConfig& config) {
  json j{
      {"env", config.env},
      {"profile", ProfileName(config.profile)},
      {"epochs", config.epochs},
      {"episode_length", config.episode_length},
      {"seeds", config.seeds},
      {"reward_threshold", config.reward_threshold},
      {"output_dir", config.output_dir},
      {"planner", PlannerJson(config.planner)},
      {"model", ModelJson(config.model)},
  };
  if (config.env == kSafeAcrobot) {
    j["physics"] = AcrobotJson(config.env_params.acrobot);
  } else {
    j["physics"] = PendulumJson(config.env_params.pendulum);
  }
  return j.dump(2) + "\n";
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  const json j = json::parse(text);
  Require(j.is_object(), "top level must be an object");
  const std::string env =
      j.contains("env") ? j.at("env").get<std::string>() : std::string(kSafePendulum);
  Profile profile = Profile::kDesk;
  if (j.contains("profile")) profile = ParseProfile(j.at("profile").get<std::string>());
  ExperimentConfig config = DefaultConfig(env, profile);

  std::set<std::string> seen{"env", "profile"};
  Read(j, "epochs", &config.epochs, &seen);
  Read(j, "episode_length", &config.episode_length, &seen);
  Read(j, "seeds", &config.seeds, &seen);
  Read(j, "reward_threshold", &config.reward_threshold, &seen);
  Read(j, "output_dir", &config.output_dir, &seen);
  seen.insert({"planner", "model", "physics"});
  if (j.contains("planner")) ReadPlanner(j.at("planner"), &config.planner);
  if (j.contains("model")) ReadModel(j.at("model"), &config.model);
  if (j.contains("physics")) {
    if (env == kSafeAcrobot) {
      ReadAcrobot(j.at("physics"), &config.env_params.acrobot);
    } else {
      ReadPendulum(j.at("physics"), &config.env_params.pendulum);
    }
  }
  RejectUnknown(j, seen, "");
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ConfigFromJson(buffer.str());
}

void SaveConfig(const ExperimentConfig& config,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << ConfigToJson(config);
}

}  // namespace safeplan
