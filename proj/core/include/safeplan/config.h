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

#ifndef SAFEPLAN_CONFIG_H_
#define SAFEPLAN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/planners.h"

namespace safeplan {

enum class Profile { kDesk, kPaper };

std::string_view ProfileName(Profile profile);
Profile ParseProfile(std::string_view name);

struct ExperimentConfig {
  std::string env{kSafePendulum};
  EnvParams env_params;
  PlannerConfig planner;
  TrainConfig model;
  int epochs = 20;           // M planned episodes after the random one
  int episode_length = 200;  // T
  std::vector<std::uint64_t> seeds{0, 1, 2};
  double reward_threshold = -2.5;
  std::string output_dir = "runs/default";
  Profile profile = Profile::kDesk;
};

// Per-environment reward threshold used by MRCP.
double DefaultRewardThreshold(std::string_view env);

// Defaults for an environment and scale profile. The paper profile runs more
// epochs and seeds; everything else is shared.
ExperimentConfig DefaultConfig(std::string_view env = kSafePendulum,
                               Profile profile = Profile::kDesk);
// Sets epochs and seeds to the profile's values.
void ApplyProfile(ExperimentConfig* config, Profile profile);

// Throws std::invalid_argument naming the first offending field.
void Validate(const ExperimentConfig& config);

// Human-readable JSON document. Missing fields take the defaults of the
// document's environment; unknown fields are rejected.
std::string ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ConfigFromJson(const std::string& text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
void SaveConfig(const ExperimentConfig& config,
                const std::filesystem::path& path);

}  // namespace safeplan

#endif  // SAFEPLAN_CONFIG_H_
