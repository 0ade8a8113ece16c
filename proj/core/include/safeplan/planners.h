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

#ifndef SAFEPLAN_PLANNERS_H_
#define SAFEPLAN_PLANNERS_H_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "safeplan/archive.h"
#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/policies.h"
#include "safeplan/rng.h"

namespace safeplan {

enum class PlannerKind {
  kRs,    // random shooting, ranked by return
  kSrs,   // safe random shooting: lowest cost, then highest return
  kMe,    // vanilla MAP-Elites
  kSme,   // safe MAP-Elites
  kPsme,  // Pareto safe MAP-Elites
  kCem,   // cross-entropy method, ranked by return
  kRcem,  // cross-entropy method with safe-first ranking
};

std::string_view PlannerName(PlannerKind kind);
// Accepts the names returned by PlannerName; throws std::invalid_argument.
PlannerKind ParsePlannerKind(std::string_view name);
bool IsSafePlanner(PlannerKind kind);

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kSrs;
  int horizon = 10;
  double gamma = 1.0;
  // random shooting
  int num_sequences = 100;
  // MAP-Elites family; num_policies is the total evaluation budget
  int num_policies = 100;
  int initial_policies = 25;
  int policies_per_iteration = 5;
  int grid_size = 50;
  double variation_sigma = 0.1;
  BehaviorReduction behavior_reduction = BehaviorReduction::kFinalState;
  std::vector<int> policy_hidden;  // empty selects the environment default
  // CEM / RCEM
  int cem_sequences = 20;
  int cem_elites = 10;
  int cem_iterations = 5;
  double cem_std_floor = 1e-3;
  double cem_smoothing = 1e-3;
  // costs closer than this count as equal
  double cost_tolerance = 1e-12;
};

// Model, scoring task and policy layout used by one planning call.
struct PlanningProblem {
  const TransitionModel& model;
  const Task& task;
  PolicyArchitecture policy_architecture;
};

PolicyArchitecture PolicyArchitectureFor(const EnvSpec& spec,
                                         const PlannerConfig& config);

struct RolloutResult {
  double ret = 0.0;   // discounted return
  double cost = 0.0;  // discounted cost
  // predicted observation after each step and the action that produced it
  std::vector<Observation> states;
  std::vector<double> actions;
};

using ActionSequence = std::vector<double>;

// Iterates the model h times from `start`; step k scores the k-th predicted
// observation with weight gamma^k.
RolloutResult Rollout(const TransitionModel& model, const Task& task,
                      const ObservationRef& start,
                      std::span<const double> actions, double gamma);
RolloutResult Rollout(const TransitionModel& model, const Task& task,
                      const ObservationRef& start, const Policy& policy,
                      int horizon, double gamma);

// Batched variants: all candidates advance through the model together.
std::vector<RolloutResult> RolloutSequences(
    const TransitionModel& model, const Task& task, const ObservationRef& start,
    std::span<const ActionSequence> sequences, double gamma);
std::vector<RolloutResult> RolloutPolicies(const TransitionModel& model,
                                           const Task& task,
                                           const ObservationRef& start,
                                           std::span<const Policy> policies,
                                           int horizon, double gamma);

ActionSequence SampleActionSequence(Rng& rng, const ActionSpace& space,
                                    int horizon);
double SampleAction(Rng& rng, const ActionSpace& space);

// Candidate indices, best first. RankByReturn: higher return first.
// RankSafeFirst: lowest cost (within tolerance) first, then higher return.
// Both break remaining ties by lower index.
std::vector<int> RankByReturn(std::span<const RolloutResult> results);
std::vector<int> RankSafeFirst(std::span<const RolloutResult> results,
                               double cost_tolerance);

struct PlanResult {
  double action = 0.0;
  double ret = 0.0;   // score of the chosen candidate
  double cost = 0.0;
  double archive_fill = 0.0;
  int candidate = 0;
};

PlanResult PlanRandomShooting(const PlanningProblem& problem,
                              const ObservationRef& state,
                              const PlannerConfig& config, Rng& rng,
                              bool safe);

// ---------------------------------------------------------- MAP-Elites

using SelectFn =
    std::function<std::vector<Policy>(const Archive&, int count, Rng&)>;

// Shared MAP-Elites engine evaluated through the model: initial random
// policies, then select / vary / evaluate / insert until the evaluation
// budget is spent.
Archive RunMapElites(const PlanningProblem& problem,
                     const ObservationRef& state, const PlannerConfig& config,
                     Rng& rng, ReplacementRule rule, const SelectFn& select);

// Zero-cost elites, drawn without replacement with softmax(return) weights;
// missing slots are filled with fresh random policies.
std::vector<Policy> SelectSafe(const Archive& archive, int count, Rng& rng,
                               const PolicyArchitecture& architecture);

// Elites taken front by front from a non-dominated sort on (cost, return);
// the front that overflows is sampled uniformly without replacement.
std::vector<Policy> SelectPareto(const Archive& archive, int count, Rng& rng,
                                 const PolicyArchitecture& architecture);

// Vanilla selection: softmax(return) weights over all elites, with
// replacement.
std::vector<Policy> SelectRewardWeighted(const Archive& archive, int count,
                                         Rng& rng,
                                         const PolicyArchitecture& architecture);

// Lowest cost then highest return (safe) or highest return only; ties go to
// the lowest cell index. Archive must be non-empty.
const Elite& BestElite(const Archive& archive, bool safe);

PlanResult PlanMapElites(const PlanningProblem& problem,
                         const ObservationRef& state,
                         const PlannerConfig& config, Rng& rng);

// ----------------------------------------------------------------- CEM

struct CemOutcome {
  PlanResult plan;
  std::vector<double> mean;                  // continuous spaces
  std::vector<double> stddev;
  std::vector<std::vector<double>> probs;    // discrete spaces, per step
};

// With zero iterations the call degenerates to random shooting over one
// batch of cem_sequences samples.
CemOutcome RunCem(const PlanningProblem& problem, const ObservationRef& state,
                  const PlannerConfig& config, Rng& rng, bool safe);

// Dispatches on config.kind.
PlanResult Plan(const PlanningProblem& problem, const ObservationRef& state,
                const PlannerConfig& config, Rng& rng);

}  // namespace safeplan

#endif  // SAFEPLAN_PLANNERS_H_
