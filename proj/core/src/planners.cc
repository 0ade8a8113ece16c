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

#include "safeplan/planners.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "safeplan/pareto.h"

namespace safeplan {

namespace {

struct KindName {
  PlannerKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {PlannerKind::kRs, "rs"},     {PlannerKind::kSrs, "srs"},
    {PlannerKind::kMe, "me"},     {PlannerKind::kSme, "sme"},
    {PlannerKind::kPsme, "psme"}, {PlannerKind::kCem, "cem"},
    {PlannerKind::kRcem, "rcem"},
};

// Draws `count` distinct indices with probability proportional to
// exp(score - max score), sequentially without replacement.
std::vector<int> SoftmaxSampleWithoutReplacement(std::span<const double> scores,
                                                 int count, Rng& rng) {
  std::vector<int> pool(scores.size());
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> picked;
  while (static_cast<int>(picked.size()) < count && !pool.empty()) {
    double top = -HUGE_VAL;
    for (int i : pool) top = std::max(top, scores[i]);
    std::vector<double> weights;
    double total = 0.0;
    for (int i : pool) {
      weights.push_back(std::exp(scores[i] - top));
      total += weights.back();
    }
    double u = UniformReal(rng, 0.0, total);
    std::size_t chosen = pool.size() - 1;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (u < weights[k]) {
        chosen = k;
        break;
      }
      u -= weights[k];
    }
    picked.push_back(pool[chosen]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return picked;
}

}  // namespace

std::string_view PlannerName(PlannerKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

PlannerKind ParsePlannerKind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
}

bool IsSafePlanner(PlannerKind kind) {
  return kind == PlannerKind::kSrs || kind == PlannerKind::kSme ||
         kind == PlannerKind::kPsme || kind == PlannerKind::kRcem;
}

PolicyArchitecture PolicyArchitectureFor(const EnvSpec& spec,
                                         const PlannerConfig& config) {
  PolicyArchitecture arch = DefaultPolicyArchitecture(spec);
  if (!config.policy_hidden.empty()) arch.hidden = config.policy_hidden;
  return arch;
}

// ------------------------------------------------------------------ rollout

std::vector<RolloutResult> RolloutSequences(
    const TransitionModel& model, const Task& task, const ObservationRef& start,
    std::span<const ActionSequence> sequences, double gamma) {
  const Eigen::Index n = static_cast<Eigen::Index>(sequences.size());
  std::vector<RolloutResult> results(n);
  if (n == 0) return results;
  const std::size_t horizon = sequences[0].size();
  for (const ActionSequence& seq : sequences) {
    if (seq.size() != horizon) {
      throw std::invalid_argument("action sequences differ in length");
    }
  }
  Eigen::MatrixXd states = start.replicate(1, n);
  std::vector<double> actions(n);
  double weight = 1.0;
  for (std::size_t step = 0; step < horizon; ++step) {
    for (Eigen::Index i = 0; i < n; ++i) actions[i] = sequences[i][step];
    Eigen::MatrixXd next = model.PredictBatch(states, actions);
    for (Eigen::Index i = 0; i < n; ++i) {
      const RewardCost rc = task.Evaluate(next.col(i), actions[i]);
      results[i].ret += weight * rc.reward;
      results[i].cost += weight * rc.cost;
      results[i].states.emplace_back(next.col(i));
      results[i].actions.push_back(actions[i]);
    }
    states = std::move(next);
    weight *= gamma;
  }
  return results;
}

std::vector<RolloutResult> RolloutPolicies(const TransitionModel& model,
                                           const Task& task,
                                           const ObservationRef& start,
                                           std::span<const Policy> policies,
                                           int horizon, double gamma) {
  const Eigen::Index n = static_cast<Eigen::Index>(policies.size());
  std::vector<RolloutResult> results(n);
  if (n == 0) return results;
  Eigen::MatrixXd states = start.replicate(1, n);
  std::vector<double> actions(n);
  double weight = 1.0;
  for (int step = 0; step < horizon; ++step) {
    for (Eigen::Index i = 0; i < n; ++i) {
      actions[i] = policies[i].Act(states.col(i));
    }
    Eigen::MatrixXd next = model.PredictBatch(states, actions);
    for (Eigen::Index i = 0; i < n; ++i) {
      const RewardCost rc = task.Evaluate(next.col(i), actions[i]);
      results[i].ret += weight * rc.reward;
      results[i].cost += weight * rc.cost;
      results[i].states.emplace_back(next.col(i));
      results[i].actions.push_back(actions[i]);
    }
    states = std::move(next);
    weight *= gamma;
  }
  return results;
}

RolloutResult Rollout(const TransitionModel& model, const Task& task,
                      const ObservationRef& start,
                      std::span<const double> actions, double gamma) {
  const ActionSequence seq(actions.begin(), actions.end());
  return RolloutSequences(model, task, start, std::span(&seq, 1), gamma)[0];
}

RolloutResult Rollout(const TransitionModel& model, const Task& task,
                      const ObservationRef& start, const Policy& policy,
                      int horizon, double gamma) {
  return RolloutPolicies(model, task, start, std::span(&policy, 1), horizon,
                         gamma)[0];
}

double SampleAction(Rng& rng, const ActionSpace& space) {
  if (space.discrete) {
    return space.values[UniformIndex(rng, space.values.size())];
  }
  return UniformReal(rng, space.low, space.high);
}

ActionSequence SampleActionSequence(Rng& rng, const ActionSpace& space,
                                    int horizon) {
  ActionSequence seq(horizon);
  for (double& a : seq) a = SampleAction(rng, space);
  return seq;
}

std::vector<int> RankByReturn(std::span<const RolloutResult> results) {
  std::vector<int> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return results[a].ret > results[b].ret;
  });
  return order;
}

std::vector<int> RankSafeFirst(std::span<const RolloutResult> results,
                               double cost_tolerance) {
  const int n = static_cast<int>(results.size());
  std::vector<int> by_cost(n);
  std::iota(by_cost.begin(), by_cost.end(), 0);
  std::stable_sort(by_cost.begin(), by_cost.end(), [&](int a, int b) {
    return results[a].cost < results[b].cost;
  });
  // costs within tolerance of the first member of a run share one level
  std::vector<int> level(n, 0);
  int current = 0;
  double anchor = n > 0 ? results[by_cost[0]].cost : 0.0;
  for (int k = 0; k < n; ++k) {
    const double c = results[by_cost[k]].cost;
    if (c - anchor > cost_tolerance) {
      ++current;
      anchor = c;
    }
    level[by_cost[k]] = current;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (level[a] != level[b]) return level[a] < level[b];
    return results[a].ret > results[b].ret;
  });
  return order;
}

PlanResult PlanRandomShooting(const PlanningProblem& problem,
                              const ObservationRef& state,
                              const PlannerConfig& config, Rng& rng,
                              bool safe) {
  const ActionSpace& space = problem.task.spec().action_space;
  std::vector<ActionSequence> sequences;
  sequences.reserve(config.num_sequences);
  for (int i = 0; i < config.num_sequences; ++i) {
    sequences.push_back(SampleActionSequence(rng, space, config.horizon));
  }
  const auto results = RolloutSequences(problem.model, problem.task, state,
                                        sequences, config.gamma);
  const int best = safe ? RankSafeFirst(results, config.cost_tolerance)[0]
                        : RankByReturn(results)[0];
  PlanResult plan;
  plan.action = sequences[best][0];
  plan.ret = results[best].ret;
  plan.cost = results[best].cost;
  plan.candidate = best;
  return plan;
}

// --------------------------------------------------------------- MAP-Elites

namespace {

void EvaluateAndInsert(const PlanningProblem& problem,
                       const ObservationRef& state, const PlannerConfig& config,
                       std::vector<Policy> policies, Archive* archive) {
  const auto results = RolloutPolicies(problem.model, problem.task, state,
                                       policies, config.horizon, config.gamma);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    BehaviorDescriptor desc = ComputeBehaviorDescriptor(
        problem.task, results[i].states, config.grid_size,
        config.behavior_reduction);
    archive->Insert(Elite{std::move(policies[i]), results[i].ret,
                          results[i].cost, desc});
  }
}

}  // namespace

Archive RunMapElites(const PlanningProblem& problem,
                     const ObservationRef& state, const PlannerConfig& config,
                     Rng& rng, ReplacementRule rule, const SelectFn& select) {
  if (config.horizon <= 0) {
    throw std::invalid_argument("MAP-Elites needs a positive horizon");
  }
  Archive archive(config.grid_size, rule, config.cost_tolerance);
  const int budget = config.num_policies;
  const int initial = std::min(config.initial_policies, budget);

  std::vector<Policy> batch;
  for (int i = 0; i < initial; ++i) {
    batch.push_back(SamplePolicy(rng, problem.policy_architecture));
  }
  EvaluateAndInsert(problem, state, config, std::move(batch), &archive);

  int evaluations = initial;
  while (evaluations < budget) {
    const int count =
        std::min(std::max(1, config.policies_per_iteration), budget - evaluations);
    std::vector<Policy> parents = select(archive, count, rng);
    std::vector<Policy> children;
    children.reserve(parents.size());
    for (const Policy& parent : parents) {
      children.push_back(Vary(rng, parent, config.variation_sigma));
    }
    evaluations += static_cast<int>(children.size());
    EvaluateAndInsert(problem, state, config, std::move(children), &archive);
  }
  return archive;
}

std::vector<Policy> SelectSafe(const Archive& archive, int count, Rng& rng,
                               const PolicyArchitecture& architecture) {
  std::vector<const Elite*> safe;
  for (const Elite* elite : archive.Elites()) {
    if (std::abs(elite->cost) <= archive.cost_tolerance()) safe.push_back(elite);
  }
  std::vector<Policy> selected;
  if (static_cast<int>(safe.size()) >= count) {
    std::vector<double> scores;
    for (const Elite* elite : safe) scores.push_back(elite->ret);
    for (int i : SoftmaxSampleWithoutReplacement(scores, count, rng)) {
      selected.push_back(safe[i]->policy);
    }
    return selected;
  }
  for (const Elite* elite : safe) selected.push_back(elite->policy);
  while (static_cast<int>(selected.size()) < count) {
    selected.push_back(SamplePolicy(rng, architecture));
  }
  return selected;
}

std::vector<Policy> SelectPareto(const Archive& archive, int count, Rng& rng,
                                 const PolicyArchitecture& architecture) {
  const std::vector<const Elite*> elites = archive.Elites();
  std::vector<CostReturn> points;
  points.reserve(elites.size());
  for (const Elite* elite : elites) points.push_back({elite->cost, elite->ret});

  std::vector<Policy> selected;
  for (const std::vector<int>& front : NonDominatedSort(points)) {
    const int missing = count - static_cast<int>(selected.size());
    if (missing <= 0) break;
    if (static_cast<int>(front.size()) <= missing) {
      for (int i : front) selected.push_back(elites[i]->policy);
      continue;
    }
    // partial Fisher-Yates over the overflowing front
    std::vector<int> pool = front;
    for (int k = 0; k < missing; ++k) {
      const std::size_t pick =
          k + UniformIndex(rng, pool.size() - static_cast<std::size_t>(k));
      std::swap(pool[k], pool[pick]);
      selected.push_back(elites[pool[k]]->policy);
    }
  }
  while (static_cast<int>(selected.size()) < count) {
    selected.push_back(SamplePolicy(rng, architecture));
  }
  return selected;
}

std::vector<Policy> SelectRewardWeighted(const Archive& archive, int count,
                                         Rng& rng,
                                         const PolicyArchitecture& architecture) {
  const std::vector<const Elite*> elites = archive.Elites();
  std::vector<Policy> selected;
  if (elites.empty()) {
    for (int i = 0; i < count; ++i) {
      selected.push_back(SamplePolicy(rng, architecture));
    }
    return selected;
  }
  double top = -HUGE_VAL;
  for (const Elite* elite : elites) top = std::max(top, elite->ret);
  std::vector<double> weights;
  double total = 0.0;
  for (const Elite* elite : elites) {
    weights.push_back(std::exp(elite->ret - top));
    total += weights.back();
  }
  for (int i = 0; i < count; ++i) {
    double u = UniformReal(rng, 0.0, total);
    std::size_t chosen = elites.size() - 1;
    for (std::size_t k = 0; k < elites.size(); ++k) {
      if (u < weights[k]) {
        chosen = k;
        break;
      }
      u -= weights[k];
    }
    selected.push_back(elites[chosen]->policy);
  }
  return selected;
}

const Elite& BestElite(const Archive& archive, bool safe) {
  const std::vector<const Elite*> elites = archive.Elites();
  if (elites.empty()) throw std::logic_error("best elite of an empty archive");
  const Elite* best = elites[0];
  for (const Elite* elite : elites) {
    if (safe) {
      if (elite->cost < best->cost - archive.cost_tolerance()) {
        best = elite;
        continue;
      }
      if (elite->cost > best->cost + archive.cost_tolerance()) continue;
    }
    if (elite->ret > best->ret) best = elite;
  }
  return *best;
}

PlanResult PlanMapElites(const PlanningProblem& problem,
                         const ObservationRef& state,
                         const PlannerConfig& config, Rng& rng) {
  const PolicyArchitecture& arch = problem.policy_architecture;
  ReplacementRule rule = ReplacementRule::kSafe;
  SelectFn select;
  switch (config.kind) {
    case PlannerKind::kMe:
      rule = ReplacementRule::kReward;
      select = [&arch](const Archive& a, int k, Rng& r) {
        return SelectRewardWeighted(a, k, r, arch);
      };
      break;
    case PlannerKind::kSme:
      select = [&arch](const Archive& a, int k, Rng& r) {
        return SelectSafe(a, k, r, arch);
      };
      break;
    case PlannerKind::kPsme:
      select = [&arch](const Archive& a, int k, Rng& r) {
        return SelectPareto(a, k, r, arch);
      };
      break;
    default:
      throw std::invalid_argument("not a MAP-Elites planner");
  }
  const Archive archive = RunMapElites(problem, state, config, rng, rule, select);
  const Elite& best = BestElite(archive, rule == ReplacementRule::kSafe);
  PlanResult plan;
  plan.action = best.policy.Act(state);
  plan.ret = best.ret;
  plan.cost = best.cost;
  plan.archive_fill = archive.fill_ratio();
  plan.candidate = best.descriptor.Cell(archive.grid_size());
  return plan;
}

// ---------------------------------------------------------------------- CEM

CemOutcome RunCem(const PlanningProblem& problem, const ObservationRef& state,
                  const PlannerConfig& config, Rng& rng, bool safe) {
  if (config.cem_iterations <= 0) {
    PlannerConfig shooting = config;
    shooting.num_sequences = config.cem_sequences;
    CemOutcome out;
    out.plan = PlanRandomShooting(problem, state, shooting, rng, safe);
    return out;
  }
  const ActionSpace& space = problem.task.spec().action_space;
  const int horizon = config.horizon;
  const int samples = std::max(1, config.cem_sequences);
  const int elites = std::clamp(config.cem_elites, 1, samples);
  const int num_values = static_cast<int>(space.values.size());

  CemOutcome out;
  if (space.discrete) {
    out.probs.assign(horizon, std::vector<double>(num_values, 1.0 / num_values));
  } else {
    out.mean.assign(horizon, 0.5 * (space.low + space.high));
    out.stddev.assign(horizon, 0.5 * (space.high - space.low));
  }

  auto sample = [&]() {
    ActionSequence seq(horizon);
    for (int t = 0; t < horizon; ++t) {
      if (space.discrete) {
        double u = UniformReal(rng, 0.0, 1.0);
        int k = 0;
        while (k + 1 < num_values && u >= out.probs[t][k]) u -= out.probs[t][k++];
        seq[t] = space.values[k];
      } else {
        seq[t] = space.Clamp(out.mean[t] + out.stddev[t] * StandardNormal(rng));
      }
    }
    return seq;
  };
  auto rank = [&](const std::vector<RolloutResult>& results) {
    return safe ? RankSafeFirst(results, config.cost_tolerance)
                : RankByReturn(results);
  };

  for (int round = 0; round < config.cem_iterations; ++round) {
    std::vector<ActionSequence> sequences;
    for (int i = 0; i < samples; ++i) sequences.push_back(sample());
    const auto results = RolloutSequences(problem.model, problem.task, state,
                                          sequences, config.gamma);
    const std::vector<int> order = rank(results);
    out.plan.ret = results[order[0]].ret;
    out.plan.cost = results[order[0]].cost;
    out.plan.candidate = order[0];
    // refit the sampling distribution to the elite set
    for (int t = 0; t < horizon; ++t) {
      if (space.discrete) {
        std::vector<double> counts(num_values, config.cem_smoothing);
        for (int e = 0; e < elites; ++e) {
          ++counts[space.IndexOf(sequences[order[e]][t])];
        }
        const double total =
            elites + config.cem_smoothing * static_cast<double>(num_values);
        for (int k = 0; k < num_values; ++k) out.probs[t][k] = counts[k] / total;
      } else {
        double mean = 0.0;
        for (int e = 0; e < elites; ++e) mean += sequences[order[e]][t];
        mean /= elites;
        double var = 0.0;
        for (int e = 0; e < elites; ++e) {
          const double d = sequences[order[e]][t] - mean;
          var += d * d;
        }
        out.mean[t] = mean;
        out.stddev[t] = std::max(std::sqrt(var / elites), config.cem_std_floor);
      }
    }
  }
  if (space.discrete) {
    const auto& p0 = out.probs[0];
    const int mode = static_cast<int>(
        std::max_element(p0.begin(), p0.end()) - p0.begin());
    out.plan.action = space.values[mode];
  } else {
    out.plan.action = space.Clamp(out.mean[0]);
  }
  return out;
}

PlanResult Plan(const PlanningProblem& problem, const ObservationRef& state,
                const PlannerConfig& config, Rng& rng) {
  switch (config.kind) {
    case PlannerKind::kRs:
      return PlanRandomShooting(problem, state, config, rng, false);
    case PlannerKind::kSrs:
      return PlanRandomShooting(problem, state, config, rng, true);
    case PlannerKind::kMe:
    case PlannerKind::kSme:
    case PlannerKind::kPsme:
      return PlanMapElites(problem, state, config, rng);
    case PlannerKind::kCem:
      return RunCem(problem, state, config, rng, false).plan;
    case PlannerKind::kRcem:
      return RunCem(problem, state, config, rng, true).plan;
  }
  throw std::invalid_argument("unknown planner kind");
}

}  // namespace safeplan
