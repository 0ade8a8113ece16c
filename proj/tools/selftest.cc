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

#include "selftest.h"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "safeplan/archive.h"
#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/metrics.h"
#include "safeplan/pareto.h"
#include "safeplan/planners.h"
#include "safeplan/policies.h"
#include "safeplan/rng.h"

namespace safeplan::tools {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success
};

std::string NonDominatedSortOracle() {
  Rng rng = MakeRng(7, Stream::kTest);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(UniformIndex(rng, 60));
    std::vector<CostReturn> pts(n);
    for (auto& p : pts) {
      // coarse values so ties occur
      p.cost = static_cast<double>(UniformIndex(rng, 6));
      p.ret = static_cast<double>(UniformIndex(rng, 6));
    }
    // peel fronts by brute force
    std::vector<int> rank(n, -1);
    for (int level = 0, left = n; left > 0; ++level) {
      std::vector<int> front;
      for (int i = 0; i < n; ++i) {
        if (rank[i] >= 0) continue;
        bool dominated = false;
        for (int j = 0; j < n && !dominated; ++j) {
          dominated = rank[j] < 0 && Dominates(pts[j], pts[i]);
        }
        if (!dominated) front.push_back(i);
      }
      for (int i : front) rank[i] = level;
      left -= static_cast<int>(front.size());
    }
    const auto fronts = NonDominatedSort(pts);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      for (int i : fronts[f]) {
        if (rank[i] != static_cast<int>(f)) {
          return "trial " + std::to_string(trial) + " disagrees";
        }
      }
    }
  }
  return {};
}

std::string ParameterCounts() {
  const auto pendulum = MakeEnvironment(kSafePendulum);
  const auto acrobot = MakeEnvironment(kSafeAcrobot);
  const int p = DefaultPolicyArchitecture(pendulum->spec()).num_parameters();
  const int a = DefaultPolicyArchitecture(acrobot->spec()).num_parameters();
  if (p != 26 || a != 83) {
    return "got " + std::to_string(p) + " and " + std::to_string(a);
  }
  return {};
}

std::string GradientCheck() {
  DynamicsModel model(3, ActionSpace::Continuous(-2.0, 2.0));
  const GradientCheckResult r = model.GradientCheck(11);
  if (!(r.max_rel_error <= 1e-4)) {
    return "max relative error " + std::to_string(r.max_rel_error);
  }
  return {};
}

std::string MetricFixtures() {
  EpochSeries s;
  s.mr = {1, 2, 3, 4};
  s.p_unsafe = {0, 0, 0, 0};
  if (Mar(s) != 3.5) return "MAR even";
  s.mr = {0, 0, 6};
  s.p_unsafe = {0, 0, 0};
  if (Mar(s) != 3.0) return "MAR odd";
  s.mr = {-5, -3, -2};
  s.episode_length = 200;
  s.initial_steps = 200;
  const auto steps = Mrcp(s, -2.5);
  if (!steps || *steps != 600) return "MRCP";
  s.mr.assign(10, 0.0);
  s.p_unsafe.assign(10, 0.0);
  s.p_unsafe[0] = 10.0;
  if (PUnsafeTransient(s) != 5.0) return "transient";
  const std::vector<int> costs(200, 0);
  std::vector<int> two = costs;
  two[3] = two[70] = 1;
  if (PUnsafe(two) != 1.0) return "p(unsafe)";
  return {};
}

std::string ArchiveReplay() {
  const auto env = MakeEnvironment(kSafePendulum);
  // analytic stand-in for a learned model: the true pendulum step
  struct TrueModel final : TransitionModel {
    const Environment* env;
    int observation_dim() const override { return env->spec().observation_dim; }
    Eigen::MatrixXd PredictBatch(const Eigen::MatrixXd& obs,
                                 std::span<const double> actions) const override {
      Eigen::MatrixXd out(obs.rows(), obs.cols());
      const auto* p = static_cast<const SafePendulum*>(env);
      for (Eigen::Index i = 0; i < obs.cols(); ++i) {
        const double theta = std::atan2(obs(1, i), obs(0, i));
        out.col(i) = env->Step(p->MakeState(theta, obs(2, i)), actions[i])
                         .next_state.observation;
      }
      return out;
    }
  } model;
  model.env = env.get();
  PlannerConfig config;
  config.kind = PlannerKind::kSme;
  const PlanningProblem problem{model, *env,
                                PolicyArchitectureFor(env->spec(), config)};
  Rng rng = MakeRng(3, Stream::kTest);
  const EnvState state = static_cast<const SafePendulum&>(*env).MakeState(0.3, 0.0);
  const Archive archive =
      RunMapElites(problem, state.observation, config, rng, ReplacementRule::kSafe,
                   [&](const Archive& a, int k, Rng& r) {
                     return SelectSafe(a, k, r, problem.policy_architecture);
                   });
  std::vector<std::optional<std::pair<double, double>>> cells(
      static_cast<std::size_t>(config.grid_size) * config.grid_size);
  for (const InsertEvent& e : archive.log()) {
    auto& slot = cells[e.cell];
    const bool expect = !slot || e.cost < slot->second ||
                        (e.cost == slot->second && e.ret > slot->first);
    if (expect != e.stored) return "replacement rule violated";
    if (e.stored) slot = std::make_pair(e.ret, e.cost);
  }
  int occupied = 0;
  for (const auto& c : cells) occupied += c.has_value();
  if (occupied != archive.size()) return "cell count mismatch";
  return {};
}

}  // namespace

int RunSelftest(std::ostream& out) {
  const std::vector<Check> checks = {
      {"non-dominated sort vs brute force", NonDominatedSortOracle},
      {"policy parameter counts", ParameterCounts},
      {"model gradient check", GradientCheck},
      {"metric fixtures", MetricFixtures},
      {"archive insertion replay", ArchiveReplay},
  };
  int failed = 0;
  for (const Check& check : checks) {
    std::string error;
    try {
      error = check.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (error.empty()) {
      out << "PASS " << check.name << '\n';
    } else {
      ++failed;
      out << "FAIL " << check.name << ": " << error << '\n';
    }
  }
  return failed;
}

}  // namespace safeplan::tools
