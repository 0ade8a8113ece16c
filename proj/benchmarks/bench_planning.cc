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

#include <map>
#include <memory>
#include <string>

#include <benchmark/benchmark.h>

#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/harness.h"
#include "safeplan/planners.h"
#include "safeplan/rng.h"

namespace safeplan {
namespace {

Trace RandomTrace(const Environment& env, int episodes) {
  Trace trace;
  for (int e = 0; e < episodes; ++e) {
    Rng rng = MakeRng(e, Stream::kRandomPolicy);
    trace.BeginEpoch();
    for (const Transition& t : RunEpisodeRandom(env, env.Reset(e), 200, rng)) {
      trace.Append(t);
    }
  }
  return trace;
}

// A model trained briefly; weights only need to be non-trivial.
const DynamicsModel& Model(const Environment& env) {
  static std::map<std::string, DynamicsModel> models;
  auto it = models.find(env.spec().name);
  if (it == models.end()) {
    TrainConfig config;
    config.passes = 5;
    DynamicsModel model(env.spec().observation_dim, env.spec().action_space, config);
    model.Train(RandomTrace(env, 2), 1);
    it = models.emplace(env.spec().name, std::move(model)).first;
  }
  return it->second;
}

std::unique_ptr<Environment> Env(int index) {
  return MakeEnvironment(index == 0 ? kSafePendulum : kSafeAcrobot);
}

void BM_PredictBatch(benchmark::State& state) {
  const auto env = Env(static_cast<int>(state.range(0)));
  const DynamicsModel& model = Model(*env);
  const int n = static_cast<int>(state.range(1));
  Eigen::MatrixXd obs(env->spec().observation_dim, n);
  std::vector<double> actions(n);
  Rng rng = MakeRng(1, Stream::kTest);
  for (int i = 0; i < n; ++i) {
    obs.col(i) = env->Reset(i).observation;
    actions[i] = SampleAction(rng, env->spec().action_space);
  }
  for (auto _ : state) benchmark::DoNotOptimize(model.PredictBatch(obs, actions));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PredictBatch)->ArgsProduct({{0, 1}, {1, 100}});

void BM_RolloutSequences(benchmark::State& state) {
  const auto env = Env(static_cast<int>(state.range(0)));
  const DynamicsModel& model = Model(*env);
  Rng rng = MakeRng(2, Stream::kTest);
  std::vector<ActionSequence> seqs;
  for (int i = 0; i < 100; ++i) seqs.push_back(SampleActionSequence(rng, env->spec().action_space, 10));
  const Observation start = env->Reset(3).observation;
  for (auto _ : state) benchmark::DoNotOptimize(RolloutSequences(model, *env, start, seqs, 1.0));
}
BENCHMARK(BM_RolloutSequences)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Plan(benchmark::State& state) {
  const auto env = Env(static_cast<int>(state.range(0)));
  const DynamicsModel& model = Model(*env);
  PlannerConfig config;
  config.kind = static_cast<PlannerKind>(state.range(1));
  const PlanningProblem problem{model, *env, PolicyArchitectureFor(env->spec(), config)};
  const Observation start = env->Reset(4).observation;
  std::uint64_t step = 0;
  for (auto _ : state) {
    Rng rng = MakeRng(5, Stream::kPlanner, step++);
    benchmark::DoNotOptimize(Plan(problem, start, config, rng));
  }
  state.SetLabel(std::string(PlannerName(config.kind)));
}
BENCHMARK(BM_Plan)
    ->ArgsProduct({{0, 1},
                   {static_cast<int>(PlannerKind::kRs), static_cast<int>(PlannerKind::kSrs),
                    static_cast<int>(PlannerKind::kMe), static_cast<int>(PlannerKind::kSme),
                    static_cast<int>(PlannerKind::kPsme), static_cast<int>(PlannerKind::kCem),
                    static_cast<int>(PlannerKind::kRcem)}})
    ->Unit(benchmark::kMillisecond);

void BM_TrainPass(benchmark::State& state) {
  const auto env = Env(static_cast<int>(state.range(0)));
  const Trace trace = RandomTrace(*env, 5);
  TrainConfig config;
  config.passes = 1;
  for (auto _ : state) {
    DynamicsModel model(env->spec().observation_dim, env->spec().action_space, config);
    benchmark::DoNotOptimize(model.Train(trace, 1));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_TrainPass)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace safeplan

BENCHMARK_MAIN();
