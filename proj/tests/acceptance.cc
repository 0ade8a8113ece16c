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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "safeplan/archive.h"
#include "safeplan/config.h"
#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/harness.h"
#include "safeplan/metrics.h"
#include "safeplan/pareto.h"
#include "safeplan/planners.h"
#include "safeplan/policies.h"
#include "safeplan/rng.h"

namespace {

using namespace safeplan;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

fs::path WorkDir() {
  const fs::path dir = fs::temp_directory_path() / "safeplan_acceptance";
  fs::create_directories(dir);
  return dir;
}

// 1 -------------------------------------------------------------------------

// Peels fronts by checking every pair against the remaining set.
std::vector<int> BruteForceRanks(const std::vector<CostReturn>& pts) {
  const int n = static_cast<int>(pts.size());
  auto dominates = [](const CostReturn& p, const CostReturn& q) {
    const bool no_worse = p.cost <= q.cost && p.ret >= q.ret;
    const bool better = p.cost < q.cost || p.ret > q.ret;
    return no_worse && better;
  };
  std::vector<int> rank(n, -1);
  for (int level = 0, left = n; left > 0; ++level) {
    std::vector<int> front;
    for (int i = 0; i < n; ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (int j = 0; j < n && !dominated; ++j) {
        dominated = rank[j] < 0 && dominates(pts[j], pts[i]);
      }
      if (!dominated) front.push_back(i);
    }
    for (int i : front) rank[i] = level;
    left -= static_cast<int>(front.size());
  }
  return rank;
}

Outcome NonDominatedSortOracle() {
  const auto start = Clock::now();
  Rng rng = MakeRng(1001, Stream::kTest);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(UniformIndex(rng, 100));
    const bool coarse = trial % 2 == 0;  // coarse grids force ties
    std::vector<CostReturn> pts(n);
    for (CostReturn& p : pts) {
      if (coarse) {
        p.cost = static_cast<double>(UniformIndex(rng, 5));
        p.ret = static_cast<double>(UniformIndex(rng, 8));
      } else {
        p.cost = UniformReal(rng, 0.0, 10.0);
        p.ret = UniformReal(rng, -5.0, 5.0);
      }
    }
    const std::vector<int> rank = BruteForceRanks(pts);
    const auto fronts = NonDominatedSort(pts);
    std::vector<int> seen(n, 0);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      for (int i : fronts[f]) {
        ++seen[i];
        if (rank[i] != static_cast<int>(f)) {
          return {false, "trial " + std::to_string(trial) + ": index " +
                             std::to_string(i) + " in front " + std::to_string(f) +
                             ", oracle says " + std::to_string(rank[i])};
        }
      }
    }
    for (int c : seen) {
      if (c != 1) return {false, "trial " + std::to_string(trial) + ": not a partition"};
    }
  }
  const double t = Since(start);
  return {t < 10.0, "1000 instances agree, " + Fmt(t) + " s"};
}

// 2 -------------------------------------------------------------------------

Outcome PolicyParameterCounts() {
  const int p = DefaultPolicyArchitecture(MakeEnvironment(kSafePendulum)->spec())
                    .num_parameters();
  const int a = DefaultPolicyArchitecture(MakeEnvironment(kSafeAcrobot)->spec())
                    .num_parameters();
  return {p == 26 && a == 83,
          "pendulum " + std::to_string(p) + ", acrobot " + std::to_string(a)};
}

// 3 -------------------------------------------------------------------------

Outcome GradientCheck() {
  double worst = 0.0;
  std::string where;
  const std::vector<std::pair<int, ActionSpace>> shapes = {
      {3, ActionSpace::Continuous(-2.0, 2.0)},
      {6, ActionSpace::Discrete({-1.0, 0.0, 1.0})},
  };
  for (const auto& [dim, space] : shapes) {
    for (ModelLoss loss : {ModelLoss::kGaussianNll, ModelLoss::kMse}) {
      TrainConfig config;
      config.loss = loss;
      DynamicsModel model(dim, space, config);
      const GradientCheckResult r = model.GradientCheck(17, 10, 1e-5);
      if (!(r.max_rel_error <= worst)) {
        worst = r.max_rel_error;
        where = "dim " + std::to_string(dim);
      }
    }
  }
  return {worst <= 1e-4, "max relative error " + Fmt(worst) + " (" + where + ")"};
}

// 4 -------------------------------------------------------------------------

Outcome LinearSystemLearning() {
  const auto start = Clock::now();
  Rng rng = MakeRng(4, Stream::kTest);
  Trace trace;
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (int k = 0; k < 2000; ++k) {
    if (k % 100 == 0) {
      trace.BeginEpoch();
      s = Eigen::Vector2d(UniformReal(rng, -1, 1), UniformReal(rng, -1, 1));
    }
    const double a = UniformReal(rng, -1.0, 1.0);
    const Eigen::Vector2d next = 0.9 * s + Eigen::Vector2d::Constant(0.1 * a);
    trace.Append({s, a, 0.0, 0, next});
    s = next;
  }
  TrainConfig config;
  config.passes = 300;
  DynamicsModel model(2, ActionSpace::Continuous(-1.0, 1.0), config);
  const TrainReport report = model.Train(trace, 4);
  const double t = Since(start);
  return {report.holdout_mse <= 1e-3 && t < 120.0,
          "held-out MSE " + Fmt(report.holdout_mse) + " on " +
              std::to_string(report.holdout_size) + " transitions, " + Fmt(t) + " s"};
}

// 5 -------------------------------------------------------------------------

DynamicsModel TrainedPendulumModel(const SafePendulum& env) {
  Trace trace;
  for (std::uint64_t e = 0; e < 5; ++e) {
    Rng rng = MakeRng(e, Stream::kRandomPolicy);
    trace.BeginEpoch();
    for (const Transition& t : RunEpisodeRandom(env, env.Reset(e), 200, rng)) {
      trace.Append(t);
    }
  }
  DynamicsModel model(env.spec().observation_dim, env.spec().action_space);
  model.Train(trace, 5);
  return model;
}

Outcome SafetyFilterPaired() {
  const SafePendulum env;
  const DynamicsModel model = TrainedPendulumModel(env);
  PlannerConfig config;
  const PlanningProblem problem{model, env, PolicyArchitectureFor(env.spec(), config)};
  // upper half-plane: the balancing region, which holds the unsafe band
  Rng state_rng = MakeRng(55, Stream::kTest);
  int any_unsafe = 0;
  int strictly_lower = 0;
  int violations = 0;
  int planner_mismatch = 0;
  for (int k = 0; k < 100; ++k) {
    const EnvState state =
        env.MakeState(UniformReal(state_rng, -std::numbers::pi / 2, std::numbers::pi / 2),
                      UniformReal(state_rng, -2.0, 2.0));
    Rng rng = MakeRng(k, Stream::kPlanner);
    std::vector<ActionSequence> candidates;
    for (int i = 0; i < config.num_sequences; ++i) {
      candidates.push_back(SampleActionSequence(rng, env.spec().action_space,
                                                config.horizon));
    }
    const auto results = RolloutSequences(model, env, state.observation, candidates,
                                          config.gamma);
    const int rs = RankByReturn(results)[0];
    const int srs = RankSafeFirst(results, config.cost_tolerance)[0];
    bool unsafe = false;
    for (const RolloutResult& r : results) unsafe = unsafe || r.cost > 0.0;
    any_unsafe += unsafe;
    violations += results[srs].cost > results[rs].cost;
    strictly_lower += unsafe && results[srs].cost < results[rs].cost;

    // the production planners see the same candidates
    Rng a = MakeRng(k, Stream::kPlanner), b = MakeRng(k, Stream::kPlanner);
    const PlanResult plan_rs = PlanRandomShooting(problem, state.observation, config, a, false);
    const PlanResult plan_srs = PlanRandomShooting(problem, state.observation, config, b, true);
    planner_mismatch += plan_rs.candidate != rs || plan_srs.candidate != srs;
  }
  return {violations == 0 && strictly_lower >= 10 && planner_mismatch == 0,
          "violations " + std::to_string(violations) + ", strictly lower in " +
              std::to_string(strictly_lower) + " of " + std::to_string(any_unsafe) +
              " states with an unsafe candidate, planner mismatches " +
              std::to_string(planner_mismatch)};
}

// 6, 7 ----------------------------------------------------------------------

struct MethodResult {
  double mar = 0.0;
  double p_unsafe = 0.0;
  bool ok = false;
};

MethodResult RunDesk(std::string_view env, PlannerKind kind) {
  ExperimentConfig config = DefaultConfig(env, Profile::kDesk);
  config.planner.kind = kind;
  config.output_dir =
      (WorkDir() / (std::string(env) + "_" + std::string(PlannerName(kind)))).string();
  fs::remove_all(config.output_dir);
  const auto start = Clock::now();
  const RunRecord record = RunExperiment(config);
  MethodResult out{record.report.mar.mean, record.report.p_unsafe.mean,
                   record.all_ok()};
  std::cout << "  " << env << ' ' << PlannerName(kind) << ": MAR " << Fmt(out.mar)
            << " +- " << Fmt(record.report.mar.half_width) << ", p(unsafe) "
            << Fmt(out.p_unsafe) << " +- " << Fmt(record.report.p_unsafe.half_width)
            << " %, " << Fmt(Since(start)) << " s" << std::endl;
  return out;
}

Outcome PendulumDesk() {
  const auto start = Clock::now();
  const MethodResult srs = RunDesk(kSafePendulum, PlannerKind::kSrs);
  const MethodResult rs = RunDesk(kSafePendulum, PlannerKind::kRs);
  const double t = Since(start);
  const bool pass = srs.ok && rs.ok && srs.mar >= -3.5 &&
                    srs.p_unsafe <= 0.5 * rs.p_unsafe && t < 1800.0;
  return {pass, "S-RS MAR " + Fmt(srs.mar) + ", p(unsafe) S-RS " + Fmt(srs.p_unsafe) +
                    " % vs RS " + Fmt(rs.p_unsafe) + " %, " + Fmt(t) + " s"};
}

Outcome AcrobotDesk() {
  const auto start = Clock::now();
  const MethodResult rs = RunDesk(kSafeAcrobot, PlannerKind::kRs);
  const MethodResult srs = RunDesk(kSafeAcrobot, PlannerKind::kSrs);
  const MethodResult me = RunDesk(kSafeAcrobot, PlannerKind::kMe);
  const MethodResult sme = RunDesk(kSafeAcrobot, PlannerKind::kSme);
  const double t = Since(start);
  auto ordered = [](const MethodResult& unsafe, const MethodResult& safe) {
    return unsafe.ok && safe.ok && unsafe.mar > safe.mar &&
           unsafe.p_unsafe >= 3.0 * safe.p_unsafe;
  };
  const bool pass = ordered(rs, srs) && ordered(me, sme) && t < 3600.0;
  return {pass, "MAR RS " + Fmt(rs.mar) + " > S-RS " + Fmt(srs.mar) + ", ME " +
                    Fmt(me.mar) + " > S-ME " + Fmt(sme.mar) + "; p(unsafe) RS " +
                    Fmt(rs.p_unsafe) + " vs S-RS " + Fmt(srs.p_unsafe) + ", ME " +
                    Fmt(me.p_unsafe) + " vs S-ME " + Fmt(sme.p_unsafe) + "; " +
                    Fmt(t) + " s"};
}

// 8 -------------------------------------------------------------------------

Outcome MetricFixtures() {
  std::vector<std::string> wrong;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) wrong.push_back(what);
  };
  auto series = [](std::vector<double> mr, std::vector<double> p) {
    EpochSeries s;
    s.mr = std::move(mr);
    s.p_unsafe = std::move(p);
    s.episode_length = 200;
    s.initial_steps = 200;
    return s;
  };

  // fixture 1: even N
  const EpochSeries a = series({1, 2, 3, 4}, {0, 0, 0, 0});
  check(Mar(a) == 3.5, "MAR [1,2,3,4]");
  check(!Mrcp(a, 5.0).has_value(), "MRCP never reached");
  check(PUnsafeRun(a) == 0.0 && PUnsafeTransient(a) == 0.0, "all safe");

  // fixture 2: odd N
  const EpochSeries b = series({0, 0, 6}, {100, 100, 100});
  check(Mar(b) == 3.0, "MAR [0,0,6]");
  check(PUnsafeRun(b) == 100.0, "all unsafe");

  // fixture 3: threshold crossing
  const EpochSeries c = series({-5, -3, -2}, {1, 0, 0});
  check(Mrcp(c, -2.5) == 600, "MRCP [-5,-3,-2]");
  check(Mar(c) == -2.5, "MAR [-5,-3,-2]");

  // fixture 4: transient over the first ceil(0.15 N) epochs
  std::vector<double> p(10, 0.0);
  p[0] = 10.0;
  const EpochSeries d = series(std::vector<double>(10, -1.0), p);
  check(PUnsafeTransient(d) == 5.0, "transient N=10");
  check(PUnsafeRun(d) == 1.0, "run p(unsafe) N=10");
  check(Mar(d) == -1.0, "MAR constant");
  check(Mrcp(d, -1.0) == 200, "MRCP at first epoch");

  // fixture 5: per-epoch percentages from cost indicators, N=20
  std::vector<int> costs(200, 0);
  costs[10] = costs[20] = 1;
  check(PUnsafe(costs) == 1.0, "2 of 200 unsafe");
  std::vector<double> p20(20, 1.0);
  p20[0] = p20[1] = p20[2] = 4.0;
  const EpochSeries e = series(std::vector<double>(20, 0.0), p20);
  check(PUnsafeTransient(e) == 4.0, "transient N=20");
  check(PUnsafeRun(e) == 1.45, "run p(unsafe) N=20");

  std::string detail = "5 fixtures";
  for (const std::string& w : wrong) detail += "; wrong: " + w;
  return {wrong.empty(), detail};
}

// 9 -------------------------------------------------------------------------

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome CliDeterminism() {
  const fs::path dir = WorkDir() / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ExperimentConfig config = DefaultConfig(kSafePendulum);
  config.epochs = 3;
  config.output_dir = (dir / "unused").string();
  SaveConfig(config, dir / "config.json");
  for (const char* name : {"a", "b"}) {
    const std::string cmd = std::string("\"") + SAFEPLAN_CLI_PATH + "\" run --config \"" +
                            (dir / "config.json").string() + "\" --seed 7 --quiet --out \"" +
                            (dir / name).string() + "\" > \"" +
                            (dir / name).string() + ".log\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
  }
  std::vector<std::string> differ;
  for (const fs::path rel : {fs::path("seed_7/trace.csv"), fs::path("seed_7/metrics.json"),
                             fs::path("metrics.json")}) {
    const std::string x = Slurp(dir / "a" / rel), y = Slurp(dir / "b" / rel);
    if (x != y || x.empty()) differ.push_back(rel.string());
  }
  std::string detail = "trace.csv and metrics.json byte-identical across two runs";
  if (!differ.empty()) {
    detail = "differ:";
    for (const auto& d : differ) detail += " " + d;
  }
  return {differ.empty(), detail};
}

// 10 ------------------------------------------------------------------------

Outcome ArchiveInvariants() {
  const SafePendulum env;
  const DynamicsModel model = TrainedPendulumModel(env);
  PlannerConfig config;
  config.kind = PlannerKind::kSme;
  const PlanningProblem problem{model, env, PolicyArchitectureFor(env.spec(), config)};
  Rng state_rng = MakeRng(10, Stream::kTest);
  int violations = 0;
  int events = 0;
  int stored = 0;
  for (int k = 0; k < 20; ++k) {
    const EnvState state =
        env.MakeState(UniformReal(state_rng, -std::numbers::pi, std::numbers::pi),
                      UniformReal(state_rng, -8.0, 8.0));
    Rng rng = MakeRng(k, Stream::kPlanner);
    const Archive archive = RunMapElites(
        problem, state.observation, config, rng, ReplacementRule::kSafe,
        [&](const Archive& a, int count, Rng& r) {
          return SelectSafe(a, count, r, problem.policy_architecture);
        });
    std::map<int, std::pair<double, double>> cells;  // cell -> (R, C)
    for (const InsertEvent& e : archive.log()) {
      ++events;
      const auto it = cells.find(e.cell);
      bool expect = true;
      if (it != cells.end()) {
        const auto [ret, cost] = it->second;
        expect = e.cost < cost || (e.cost == cost && e.ret > ret);
        violations += !e.had_incumbent || e.incumbent_ret != ret || e.incumbent_cost != cost;
      } else {
        violations += e.had_incumbent;
      }
      violations += expect != e.stored;
      if (e.stored) {
        cells[e.cell] = {e.ret, e.cost};
        ++stored;
      }
    }
    violations += static_cast<int>(cells.size()) != archive.size();
    for (const auto& [cell, rc] : cells) {
      const auto& elite = archive.cell(cell);
      violations += !elite || elite->ret != rc.first || elite->cost != rc.second ||
                    elite->descriptor.Cell(config.grid_size) != cell;
    }
    // the planner call with the same stream acts through this archive's best elite
    Rng replay = MakeRng(k, Stream::kPlanner);
    const PlanResult plan = PlanMapElites(problem, state.observation, config, replay);
    violations += plan.action != BestElite(archive, true).policy.Act(state.observation);
  }
  return {violations == 0, std::to_string(violations) + " violations over " +
                               std::to_string(events) + " insertions (" +
                               std::to_string(stored) + " stored) in 20 S-ME calls"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"non-dominated sort matches brute-force oracle", NonDominatedSortOracle},
      {"policy parameter counts 26 / 83", PolicyParameterCounts},
      {"model gradient check", GradientCheck},
      {"linear-system model learning", LinearSystemLearning},
      {"safety filter never raises rollout cost", SafetyFilterPaired},
      {"desk-scale safe pendulum", PendulumDesk},
      {"desk-scale safe acrobot ordering", AcrobotDesk},
      {"metric formulas on fixtures", MetricFixtures},
      {"run determinism through the CLI", CliDeterminism},
      {"archive invariants after S-ME planning", ArchiveInvariants},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " [" << id << "] "
              << criteria[i].first << " -- " << outcome.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
