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

#ifndef SAFEPLAN_HARNESS_H_
#define SAFEPLAN_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safeplan/config.h"
#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"
#include "safeplan/metrics.h"
#include "safeplan/planners.h"
#include "safeplan/rng.h"

namespace safeplan {

// `steps` transitions from `start` with uniformly random actions.
std::vector<Transition> RunEpisodeRandom(const Environment& env,
                                         EnvState start, int steps, Rng& rng);

struct PlanLogRow {
  int epoch = 0;
  int step = 0;
  PlanResult plan;
};

struct EpochTiming {
  int epoch = 0;
  double train_seconds = 0.0;
  double episode_seconds = 0.0;
};

// Everything one seed produced. Epoch 0 of the trace is the random episode.
struct SeedRun {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  Trace trace;
  EpochSeries series;
  std::optional<SeedMetrics> metrics;
  std::vector<TrainReport> train_reports;
  std::vector<PlanLogRow> plan_log;
  std::vector<EpochTiming> timings;
  int train_calls = 0;
  int planner_calls = 0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<SeedRun> seeds;
  MetricsReport report;

  bool all_ok() const;
};

struct RunOptions {
  bool write_outputs = true;
  // Seeds run concurrently on up to this many threads.
  int jobs = 1;
  // Receives one line per finished epoch when set.
  std::ostream* progress = nullptr;
};

// Per-seed output directory inside a run directory.
std::filesystem::path SeedDir(const std::filesystem::path& run_dir,
                              std::uint64_t seed);

// Runs one seed; writes its files under SeedDir when requested, flushing
// after every epoch. A diverging model ends the seed with ok = false.
SeedRun RunSeed(const ExperimentConfig& config, std::uint64_t seed,
                const RunOptions& options = {});

// Validates the config, snapshots it to <output_dir>/config.json and runs
// every seed.
RunRecord RunExperiment(const ExperimentConfig& config,
                        const RunOptions& options = {});

// Trace CSV: epoch,step,s_0..,a,r,c,s_next_0..
void WriteTraceCsvHeader(std::ostream& out, int observation_dim);
void WriteTraceCsvRows(std::ostream& out, int epoch, int first_step,
                       std::span<const Transition> transitions);
Trace ReadTraceCsv(const std::filesystem::path& path);

// Recomputes per-seed and aggregate metrics of a run directory from its
// traces and rewrites metrics.json and epochs.csv.
MetricsReport RecomputeMetrics(const std::filesystem::path& run_dir);

struct ComparisonRow {
  std::string run_dir;
  MetricsReport report;
  int pareto_label = 0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> missing;
};

// Aggregates persisted runs; unreadable directories are listed in missing.
Comparison Compare(std::span<const std::filesystem::path> run_dirs);
void WriteComparisonCsv(std::ostream& out, const Comparison& comparison);
std::string ComparisonTable(const Comparison& comparison);

// Coverage and reward histogram over all seeds of a run; writes coverage.csv
// and reward_bins.csv into the run directory and each seed directory.
ExplorationSummary ExploreRun(const std::filesystem::path& run_dir);

}  // namespace safeplan

#endif  // SAFEPLAN_HARNESS_H_
