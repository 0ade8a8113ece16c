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

#ifndef SAFEPLAN_METRICS_H_
#define SAFEPLAN_METRICS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "safeplan/dynamics_model.h"
#include "safeplan/environments.h"

namespace safeplan {

// Per-epoch summaries of the planned episodes of one run. The initial random
// episode is not part of the series; it only enters through initial_steps.
struct EpochSeries {
  std::vector<double> mr;        // mean step reward of each epoch
  std::vector<double> p_unsafe;  // percent of unsafe steps of each epoch
  int episode_length = 200;
  long long initial_steps = 200;

  int num_epochs() const { return static_cast<int>(mr.size()); }
};

// Builds the series from a trace whose first `skip_epochs` epochs are the
// random warm-up.
EpochSeries SeriesFromTrace(const Trace& trace, int skip_epochs = 1);

// Mean of the last ceil(N/2) entries of mr. Throws on an empty series.
double Mar(const EpochSeries& series);

// Real-system steps until the first epoch whose mr reaches the threshold.
std::optional<long long> Mrcp(const EpochSeries& series, double threshold);

// 100 * (unsafe steps) / (steps).
double PUnsafe(std::span<const int> costs);
// Mean of the per-epoch percentages.
double PUnsafeRun(const EpochSeries& series);
// Number of leading epochs used by the transient measure: ceil(0.15 N).
int TransientEpochs(int num_epochs);
double PUnsafeTransient(const EpochSeries& series);

// Mean with a 90% Gaussian half-width, 1.645 * sd / sqrt(n), sd with n - 1.
struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};
inline constexpr double kZ90 = 1.645;
Interval ConfidenceInterval(std::span<const double> values);

struct SeedMetrics {
  std::uint64_t seed = 0;
  double mar = 0.0;
  std::optional<long long> mrcp;
  double p_unsafe = 0.0;
  double p_unsafe_transient = 0.0;
};

SeedMetrics ComputeSeedMetrics(std::uint64_t seed, const EpochSeries& series,
                               double threshold);

struct MetricsReport {
  std::string env;
  std::string method;
  double reward_threshold = 0.0;
  Interval mar;
  // Over the seeds that reached the threshold; empty when none did.
  std::optional<Interval> mrcp;
  int mrcp_reached = 0;
  Interval p_unsafe;
  Interval p_unsafe_transient;
  std::vector<SeedMetrics> seeds;
};

MetricsReport BuildReport(std::string env, std::string method,
                          double threshold, std::vector<SeedMetrics> seeds);

std::string ReportToJson(const MetricsReport& report);
MetricsReport ReportFromJson(const std::string& text);

struct MethodSummary {
  double mar = 0.0;
  double p_unsafe = 0.0;
};
// Front index per method: MAR maximized, p(unsafe) minimized. 0 is best.
std::vector<int> MethodParetoLabels(std::span<const MethodSummary> methods);

struct ExplorationSummary {
  int grid_size = 50;
  std::vector<long long> coverage;  // row-major [i * grid + j]
  std::vector<long long> reward_bins;
};

// Visit counts of the behavior projection of every reached real state, and
// a histogram of step rewards over the task's reward range.
ExplorationSummary Explore(std::span<const Transition> transitions,
                           const Task& task, int grid_size = 50,
                           int buckets = 10);
int RewardBucket(double reward, double low, double high, int buckets);

// CSV writers; headers: epoch,mr,p_unsafe / i,j,count / bucket,count.
void WriteSeriesCsv(std::ostream& out, const EpochSeries& series);
void WriteCoverageCsv(std::ostream& out, const ExplorationSummary& summary);
void WriteRewardBinsCsv(std::ostream& out, const ExplorationSummary& summary);

// Shortest decimal text that reads back to the same double.
std::string FormatDouble(double value);

}  // namespace safeplan

#endif  // SAFEPLAN_METRICS_H_
