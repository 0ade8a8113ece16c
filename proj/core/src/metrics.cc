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

#include "safeplan/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "safeplan/pareto.h"
#include "safeplan/policies.h"

namespace safeplan {

using nlohmann::json;

EpochSeries SeriesFromTrace(const Trace& trace, int skip_epochs) {
  EpochSeries series;
  series.initial_steps = 0;
  series.episode_length = 0;
  for (int e = 0; e < trace.num_epochs(); ++e) {
    const auto epoch = trace.epoch(e);
    if (e < skip_epochs) {
      series.initial_steps += static_cast<long long>(epoch.size());
      continue;
    }
    if (epoch.empty()) continue;
    double reward = 0.0;
    std::vector<int> costs;
    costs.reserve(epoch.size());
    for (const Transition& t : epoch) {
      reward += t.r;
      costs.push_back(t.c);
    }
    series.mr.push_back(reward / static_cast<double>(epoch.size()));
    series.p_unsafe.push_back(PUnsafe(costs));
    series.episode_length = static_cast<int>(epoch.size());
  }
  return series;
}

double Mar(const EpochSeries& series) {
  const int n = series.num_epochs();
  if (n == 0) throw std::invalid_argument("MAR of an empty series");
  const int tail = (n + 1) / 2;
  double sum = 0.0;
  for (int i = n - tail; i < n; ++i) sum += series.mr[i];
  return sum / tail;
}

std::optional<long long> Mrcp(const EpochSeries& series, double threshold) {
  for (int i = 0; i < series.num_epochs(); ++i) {
    if (series.mr[i] >= threshold) {
      return static_cast<long long>(i) * series.episode_length +
             series.initial_steps;
    }
  }
  return std::nullopt;
}

double PUnsafe(std::span<const int> costs) {
  if (costs.empty()) return 0.0;
  long long unsafe = 0;
  for (int c : costs) unsafe += c;
  return 100.0 * static_cast<double>(unsafe) / static_cast<double>(costs.size());
}

double PUnsafeRun(const EpochSeries& series) {
  if (series.p_unsafe.empty()) return 0.0;
  double sum = 0.0;
  for (double p : series.p_unsafe) sum += p;
  return sum / static_cast<double>(series.p_unsafe.size());
}

int TransientEpochs(int num_epochs) {
  // ceil(0.15 N) in integer arithmetic
  return (15 * num_epochs + 99) / 100;
}

double PUnsafeTransient(const EpochSeries& series) {
  const int k = std::min(TransientEpochs(series.num_epochs()),
                         static_cast<int>(series.p_unsafe.size()));
  if (k == 0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += series.p_unsafe[i];
  return sum / k;
}

Interval ConfidenceInterval(std::span<const double> values) {
  Interval out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  out.half_width = kZ90 * sd / std::sqrt(static_cast<double>(n));
  return out;
}

SeedMetrics ComputeSeedMetrics(std::uint64_t seed, const EpochSeries& series,
                               double threshold) {
  SeedMetrics m;
  m.seed = seed;
  m.mar = Mar(series);
  m.mrcp = Mrcp(series, threshold);
  m.p_unsafe = PUnsafeRun(series);
  m.p_unsafe_transient = PUnsafeTransient(series);
  return m;
}

MetricsReport BuildReport(std::string env, std::string method,
                          double threshold, std::vector<SeedMetrics> seeds) {
  MetricsReport report;
  report.env = std::move(env);
  report.method = std::move(method);
  report.reward_threshold = threshold;
  std::vector<double> mar, pu, put, mrcp;
  for (const SeedMetrics& s : seeds) {
    mar.push_back(s.mar);
    pu.push_back(s.p_unsafe);
    put.push_back(s.p_unsafe_transient);
    if (s.mrcp) mrcp.push_back(static_cast<double>(*s.mrcp));
  }
  report.mar = ConfidenceInterval(mar);
  report.p_unsafe = ConfidenceInterval(pu);
  report.p_unsafe_transient = ConfidenceInterval(put);
  report.mrcp_reached = static_cast<int>(mrcp.size());
  if (!mrcp.empty()) report.mrcp = ConfidenceInterval(mrcp);
  report.seeds = std::move(seeds);
  return report;
}

namespace {

json IntervalJson(const Interval& in) {
  return json{{"mean", in.mean}, {"ci90", in.half_width}};
}

Interval IntervalFrom(const json& j) {
  return Interval{j.at("mean").get<double>(), j.at("ci90").get<double>()};
}

}  // namespace

std::string ReportToJson(const MetricsReport& report) {
  json seeds = json::array();
  for (const SeedMetrics& s : report.seeds) {
    seeds.push_back(json{
        {"seed", s.seed},
        {"mar", s.mar},
        {"mrcp", s.mrcp ? json(*s.mrcp) : json(nullptr)},
        {"p_unsafe", s.p_unsafe},
        {"p_unsafe_transient", s.p_unsafe_transient},
    });
  }
  json j{
      {"env", report.env},
      {"method", report.method},
      {"reward_threshold", report.reward_threshold},
      {"mar", IntervalJson(report.mar)},
      {"mrcp", report.mrcp ? IntervalJson(*report.mrcp) : json(nullptr)},
      {"mrcp_reached", report.mrcp_reached},
      {"p_unsafe", IntervalJson(report.p_unsafe)},
      {"p_unsafe_transient", IntervalJson(report.p_unsafe_transient)},
      {"seeds", seeds},
  };
  return j.dump(2) + "\n";
}

MetricsReport ReportFromJson(const std::string& text) {
  const json j = json::parse(text);
  MetricsReport report;
  report.env = j.at("env").get<std::string>();
  report.method = j.at("method").get<std::string>();
  report.reward_threshold = j.at("reward_threshold").get<double>();
  report.mar = IntervalFrom(j.at("mar"));
  if (!j.at("mrcp").is_null()) report.mrcp = IntervalFrom(j.at("mrcp"));
  report.mrcp_reached = j.at("mrcp_reached").get<int>();
  report.p_unsafe = IntervalFrom(j.at("p_unsafe"));
  report.p_unsafe_transient = IntervalFrom(j.at("p_unsafe_transient"));
  for (const json& s : j.at("seeds")) {
    SeedMetrics m;
    m.seed = s.at("seed").get<std::uint64_t>();
    m.mar = s.at("mar").get<double>();
    if (!s.at("mrcp").is_null()) m.mrcp = s.at("mrcp").get<long long>();
    m.p_unsafe = s.at("p_unsafe").get<double>();
    m.p_unsafe_transient = s.at("p_unsafe_transient").get<double>();
    report.seeds.push_back(m);
  }
  return report;
}

std::vector<int> MethodParetoLabels(std::span<const MethodSummary> methods) {
  std::vector<CostReturn> points;
  points.reserve(methods.size());
  for (const MethodSummary& m : methods) points.push_back({m.p_unsafe, m.mar});
  std::vector<int> labels(methods.size(), 0);
  const auto fronts = NonDominatedSort(points);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    for (int i : fronts[f]) labels[i] = static_cast<int>(f);
  }
  return labels;
}

int RewardBucket(double reward, double low, double high, int buckets) {
  if (!(reward > low)) return 0;
  if (reward >= high) return buckets - 1;
  const int b = static_cast<int>(std::floor((reward - low) / (high - low) * buckets));
  return std::clamp(b, 0, buckets - 1);
}

ExplorationSummary Explore(std::span<const Transition> transitions,
                           const Task& task, int grid_size, int buckets) {
  ExplorationSummary out;
  out.grid_size = grid_size;
  out.coverage.assign(static_cast<std::size_t>(grid_size) * grid_size, 0);
  out.reward_bins.assign(buckets, 0);
  const EnvSpec& spec = task.spec();
  for (const Transition& t : transitions) {
    const BehaviorDescriptor d =
        DescriptorFromPoint(spec, task.Project(t.s_next), grid_size);
    ++out.coverage[d.Cell(grid_size)];
    ++out.reward_bins[RewardBucket(t.r, spec.reward_min, spec.reward_max,
                                   buckets)];
  }
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void WriteSeriesCsv(std::ostream& out, const EpochSeries& series) {
  out << "epoch,mr,p_unsafe\n";
  for (int i = 0; i < series.num_epochs(); ++i) {
    out << i << ',' << FormatDouble(series.mr[i]) << ','
        << FormatDouble(series.p_unsafe[i]) << '\n';
  }
}

void WriteCoverageCsv(std::ostream& out, const ExplorationSummary& summary) {
  out << "i,j,count\n";
  for (int i = 0; i < summary.grid_size; ++i) {
    for (int j = 0; j < summary.grid_size; ++j) {
      out << i << ',' << j << ','
          << summary.coverage[static_cast<std::size_t>(i) * summary.grid_size + j]
          << '\n';
    }
  }
}

void WriteRewardBinsCsv(std::ostream& out, const ExplorationSummary& summary) {
  out << "bucket,count\n";
  for (std::size_t b = 0; b < summary.reward_bins.size(); ++b) {
    out << b << ',' << summary.reward_bins[b] << '\n';
  }
}

}  // namespace safeplan
