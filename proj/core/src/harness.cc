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

#include "safeplan/harness.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace safeplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string TimingsJson(const SeedRun& run) {
  json epochs = json::array();
  for (const EpochTiming& t : run.timings) {
    epochs.push_back(json{{"epoch", t.epoch},
                          {"train_seconds", t.train_seconds},
                          {"episode_seconds", t.episode_seconds}});
  }
  return json{{"seed", run.seed}, {"epochs", epochs}}.dump(2) + "\n";
}

std::string SeedReportJson(const ExperimentConfig& config, const SeedRun& run) {
  std::vector<SeedMetrics> seeds;
  if (run.metrics) seeds.push_back(*run.metrics);
  return ReportToJson(BuildReport(config.env,
                                  std::string(PlannerName(config.planner.kind)),
                                  config.reward_threshold, std::move(seeds)));
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

double ParseDouble(const std::string& s) {
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number '" + s + "' in trace");
  }
  return value;
}

}  // namespace

bool RunRecord::all_ok() const {
  return std::all_of(seeds.begin(), seeds.end(),
                     [](const SeedRun& s) { return s.ok; });
}

std::vector<Transition> RunEpisodeRandom(const Environment& env,
                                         EnvState start, int steps, Rng& rng) {
  std::vector<Transition> out;
  out.reserve(steps);
  EnvState state = std::move(start);
  for (int t = 0; t < steps; ++t) {
    const double action = SampleAction(rng, env.spec().action_space);
    StepOutcome step = env.Step(state, action);
    out.push_back(Transition{state.observation, action, step.reward, step.cost,
                             step.next_state.observation});
    state = std::move(step.next_state);
  }
  return out;
}

fs::path SeedDir(const fs::path& run_dir, std::uint64_t seed) {
  return run_dir / ("seed_" + std::to_string(seed));
}

void WriteTraceCsvHeader(std::ostream& out, int observation_dim) {
  out << "epoch,step";
  for (int i = 0; i < observation_dim; ++i) out << ",s_" << i;
  out << ",a,r,c";
  for (int i = 0; i < observation_dim; ++i) out << ",s_next_" << i;
  out << '\n';
}

void WriteTraceCsvRows(std::ostream& out, int epoch, int first_step,
                       std::span<const Transition> transitions) {
  int step = first_step;
  for (const Transition& t : transitions) {
    out << epoch << ',' << step++;
    for (Eigen::Index i = 0; i < t.s.size(); ++i) out << ',' << FormatDouble(t.s[i]);
    out << ',' << FormatDouble(t.a) << ',' << FormatDouble(t.r) << ',' << t.c;
    for (Eigen::Index i = 0; i < t.s_next.size(); ++i) {
      out << ',' << FormatDouble(t.s_next[i]);
    }
    out << '\n';
  }
}

Trace ReadTraceCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace " + path.string());
  const auto header = SplitCsv(line);
  const int fields = static_cast<int>(header.size());
  if (fields < 7 || (fields - 5) % 2 != 0) {
    throw std::runtime_error("bad trace header in " + path.string());
  }
  const int d = (fields - 5) / 2;
  Trace trace;
  int current_epoch = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (static_cast<int>(cells.size()) != fields) {
      throw std::runtime_error("bad trace row in " + path.string());
    }
    const int epoch = std::stoi(cells[0]);
    if (epoch != current_epoch) {
      trace.BeginEpoch();
      current_epoch = epoch;
    }
    Transition t;
    t.s.resize(d);
    t.s_next.resize(d);
    for (int i = 0; i < d; ++i) t.s[i] = ParseDouble(cells[2 + i]);
    t.a = ParseDouble(cells[2 + d]);
    t.r = ParseDouble(cells[3 + d]);
    t.c = std::stoi(cells[4 + d]);
    for (int i = 0; i < d; ++i) t.s_next[i] = ParseDouble(cells[5 + d + i]);
    trace.Append(std::move(t));
  }
  return trace;
}

SeedRun RunSeed(const ExperimentConfig& config, std::uint64_t seed,
                const RunOptions& options) {
  SeedRun run;
  run.seed = seed;
  const auto env = MakeEnvironment(config.env, config.env_params);
  const EnvSpec& spec = env->spec();
  const int T = config.episode_length;

  std::ofstream trace_out, epochs_out, log_out;
  const fs::path dir = SeedDir(config.output_dir, seed);
  if (options.write_outputs) {
    fs::create_directories(dir);
    fs::remove(dir / "error.txt");
    trace_out.open(dir / "trace.csv", std::ios::trunc);
    log_out.open(dir / "planner_log.csv", std::ios::trunc);
    if (!trace_out || !log_out) {
      throw std::runtime_error("cannot write outputs in " + dir.string());
    }
    WriteTraceCsvHeader(trace_out, spec.observation_dim);
    log_out << "epoch,step,action,ret,cost,archive_fill\n";
  }
  auto flush_epoch = [&](int epoch) {
    if (!options.write_outputs) return;
    WriteTraceCsvRows(trace_out, epoch, 0, run.trace.epoch(epoch));
    trace_out.flush();
    for (const PlanLogRow& row : run.plan_log) {
      if (row.epoch != epoch) continue;
      log_out << row.epoch << ',' << row.step << ','
              << FormatDouble(row.plan.action) << ','
              << FormatDouble(row.plan.ret) << ',' << FormatDouble(row.plan.cost)
              << ',' << FormatDouble(row.plan.archive_fill) << '\n';
    }
    log_out.flush();
    run.series = SeriesFromTrace(run.trace);
    std::ostringstream series;
    WriteSeriesCsv(series, run.series);
    WriteFile(dir / "epochs.csv", series.str());
    WriteFile(dir / "timings.json", TimingsJson(run));
  };
  auto report_progress = [&](int epoch) {
    if (options.progress == nullptr) return;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    const auto steps = run.trace.epoch(epoch);
    double reward = 0.0;
    int unsafe = 0;
    for (const Transition& t : steps) {
      reward += t.r;
      unsafe += t.c;
    }
    *options.progress << "seed " << seed << " epoch " << epoch << "/"
                      << config.epochs << " mr "
                      << reward / static_cast<double>(std::max<std::size_t>(1, steps.size()))
                      << " unsafe " << unsafe << "/" << steps.size() << "\n"
                      << std::flush;
  };

  // epoch 0: random exploration
  {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = MakeRng(seed, Stream::kRandomPolicy, 0);
    run.trace.BeginEpoch();
    for (Transition& t : RunEpisodeRandom(
             *env, env->Reset(DeriveSeed(seed, Stream::kEnvReset, 0)), T, rng)) {
      run.trace.Append(std::move(t));
    }
    run.timings.push_back(EpochTiming{0, 0.0, Seconds(start)});
    flush_epoch(0);
    report_progress(0);
  }

  DynamicsModel model(spec.observation_dim, spec.action_space, config.model);
  const PlanningProblem problem{model, *env,
                                PolicyArchitectureFor(spec, config.planner)};
  try {
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      EpochTiming timing;
      timing.epoch = epoch;
      auto start = std::chrono::steady_clock::now();
      run.train_reports.push_back(
          model.Train(run.trace, DeriveSeed(seed, Stream::kModel, epoch)));
      ++run.train_calls;
      timing.train_seconds = Seconds(start);

      start = std::chrono::steady_clock::now();
      run.trace.BeginEpoch();
      EnvState state = env->Reset(DeriveSeed(seed, Stream::kEnvReset, epoch));
      for (int step = 0; step < T; ++step) {
        Rng rng = MakeRng(seed, Stream::kPlanner, epoch, step);
        const PlanResult plan = Plan(problem, state.observation, config.planner, rng);
        ++run.planner_calls;
        run.plan_log.push_back(PlanLogRow{epoch, step, plan});
        StepOutcome outcome = env->Step(state, plan.action);
        run.trace.Append(Transition{state.observation, plan.action,
                                    outcome.reward, outcome.cost,
                                    outcome.next_state.observation});
        state = std::move(outcome.next_state);
      }
      timing.episode_seconds = Seconds(start);
      run.timings.push_back(timing);
      flush_epoch(epoch);
      report_progress(epoch);
    }
  } catch (const ModelDivergence& e) {
    run.ok = false;
    run.error = e.what();
    if (options.write_outputs) WriteFile(dir / "error.txt", run.error + "\n");
  }

  run.series = SeriesFromTrace(run.trace);
  if (run.ok && run.series.num_epochs() > 0) {
    run.metrics = ComputeSeedMetrics(seed, run.series, config.reward_threshold);
  }
  if (options.write_outputs) {
    WriteFile(dir / "metrics.json", SeedReportJson(config, run));
    if (model.trained()) model.Save(dir / "model.json");
  }
  return run;
}

RunRecord RunExperiment(const ExperimentConfig& config,
                        const RunOptions& options) {
  Validate(config);
  RunRecord record;
  record.config = config;
  if (options.write_outputs) {
    fs::create_directories(config.output_dir);
    SaveConfig(config, fs::path(config.output_dir) / "config.json");
  }

  record.seeds.resize(config.seeds.size());
  const int jobs = std::clamp(options.jobs, 1,
                              static_cast<int>(config.seeds.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      record.seeds[i] = RunSeed(config, config.seeds[i], options);
    }
  } else {
    std::mutex mutex;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mutex);
            if (next >= config.seeds.size() || failure) return;
            i = next++;
          }
          try {
            record.seeds[i] = RunSeed(config, config.seeds[i], options);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<SeedMetrics> metrics;
  for (const SeedRun& s : record.seeds) {
    if (s.metrics) metrics.push_back(*s.metrics);
  }
  record.report = BuildReport(config.env,
                              std::string(PlannerName(config.planner.kind)),
                              config.reward_threshold, std::move(metrics));
  if (options.write_outputs) {
    WriteFile(fs::path(config.output_dir) / "metrics.json",
              ReportToJson(record.report));
  }
  return record;
}

MetricsReport RecomputeMetrics(const fs::path& run_dir) {
  const ExperimentConfig config = LoadConfig(run_dir / "config.json");
  std::vector<SeedMetrics> metrics;
  for (std::uint64_t seed : config.seeds) {
    const fs::path dir = SeedDir(run_dir, seed);
    if (!fs::exists(dir / "trace.csv") || fs::exists(dir / "error.txt")) continue;
    const EpochSeries series = SeriesFromTrace(ReadTraceCsv(dir / "trace.csv"));
    std::ostringstream csv;
    WriteSeriesCsv(csv, series);
    WriteFile(dir / "epochs.csv", csv.str());
    if (series.num_epochs() == 0) continue;
    metrics.push_back(ComputeSeedMetrics(seed, series, config.reward_threshold));
  }
  MetricsReport report =
      BuildReport(config.env, std::string(PlannerName(config.planner.kind)),
                  config.reward_threshold, std::move(metrics));
  WriteFile(run_dir / "metrics.json", ReportToJson(report));
  return report;
}

Comparison Compare(std::span<const fs::path> run_dirs) {
  Comparison out;
  for (const fs::path& dir : run_dirs) {
    try {
      MetricsReport report;
      if (fs::exists(dir / "metrics.json")) {
        report = ReportFromJson(ReadFile(dir / "metrics.json"));
      } else {
        report = RecomputeMetrics(dir);
      }
      if (report.seeds.empty()) {
        out.missing.push_back(dir.string() + ": no completed seeds");
        continue;
      }
      out.rows.push_back(ComparisonRow{dir.string(), std::move(report), 0});
    } catch (const std::exception& e) {
      out.missing.push_back(dir.string() + ": " + e.what());
    }
  }
  std::vector<MethodSummary> summaries;
  for (const ComparisonRow& row : out.rows) {
    summaries.push_back({row.report.mar.mean, row.report.p_unsafe.mean});
  }
  const std::vector<int> labels = MethodParetoLabels(summaries);
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].pareto_label = labels[i];
  }
  return out;
}

void WriteComparisonCsv(std::ostream& out, const Comparison& comparison) {
  out << "run_dir,env,method,seeds,mar,mar_ci90,mrcp,mrcp_ci90,mrcp_reached,"
         "p_unsafe,p_unsafe_ci90,p_unsafe_transient,p_unsafe_transient_ci90,"
         "pareto_front\n";
  for (const ComparisonRow& row : comparison.rows) {
    const MetricsReport& r = row.report;
    out << row.run_dir << ',' << r.env << ',' << r.method << ','
        << r.seeds.size() << ',' << FormatDouble(r.mar.mean) << ','
        << FormatDouble(r.mar.half_width) << ',';
    if (r.mrcp) {
      out << FormatDouble(r.mrcp->mean) << ',' << FormatDouble(r.mrcp->half_width);
    } else {
      out << ',';
    }
    out << ',' << r.mrcp_reached << ',' << FormatDouble(r.p_unsafe.mean) << ','
        << FormatDouble(r.p_unsafe.half_width) << ','
        << FormatDouble(r.p_unsafe_transient.mean) << ','
        << FormatDouble(r.p_unsafe_transient.half_width) << ','
        << row.pareto_label << '\n';
  }
}

std::string ComparisonTable(const Comparison& comparison) {
  std::ostringstream out;
  auto pm = [](const Interval& in, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << in.mean << " +- "
      << in.half_width;
    return s.str();
  };
  out << std::left << std::setw(14) << "env" << std::setw(8) << "method"
      << std::setw(6) << "seeds" << std::setw(20) << "MAR" << std::setw(22)
      << "MRCP (steps)" << std::setw(20) << "p(unsafe) %" << std::setw(20)
      << "transient %" << "front\n";
  for (const ComparisonRow& row : comparison.rows) {
    const MetricsReport& r = row.report;
    std::string mrcp = "not reached";
    if (r.mrcp) {
      mrcp = pm(*r.mrcp, 0);
      if (r.mrcp_reached < static_cast<int>(r.seeds.size())) {
        mrcp += " (" + std::to_string(r.mrcp_reached) + "/" +
                std::to_string(r.seeds.size()) + ")";
      }
    }
    out << std::left << std::setw(14) << r.env << std::setw(8) << r.method
        << std::setw(6) << r.seeds.size() << std::setw(20) << pm(r.mar, 3)
        << std::setw(22) << mrcp << std::setw(20) << pm(r.p_unsafe, 2)
        << std::setw(20) << pm(r.p_unsafe_transient, 2) << row.pareto_label
        << '\n';
  }
  for (const std::string& m : comparison.missing) out << "missing: " << m << '\n';
  return out.str();
}

ExplorationSummary ExploreRun(const fs::path& run_dir) {
  const ExperimentConfig config = LoadConfig(run_dir / "config.json");
  const auto env = MakeEnvironment(config.env, config.env_params);
  const int grid = config.planner.grid_size;
  ExplorationSummary total;
  total.grid_size = grid;
  total.coverage.assign(static_cast<std::size_t>(grid) * grid, 0);
  total.reward_bins.assign(10, 0);
  auto write = [](const fs::path& dir, const ExplorationSummary& s) {
    std::ostringstream coverage, bins;
    WriteCoverageCsv(coverage, s);
    WriteRewardBinsCsv(bins, s);
    WriteFile(dir / "coverage.csv", coverage.str());
    WriteFile(dir / "reward_bins.csv", bins.str());
  };
  for (std::uint64_t seed : config.seeds) {
    const fs::path dir = SeedDir(run_dir, seed);
    if (!fs::exists(dir / "trace.csv")) continue;
    const Trace trace = ReadTraceCsv(dir / "trace.csv");
    const ExplorationSummary s = Explore(trace.transitions(), *env, grid);
    write(dir, s);
    for (std::size_t i = 0; i < s.coverage.size(); ++i) total.coverage[i] += s.coverage[i];
    for (std::size_t i = 0; i < s.reward_bins.size(); ++i) {
      total.reward_bins[i] += s.reward_bins[i];
    }
  }
  write(run_dir, total);
  return total;
}

}  // namespace safeplan
