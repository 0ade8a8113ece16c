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

// safeplan: run, score and compare safe model-based planning experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "safeplan/config.h"
#include "safeplan/harness.h"
#include "safeplan/metrics.h"
#include "selftest.h"

namespace fs = std::filesystem;

namespace {

int Run(const std::string& config_path, const std::string& env,
        std::optional<std::uint64_t> seed, const std::string& profile,
        const std::string& planner, const std::string& out, int jobs,
        bool quiet) {
  safeplan::ExperimentConfig config =
      config_path.empty() ? safeplan::DefaultConfig(env)
                          : safeplan::LoadConfig(config_path);
  if (!profile.empty()) {
    safeplan::ApplyProfile(&config, safeplan::ParseProfile(profile));
  }
  if (seed) config.seeds = {*seed};
  if (!planner.empty()) config.planner.kind = safeplan::ParsePlannerKind(planner);
  if (!out.empty()) config.output_dir = out;

  safeplan::RunOptions options;
  options.jobs = jobs;
  if (!quiet) options.progress = &std::cerr;
  const safeplan::RunRecord record = safeplan::RunExperiment(config, options);
  std::cout << safeplan::ReportToJson(record.report);
  for (const auto& s : record.seeds) {
    if (!s.ok) std::cerr << "seed " << s.seed << " failed: " << s.error << '\n';
  }
  return record.all_ok() ? 0 : 1;
}

int Compare(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const safeplan::Comparison comparison = safeplan::Compare(paths);
  const std::string table = safeplan::ComparisonTable(comparison);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream csv(fs::path(out) / "comparison.csv");
    safeplan::WriteComparisonCsv(csv, comparison);
    std::ofstream(fs::path(out) / "comparison.txt") << table;
  }
  std::cout << table;
  return comparison.rows.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe model-based planning experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an iterated-batch experiment");
  std::string config_path, env{safeplan::kSafePendulum}, profile, planner, out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->check(CLI::ExistingFile);
  run->add_option("--env", env, "Environment when no config is given");
  run->add_option("--seed", seed, "Run this single seed");
  run->add_option("--profile", profile, "Scale profile")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--planner", planner, "Override the planner kind");
  run->add_option("--out", out, "Override the output directory");
  run->add_option("--jobs", jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "No per-epoch progress");

  auto* defaults = app.add_subcommand("defaults", "Print a default config");
  std::string defaults_env{safeplan::kSafePendulum}, defaults_profile = "desk";
  defaults->add_option("--env", defaults_env, "Environment");
  defaults->add_option("--profile", defaults_profile, "Scale profile")
      ->check(CLI::IsMember({"desk", "paper"}));

  auto* metrics = app.add_subcommand("metrics", "Recompute metrics of a run");
  std::string metrics_dir;
  metrics->add_option("run_dir", metrics_dir)->required()->check(CLI::ExistingDirectory);

  auto* compare = app.add_subcommand("compare", "Summarize several runs");
  std::vector<std::string> compare_dirs;
  std::string compare_out;
  compare->add_option("run_dirs", compare_dirs)->required();
  compare->add_option("--out", compare_out, "Directory for comparison files");

  auto* explore = app.add_subcommand("explore", "Exploration CSVs of a run");
  std::string explore_dir;
  explore->add_option("run_dir", explore_dir)->required()->check(CLI::ExistingDirectory);

  auto* selftest = app.add_subcommand("selftest", "Oracle and invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return Run(config_path, env, seed, profile, planner, out, jobs, quiet);
    }
    if (*defaults) {
      std::cout << safeplan::ConfigToJson(safeplan::DefaultConfig(
          defaults_env, safeplan::ParseProfile(defaults_profile)));
      return 0;
    }
    if (*metrics) {
      std::cout << safeplan::ReportToJson(safeplan::RecomputeMetrics(metrics_dir));
      return 0;
    }
    if (*compare) return Compare(compare_dirs, compare_out);
    if (*explore) {
      const auto summary = safeplan::ExploreRun(explore_dir);
      long long visited = 0;
      int cells = 0;
      for (long long c : summary.coverage) {
        visited += c;
        cells += c > 0;
      }
      std::cout << "states " << visited << ", cells visited " << cells << "/"
                << summary.coverage.size() << '\n';
      return 0;
    }
    if (*selftest) return safeplan::tools::RunSelftest(std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
