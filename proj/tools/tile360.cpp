// Copyright 2026 The tile360 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tile360/catalog.hpp"
#include "tile360/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

void print_issues(const tile360::ConfigReport& report) {
  for (const auto& issue : report.issues) std::cerr << issue.path << ": " << issue.message << '\n';
}

int run(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed, int jobs) {
  auto report = tile360::validate_config(config_path);
  if (!report.ok()) {
    print_issues(report);
    return kInvalid;
  }
  auto& config = *report.config;
  if (seed) config.seed = *seed;
  const std::filesystem::path out_dir = out.empty() ? config.output_dir : std::filesystem::path(out);
  try {
    const auto results = tile360::run_grid(config, jobs);
    const auto files = tile360::write_results(config, results, out_dir);
    std::cout << "wrote " << files.size() << " files to " << out_dir.string() << '\n';
    std::cout << tile360::aggregate_csv(results.aggregate);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}

int validate(const std::string& config_path) {
  const auto report = tile360::validate_config(config_path);
  if (!report.ok()) {
    print_issues(report);
    return kInvalid;
  }
  std::cout << tile360::normalized_config_json(*report.config) << '\n';
  return kOk;
}

int synth_catalog(const std::string& spec_path, const std::string& out, std::uint64_t seed) {
  tile360::CatalogSpec spec;
  try {
    std::ifstream in(spec_path);
    if (!in) {
      std::cerr << "error: cannot open " << spec_path << '\n';
      return kInvalid;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    spec = tile360::catalog_spec_from_json(ss.str());
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what();
    return kInvalid;
  }
  try {
    tile360::save_catalog(tile360::synthesize_catalog(spec, seed), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiled 360-degree video streaming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment grid");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Base seed (overrides the config)");
  run_cmd->add_option("--jobs", jobs, "Worker threads; 0 uses all cores")->check(CLI::NonNegativeNumber);

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print it with defaults filled");
  validate_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();

  std::string spec_path;
  std::uint64_t synth_seed = 1;
  auto* synth_cmd = app.add_subcommand("synth-catalog", "Write a synthetic R-D catalog");
  synth_cmd->add_option("--spec", spec_path, "Synthesis parameters (JSON)")->required();
  synth_cmd->add_option("--out", out, "Catalog file to write")->required();
  synth_cmd->add_option("--seed", synth_seed, "Random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  if (*run_cmd) {
    return run(config_path, out, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, jobs);
  }
  if (*validate_cmd) return validate(config_path);
  return synth_catalog(spec_path, out, synth_seed);
}
