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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tile360/session.hpp"

namespace tile360 {

enum class CatalogSourceKind { kFile, kSynthesize };

struct CatalogSource {
  CatalogSourceKind kind = CatalogSourceKind::kSynthesize;
  std::filesystem::path file;  // kFile
  CatalogSpec spec{};          // kSynthesize
  std::uint64_t seed = 1;      // kSynthesize
};

/// A fully resolved experiment: every referenced file has been loaded.
struct ExperimentConfig {
  CatalogSource catalog_source{};
  std::shared_ptr<const TileCatalog> catalog;

  ChannelModel channel{FixedChannel{10000.0}};
  std::optional<std::filesystem::path> trace_file;  // when the trace came from a file

  std::vector<Method> methods;
  std::vector<double> switch_probabilities{0.0, 0.05, 0.10, 0.20};
  int replicates = 10;
  std::uint64_t seed = 1;
  int segments = 0;  // 0 plays the catalog once

  BufferPolicy buffer{};
  int throughput_window = 1;
  FovModel fov{};
  std::optional<std::filesystem::path> patterns_file;
  std::shared_ptr<const std::vector<FovPattern>> patterns;

  FineParams fine{};
  QoeParams qoe{};
  double missing_distortion = kDefaultMissingDistortion;

  std::filesystem::path output_dir = "results";
  bool per_segment_csv = true;
};

struct ConfigIssue {
  std::string path;  // JSON pointer-like, e.g. "$.fine.theta"
  std::string message;
};

struct ConfigReport {
  std::optional<ExperimentConfig> config;  // set only when there are no issues
  std::vector<ConfigIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Relative file references resolve against `base_dir`. Empty text is
/// treated as an empty object.
ConfigReport parse_config(std::string_view text, const std::filesystem::path& base_dir);
ConfigReport validate_config(const std::filesystem::path& path);

/// Config echo with every default filled in.
std::string normalized_config_json(const ExperimentConfig& config);

/// Synthesis parameters in the same shape as `catalog.synthesize` (seed
/// excluded). Throws std::invalid_argument listing every issue.
CatalogSpec catalog_spec_from_json(std::string_view text);

struct CellKey {
  Method method = Method::kProposed;
  double switch_probability = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
};

struct CellResult {
  CellKey key;
  SessionResult session;
};

/// Replicate averages of per-session means.
struct AggregateRow {
  Method method = Method::kProposed;
  double switch_probability = 0.0;
  int replicates = 0;
  double fov_actual_mbps = 0.0;
  double fov_avg_psnr_db = 0.0;
  double fov_psnr_std_db = 0.0;
  double fov_psnr_temporal_diff_db = 0.0;
  double f_value = 0.0;
  double qoe = 0.0;
  double actual_mbps = 0.0;
  double weighted_psnr_db = 0.0;
  double buffer_s = 0.0;
  double stall_s = 0.0;
};

struct ExperimentResults {
  std::vector<CellResult> cells;       // method-major, then p, then replicate
  std::vector<AggregateRow> aggregate; // method-major, then p
};

SessionConfig session_config(const ExperimentConfig& config, Method method,
                             double switch_probability, std::uint64_t seed);

/// Runs every (method, p, replicate) cell; replicate r uses seed + r.
/// `jobs` <= 0 uses the hardware concurrency. Results do not depend on jobs.
ExperimentResults run_grid(const ExperimentConfig& config, int jobs = 1);

std::vector<AggregateRow> aggregate(std::span<const CellResult> cells);

std::string segment_csv(std::span<const MetricsRecord> records);
std::string aggregate_csv(std::span<const AggregateRow> rows);
/// Per-segment metrics averaged over the replicates of one (method, p).
std::string mean_segment_csv(std::span<const CellResult> replicates);
std::string summary_json(const ExperimentConfig& config, const ExperimentResults& results);

/// File stem used for a (method, p) pair, e.g. "proposed_p0.05".
std::string cell_stem(Method method, double switch_probability);

/// Writes aggregate.csv, summary.json, segments/<stem>_r<k>.csv and
/// mean_segments/<stem>.csv below `out_dir`. Returns the files written,
/// relative to `out_dir`.
std::vector<std::filesystem::path> write_results(const ExperimentConfig& config,
                                                 const ExperimentResults& results,
                                                 const std::filesystem::path& out_dir);

}  // namespace tile360
