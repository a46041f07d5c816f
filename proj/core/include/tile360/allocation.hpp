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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tile360/catalog.hpp"
#include "tile360/viewport.hpp"

namespace tile360 {

struct TileAllocation {
  int level = 0;  // 0 = not downloaded
  double bitrate_kbps = 0.0;
  double distortion = 0.0;  // tabulated MSE; 0 when not downloaded

  bool downloaded() const { return level >= 1; }
};

/// Per-tile quality choice for one segment.
struct AllocationResult {
  std::vector<TileAllocation> tiles;

  double total_kbps() const;
  double bitrate_of(std::span<const int> tile_indices) const;
  std::vector<int> levels() const;
};

/// Fills bitrates and distortions from the catalog; level 0 leaves a tile
/// undownloaded.
AllocationResult make_allocation(const SegmentView& segment, std::span<const int> levels);

/// Weights of the FoV objective; must be non-negative and sum to 1.
struct Theta {
  double average = 0.2;
  double spatial = 0.3;
  double temporal = 0.5;
};

void validate(const Theta& theta);

struct FComponents {
  double average = 0.0;   // mean FoV MSE
  double spatial = 0.0;   // population standard deviation of FoV MSE
  double temporal = 0.0;  // half the absolute change of the mean from the previous segment
  double value = 0.0;
};

/// F = theta.average * mean + theta.spatial * stddev + theta.temporal * drift.
/// Without a previous average the drift term is zero.
FComponents objective_f(std::span<const double> fov_mse, std::optional<double> previous_average,
                        const Theta& theta);

enum class FineSearch {
  /// Enumerates every FoV level vector with interval pruning on the rate and
  /// distortion sums; returns the constrained optimum.
  kExact,
  /// Grows the candidate set only through admitted vectors (one FoV tile
  /// changed at a time). Can miss feasible vectors that are not connected to
  /// the seed.
  kNeighborhood,
};

struct FineParams {
  Theta theta{};
  double distortion_threshold = 0.4;     // |sum D^F - sum D^0| bound, MSE
  double rate_threshold_kbps = 2000.0;   // |sum R^F - sum R^0| bound over FoV tiles
  std::size_t candidate_cap = 50000;
  FineSearch search = FineSearch::kExact;
};

void validate(const FineParams& params);

/// Continuous rates minimising sum p_n * alpha_n * R_n^-beta_n subject to
/// sum R_n = request. Stationarity gives R_n = (p_n alpha_n beta_n / lambda)^(1/(1+beta_n));
/// lambda is found by bisection in log space. Throws std::domain_error for
/// request <= 0 and std::invalid_argument for mismatched or non-positive inputs.
std::vector<double> coarse_allocate(std::span<const RdParams> rd, std::span<const double> priorities,
                                    double request_kbps);

/// The Lagrange multiplier implied by a tile's rate: p alpha beta R^-(beta+1).
double marginal_value(const RdParams& rd, double priority, double rate_kbps);

/// Every tile rounded down to the ladder (clamped to level 1). If clamping
/// pushes the total above sum(rates), levels are lowered one at a time on the
/// tile with the smallest weighted distortion increase per kbps saved until
/// the total fits or every tile is at level 1.
AllocationResult quantize_allocation(std::span<const double> rates, const SegmentView& segment,
                                     std::span<const double> priorities);

struct FineOutcome {
  AllocationResult allocation;
  FComponents start;
  FComponents result;
  std::size_t candidates = 0;  // admitted level vectors, including the seed
  bool truncated = false;      // candidate cap reached
};

/// Refines FoV tile levels starting from `start` (non-FoV tiles are fixed).
/// A vector is admissible when the FoV distortion sum moves by at most
/// distortion_threshold, the FoV rate sum by at most rate_threshold_kbps, and
/// the segment total stays within `request_kbps`. The seed is always a
/// candidate. Ties in F go to the vector closest to the seed (Hamming
/// distance), then to the lexicographically smallest.
FineOutcome fine_allocate(const AllocationResult& start, const SegmentView& segment,
                          std::span<const int> fov_tiles, std::optional<double> previous_average,
                          const FineParams& params, double request_kbps);

/// Equal split: every tile at quantize_down(request / N).
AllocationResult aa_allocate(double request_kbps, const SegmentView& segment);

/// Priority-greedy: tiers red, orange, green, blue in turn; each tier's tiles
/// are raised together one level at a time while the budget covers the whole
/// step. Tiles that never get budget stay undownloaded; the red tier is held
/// at level 1 or above.
AllocationResult adapa_allocate(double request_kbps, const SegmentView& segment,
                                const FovPattern& pattern);

/// FoV-only delivery at the highest uniform level that fits (minimum level 1).
AllocationResult pd_allocate(double request_kbps, const SegmentView& segment,
                             const FovPattern& pattern);

enum class Method { kAA, kAdapA, kPD, kProposedWoSt, kProposed };

std::string_view method_name(Method method);
/// Accepts `aa | adapa | pd | proposed_wo_st | proposed`.
std::optional<Method> parse_method(std::string_view name);

}  // namespace tile360
