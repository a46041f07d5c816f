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

#include <array>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tile360/catalog.hpp"

namespace tile360 {

/// Priority tiers ordered by distance from the field of view.
enum class Region : int { kRed = 0, kOrange = 1, kGreen = 2, kBlue = 3 };

inline constexpr int kRegionCount = 4;
inline constexpr int kDefaultPatternCount = 20;

const char* region_name(Region region);

/// A viewport layout: every tile belongs to exactly one region and the red
/// region is the field of view.
class FovPattern {
 public:
  /// Explicit layout; throws std::invalid_argument unless `regions` covers
  /// the grid and red is non-empty.
  FovPattern(int id, TileGrid grid, std::vector<Region> regions);

  /// Derives orange (8-neighbours of red), green (8-neighbours of orange) and
  /// blue (everything else). Columns wrap horizontally; rows do not.
  static FovPattern from_fov(int id, TileGrid grid, const std::vector<int>& fov_tiles);

  int id() const { return id_; }
  const TileGrid& grid() const { return grid_; }
  Region region(int tile) const { return regions_.at(static_cast<std::size_t>(tile)); }
  const std::vector<Region>& regions() const { return regions_; }
  int count(Region region) const { return counts_[static_cast<std::size_t>(region)]; }
  const std::array<int, kRegionCount>& counts() const { return counts_; }
  /// Red tiles in ascending index order.
  const std::vector<int>& fov_tiles() const { return fov_tiles_; }
  bool in_fov(int tile) const { return region(tile) == Region::kRed; }

 private:
  int id_;
  TileGrid grid_;
  std::vector<Region> regions_;
  std::array<int, kRegionCount> counts_{};
  std::vector<int> fov_tiles_;
};

/// The 20 built-in layouts on a 4x6 grid:
///   id 1      red = whole top row
///   id 2..19  red = 2x2 block anchored at (row, col), row in {0, 1, 2};
///             id = 2 + 6 * row + k with col = (k + 5) mod 6, so id 11 is the
///             centred block at (1, 2) and neighbouring ids are one column apart
///   id 20     red = whole bottom row
/// Throws std::invalid_argument for any other grid.
std::vector<FovPattern> default_patterns(TileGrid grid = {});

/// JSON list of {id, red:[...], orange:[...], green:[...], blue:[...]}.
/// Result is sorted by id; ids must be exactly 1..K.
std::vector<FovPattern> patterns_from_json(const std::string& text, TileGrid grid);
std::vector<FovPattern> load_patterns(const std::filesystem::path& path, TileGrid grid);

struct PriorityMap {
  std::vector<double> tile;                    // per tile, sums to 1
  std::array<double, kRegionCount> region{};   // per region
};

/// Distance multipliers (1, 2, 3, 4) for (red, orange, green, blue):
/// d_red = sum_c count_c / k_c and p_c = 1 / (k_c * d_red).
PriorityMap zipf_priorities(const FovPattern& pattern);

/// Round(Normal(mu, sigma2)) clamped to [1, pattern_count].
int sample_fov(std::mt19937_64& rng, double mu, double sigma2,
               int pattern_count = kDefaultPatternCount);

/// With probability `p_switch`, a fresh sample_fov draw different from
/// `current_id`. Always consumes one uniform draw so streams stay aligned
/// across switch probabilities.
std::optional<int> sample_sudden_switch(std::mt19937_64& rng, double p_switch, int current_id,
                                        double mu, double sigma2,
                                        int pattern_count = kDefaultPatternCount);

}  // namespace tile360
