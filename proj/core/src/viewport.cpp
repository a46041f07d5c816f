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

#include "tile360/viewport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tile360 {
namespace {

constexpr std::array<double, kRegionCount> kDistanceMultiplier{1.0, 2.0, 3.0, 4.0};

// Tiles within Chebyshev distance 1 of `tile`, wrapping columns.
std::vector<int> neighbours(const TileGrid& grid, int tile) {
  std::vector<int> out;
  const int r = grid.row_of(tile);
  const int c = grid.col_of(tile);
  for (int dr = -1; dr <= 1; ++dr) {
    const int rr = r + dr;
    if (rr < 0 || rr >= grid.rows) continue;
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int cc = ((c + dc) % grid.cols + grid.cols) % grid.cols;
      const int n = grid.index(rr, cc);
      if (n != tile) out.push_back(n);
    }
  }
  return out;
}

}  // namespace

const char* region_name(Region region) {
  switch (region) {
    case Region::kRed: return "red";
    case Region::kOrange: return "orange";
    case Region::kGreen: return "green";
    case Region::kBlue: return "blue";
  }
  return "?";
}

FovPattern::FovPattern(int id, TileGrid grid, std::vector<Region> regions)
    : id_(id), grid_(grid), regions_(std::move(regions)) {
  if (static_cast<int>(regions_.size()) != grid_.tiles()) {
    throw std::invalid_argument("pattern must assign a region to every tile");
  }
  for (int n = 0; n < grid_.tiles(); ++n) {
    const auto r = static_cast<int>(regions_[static_cast<std::size_t>(n)]);
    if (r < 0 || r >= kRegionCount) throw std::invalid_argument("unknown region");
    ++counts_[static_cast<std::size_t>(r)];
    if (regions_[static_cast<std::size_t>(n)] == Region::kRed) fov_tiles_.push_back(n);
  }
  if (fov_tiles_.empty()) throw std::invalid_argument("pattern has an empty field of view");
}

FovPattern FovPattern::from_fov(int id, TileGrid grid, const std::vector<int>& fov_tiles) {
  constexpr int kUnset = -1;
  std::vector<int> tier(static_cast<std::size_t>(grid.tiles()), kUnset);
  for (const int t : fov_tiles) {
    if (t < 0 || t >= grid.tiles()) throw std::invalid_argument("FoV tile out of range");
    tier[static_cast<std::size_t>(t)] = 0;
  }
  for (int level = 1; level <= 2; ++level) {
    for (int n = 0; n < grid.tiles(); ++n) {
      if (tier[static_cast<std::size_t>(n)] != level - 1) continue;
      for (const int m : neighbours(grid, n)) {
        if (tier[static_cast<std::size_t>(m)] == kUnset) tier[static_cast<std::size_t>(m)] = level;
      }
    }
  }
  std::vector<Region> regions;
  regions.reserve(tier.size());
  for (const int t : tier) regions.push_back(static_cast<Region>(t == kUnset ? 3 : t));
  return FovPattern(id, grid, std::move(regions));
}

std::vector<FovPattern> default_patterns(TileGrid grid) {
  if (grid.rows != 4 || grid.cols != 6) {
    throw std::invalid_argument("built-in FoV patterns require a 4x6 tile grid");
  }
  std::vector<FovPattern> patterns;
  patterns.reserve(kDefaultPatternCount);

  std::vector<int> top;
  for (int c = 0; c < grid.cols; ++c) top.push_back(grid.index(0, c));
  patterns.push_back(FovPattern::from_fov(1, grid, top));

  for (int row = 0; row < grid.rows - 1; ++row) {
    for (int k = 0; k < grid.cols; ++k) {
      const int col = (k + grid.cols - 1) % grid.cols;
      const int right = (col + 1) % grid.cols;
      const std::vector<int> red{grid.index(row, col), grid.index(row, right),
                                 grid.index(row + 1, col), grid.index(row + 1, right)};
      patterns.push_back(FovPattern::from_fov(2 + grid.cols * row + k, grid, red));
    }
  }

  std::vector<int> bottom;
  for (int c = 0; c < grid.cols; ++c) bottom.push_back(grid.index(grid.rows - 1, c));
  patterns.push_back(FovPattern::from_fov(kDefaultPatternCount, grid, bottom));
  return patterns;
}

std::vector<FovPattern> patterns_from_json(const std::string& text, TileGrid grid) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("patterns: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) {
    throw std::invalid_argument("patterns: expected a non-empty JSON list");
  }
  std::vector<FovPattern> patterns;
  try {
    for (const auto& entry : doc) {
      std::vector<int> seen(static_cast<std::size_t>(grid.tiles()), 0);
      std::vector<Region> regions(static_cast<std::size_t>(grid.tiles()), Region::kBlue);
      for (int r = 0; r < kRegionCount; ++r) {
        const auto region = static_cast<Region>(r);
        const char* key = region_name(region);
        if (!entry.contains(key)) continue;
        for (const int t : entry.at(key).get<std::vector<int>>()) {
          if (t < 0 || t >= grid.tiles()) {
            throw std::invalid_argument("patterns: tile index out of range");
          }
          if (seen[static_cast<std::size_t>(t)]++) {
            throw std::invalid_argument("patterns: tile assigned to two regions");
          }
          regions[static_cast<std::size_t>(t)] = region;
        }
      }
      if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw std::invalid_argument("patterns: every tile needs exactly one region");
      }
      patterns.emplace_back(entry.at("id").get<int>(), grid, std::move(regions));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("patterns: ") + e.what());
  }
  std::sort(patterns.begin(), patterns.end(),
            [](const FovPattern& a, const FovPattern& b) { return a.id() < b.id(); });
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (patterns[i].id() != static_cast<int>(i) + 1) {
      throw std::invalid_argument("patterns: ids must be exactly 1..K");
    }
  }
  return patterns;
}

std::vector<FovPattern> load_patterns(const std::filesystem::path& path, TileGrid grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return patterns_from_json(buf.str(), grid);
}

PriorityMap zipf_priorities(const FovPattern& pattern) {
  double d_red = 0.0;
  for (int c = 0; c < kRegionCount; ++c) {
    d_red += pattern.counts()[static_cast<std::size_t>(c)] / kDistanceMultiplier[static_cast<std::size_t>(c)];
  }
  PriorityMap map;
  for (int c = 0; c < kRegionCount; ++c) {
    map.region[static_cast<std::size_t>(c)] = 1.0 / (kDistanceMultiplier[static_cast<std::size_t>(c)] * d_red);
  }
  map.tile.reserve(pattern.regions().size());
  for (const Region r : pattern.regions()) map.tile.push_back(map.region[static_cast<std::size_t>(r)]);
  return map;
}

int sample_fov(std::mt19937_64& rng, double mu, double sigma2, int pattern_count) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sample_fov: variance must be positive");
  std::normal_distribution<double> normal(mu, std::sqrt(sigma2));
  const double draw = std::round(normal(rng));
  return static_cast<int>(std::clamp(draw, 1.0, static_cast<double>(pattern_count)));
}

std::optional<int> sample_sudden_switch(std::mt19937_64& rng, double p_switch, int current_id,
                                        double mu, double sigma2, int pattern_count) {
  if (!(p_switch >= 0.0) || !(p_switch <= 1.0)) {
    throw std::invalid_argument("switch probability must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!(unit(rng) < p_switch)) return std::nullopt;

  constexpr int kMaxDraws = 1000;
  for (int i = 0; i < kMaxDraws; ++i) {
    const int id = sample_fov(rng, mu, sigma2, pattern_count);
    if (id != current_id) return id;
  }
  // Degenerate Gaussian concentrated on the current pattern.
  return current_id < pattern_count ? current_id + 1 : current_id - 1;
}

}  // namespace tile360
