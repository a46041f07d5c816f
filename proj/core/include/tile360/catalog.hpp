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
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tile360 {

/// Ordered bitrate ladder shared by every tile. Levels are 1-based; level 0
/// is reserved for "not downloaded" in allocation results.
class QualityLadder {
 public:
  /// Throws std::invalid_argument unless there are at least two strictly
  /// increasing, positive bitrates.
  explicit QualityLadder(std::vector<double> bitrates_kbps);

  /// 150, 300, ..., 2400 kbps (16 levels).
  static QualityLadder standard16();

  int levels() const { return static_cast<int>(bitrates_.size()); }
  double bitrate(int level) const;
  double min_bitrate() const { return bitrates_.front(); }
  double max_bitrate() const { return bitrates_.back(); }
  std::span<const double> bitrates() const { return bitrates_; }

  /// Every rung multiplied by `factor`. Used to build whole-segment ladders
  /// (all tiles at the same level) for the single-stream rate adaptation.
  QualityLadder scaled(double factor) const;

  friend bool operator==(const QualityLadder&, const QualityLadder&) = default;

 private:
  std::vector<double> bitrates_;
};

/// Largest level whose bitrate does not exceed `rate_kbps`. Rates below the
/// lowest rung clamp to level 1.
int quantize_down(const QualityLadder& ladder, double rate_kbps);

/// Parameters of the power-law rate-distortion model D = alpha * R^-beta
/// (MSE, kbps).
struct RdParams {
  double alpha = 0.0;
  double beta = 0.0;

  friend bool operator==(const RdParams&, const RdParams&) = default;
};

/// Throws std::invalid_argument if alpha or beta is not positive and finite.
void validate(const RdParams& params);

/// alpha * rate^-beta. Throws std::domain_error for rate <= 0.
double distortion_at(const RdParams& params, double rate_kbps);

struct RdSample {
  double rate_kbps = 0.0;
  double mse = 0.0;
};

/// Ordinary least squares of log(D) on log(R). Throws std::invalid_argument
/// for fewer than two samples, non-positive values, or zero spread in rate.
RdParams fit_rd(std::span<const RdSample> samples);

struct TileGrid {
  int rows = 4;
  int cols = 6;

  int tiles() const { return rows * cols; }
  int index(int row, int col) const { return row * cols + col; }
  int row_of(int tile) const { return tile / cols; }
  int col_of(int tile) const { return tile % cols; }

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

class TileCatalog;

/// Read-only view of one segment of a catalog.
class SegmentView {
 public:
  SegmentView(const TileCatalog& catalog, int segment);

  int segment() const { return segment_; }
  int tiles() const;
  const QualityLadder& ladder() const;
  const RdParams& rd(int tile) const;
  std::span<const RdParams> rd_params() const;
  /// Tabulated MSE of `tile` at `level` (1-based).
  double distortion(int tile, int level) const;

 private:
  const TileCatalog* catalog_;
  int segment_;
};

/// L segments x N tiles x U quality levels with per-(segment, tile)
/// rate-distortion parameters. Immutable after construction.
class TileCatalog {
 public:
  /// `rd` is segment-major: rd[l * grid.tiles() + n].
  TileCatalog(int segments, TileGrid grid, double segment_duration_s,
              QualityLadder ladder, std::vector<RdParams> rd);

  int segments() const { return segments_; }
  int tiles() const { return grid_.tiles(); }
  const TileGrid& grid() const { return grid_; }
  double segment_duration() const { return segment_duration_; }
  const QualityLadder& ladder() const { return ladder_; }

  const RdParams& rd(int segment, int tile) const;
  double distortion(int segment, int tile, int level) const;

  /// Segment view for playback index `index`; the catalog loops once
  /// exhausted.
  SegmentView segment(int index) const;

  friend bool operator==(const TileCatalog& a, const TileCatalog& b) {
    return a.segments_ == b.segments_ && a.grid_ == b.grid_ &&
           a.segment_duration_ == b.segment_duration_ && a.ladder_ == b.ladder_ &&
           a.rd_ == b.rd_;
  }

 private:
  friend class SegmentView;

  int segments_;
  TileGrid grid_;
  double segment_duration_;
  QualityLadder ladder_;
  std::vector<RdParams> rd_;
  std::vector<double> distortion_;  // [l][n][u-1]
};

struct CatalogSpec {
  int segments = 5;
  TileGrid grid{};
  double segment_duration_s = 2.0;
  QualityLadder ladder = QualityLadder::standard16();
  std::pair<double, double> alpha_range{2000.0, 20000.0};
  std::pair<double, double> beta_range{0.8, 1.2};
};

/// Draws per-tile (alpha, beta) uniformly from spec.alpha_range and spec.beta_range.
/// Deterministic for a fixed seed.
TileCatalog synthesize_catalog(const CatalogSpec& spec, std::uint64_t seed);

/// JSON document: {L, rows, cols, U, segment_duration_s, bitrates_kbps[],
/// tiles[l][n] = {alpha, beta}}. The distortion table is never serialized.
std::string catalog_to_json(const TileCatalog& catalog);
TileCatalog catalog_from_json(const std::string& text);

TileCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const TileCatalog& catalog, const std::filesystem::path& path);

}  // namespace tile360
