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

#include "tile360/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tile360 {

using nlohmann::json;

QualityLadder::QualityLadder(std::vector<double> bitrates_kbps)
    : bitrates_(std::move(bitrates_kbps)) {
  if (bitrates_.size() < 2) {
    throw std::invalid_argument("quality ladder needs at least two levels");
  }
  for (std::size_t i = 0; i < bitrates_.size(); ++i) {
    if (!(bitrates_[i] > 0.0) || !std::isfinite(bitrates_[i])) {
      throw std::invalid_argument("ladder bitrates must be positive and finite");
    }
    if (i > 0 && !(bitrates_[i] > bitrates_[i - 1])) {
      throw std::invalid_argument("ladder bitrates must be strictly increasing");
    }
  }
}

QualityLadder QualityLadder::standard16() {
  std::vector<double> rates;
  for (int u = 1; u <= 16; ++u) rates.push_back(150.0 * u);
  return QualityLadder(std::move(rates));
}

double QualityLadder::bitrate(int level) const {
  if (level < 1 || level > levels()) {
    throw std::out_of_range("quality level out of range");
  }
  return bitrates_[static_cast<std::size_t>(level - 1)];
}

QualityLadder QualityLadder::scaled(double factor) const {
  std::vector<double> rates = bitrates_;
  for (double& r : rates) r *= factor;
  return QualityLadder(std::move(rates));
}

int quantize_down(const QualityLadder& ladder, double rate_kbps) {
  const auto rates = ladder.bitrates();
  const auto it = std::upper_bound(rates.begin(), rates.end(), rate_kbps);
  const auto count = static_cast<int>(it - rates.begin());
  return std::max(count, 1);
}

void validate(const RdParams& params) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha) || !(params.beta > 0.0) ||
      !std::isfinite(params.beta)) {
    throw std::invalid_argument("rate-distortion parameters must be positive");
  }
}

double distortion_at(const RdParams& params, double rate_kbps) {
  if (!(rate_kbps > 0.0)) {
    throw std::domain_error("distortion_at: rate must be positive");
  }
  return params.alpha * std::pow(rate_kbps, -params.beta);
}

RdParams fit_rd(std::span<const RdSample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_rd: need at least two samples");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    if (!(s.rate_kbps > 0.0) || !(s.mse > 0.0)) {
      throw std::invalid_argument("fit_rd: rates and distortions must be positive");
    }
    mean_x += std::log(s.rate_kbps);
    mean_y += std::log(s.mse);
  }
  const auto n = static_cast<double>(samples.size());
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log(s.rate_kbps) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(s.mse) - mean_y);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit_rd: samples have no spread in rate");
  }
  const double slope = sxy / sxx;
  RdParams fitted{std::exp(mean_y - slope * mean_x), -slope};
  if (!(fitted.beta > 0.0)) {
    throw std::invalid_argument("fit_rd: distortion does not decrease with rate");
  }
  return fitted;
}

SegmentView::SegmentView(const TileCatalog& catalog, int segment)
    : catalog_(&catalog), segment_(segment) {
  if (segment < 0 || segment >= catalog.segments()) {
    throw std::out_of_range("segment index out of range");
  }
}

int SegmentView::tiles() const { return catalog_->tiles(); }

const QualityLadder& SegmentView::ladder() const { return catalog_->ladder(); }

const RdParams& SegmentView::rd(int tile) const { return catalog_->rd(segment_, tile); }

std::span<const RdParams> SegmentView::rd_params() const {
  const auto n = static_cast<std::size_t>(catalog_->tiles());
  return std::span<const RdParams>(catalog_->rd_).subspan(
      static_cast<std::size_t>(segment_) * n, n);
}

double SegmentView::distortion(int tile, int level) const {
  return catalog_->distortion(segment_, tile, level);
}

TileCatalog::TileCatalog(int segments, TileGrid grid, double segment_duration_s,
                         QualityLadder ladder, std::vector<RdParams> rd)
    : segments_(segments),
      grid_(grid),
      segment_duration_(segment_duration_s),
      ladder_(std::move(ladder)),
      rd_(std::move(rd)) {
  if (segments_ < 1) throw std::invalid_argument("catalog needs at least one segment");
  if (grid_.rows < 1 || grid_.cols < 1) throw std::invalid_argument("invalid tile grid");
  if (!(segment_duration_ > 0.0)) {
    throw std::invalid_argument("segment duration must be positive");
  }
  const auto expected = static_cast<std::size_t>(segments_) * static_cast<std::size_t>(tiles());
  if (rd_.size() != expected) {
    throw std::invalid_argument("rate-distortion table does not match L x N");
  }
  const auto levels = static_cast<std::size_t>(ladder_.levels());
  distortion_.reserve(expected * levels);
  for (const auto& params : rd_) {
    validate(params);
    for (const double rate : ladder_.bitrates()) {
      distortion_.push_back(distortion_at(params, rate));
    }
  }
}

const RdParams& TileCatalog::rd(int segment, int tile) const {
  if (segment < 0 || segment >= segments_ || tile < 0 || tile >= tiles()) {
    throw std::out_of_range("catalog index out of range");
  }
  return rd_[static_cast<std::size_t>(segment * tiles() + tile)];
}

double TileCatalog::distortion(int segment, int tile, int level) const {
  if (segment < 0 || segment >= segments_ || tile < 0 || tile >= tiles() || level < 1 ||
      level > ladder_.levels()) {
    throw std::out_of_range("catalog index out of range");
  }
  const auto row = static_cast<std::size_t>(segment * tiles() + tile);
  return distortion_[row * static_cast<std::size_t>(ladder_.levels()) +
                     static_cast<std::size_t>(level - 1)];
}

SegmentView TileCatalog::segment(int index) const {
  if (index < 0) throw std::out_of_range("negative segment index");
  return SegmentView(*this, index % segments_);
}

TileCatalog synthesize_catalog(const CatalogSpec& spec, std::uint64_t seed) {
  const auto [alpha_lo, alpha_hi] = spec.alpha_range;
  const auto [beta_lo, beta_hi] = spec.beta_range;
  if (!(alpha_lo > 0.0) || !(alpha_hi >= alpha_lo) || !(beta_lo > 0.0) ||
      !(beta_hi >= beta_lo)) {
    throw std::invalid_argument("synthesis ranges must be positive and ordered");
  }
  if (spec.segments < 1 || spec.grid.tiles() < 1) {
    throw std::invalid_argument("synthesis needs at least one segment and one tile");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> alpha(alpha_lo, alpha_hi);
  std::uniform_real_distribution<double> beta(beta_lo, beta_hi);

  std::vector<RdParams> rd;
  rd.reserve(static_cast<std::size_t>(spec.segments * spec.grid.tiles()));
  for (int l = 0; l < spec.segments; ++l) {
    for (int n = 0; n < spec.grid.tiles(); ++n) {
      const double a = alpha_lo == alpha_hi ? alpha_lo : alpha(rng);
      const double b = beta_lo == beta_hi ? beta_lo : beta(rng);
      rd.push_back({a, b});
    }
  }
  return TileCatalog(spec.segments, spec.grid, spec.segment_duration_s, spec.ladder,
                     std::move(rd));
}

std::string catalog_to_json(const TileCatalog& catalog) {
  json doc;
  doc["L"] = catalog.segments();
  doc["rows"] = catalog.grid().rows;
  doc["cols"] = catalog.grid().cols;
  doc["U"] = catalog.ladder().levels();
  doc["segment_duration_s"] = catalog.segment_duration();
  doc["bitrates_kbps"] = std::vector<double>(catalog.ladder().bitrates().begin(),
                                             catalog.ladder().bitrates().end());
  json tiles = json::array();
  for (int l = 0; l < catalog.segments(); ++l) {
    json row = json::array();
    for (int n = 0; n < catalog.tiles(); ++n) {
      const auto& p = catalog.rd(l, n);
      row.push_back({{"alpha", p.alpha}, {"beta", p.beta}});
    }
    tiles.push_back(std::move(row));
  }
  doc["tiles"] = std::move(tiles);
  return doc.dump(2);
}

TileCatalog catalog_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("catalog: ") + e.what());
  }
  try {
    const int segments = doc.at("L").get<int>();
    const TileGrid grid{doc.at("rows").get<int>(), doc.at("cols").get<int>()};
    const int levels = doc.at("U").get<int>();
    const double duration = doc.at("segment_duration_s").get<double>();
    QualityLadder ladder(doc.at("bitrates_kbps").get<std::vector<double>>());
    if (ladder.levels() != levels) {
      throw std::invalid_argument("catalog: U does not match bitrates_kbps length");
    }
    const auto& tiles = doc.at("tiles");
    if (!tiles.is_array() || static_cast<int>(tiles.size()) != segments) {
      throw std::invalid_argument("catalog: tiles must have L rows");
    }
    std::vector<RdParams> rd;
    for (const auto& row : tiles) {
      if (!row.is_array() || static_cast<int>(row.size()) != grid.tiles()) {
        throw std::invalid_argument("catalog: each tiles row must have rows*cols entries");
      }
      for (const auto& t : row) {
        rd.push_back({t.at("alpha").get<double>(), t.at("beta").get<double>()});
      }
    }
    return TileCatalog(segments, grid, duration, std::move(ladder), std::move(rd));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("catalog: ") + e.what());
  }
}

TileCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return catalog_from_json(buf.str());
}

void save_catalog(const TileCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog file " + path.string());
  out << catalog_to_json(catalog) << '\n';
}

}  // namespace tile360
