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

#include "tile360/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace tile360 {
namespace {

// Candidate FoV level vectors with their per-tile tabulated rates and
// distortions, plus the admissibility bounds shared by both searches.
class FovSearchSpace {
 public:
  FovSearchSpace(const AllocationResult& start, const SegmentView& segment,
                 std::span<const int> fov_tiles, std::optional<double> previous_average,
                 const FineParams& params, double request_kbps)
      : fov_(fov_tiles.begin(), fov_tiles.end()),
        levels_(segment.ladder().levels()),
        previous_(previous_average),
        theta_(params.theta),
        params_(params),
        request_(request_kbps) {
    const auto m = fov_.size();
    rate_.resize(m * static_cast<std::size_t>(levels_));
    dist_.resize(rate_.size());
    for (std::size_t i = 0; i < m; ++i) {
      const int tile = fov_[i];
      const int level = start.tiles.at(static_cast<std::size_t>(tile)).level;
      if (level < 1) throw std::invalid_argument("fine_allocate: FoV tile not downloaded in start");
      seed_.push_back(level);
      for (int u = 1; u <= levels_; ++u) {
        rate_[at(i, u)] = segment.ladder().bitrate(u);
        dist_[at(i, u)] = segment.distortion(tile, u);
      }
    }
    std::vector<bool> is_fov(start.tiles.size(), false);
    for (const int t : fov_) is_fov.at(static_cast<std::size_t>(t)) = true;
    for (std::size_t n = 0; n < start.tiles.size(); ++n) {
      if (!is_fov[n]) other_rate_ += start.tiles[n].bitrate_kbps;
    }
    seed_dist_ = distortion_sum(seed_);
    seed_rate_ = rate_sum(seed_);
  }

  std::size_t tiles() const { return fov_.size(); }
  int levels() const { return levels_; }
  const std::vector<int>& seed() const { return seed_; }
  double rate(std::size_t i, int u) const { return rate_[at(i, u)]; }
  double dist(std::size_t i, int u) const { return dist_[at(i, u)]; }
  double seed_dist() const { return seed_dist_; }
  double seed_rate() const { return seed_rate_; }
  double other_rate() const { return other_rate_; }
  const FineParams& params() const { return params_; }
  double request() const { return request_; }

  double distortion_sum(const std::vector<int>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += dist(i, v[i]);
    return s;
  }
  double rate_sum(const std::vector<int>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += rate(i, v[i]);
    return s;
  }

  bool admissible(const std::vector<int>& v) const {
    const double d = distortion_sum(v);
    const double r = rate_sum(v);
    return std::abs(d - seed_dist_) <= params_.distortion_threshold &&
           std::abs(r - seed_rate_) <= params_.rate_threshold_kbps &&
           r + other_rate_ <= request_;
  }

  FComponents evaluate(const std::vector<int>& v) const {
    std::vector<double> mse(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mse[i] = dist(i, v[i]);
    return objective_f(mse, previous_, theta_);
  }

  int hamming(const std::vector<int>& v) const {
    int h = 0;
    for (std::size_t i = 0; i < v.size(); ++i) h += v[i] != seed_[i];
    return h;
  }

 private:
  std::size_t at(std::size_t i, int u) const {
    return i * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(u - 1);
  }

  std::vector<int> fov_;
  int levels_;
  std::optional<double> previous_;
  Theta theta_;
  FineParams params_;
  double request_;
  std::vector<double> rate_;
  std::vector<double> dist_;
  std::vector<int> seed_;
  double seed_dist_ = 0.0;
  double seed_rate_ = 0.0;
  double other_rate_ = 0.0;
};

struct SearchResult {
  std::vector<int> best;
  FComponents best_f;
  std::size_t candidates = 0;
  bool truncated = false;
};

class ExactSearch {
 public:
  explicit ExactSearch(const FovSearchSpace& space) : space_(space) {
    const auto m = space.tiles();
    min_d_.assign(m + 1, 0.0);
    max_d_.assign(m + 1, 0.0);
    min_r_.assign(m + 1, 0.0);
    max_r_.assign(m + 1, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      double lo_d = std::numeric_limits<double>::infinity();
      double hi_d = -lo_d;
      for (int u = 1; u <= space.levels(); ++u) {
        lo_d = std::min(lo_d, space.dist(i, u));
        hi_d = std::max(hi_d, space.dist(i, u));
      }
      min_d_[i] = min_d_[i + 1] + lo_d;
      max_d_[i] = max_d_[i + 1] + hi_d;
      min_r_[i] = min_r_[i + 1] + space.rate(i, 1);
      max_r_[i] = max_r_[i + 1] + space.rate(i, space.levels());
    }
    const auto& p = space.params();
    const double d_slack = 1e-9 * std::max(1.0, space.seed_dist());
    const double r_slack = 1e-9 * std::max(1.0, space.request());
    d_lo_ = space.seed_dist() - p.distortion_threshold - d_slack;
    d_hi_ = space.seed_dist() + p.distortion_threshold + d_slack;
    r_lo_ = space.seed_rate() - p.rate_threshold_kbps - r_slack;
    r_hi_ = std::min(space.seed_rate() + p.rate_threshold_kbps,
                     space.request() - space.other_rate()) + r_slack;
  }

  SearchResult run() {
    result_.best = space_.seed();
    result_.best_f = space_.evaluate(space_.seed());
    best_hamming_ = 0;
    result_.candidates = 1;
    current_.assign(space_.tiles(), 0);
    descend(0, 0.0, 0.0);
    return result_;
  }

 private:
  void descend(std::size_t depth, double partial_d, double partial_r) {
    if (result_.truncated) return;
    if (++nodes_ > kNodesPerCandidate * space_.params().candidate_cap) {
      result_.truncated = true;
      return;
    }
    if (depth == space_.tiles()) {
      visit_leaf();
      return;
    }
    for (int u = 1; u <= space_.levels(); ++u) {
      const double d = partial_d + space_.dist(depth, u);
      const double r = partial_r + space_.rate(depth, u);
      // Rates increase with u, so once even the cheapest completion is over
      // the ceiling no higher level can help.
      if (r + min_r_[depth + 1] > r_hi_) break;
      if (r + max_r_[depth + 1] < r_lo_) continue;
      if (d + min_d_[depth + 1] > d_hi_ || d + max_d_[depth + 1] < d_lo_) continue;
      current_[depth] = u;
      descend(depth + 1, d, r);
      if (result_.truncated) return;
    }
  }

  void visit_leaf() {
    if (current_ == space_.seed() || !space_.admissible(current_)) return;
    ++result_.candidates;
    const FComponents f = space_.evaluate(current_);
    const int h = space_.hamming(current_);
    if (f.value < result_.best_f.value || (f.value == result_.best_f.value && h < best_hamming_)) {
      result_.best = current_;
      result_.best_f = f;
      best_hamming_ = h;
    }
    if (result_.candidates >= space_.params().candidate_cap) result_.truncated = true;
  }

  static constexpr std::size_t kNodesPerCandidate = 64;

  const FovSearchSpace& space_;
  std::size_t nodes_ = 0;
  std::vector<double> min_d_, max_d_, min_r_, max_r_;
  double d_lo_ = 0.0, d_hi_ = 0.0, r_lo_ = 0.0, r_hi_ = 0.0;
  std::vector<int> current_;
  SearchResult result_;
  int best_hamming_ = 0;
};

SearchResult neighborhood_search(const FovSearchSpace& space) {
  std::vector<std::vector<int>> candidates{space.seed()};
  std::set<std::vector<int>> seen{space.seed()};
  std::set<std::vector<int>> rejected;
  bool truncated = false;

  for (std::size_t j = 0; j < candidates.size() && !truncated; ++j) {
    for (std::size_t m = 0; m < space.tiles() && !truncated; ++m) {
      for (int k = 1; k <= space.levels(); ++k) {
        std::vector<int> next = candidates[j];
        next[m] = k;
        if (seen.contains(next) || rejected.contains(next)) continue;
        if (!space.admissible(next)) {
          rejected.insert(std::move(next));
          continue;
        }
        seen.insert(next);
        candidates.push_back(std::move(next));
        if (candidates.size() >= space.params().candidate_cap) {
          truncated = true;
          break;
        }
      }
    }
  }

  SearchResult result;
  result.candidates = candidates.size();
  result.truncated = truncated;
  result.best = candidates.front();
  result.best_f = space.evaluate(result.best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const FComponents f = space.evaluate(candidates[i]);
    if (f.value < result.best_f.value) {
      result.best = candidates[i];
      result.best_f = f;
    }
  }
  return result;
}

double weighted_loss_per_kbps(const SegmentView& segment, std::span<const double> priorities,
                              int tile, int level) {
  const double gain = segment.distortion(tile, level - 1) - segment.distortion(tile, level);
  const double saved = segment.ladder().bitrate(level) - segment.ladder().bitrate(level - 1);
  return priorities[static_cast<std::size_t>(tile)] * gain / saved;
}

}  // namespace

double AllocationResult::total_kbps() const {
  double total = 0.0;
  for (const auto& t : tiles) total += t.bitrate_kbps;
  return total;
}

double AllocationResult::bitrate_of(std::span<const int> tile_indices) const {
  double total = 0.0;
  for (const int n : tile_indices) total += tiles.at(static_cast<std::size_t>(n)).bitrate_kbps;
  return total;
}

std::vector<int> AllocationResult::levels() const {
  std::vector<int> out;
  out.reserve(tiles.size());
  for (const auto& t : tiles) out.push_back(t.level);
  return out;
}

AllocationResult make_allocation(const SegmentView& segment, std::span<const int> levels) {
  if (static_cast<int>(levels.size()) != segment.tiles()) {
    throw std::invalid_argument("allocation needs one level per tile");
  }
  AllocationResult out;
  out.tiles.resize(levels.size());
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const int u = levels[n];
    if (u < 0 || u > segment.ladder().levels()) throw std::out_of_range("level out of range");
    auto& tile = out.tiles[n];
    tile.level = u;
    if (u >= 1) {
      tile.bitrate_kbps = segment.ladder().bitrate(u);
      tile.distortion = segment.distortion(static_cast<int>(n), u);
    }
  }
  return out;
}

void validate(const Theta& theta) {
  if (!(theta.average >= 0.0) || !(theta.spatial >= 0.0) || !(theta.temporal >= 0.0)) {
    throw std::invalid_argument("theta weights must be non-negative");
  }
  if (std::abs(theta.average + theta.spatial + theta.temporal - 1.0) > 1e-9) {
    throw std::invalid_argument("theta weights must sum to 1");
  }
}

FComponents objective_f(std::span<const double> fov_mse, std::optional<double> previous_average,
                        const Theta& theta) {
  if (fov_mse.empty()) throw std::invalid_argument("objective_f: FoV has no tiles");
  const auto m = static_cast<double>(fov_mse.size());
  FComponents f;
  for (const double d : fov_mse) f.average += d;
  f.average /= m;
  double var = 0.0;
  for (const double d : fov_mse) var += (d - f.average) * (d - f.average);
  f.spatial = std::sqrt(var / m);
  f.temporal = previous_average ? 0.5 * std::abs(*previous_average - f.average) : 0.0;
  f.value = theta.average * f.average + theta.spatial * f.spatial + theta.temporal * f.temporal;
  return f;
}

void validate(const FineParams& params) {
  validate(params.theta);
  if (!(params.distortion_threshold >= 0.0) || !(params.rate_threshold_kbps >= 0.0)) {
    throw std::invalid_argument("fine thresholds must be non-negative");
  }
  if (params.candidate_cap < 1) throw std::invalid_argument("candidate cap must be >= 1");
}

std::vector<double> coarse_allocate(std::span<const RdParams> rd, std::span<const double> priorities,
                                    double request_kbps) {
  if (!(request_kbps > 0.0)) throw std::domain_error("coarse_allocate: request must be positive");
  if (rd.size() != priorities.size() || rd.empty()) {
    throw std::invalid_argument("coarse_allocate: need one priority per tile");
  }
  std::vector<double> log_weight(rd.size());
  for (std::size_t n = 0; n < rd.size(); ++n) {
    validate(rd[n]);
    if (!(priorities[n] > 0.0)) throw std::invalid_argument("coarse_allocate: priorities must be positive");
    log_weight[n] = std::log(priorities[n] * rd[n].alpha * rd[n].beta);
  }

  // Each R_n(x) = exp((log_weight_n - x) / (1 + beta_n)) falls strictly in
  // x = log(lambda). At x_lo every tile alone takes the whole request; at x_hi
  // no tile takes more than request / N.
  const double n_tiles = static_cast<double>(rd.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t n = 0; n < rd.size(); ++n) {
    const double k = 1.0 + rd[n].beta;
    lo = std::min(lo, log_weight[n] - k * std::log(request_kbps));
    hi = std::max(hi, log_weight[n] - k * std::log(request_kbps / n_tiles));
  }

  const auto rates_at = [&](double x, std::vector<double>& out) {
    double sum = 0.0;
    for (std::size_t n = 0; n < rd.size(); ++n) {
      out[n] = std::exp((log_weight[n] - x) / (1.0 + rd[n].beta));
      sum += out[n];
    }
    return sum;
  };

  std::vector<double> rates(rd.size());
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    x = 0.5 * (lo + hi);
    const double sum = rates_at(x, rates);
    if (std::abs(sum - request_kbps) <= 1e-12 * request_kbps) break;
    if (sum > request_kbps) {
      lo = x;
    } else {
      hi = x;
    }
    if (!(hi - lo > 1e-15 * std::max(1.0, std::abs(x)))) break;
  }
  rates_at(x, rates);
  return rates;
}

double marginal_value(const RdParams& rd, double priority, double rate_kbps) {
  return priority * rd.alpha * rd.beta * std::pow(rate_kbps, -(rd.beta + 1.0));
}

AllocationResult quantize_allocation(std::span<const double> rates, const SegmentView& segment,
                                     std::span<const double> priorities) {
  if (static_cast<int>(rates.size()) != segment.tiles() || priorities.size() != rates.size()) {
    throw std::invalid_argument("quantize_allocation: need one rate and priority per tile");
  }
  const auto& ladder = segment.ladder();
  std::vector<int> levels(rates.size());
  double budget = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < rates.size(); ++n) {
    if (!(rates[n] > 0.0)) throw std::invalid_argument("quantize_allocation: rates must be positive");
    levels[n] = quantize_down(ladder, rates[n]);
    budget += rates[n];
    total += ladder.bitrate(levels[n]);
  }

  const double tolerance = 1e-9 * budget;
  while (total > budget + tolerance) {
    int pick = -1;
    double pick_loss = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < levels.size(); ++n) {
      if (levels[n] <= 1) continue;
      const double loss = weighted_loss_per_kbps(segment, priorities, static_cast<int>(n), levels[n]);
      if (loss < pick_loss) {
        pick_loss = loss;
        pick = static_cast<int>(n);
      }
    }
    if (pick < 0) break;
    auto& u = levels[static_cast<std::size_t>(pick)];
    total -= ladder.bitrate(u) - ladder.bitrate(u - 1);
    --u;
  }
  return make_allocation(segment, levels);
}

FineOutcome fine_allocate(const AllocationResult& start, const SegmentView& segment,
                          std::span<const int> fov_tiles, std::optional<double> previous_average,
                          const FineParams& params, double request_kbps) {
  validate(params);
  if (fov_tiles.empty()) throw std::invalid_argument("fine_allocate: FoV has no tiles");
  if (static_cast<int>(start.tiles.size()) != segment.tiles()) {
    throw std::invalid_argument("fine_allocate: start does not match the segment");
  }
  const FovSearchSpace space(start, segment, fov_tiles, previous_average, params, request_kbps);

  SearchResult found = params.search == FineSearch::kExact ? ExactSearch(space).run()
                                                           : neighborhood_search(space);

  FineOutcome outcome;
  outcome.start = space.evaluate(space.seed());
  outcome.result = found.best_f;
  outcome.candidates = found.candidates;
  outcome.truncated = found.truncated;
  std::vector<int> levels = start.levels();
  for (std::size_t i = 0; i < fov_tiles.size(); ++i) {
    levels[static_cast<std::size_t>(fov_tiles[i])] = found.best[i];
  }
  outcome.allocation = make_allocation(segment, levels);
  return outcome;
}

AllocationResult aa_allocate(double request_kbps, const SegmentView& segment) {
  const int level = quantize_down(segment.ladder(), request_kbps / segment.tiles());
  const std::vector<int> levels(static_cast<std::size_t>(segment.tiles()), level);
  return make_allocation(segment, levels);
}

AllocationResult adapa_allocate(double request_kbps, const SegmentView& segment,
                                const FovPattern& pattern) {
  const auto& ladder = segment.ladder();
  std::vector<int> levels(static_cast<std::size_t>(segment.tiles()), 0);
  double remaining = request_kbps;

  for (int c = 0; c < kRegionCount; ++c) {
    const auto region = static_cast<Region>(c);
    const int count = pattern.count(region);
    if (count == 0) continue;
    int level = 0;
    while (level < ladder.levels()) {
      const double base = level == 0 ? 0.0 : ladder.bitrate(level);
      const double step = count * (ladder.bitrate(level + 1) - base);
      if (step > remaining) break;
      remaining -= step;
      ++level;
    }
    if (region == Region::kRed) level = std::max(level, 1);
    for (int n = 0; n < segment.tiles(); ++n) {
      if (pattern.region(n) == region) levels[static_cast<std::size_t>(n)] = level;
    }
  }
  return make_allocation(segment, levels);
}

AllocationResult pd_allocate(double request_kbps, const SegmentView& segment,
                             const FovPattern& pattern) {
  const auto& fov = pattern.fov_tiles();
  const int level = quantize_down(segment.ladder(), request_kbps / static_cast<double>(fov.size()));
  std::vector<int> levels(static_cast<std::size_t>(segment.tiles()), 0);
  for (const int n : fov) levels[static_cast<std::size_t>(n)] = level;
  return make_allocation(segment, levels);
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kAA: return "aa";
    case Method::kAdapA: return "adapa";
    case Method::kPD: return "pd";
    case Method::kProposedWoSt: return "proposed_wo_st";
    case Method::kProposed: return "proposed";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const Method m : {Method::kAA, Method::kAdapA, Method::kPD, Method::kProposedWoSt,
                         Method::kProposed}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace tile360
