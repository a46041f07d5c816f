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

#include "tile360/session.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace tile360 {
namespace {

std::mt19937_64 make_stream(std::uint64_t seed, SessionStream stream) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(stream)};
  return std::mt19937_64(seq);
}

// Lowest quality for every tile the method would fetch.
AllocationResult startup_allocation(Method method, const SegmentView& segment,
                                    const FovPattern& pattern) {
  std::vector<int> levels(static_cast<std::size_t>(segment.tiles()), 1);
  if (method == Method::kPD) {
    std::fill(levels.begin(), levels.end(), 0);
    for (const int n : pattern.fov_tiles()) levels[static_cast<std::size_t>(n)] = 1;
  }
  return make_allocation(segment, levels);
}

struct Allocated {
  AllocationResult allocation;
  std::optional<FComponents> fine_start;
  std::optional<FComponents> fine_result;
};

Allocated allocate(const SessionConfig& config, const SegmentView& segment,
                   const FovPattern& pattern, const PriorityMap& priorities, double request_kbps,
                   std::optional<double> previous_average) {
  switch (config.method) {
    case Method::kAA:
      return {aa_allocate(request_kbps, segment), {}, {}};
    case Method::kAdapA:
      return {adapa_allocate(request_kbps, segment, pattern), {}, {}};
    case Method::kPD:
      return {pd_allocate(request_kbps, segment, pattern), {}, {}};
    case Method::kProposedWoSt:
    case Method::kProposed: {
      const auto rates = coarse_allocate(segment.rd_params(), priorities.tile, request_kbps);
      AllocationResult start = quantize_allocation(rates, segment, priorities.tile);
      if (config.method == Method::kProposedWoSt) return {std::move(start), {}, {}};
      FineOutcome fine = fine_allocate(start, segment, pattern.fov_tiles(), previous_average,
                                       config.fine, request_kbps);
      return {std::move(fine.allocation), fine.start, fine.result};
    }
  }
  throw std::logic_error("unknown allocation method");
}

}  // namespace

BufferUpdate update_buffer(const PlaybackState& state, double download_s, double segment_s) {
  if (!(download_s >= 0.0)) throw std::invalid_argument("download time must be >= 0");
  BufferUpdate out;
  out.stall_s = std::max(0.0, download_s - state.buffer_s);
  out.state.buffer_s = std::max(0.0, state.buffer_s - download_s) + segment_s;
  out.state.clock_s = state.clock_s + download_s;
  out.state.total_stall_s = state.total_stall_s + out.stall_s;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, SessionStream stream) {
  auto rng = make_stream(seed, stream);
  return rng();
}

void validate(const SessionConfig& config) {
  if (!config.catalog) throw std::invalid_argument("session: catalog missing");
  if (!config.patterns || config.patterns->empty()) {
    throw std::invalid_argument("session: FoV patterns missing");
  }
  for (std::size_t i = 0; i < config.patterns->size(); ++i) {
    const auto& p = (*config.patterns)[i];
    if (p.id() != static_cast<int>(i) + 1) throw std::invalid_argument("session: pattern ids must be 1..K");
    if (!(p.grid() == config.catalog->grid())) {
      throw std::invalid_argument("session: pattern grid does not match the catalog");
    }
  }
  validate(config.buffer);
  validate(config.fine);
  validate(config.qoe);
  if (config.throughput_window < 1) throw std::invalid_argument("session: L_0 must be >= 1");
  if (!(config.fov.sigma2 > 0.0)) throw std::invalid_argument("session: FoV variance must be positive");
  if (!(config.switch_probability >= 0.0) || !(config.switch_probability <= 1.0)) {
    throw std::invalid_argument("session: switch probability must lie in [0, 1]");
  }
  if (!(config.missing_distortion > 0.0)) {
    throw std::invalid_argument("session: missing-tile distortion must be positive");
  }
  if (config.segments < 0) throw std::invalid_argument("session: segment count must be >= 0");
}

SessionResult run_session(const SessionConfig& config) {
  validate(config);
  const TileCatalog& catalog = *config.catalog;
  const auto& patterns = *config.patterns;
  const int pattern_count = static_cast<int>(patterns.size());
  const int segments = config.segments > 0 ? config.segments : catalog.segments();
  const double t0 = catalog.segment_duration();

  auto fov_rng = make_stream(config.seed, SessionStream::kFov);
  auto switch_rng = make_stream(config.seed, SessionStream::kSwitch);
  ChannelState channel_state(derive_seed(config.seed, SessionStream::kChannel));

  ThroughputWindow window(config.throughput_window, t0);
  PlaybackState playback;
  bool starting = true;
  std::optional<double> previous_mse;   // displayed FoV, MSE domain
  std::optional<double> previous_psnr;  // displayed FoV, dB

  SessionResult result;
  result.records.reserve(static_cast<std::size_t>(segments));

  for (int l = 0; l < segments; ++l) {
    const SegmentView segment = catalog.segment(l);
    const int predicted = sample_fov(fov_rng, config.fov.mu, config.fov.sigma2, pattern_count);
    const FovPattern& pattern = patterns[static_cast<std::size_t>(predicted - 1)];
    const PriorityMap priorities = zipf_priorities(pattern);

    if (starting && playback.buffer_s >= config.buffer.startup_s) starting = false;

    Allocated chosen;
    double request_kbps = 0.0;
    if (starting || window.empty()) {
      chosen.allocation = startup_allocation(config.method, segment, pattern);
      request_kbps = chosen.allocation.total_kbps();
    } else {
      request_kbps = bqa_request_bitrate(window.estimate(), playback.buffer_s, config.buffer);
      chosen = allocate(config, segment, pattern, priorities, request_kbps, previous_mse);
    }
    const AllocationResult& alloc = chosen.allocation;

    const double total_kbps = alloc.total_kbps();
    const double download_s =
        download(config.channel, channel_state, total_kbps * t0 * 1000.0, playback.clock_s).duration_s;
    const BufferUpdate buffered = update_buffer(playback, download_s, t0);
    playback = buffered.state;
    window.push(total_kbps, download_s);

    const auto jump = sample_sudden_switch(switch_rng, config.switch_probability, predicted,
                                           config.fov.mu, config.fov.sigma2, pattern_count);
    const FovPattern& display = jump ? patterns[static_cast<std::size_t>(*jump - 1)] : pattern;
    const PriorityMap display_priorities = jump ? zipf_priorities(display) : priorities;

    std::vector<double> shown(alloc.tiles.size());
    for (std::size_t n = 0; n < shown.size(); ++n) {
      shown[n] = alloc.tiles[n].downloaded() ? alloc.tiles[n].distortion : config.missing_distortion;
    }
    std::vector<double> fov_mse;
    for (const int n : display.fov_tiles()) fov_mse.push_back(shown[static_cast<std::size_t>(n)]);

    const FovStats stats = fov_stats(fov_mse, previous_psnr);
    const FComponents f = objective_f(fov_mse, previous_mse, config.fine.theta);

    MetricsRecord rec;
    rec.segment = l + 1;
    rec.predicted_pattern = predicted;
    rec.display_pattern = display.id();
    rec.switched = jump.has_value();
    rec.requested_kbps = request_kbps;
    rec.actual_kbps = total_kbps;
    rec.fov_actual_kbps = alloc.bitrate_of(display.fov_tiles());
    rec.weighted_psnr_db = weighted_psnr(shown, display_priorities.tile);
    rec.fov_avg_psnr_db = stats.average_db;
    rec.fov_psnr_std_db = stats.stddev_db;
    rec.fov_psnr_temporal_diff_db = stats.temporal_diff_db;
    rec.f_value = f.value;
    rec.buffer_s = playback.buffer_s;
    rec.stall_s = buffered.stall_s;
    rec.download_s = download_s;
    if (chosen.fine_start) rec.fine_f_start = chosen.fine_start->value;
    if (chosen.fine_result) rec.fine_f_result = chosen.fine_result->value;
    result.records.push_back(rec);

    previous_mse = f.average;
    previous_psnr = stats.average_db;
  }

  result.qoe = qoe(result.records, config.qoe);
  result.final_state = playback;
  return result;
}

std::vector<StreamRecord> simulate_stream(const StreamConfig& config) {
  validate(config.buffer);
  if (config.segments < 1) throw std::invalid_argument("stream: need at least one segment");
  const double target = config.bfa_target_s > 0.0 ? config.bfa_target_s : config.buffer.min_s;

  ChannelState channel_state(derive_seed(config.seed, SessionStream::kChannel));
  ThroughputWindow window(config.throughput_window, config.segment_s);
  PlaybackState playback;
  bool starting = true;
  int previous_level = 1;

  std::vector<StreamRecord> records;
  records.reserve(static_cast<std::size_t>(config.segments));
  for (int l = 0; l < config.segments; ++l) {
    if (starting && playback.buffer_s >= config.buffer.startup_s) starting = false;
    int level = 1;
    if (!starting && !window.empty()) {
      switch (config.policy) {
        case RatePolicy::kBQA:
          level = bqa_level(window.estimate(), playback.buffer_s, config.buffer, config.ladder);
          break;
        case RatePolicy::kQFA:
          level = qfa_level(window.estimate(), config.ladder);
          break;
        case RatePolicy::kBFA:
          level = bfa_level(playback.buffer_s, target, previous_level, config.ladder);
          break;
      }
    }
    const double bitrate = config.ladder.bitrate(level);
    const double download_s =
        download(config.channel, channel_state, bitrate * config.segment_s * 1000.0, playback.clock_s)
            .duration_s;
    const BufferUpdate buffered = update_buffer(playback, download_s, config.segment_s);
    playback = buffered.state;
    window.push(bitrate, download_s);
    previous_level = level;
    records.push_back({l + 1, level, bitrate, playback.buffer_s, buffered.stall_s, download_s});
  }
  return records;
}

int count_switches(std::span<const StreamRecord> records) {
  int switches = 0;
  for (std::size_t i = 1; i < records.size(); ++i) switches += records[i].level != records[i - 1].level;
  return switches;
}

}  // namespace tile360
