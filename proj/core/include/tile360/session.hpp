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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tile360/allocation.hpp"
#include "tile360/catalog.hpp"
#include "tile360/channel.hpp"
#include "tile360/metrics.hpp"
#include "tile360/rate_control.hpp"
#include "tile360/viewport.hpp"

namespace tile360 {

struct PlaybackState {
  double clock_s = 0.0;
  double buffer_s = 0.0;
  double total_stall_s = 0.0;
};

struct BufferUpdate {
  PlaybackState state;
  double stall_s = 0.0;
};

/// Sequential blocking download of one segment: playback drains the buffer
/// while the download runs, stalling once it is empty, then the new segment
/// adds `segment_s` seconds.
BufferUpdate update_buffer(const PlaybackState& state, double download_s, double segment_s);

struct FovModel {
  double mu = 11.0;
  double sigma2 = 4.0;
};

struct SessionConfig {
  std::shared_ptr<const TileCatalog> catalog;
  std::shared_ptr<const std::vector<FovPattern>> patterns;  // ids 1..K in order
  ChannelModel channel{FixedChannel{10000.0}};
  Method method = Method::kProposed;
  BufferPolicy buffer{};
  int throughput_window = 1;
  FovModel fov{};
  double switch_probability = 0.0;
  FineParams fine{};
  QoeParams qoe{};
  double missing_distortion = kDefaultMissingDistortion;
  std::uint64_t seed = 1;
  /// Segments to play; the catalog loops when this exceeds its length.
  /// 0 plays the catalog once.
  int segments = 0;
};

/// Throws std::invalid_argument describing the first invalid field.
void validate(const SessionConfig& config);

struct SessionResult {
  std::vector<MetricsRecord> records;
  double qoe = 0.0;
  PlaybackState final_state;
};

/// Per segment: sample the FoV, compute priorities, estimate throughput (or
/// fetch the lowest quality during startup), size the request, allocate,
/// download, update the buffer, maybe apply a sudden view switch, and
/// evaluate the displayed FoV. Deterministic for a fixed config.
SessionResult run_session(const SessionConfig& config);

/// Independent random streams used by a session, derived from its seed.
enum class SessionStream : std::uint64_t { kFov = 1, kSwitch = 2, kChannel = 3 };
std::uint64_t derive_seed(std::uint64_t seed, SessionStream stream);

/// Whole-segment rate adaptation without tiling.
enum class RatePolicy { kBQA, kQFA, kBFA };

struct StreamConfig {
  QualityLadder ladder = QualityLadder::standard16();
  ChannelModel channel{FixedChannel{10000.0}};
  BufferPolicy buffer{2.0, 10.0, 12.0};
  RatePolicy policy = RatePolicy::kBQA;
  int throughput_window = 1;
  double segment_s = 2.0;
  int segments = 200;
  /// BFA's predefined buffer length; 0 uses buffer.min_s.
  double bfa_target_s = 0.0;
  std::uint64_t seed = 1;
};

struct StreamRecord {
  int segment = 0;
  int level = 0;
  double bitrate_kbps = 0.0;
  double buffer_s = 0.0;  // after the segment arrived
  double stall_s = 0.0;
  double download_s = 0.0;
};

std::vector<StreamRecord> simulate_stream(const StreamConfig& config);

/// Number of consecutive segments whose level differs.
int count_switches(std::span<const StreamRecord> records);

}  // namespace tile360
