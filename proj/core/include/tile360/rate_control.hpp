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
#include <deque>
#include <stdexcept>

#include "tile360/catalog.hpp"

namespace tile360 {

/// Thrown when a throughput estimate is requested before any download
/// completed; callers fall back to the startup policy.
class NoEstimate : public std::runtime_error {
 public:
  NoEstimate() : std::runtime_error("no completed downloads to estimate throughput") {}
};

/// Sliding window over the last L_0 completed segment downloads.
class ThroughputWindow {
 public:
  /// Throws std::invalid_argument for window < 1 or non-positive duration.
  ThroughputWindow(int window, double segment_duration_s);

  /// Record a download of a segment coded at `bitrate_kbps` that took
  /// `download_s` seconds.
  void push(double bitrate_kbps, double download_s);

  bool empty() const { return history_.empty(); }
  std::size_t size() const { return history_.size(); }
  int window() const { return window_; }

  /// Mean of bitrate * t_0 / t_download over the retained entries (fewer than
  /// L_0 early in a session). Throws NoEstimate when empty.
  double estimate() const;

 private:
  struct Entry {
    double bitrate_kbps;
    double download_s;
  };

  int window_;
  double segment_duration_;
  std::deque<Entry> history_;
};

struct BufferPolicy {
  double startup_s = 2.0;  // b_0
  double min_s = 10.0;     // b_min
  double max_s = 20.0;     // b_max
};

/// Throws std::invalid_argument unless 0 < b_0 and 0 < b_min < b_max.
void validate(const BufferPolicy& policy);

/// Buffer-dependent scale on the throughput estimate: b/b_min below the band,
/// 1 inside [b_min, b_max] (inclusive), b/b_max above it.
double bqa_epsilon(double buffer_s, const BufferPolicy& policy);

double bqa_request_bitrate(double throughput_kbps, double buffer_s, const BufferPolicy& policy);

/// Ladder level one below / at / one above quantize_down(throughput) when
/// the buffer is below / inside / above the band, clamped to [1, U].
int bqa_level(double throughput_kbps, double buffer_s, const BufferPolicy& policy,
              const QualityLadder& ladder);

/// Quality-first: the highest level not exceeding the throughput estimate.
int qfa_level(double throughput_kbps, const QualityLadder& ladder);

/// Buffer-first: lowest level while the buffer is under `target_s`, then a
/// one-level-per-segment ramp from `previous_level`.
int bfa_level(double buffer_s, double target_s, int previous_level, const QualityLadder& ladder);

}  // namespace tile360
