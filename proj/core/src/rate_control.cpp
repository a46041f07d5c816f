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

#include "tile360/rate_control.hpp"

#include <algorithm>
#include <cmath>

namespace tile360 {

ThroughputWindow::ThroughputWindow(int window, double segment_duration_s)
    : window_(window), segment_duration_(segment_duration_s) {
  if (window_ < 1) throw std::invalid_argument("throughput window must be >= 1");
  if (!(segment_duration_ > 0.0)) {
    throw std::invalid_argument("segment duration must be positive");
  }
}

void ThroughputWindow::push(double bitrate_kbps, double download_s) {
  if (!(bitrate_kbps > 0.0) || !(download_s > 0.0)) {
    throw std::invalid_argument("throughput sample must have positive bitrate and duration");
  }
  history_.push_back({bitrate_kbps, download_s});
  while (history_.size() > static_cast<std::size_t>(window_)) history_.pop_front();
}

double ThroughputWindow::estimate() const {
  if (history_.empty()) throw NoEstimate();
  double sum = 0.0;
  for (const auto& e : history_) sum += e.bitrate_kbps * segment_duration_ / e.download_s;
  return sum / static_cast<double>(history_.size());
}

void validate(const BufferPolicy& policy) {
  if (!(policy.startup_s > 0.0)) throw std::invalid_argument("b_0 must be positive");
  if (!(policy.min_s > 0.0) || !(policy.max_s > policy.min_s)) {
    throw std::invalid_argument("buffer thresholds need 0 < b_min < b_max");
  }
}

double bqa_epsilon(double buffer_s, const BufferPolicy& policy) {
  if (buffer_s < policy.min_s) return buffer_s / policy.min_s;
  if (buffer_s > policy.max_s) return buffer_s / policy.max_s;
  return 1.0;
}

double bqa_request_bitrate(double throughput_kbps, double buffer_s, const BufferPolicy& policy) {
  return bqa_epsilon(buffer_s, policy) * throughput_kbps;
}

int bqa_level(double throughput_kbps, double buffer_s, const BufferPolicy& policy,
              const QualityLadder& ladder) {
  int level = quantize_down(ladder, throughput_kbps);
  if (buffer_s < policy.min_s) {
    --level;
  } else if (buffer_s > policy.max_s) {
    ++level;
  }
  return std::clamp(level, 1, ladder.levels());
}

int qfa_level(double throughput_kbps, const QualityLadder& ladder) {
  return quantize_down(ladder, throughput_kbps);
}

int bfa_level(double buffer_s, double target_s, int previous_level, const QualityLadder& ladder) {
  if (previous_level < 1 || previous_level > ladder.levels()) {
    throw std::invalid_argument("bfa_level: previous level out of range");
  }
  if (buffer_s < target_s) return 1;
  return std::min(previous_level + 1, ladder.levels());
}

}  // namespace tile360
