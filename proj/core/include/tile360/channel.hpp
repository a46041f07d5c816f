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
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace tile360 {

struct FixedChannel {
  double bandwidth_kbps = 10000.0;
};

/// Markov chain over bandwidth states. The state is constant within each
/// epoch [k * epoch_s, (k + 1) * epoch_s); at every epoch boundary the chain
/// leaves its state with probability `transition_probability`, moving to a
/// uniformly chosen other state.
struct MarkovChannel {
  std::vector<double> states_kbps{10000.0, 4000.0};
  double transition_probability = 0.5;
  double epoch_s = 2.0;
};

struct TraceStep {
  double start_s = 0.0;
  double bandwidth_kbps = 0.0;
};

/// Left-closed steps; the last step extends forever.
struct TraceChannel {
  std::vector<TraceStep> steps;
};

/// Immutable bandwidth process description.
class ChannelModel {
 public:
  using Variant = std::variant<FixedChannel, MarkovChannel, TraceChannel>;

  /// Throws std::invalid_argument on non-positive bandwidths, a probability
  /// outside [0, 1], fewer than two Markov states, trace steps not strictly
  /// increasing from 0, or jitter outside [0, 1).
  explicit ChannelModel(Variant variant, double jitter = 0.0);

  const Variant& variant() const { return variant_; }
  /// Each download's bandwidth is scaled by a factor drawn uniformly from
  /// [1 - jitter, 1 + jitter].
  double jitter() const { return jitter_; }

 private:
  Variant variant_;
  double jitter_;
};

/// Mutable per-simulation channel state. Both random streams are private to
/// the channel so the bandwidth trajectory does not depend on how callers
/// consume other randomness.
struct ChannelState {
  explicit ChannelState(std::uint64_t seed = 0, std::size_t initial_state = 0);

  std::size_t markov_state = 0;
  /// Epoch index the current Markov state belongs to.
  std::int64_t markov_epoch = 0;
  std::mt19937_64 transition_rng;
  std::mt19937_64 jitter_rng;
};

/// Bandwidth in effect at time t (seconds). For Markov channels, advances
/// `state` to the epoch containing t.
double bandwidth_at(const ChannelModel& model, ChannelState& state, double t);

struct DownloadResult {
  double duration_s = 0.0;
};

/// Time needed to move `bits` starting at `start_s`, integrating the
/// piecewise-constant bandwidth. `state` is advanced past the download.
DownloadResult download(const ChannelModel& model, ChannelState& state, double bits,
                        double start_s);

/// CSV with header `start_s,bandwidth_kbps`.
TraceChannel load_trace_csv(const std::filesystem::path& path);
TraceChannel parse_trace_csv(const std::string& text);

}  // namespace tile360
