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

#include "tile360/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tile360 {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_bandwidth(double kbps) {
  if (!(kbps > 0.0) || !std::isfinite(kbps)) {
    throw std::invalid_argument("channel bandwidths must be positive and finite");
  }
}

std::int64_t epoch_of(const MarkovChannel& m, double t) {
  // Tolerate rounding just below an exact boundary.
  return static_cast<std::int64_t>(std::floor(t / m.epoch_s + 1e-9));
}

void step_markov(const MarkovChannel& m, ChannelState& state) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(state.transition_rng);
  if (u < m.transition_probability) {
    const auto others = m.states_kbps.size() - 1;
    if (others == 1) {
      state.markov_state = 1 - state.markov_state;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, others - 1);
      auto next = pick(state.transition_rng);
      if (next >= state.markov_state) ++next;
      state.markov_state = next;
    }
  }
  ++state.markov_epoch;
}

void advance_markov_to(const MarkovChannel& m, ChannelState& state, std::int64_t epoch) {
  while (state.markov_epoch < epoch) step_markov(m, state);
}

std::size_t trace_index(const TraceChannel& trace, double t) {
  const auto it = std::upper_bound(
      trace.steps.begin(), trace.steps.end(), t,
      [](double value, const TraceStep& step) { return value < step.start_s; });
  if (it == trace.steps.begin()) return 0;
  return static_cast<std::size_t>(it - trace.steps.begin()) - 1;
}

}  // namespace

ChannelModel::ChannelModel(Variant variant, double jitter)
    : variant_(std::move(variant)), jitter_(jitter) {
  if (!(jitter_ >= 0.0) || !(jitter_ < 1.0)) {
    throw std::invalid_argument("channel jitter must lie in [0, 1)");
  }
  std::visit(Overloaded{
                 [](const FixedChannel& f) { require_bandwidth(f.bandwidth_kbps); },
                 [](const MarkovChannel& m) {
                   if (m.states_kbps.size() < 2) {
                     throw std::invalid_argument("Markov channel needs at least two states");
                   }
                   for (const double s : m.states_kbps) require_bandwidth(s);
                   if (!(m.transition_probability >= 0.0) || !(m.transition_probability <= 1.0)) {
                     throw std::invalid_argument("transition probability must lie in [0, 1]");
                   }
                   if (!(m.epoch_s > 0.0)) {
                     throw std::invalid_argument("Markov epoch must be positive");
                   }
                 },
                 [](const TraceChannel& t) {
                   if (t.steps.empty()) throw std::invalid_argument("trace has no steps");
                   if (t.steps.front().start_s != 0.0) {
                     throw std::invalid_argument("trace must start at t = 0");
                   }
                   for (std::size_t i = 0; i < t.steps.size(); ++i) {
                     require_bandwidth(t.steps[i].bandwidth_kbps);
                     if (i > 0 && !(t.steps[i].start_s > t.steps[i - 1].start_s)) {
                       throw std::invalid_argument("trace start times must strictly increase");
                     }
                   }
                 },
             },
             variant_);
}

ChannelState::ChannelState(std::uint64_t seed, std::size_t initial_state)
    : markov_state(initial_state) {
  std::seed_seq transition_seed{seed, std::uint64_t{0x6d61726b}};
  std::seed_seq jitter_seed{seed, std::uint64_t{0x6a697474}};
  transition_rng.seed(transition_seed);
  jitter_rng.seed(jitter_seed);
}

double bandwidth_at(const ChannelModel& model, ChannelState& state, double t) {
  return std::visit(Overloaded{
                        [](const FixedChannel& f) { return f.bandwidth_kbps; },
                        [&](const MarkovChannel& m) {
                          advance_markov_to(m, state, epoch_of(m, t));
                          return m.states_kbps.at(state.markov_state);
                        },
                        [&](const TraceChannel& tr) {
                          return tr.steps[trace_index(tr, t)].bandwidth_kbps;
                        },
                    },
                    model.variant());
}

DownloadResult download(const ChannelModel& model, ChannelState& state, double bits,
                        double start_s) {
  if (!(bits >= 0.0)) throw std::invalid_argument("download: bits must be >= 0");
  if (!(start_s >= 0.0)) throw std::invalid_argument("download: start must be >= 0");
  if (bits == 0.0) return {};

  double scale = 1.0;
  if (model.jitter() > 0.0) {
    std::uniform_real_distribution<double> factor(1.0 - model.jitter(), 1.0 + model.jitter());
    scale = factor(state.jitter_rng);
  }

  double remaining_kbit = bits / 1000.0;
  double t = start_s;
  constexpr double kForever = std::numeric_limits<double>::infinity();

  const auto finish = [&](double bw) { return t + remaining_kbit / bw - start_s; };

  return std::visit(
      Overloaded{
          [&](const FixedChannel& f) {
            return DownloadResult{finish(f.bandwidth_kbps * scale)};
          },
          [&](const MarkovChannel& m) {
            advance_markov_to(m, state, epoch_of(m, t));
            for (;;) {
              const double bw = m.states_kbps.at(state.markov_state) * scale;
              const double end = static_cast<double>(state.markov_epoch + 1) * m.epoch_s;
              const double capacity = bw * (end - t);
              if (remaining_kbit <= capacity) return DownloadResult{finish(bw)};
              remaining_kbit -= capacity;
              t = end;
              step_markov(m, state);
            }
          },
          [&](const TraceChannel& tr) {
            auto i = trace_index(tr, t);
            for (;;) {
              const double bw = tr.steps[i].bandwidth_kbps * scale;
              const double end = i + 1 < tr.steps.size() ? tr.steps[i + 1].start_s : kForever;
              const double capacity = bw * (end - t);
              if (remaining_kbit <= capacity) return DownloadResult{finish(bw)};
              remaining_kbit -= capacity;
              t = end;
              ++i;
            }
          },
      },
      model.variant());
}

TraceChannel parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "start_s,bandwidth_kbps") {
    throw std::invalid_argument("trace CSV header must be 'start_s,bandwidth_kbps'");
  }
  TraceChannel trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("trace CSV line " + std::to_string(line_no) +
                                  ": expected two columns");
    }
    try {
      std::size_t used = 0;
      const double start = std::stod(line.substr(0, comma), &used);
      const double bw = std::stod(line.substr(comma + 1));
      trace.steps.push_back({start, bw});
    } catch (const std::logic_error&) {
      throw std::invalid_argument("trace CSV line " + std::to_string(line_no) +
                                  ": not a number");
    }
  }
  // Validates ordering and positivity.
  ChannelModel check{trace};
  return trace;
}

TraceChannel load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

}  // namespace tile360
