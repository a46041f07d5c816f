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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tile360/channel.hpp"

namespace tile360 {
namespace {

TEST(Channel, FixedIsConstant) {
  const ChannelModel m(FixedChannel{10000.0});
  ChannelState s;
  for (const double t : {0.0, 1.5, 1e6}) EXPECT_DOUBLE_EQ(bandwidth_at(m, s, t), 10000.0);
}

TEST(Channel, TraceStepsAreLeftClosed) {
  const ChannelModel m(TraceChannel{{{0.0, 4000.0}, {30.0, 8000.0}}});
  ChannelState s;
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 29.9), 4000.0);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 30.0), 8000.0);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 1e5), 8000.0);
}

TEST(Channel, MarkovForcedTransitionSwitchesState) {
  const ChannelModel m(MarkovChannel{{10000.0, 4000.0}, 1.0, 2.0});
  ChannelState s(1);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 0.5), 10000.0);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 2.5), 4000.0);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 4.0), 10000.0);
}

TEST(Channel, MarkovWithoutTransitionsNeverMoves) {
  const ChannelModel m(MarkovChannel{{10000.0, 4000.0}, 0.0, 2.0});
  ChannelState s(3, 1);
  const double bits = 4000.0 * 1000.0 * 7.0;
  EXPECT_NEAR(download(m, s, bits, 0.3).duration_s, 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(bandwidth_at(m, s, 500.0), 4000.0);
}

TEST(Channel, MarkovTransitionFrequency) {
  const ChannelModel m(MarkovChannel{{10000.0, 4000.0}, 0.5, 2.0});
  ChannelState s(42);
  int changes = 0;
  double prev = bandwidth_at(m, s, 0.0);
  const int epochs = 20000;
  for (int k = 1; k <= epochs; ++k) {
    const double b = bandwidth_at(m, s, 2.0 * k + 0.1);
    changes += b != prev;
    prev = b;
  }
  // binomial(20000, 0.5): sd ~ 71
  EXPECT_NEAR(changes / static_cast<double>(epochs), 0.5, 0.02);
}

TEST(Channel, MarkovTrajectoryIgnoresQueryPattern) {
  const ChannelModel m(MarkovChannel{{10000.0, 4000.0, 2000.0}, 0.3, 2.0});
  ChannelState a(9), b(9);
  std::vector<double> dense, sparse;
  for (int k = 0; k < 200; ++k) dense.push_back(bandwidth_at(m, a, 2.0 * k + 1.0));
  for (int k = 0; k < 200; k += 7) sparse.push_back(bandwidth_at(m, b, 2.0 * k + 1.0));
  for (std::size_t i = 0; i < sparse.size(); ++i) EXPECT_EQ(sparse[i], dense[7 * i]);
}

TEST(Download, FixedChannelDuration) {
  const ChannelModel m(FixedChannel{10000.0});
  ChannelState s;
  EXPECT_NEAR(download(m, s, 20'000'000.0, 0.0).duration_s, 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(download(m, s, 0.0, 3.0).duration_s, 0.0);
}

TEST(Download, IntegratesAcrossTraceSteps) {
  const ChannelModel m(TraceChannel{{{0.0, 4000.0}, {1.0, 8000.0}}});
  ChannelState s;
  EXPECT_NEAR(download(m, s, 8'000'000.0, 0.0).duration_s, 1.5, 1e-12);
  EXPECT_NEAR(download(m, s, 8'000'000.0, 0.5).duration_s, 1.25, 1e-12);
}

TEST(Download, MarkovIntegratesAcrossEpochs) {
  const ChannelModel m(MarkovChannel{{10000.0, 4000.0}, 1.0, 2.0});
  ChannelState s(0);
  // 2 s at 10 Mbps then 4 Mbps: 20 Mbit + 4 Mbit takes 3 s
  EXPECT_NEAR(download(m, s, 24'000'000.0, 0.0).duration_s, 3.0, 1e-9);
}

TEST(Download, JitterScalesWithinBounds) {
  const ChannelModel m(FixedChannel{10000.0}, 0.2);
  ChannelState s(5);
  double lo = 1e9, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double d = download(m, s, 10'000'000.0, i * 2.0).duration_s;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += 1.0 / d;
  }
  EXPECT_GE(lo, 1.0 / 1.2 - 1e-12);
  EXPECT_LE(hi, 1.0 / 0.8 + 1e-12);
  EXPECT_NEAR(sum / n, 1.0, 0.005);
}

TEST(Download, RejectsNegativeInputs) {
  const ChannelModel m(FixedChannel{10000.0});
  ChannelState s;
  EXPECT_THROW(download(m, s, -1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(download(m, s, 1.0, -1.0), std::invalid_argument);
}

TEST(ChannelModel, Validation) {
  EXPECT_THROW(ChannelModel(FixedChannel{0.0}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(FixedChannel{100.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(ChannelModel(FixedChannel{100.0}, -0.1), std::invalid_argument);
  EXPECT_THROW(ChannelModel(MarkovChannel{{100.0}, 0.5, 2.0}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(MarkovChannel{{100.0, 200.0}, 1.5, 2.0}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(MarkovChannel{{100.0, 200.0}, 0.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(TraceChannel{}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(TraceChannel{{{1.0, 100.0}}}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(TraceChannel{{{0.0, 100.0}, {0.0, 200.0}}}), std::invalid_argument);
  EXPECT_THROW(ChannelModel(TraceChannel{{{0.0, 100.0}, {5.0, 0.0}}}), std::invalid_argument);
}

TEST(TraceCsv, ParsesAndRejects) {
  const auto t = parse_trace_csv("start_s,bandwidth_kbps\n0,4000\n30,8000\n");
  ASSERT_EQ(t.steps.size(), 2u);
  EXPECT_DOUBLE_EQ(t.steps[1].start_s, 30.0);
  EXPECT_DOUBLE_EQ(t.steps[1].bandwidth_kbps, 8000.0);
  EXPECT_NO_THROW(parse_trace_csv("start_s,bandwidth_kbps\r\n0,4000\r\n"));
  EXPECT_THROW(parse_trace_csv("time,bw\n0,4000\n"), std::invalid_argument);
  EXPECT_THROW(parse_trace_csv("start_s,bandwidth_kbps\n0,abc\n"), std::invalid_argument);
  EXPECT_THROW(parse_trace_csv("start_s,bandwidth_kbps\n"), std::invalid_argument);
}

TEST(TraceCsv, ShippedStagedTraceLoads) {
  const auto t = load_trace_csv(std::filesystem::path(TILE360_DATA_DIR) / "staged_trace.csv");
  EXPECT_GE(t.steps.size(), 2u);
  EXPECT_NO_THROW(ChannelModel{t});
}

}  // namespace
}  // namespace tile360
