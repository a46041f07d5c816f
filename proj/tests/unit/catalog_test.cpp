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
#include <random>

#include "tile360/catalog.hpp"
#include "tile360/metrics.hpp"

namespace tile360 {
namespace {

TEST(QualityLadder, StandardHasSixteenEvenSteps) {
  const auto ladder = QualityLadder::standard16();
  ASSERT_EQ(ladder.levels(), 16);
  for (int u = 1; u <= 16; ++u) EXPECT_DOUBLE_EQ(ladder.bitrate(u), 150.0 * u);
  EXPECT_DOUBLE_EQ(ladder.min_bitrate(), 150.0);
  EXPECT_DOUBLE_EQ(ladder.max_bitrate(), 2400.0);
}

TEST(QualityLadder, RejectsBadLadders) {
  EXPECT_THROW(QualityLadder({150.0}), std::invalid_argument);
  EXPECT_THROW(QualityLadder({}), std::invalid_argument);
  EXPECT_THROW(QualityLadder({300.0, 150.0}), std::invalid_argument);
  EXPECT_THROW(QualityLadder({150.0, 150.0}), std::invalid_argument);
  EXPECT_THROW(QualityLadder({0.0, 150.0}), std::invalid_argument);
  EXPECT_THROW(QualityLadder::standard16().bitrate(0), std::out_of_range);
  EXPECT_THROW(QualityLadder::standard16().bitrate(17), std::out_of_range);
}

TEST(QuantizeDown, PicksLargestEntryNotAbove) {
  const auto ladder = QualityLadder::standard16();
  EXPECT_EQ(quantize_down(ladder, 1000.0), 6);
  EXPECT_EQ(quantize_down(ladder, 150.0), 1);
  EXPECT_EQ(quantize_down(ladder, 10.0), 1);
  EXPECT_EQ(quantize_down(ladder, 2400.0), 16);
  EXPECT_EQ(quantize_down(ladder, 1e9), 16);
  EXPECT_EQ(quantize_down(ladder, 299.999), 1);
  EXPECT_EQ(quantize_down(ladder, 300.0), 2);
}

TEST(Distortion, DirectEvaluation) {
  EXPECT_DOUBLE_EQ(distortion_at({3000.0, 1.0}, 200.0), 15.0);
  EXPECT_DOUBLE_EQ(distortion_at({3000.0, 1.0}, 3000.0), 1.0);
  EXPECT_NEAR(distortion_at({2000.0, 0.5}, 400.0), 100.0, 1e-12);
  EXPECT_THROW(distortion_at({3000.0, 1.0}, 0.0), std::domain_error);
  EXPECT_THROW(distortion_at({3000.0, 1.0}, -1.0), std::domain_error);
}

TEST(FitRd, RecoversExactLogLinearData) {
  const std::vector<RdSample> s{{150.0, 20.0}, {600.0, 5.0}, {2400.0, 1.25}};
  const auto p = fit_rd(s);
  EXPECT_NEAR(p.alpha / 3000.0 - 1.0, 0.0, 1e-9);
  EXPECT_NEAR(p.beta - 1.0, 0.0, 1e-9);
}

TEST(FitRd, TwoPointsDetermineTheLine) {
  const std::vector<RdSample> s{{100.0, 30.0}, {1000.0, 3.0}};
  const auto p = fit_rd(s);
  EXPECT_NEAR(p.beta, 1.0, 1e-12);
  EXPECT_NEAR(p.alpha, 3000.0, 1e-9);
}

TEST(FitRd, RejectsDegenerateSamples) {
  EXPECT_THROW(fit_rd(std::vector<RdSample>{{100.0, 5.0}, {100.0, 7.0}}), std::invalid_argument);
  EXPECT_THROW(fit_rd(std::vector<RdSample>{{100.0, 5.0}}), std::invalid_argument);
  EXPECT_THROW(fit_rd(std::vector<RdSample>{{100.0, 0.0}, {200.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_rd(std::vector<RdSample>{{-1.0, 2.0}, {200.0, 1.0}}), std::invalid_argument);
  // increasing distortion gives a non-positive slope
  EXPECT_THROW(fit_rd(std::vector<RdSample>{{100.0, 1.0}, {200.0, 2.0}}), std::invalid_argument);
}

TEST(FitRd, RandomNoiselessDraws) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(100.0, 1e5), b(0.3, 2.0);
  const auto ladder = QualityLadder::standard16();
  for (int i = 0; i < 100; ++i) {
    const RdParams truth{a(rng), b(rng)};
    std::vector<RdSample> s;
    for (const double r : ladder.bitrates()) s.push_back({r, distortion_at(truth, r)});
    const auto fit = fit_rd(s);
    EXPECT_NEAR(fit.alpha / truth.alpha, 1.0, 1e-9);
    EXPECT_NEAR(fit.beta / truth.beta, 1.0, 1e-9);
  }
}

TEST(TileCatalog, DistortionTableMatchesModel) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 3);
  for (int l = 0; l < cat.segments(); ++l) {
    for (int n = 0; n < cat.tiles(); ++n) {
      for (int u = 1; u <= cat.ladder().levels(); ++u) {
        EXPECT_DOUBLE_EQ(cat.distortion(l, n, u), distortion_at(cat.rd(l, n), cat.ladder().bitrate(u)));
      }
    }
  }
}

TEST(TileCatalog, SegmentViewLoops) {
  CatalogSpec spec;
  spec.segments = 3;
  const auto cat = synthesize_catalog(spec, 5);
  EXPECT_EQ(cat.segment(4).segment(), 1);
  EXPECT_EQ(cat.segment(3).rd(7), cat.rd(0, 7));
  EXPECT_EQ(cat.segment(2).rd_params().size(), 24u);
  EXPECT_THROW(cat.segment(-1), std::out_of_range);
}

TEST(TileCatalog, RejectsInconsistentInputs) {
  const auto ladder = QualityLadder::standard16();
  std::vector<RdParams> rd(24, RdParams{1000.0, 1.0});
  EXPECT_THROW(TileCatalog(2, TileGrid{}, 2.0, ladder, rd), std::invalid_argument);
  EXPECT_THROW(TileCatalog(1, TileGrid{}, 0.0, ladder, rd), std::invalid_argument);
  rd[3].beta = 0.0;
  EXPECT_THROW(TileCatalog(1, TileGrid{}, 2.0, ladder, rd), std::invalid_argument);
}

TEST(Synthesis, Deterministic) {
  const CatalogSpec spec;
  EXPECT_EQ(synthesize_catalog(spec, 9), synthesize_catalog(spec, 9));
  EXPECT_EQ(catalog_to_json(synthesize_catalog(spec, 9)), catalog_to_json(synthesize_catalog(spec, 9)));
  EXPECT_FALSE(synthesize_catalog(spec, 9) == synthesize_catalog(spec, 10));
}

TEST(Synthesis, ParametersStayInRange) {
  CatalogSpec spec;
  spec.segments = 20;
  const auto cat = synthesize_catalog(spec, 1);
  for (int l = 0; l < cat.segments(); ++l) {
    for (int n = 0; n < cat.tiles(); ++n) {
      EXPECT_GE(cat.rd(l, n).alpha, 2000.0);
      EXPECT_LE(cat.rd(l, n).alpha, 20000.0);
      EXPECT_GE(cat.rd(l, n).beta, 0.8);
      EXPECT_LE(cat.rd(l, n).beta, 1.2);
    }
  }
}

// The PSNR band at the lowest rung follows from the range corners:
// alpha = 20000, beta = 0.8 is the worst tile and alpha = 2000, beta = 1.2
// the best.
TEST(Synthesis, LowestRungPsnrWithinCornerBand) {
  const double worst = mse_to_psnr(20000.0 * std::pow(150.0, -0.8));
  const double best = mse_to_psnr(2000.0 * std::pow(150.0, -1.2));
  EXPECT_NEAR(worst, 22.53, 0.01);
  EXPECT_NEAR(best, 41.23, 0.01);
  CatalogSpec spec;
  spec.segments = 50;
  const auto cat = synthesize_catalog(spec, 2);
  for (int l = 0; l < cat.segments(); ++l) {
    for (int n = 0; n < cat.tiles(); ++n) {
      const double q = mse_to_psnr(cat.distortion(l, n, 1));
      EXPECT_GE(q, worst - 1e-9);
      EXPECT_LE(q, best + 1e-9);
      for (int u = 2; u <= cat.ladder().levels(); ++u) {
        EXPECT_GT(mse_to_psnr(cat.distortion(l, n, u)), mse_to_psnr(cat.distortion(l, n, u - 1)));
      }
    }
  }
}

TEST(CatalogJson, RoundTrip) {
  CatalogSpec spec;
  spec.segments = 4;
  spec.grid = {2, 3};
  spec.ladder = QualityLadder({100.0, 400.0, 900.0});
  const auto cat = synthesize_catalog(spec, 77);
  const auto back = catalog_from_json(catalog_to_json(cat));
  EXPECT_EQ(back, cat);
  EXPECT_DOUBLE_EQ(back.distortion(3, 5, 2), cat.distortion(3, 5, 2));
}

TEST(CatalogJson, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "tile360_catalog_test.json";
  const auto cat = synthesize_catalog(CatalogSpec{}, 4);
  save_catalog(cat, path);
  EXPECT_EQ(load_catalog(path), cat);
  std::filesystem::remove(path);
  EXPECT_THROW(load_catalog(path), std::runtime_error);
}

TEST(CatalogJson, RejectsMalformedDocuments) {
  EXPECT_ANY_THROW(catalog_from_json("{"));
  EXPECT_ANY_THROW(catalog_from_json("{}"));
  EXPECT_ANY_THROW(catalog_from_json(
      R"({"L":1,"rows":1,"cols":2,"U":2,"segment_duration_s":2,"bitrates_kbps":[1,2],"tiles":[[{"alpha":1,"beta":1}]]})"));
}

}  // namespace
}  // namespace tile360
