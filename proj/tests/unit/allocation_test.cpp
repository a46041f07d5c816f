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
#include <numeric>
#include <random>

#include "fine_fixture.hpp"
#include "oracles.hpp"
#include "tile360/allocation.hpp"

namespace tile360 {
namespace {

TileCatalog uniform_catalog(RdParams rd, TileGrid grid = {}, QualityLadder ladder = QualityLadder::standard16()) {
  return TileCatalog(1, grid, 2.0, std::move(ladder), std::vector<RdParams>(static_cast<std::size_t>(grid.tiles()), rd));
}

const FovPattern& centred() {
  static const auto ps = default_patterns();
  return ps[10];
}

TEST(Coarse, TwoTileClosedForm) {
  const std::vector<RdParams> rd{{1000.0, 1.0}, {1000.0, 1.0}};
  const std::vector<double> p{0.8, 0.2};
  const auto r = coarse_allocate(rd, p, 300.0);
  EXPECT_NEAR(r[0], 200.0, 1e-9);
  EXPECT_NEAR(r[1], 100.0, 1e-9);
  EXPECT_NEAR(oracle::weighted_objective(rd, p, r), 6.0, 1e-9);
  EXPECT_NEAR(oracle::grid_minimum_scan2(rd, p, 300), 6.0, 1e-12);
  EXPECT_NEAR(oracle::grid_minimum(rd, p, 300), 6.0, 1e-12);
}

TEST(Coarse, SingleTileTakesEverything) {
  const std::vector<RdParams> rd{{12345.0, 0.7}};
  const std::vector<double> p{0.3};
  EXPECT_NEAR(coarse_allocate(rd, p, 777.0)[0], 777.0, 1e-9);
}

TEST(Coarse, SymmetricSplit) {
  const std::vector<RdParams> rd(6, RdParams{5000.0, 1.1});
  const std::vector<double> p(6, 1.0 / 6);
  for (const double r : coarse_allocate(rd, p, 9000.0)) EXPECT_NEAR(r / 1500.0, 1.0, 1e-9);
}

TEST(Coarse, RejectsBadInputs) {
  const std::vector<RdParams> rd{{1000.0, 1.0}};
  const std::vector<double> p{1.0};
  EXPECT_THROW(coarse_allocate(rd, p, 0.0), std::domain_error);
  EXPECT_THROW(coarse_allocate(rd, std::vector<double>{1.0, 1.0}, 100.0), std::invalid_argument);
  EXPECT_THROW(coarse_allocate(rd, std::vector<double>{0.0}, 100.0), std::invalid_argument);
  EXPECT_THROW(coarse_allocate(std::vector<RdParams>{}, std::vector<double>{}, 100.0), std::invalid_argument);
}

TEST(Coarse, KktAndGridOracleOnRandomInstances) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> beta(0.5, 2.0), log_alpha(2.0, 5.0), prio(0.05, 1.0), req(500.0, 20000.0);
  for (int k = 0; k < 200; ++k) {
    const int n = size(rng);
    std::vector<RdParams> rd;
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
      rd.push_back({std::pow(10.0, log_alpha(rng)), beta(rng)});
      p.push_back(prio(rng));
    }
    const int request = static_cast<int>(std::round(req(rng)));
    const auto r = coarse_allocate(rd, p, request);
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    EXPECT_NEAR(sum / request, 1.0, 1e-6);
    const double lambda0 = marginal_value(rd[0], p[0], r[0]);
    for (int i = 1; i < n; ++i) EXPECT_NEAR(marginal_value(rd[i], p[i], r[i]) / lambda0, 1.0, 1e-6);
    const double grid = oracle::grid_minimum(rd, p, request);
    EXPECT_LE(oracle::weighted_objective(rd, p, r), grid * 1.001);
  }
}

TEST(GridOracle, GreedyMatchesScanOnTwoTiles) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> beta(0.5, 2.0), alpha(100.0, 1e5), prio(0.05, 1.0);
  for (int k = 0; k < 30; ++k) {
    const std::vector<RdParams> rd{{alpha(rng), beta(rng)}, {alpha(rng), beta(rng)}};
    const std::vector<double> p{prio(rng), prio(rng)};
    const int total = 500 + 97 * k;
    EXPECT_NEAR(oracle::grid_minimum(rd, p, total) / oracle::grid_minimum_scan2(rd, p, total), 1.0, 1e-12);
  }
}

TEST(Quantize, FloorsToLadder) {
  const auto cat = uniform_catalog({3000.0, 1.0}, TileGrid{1, 3});
  const std::vector<double> rates{200.0, 2400.0, 1000.0};
  const std::vector<double> p(3, 1.0 / 3);
  const auto a = quantize_allocation(rates, cat.segment(0), p);
  EXPECT_EQ(a.levels(), (std::vector<int>{1, 16, 6}));
  EXPECT_LE(a.total_kbps(), 3600.0);
}

TEST(Quantize, RepairsClampOverflow) {
  const auto cat = uniform_catalog({3000.0, 1.0}, TileGrid{1, 3});
  // the first tile is clamped up to 150; the repair must pay for it
  const std::vector<double> rates{10.0, 310.0, 460.0};
  const std::vector<double> p{0.2, 0.3, 0.5};
  const auto a = quantize_allocation(rates, cat.segment(0), p);
  EXPECT_LE(a.total_kbps(), 780.0 + 1e-9);
  for (const int u : a.levels()) EXPECT_GE(u, 1);
}

TEST(Quantize, TotalNeverExceedsPropRequestWhenFeasible) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 12);
  const auto& pat = centred();
  const auto pm = zipf_priorities(pat);
  for (double req = 24 * 150.0; req < 60000.0; req += 733.0) {
    const auto seg = cat.segment(1);
    const auto a = quantize_allocation(coarse_allocate(seg.rd_params(), pm.tile, req), seg, pm.tile);
    EXPECT_LE(a.total_kbps(), req * (1 + 1e-12));
  }
}

TEST(ObjectiveF, HandValues) {
  const Theta t{};
  const std::vector<double> d{5.0, 10.0};
  const auto f = objective_f(d, 7.5, t);
  EXPECT_DOUBLE_EQ(f.average, 7.5);
  EXPECT_DOUBLE_EQ(f.spatial, 2.5);
  EXPECT_DOUBLE_EQ(f.temporal, 0.0);
  EXPECT_DOUBLE_EQ(f.value, 2.25);
  const std::vector<double> same{4.0, 4.0, 4.0};
  EXPECT_DOUBLE_EQ(objective_f(same, 4.0, t).value, 0.2 * 4.0);
  EXPECT_DOUBLE_EQ(objective_f(d, 3.0, Theta{1.0, 0.0, 0.0}).value, 7.5);
  EXPECT_DOUBLE_EQ(objective_f(d, 3.5, t).temporal, 2.0);
  EXPECT_DOUBLE_EQ(objective_f(d, std::nullopt, t).temporal, 0.0);
  EXPECT_THROW(validate(Theta{0.5, 0.5, 0.5}), std::invalid_argument);
}

TEST(Fine, ZeroThresholdsKeepTheStart) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 3);
  const auto seg = cat.segment(0);
  const auto& pat = centred();
  const auto pm = zipf_priorities(pat);
  const auto start = quantize_allocation(coarse_allocate(seg.rd_params(), pm.tile, 12000.0), seg, pm.tile);
  FineParams fp;
  fp.distortion_threshold = 0.0;
  fp.rate_threshold_kbps = 0.0;
  const auto out = fine_allocate(start, seg, pat.fov_tiles(), 10.0, fp, 12000.0);
  EXPECT_EQ(out.allocation.levels(), start.levels());
  EXPECT_DOUBLE_EQ(out.result.value, out.start.value);
}

TEST(Fine, ExactSearchMatchesExhaustiveOracle) {
  std::mt19937_64 rng(2718);
  for (int k = 0; k < 300; ++k) {
    const int m = 1 + k % 3;
    const int u = 2 + (k / 3) % 3;
    auto in = oracle::random_instance(rng, m, u);
    const auto b = oracle::build_synced(in);
    const auto want = oracle::fine_exhaustive(in);
    const auto got = fine_allocate(b.start, b.catalog.segment(0), b.fov, in.previous, b.params, in.request_kbps);
    std::vector<int> levels = got.allocation.levels();
    levels.pop_back();
    ASSERT_EQ(levels, want.levels) << "instance " << k;
    EXPECT_NEAR(got.result.value, want.f, 1e-12 * std::max(1.0, want.f));
    EXPECT_EQ(got.candidates, want.feasible);
    EXPECT_LE(got.result.value, got.start.value);
  }
}

TEST(Fine, NeighbourhoodSearchStaysFeasibleAndNeverWorse) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 200; ++k) {
    auto in = oracle::random_instance(rng, 1 + k % 3, 2 + k % 3);
    auto b = oracle::build(in);
    b.params.search = FineSearch::kNeighborhood;
    const auto got = fine_allocate(b.start, b.catalog.segment(0), b.fov, in.previous, b.params, in.request_kbps);
    FineParams exact = b.params;
    exact.search = FineSearch::kExact;
    const auto best = fine_allocate(b.start, b.catalog.segment(0), b.fov, in.previous, exact, in.request_kbps);
    EXPECT_LE(got.result.value, got.start.value);
    EXPECT_GE(got.result.value, best.result.value - 1e-12);
    EXPECT_LE(got.candidates, best.candidates);
  }
}

TEST(Fine, PostHocConstraintsOnRealSegments) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 8);
  const auto ps = default_patterns();
  const FineParams fp;
  for (int l = 0; l < cat.segments(); ++l) {
    for (const auto& pat : ps) {
      const auto seg = cat.segment(l);
      const auto pm = zipf_priorities(pat);
      for (const double req : {5000.0, 12000.0, 30000.0}) {
        const auto start = quantize_allocation(coarse_allocate(seg.rd_params(), pm.tile, req), seg, pm.tile);
        const auto out = fine_allocate(start, seg, pat.fov_tiles(), 8.0, fp, req);
        double d0 = 0.0, d1 = 0.0, r0 = 0.0, r1 = 0.0;
        for (const int n : pat.fov_tiles()) {
          d0 += start.tiles[static_cast<std::size_t>(n)].distortion;
          d1 += out.allocation.tiles[static_cast<std::size_t>(n)].distortion;
          r0 += start.tiles[static_cast<std::size_t>(n)].bitrate_kbps;
          r1 += out.allocation.tiles[static_cast<std::size_t>(n)].bitrate_kbps;
        }
        EXPECT_LE(std::abs(d1 - d0), fp.distortion_threshold + 1e-12);
        EXPECT_LE(std::abs(r1 - r0), fp.rate_threshold_kbps);
        EXPECT_LE(out.allocation.total_kbps(), req + 1e-9);
        EXPECT_LE(out.result.value, out.start.value);
        for (std::size_t n = 0; n < start.tiles.size(); ++n) {
          if (!pat.in_fov(static_cast<int>(n))) {
            EXPECT_EQ(out.allocation.tiles[n].level, start.tiles[n].level);
          }
        }
      }
    }
  }
}

TEST(Fine, CandidateCapTruncates) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 8);
  const auto seg = cat.segment(0);
  const auto& pat = centred();
  const auto pm = zipf_priorities(pat);
  const auto start = quantize_allocation(coarse_allocate(seg.rd_params(), pm.tile, 20000.0), seg, pm.tile);
  FineParams fp;
  fp.distortion_threshold = 1e6;
  fp.rate_threshold_kbps = 1e6;
  fp.candidate_cap = 10;
  const auto out = fine_allocate(start, seg, pat.fov_tiles(), std::nullopt, fp, 1e6);
  EXPECT_TRUE(out.truncated);
  EXPECT_LE(out.candidates, 10u);
  EXPECT_LE(out.result.value, out.start.value);
}

TEST(Aa, EqualSplit) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 1);
  const auto seg = cat.segment(0);
  for (const auto& t : aa_allocate(7200.0, seg).tiles) EXPECT_EQ(t.level, 2);
  for (const auto& t : aa_allocate(3600.0, seg).tiles) EXPECT_EQ(t.level, 1);
  for (const auto& t : aa_allocate(24 * 2400.0 * 3, seg).tiles) EXPECT_EQ(t.level, 16);
  for (double req = 3600.0; req < 70000.0; req += 611.0) EXPECT_LE(aa_allocate(req, seg).total_kbps(), req);
}

TEST(AdapA, TierBoundaries) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 1);
  const auto seg = cat.segment(0);
  const auto& pat = centred();
  for (const auto& t : adapa_allocate(24 * 2400.0, seg, pat).tiles) EXPECT_EQ(t.level, 16);
  const auto a = adapa_allocate(4 * 2400.0, seg, pat);
  for (int n = 0; n < 24; ++n) EXPECT_EQ(a.tiles[static_cast<std::size_t>(n)].level, pat.in_fov(n) ? 16 : 0);
}

TEST(AdapA, MatchesGreedyReplay) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 1);
  const auto seg = cat.segment(0);
  const auto ps = default_patterns();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> req(100.0, 60000.0);
  for (int k = 0; k < 500; ++k) {
    const auto& pat = ps[static_cast<std::size_t>(k % 20)];
    const double r = req(rng);
    const auto got = adapa_allocate(r, seg, pat);
    EXPECT_EQ(got.levels(), oracle::adapa_replay(r, seg.ladder(), pat));
    if (r >= pat.count(Region::kRed) * seg.ladder().min_bitrate()) {
      EXPECT_LE(got.total_kbps(), r + 1e-9);
    }
    for (const int n : pat.fov_tiles()) EXPECT_GE(got.tiles[static_cast<std::size_t>(n)].level, 1);
  }
}

TEST(Pd, FovOnly) {
  const auto cat = synthesize_catalog(CatalogSpec{}, 1);
  const auto seg = cat.segment(0);
  const auto& pat = centred();
  const auto check = [&](double req, int level) {
    const auto a = pd_allocate(req, seg, pat);
    for (int n = 0; n < 24; ++n) EXPECT_EQ(a.tiles[static_cast<std::size_t>(n)].level, pat.in_fov(n) ? level : 0);
  };
  check(9600.0, 16);
  check(9599.0, 15);
  check(100.0, 1);
}

TEST(Methods, NamesRoundTrip) {
  for (const Method m : {Method::kAA, Method::kAdapA, Method::kPD, Method::kProposedWoSt, Method::kProposed}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_FALSE(parse_method("greedy").has_value());
}

}  // namespace
}  // namespace tile360
