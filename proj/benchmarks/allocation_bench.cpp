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

#include <benchmark/benchmark.h>

#include <memory>

#include "tile360/session.hpp"

namespace {

using namespace tile360;

const TileCatalog& catalog() {
  static const TileCatalog c = synthesize_catalog(CatalogSpec{}, 1);
  return c;
}

const FovPattern& pattern() {
  static const auto ps = default_patterns();
  return ps[10];
}

void BM_Coarse(benchmark::State& state) {
  const auto seg = catalog().segment(0);
  const auto pm = zipf_priorities(pattern());
  for (auto _ : state) {
    benchmark::DoNotOptimize(coarse_allocate(seg.rd_params(), pm.tile, static_cast<double>(state.range(0))));
  }
}
BENCHMARK(BM_Coarse)->Arg(5000)->Arg(12000)->Arg(30000);

void BM_Fine(benchmark::State& state) {
  const auto seg = catalog().segment(0);
  const auto pm = zipf_priorities(pattern());
  const double req = static_cast<double>(state.range(0));
  const auto start = quantize_allocation(coarse_allocate(seg.rd_params(), pm.tile, req), seg, pm.tile);
  FineParams fp;
  fp.search = state.range(1) ? FineSearch::kNeighborhood : FineSearch::kExact;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fine_allocate(start, seg, pattern().fov_tiles(), 10.0, fp, req));
  }
}
BENCHMARK(BM_Fine)->Args({12000, 0})->Args({12000, 1})->Args({30000, 0})->Args({30000, 1});

void BM_Session(benchmark::State& state) {
  SessionConfig c;
  c.catalog = std::make_shared<const TileCatalog>(catalog());
  c.patterns = std::make_shared<const std::vector<FovPattern>>(default_patterns());
  c.method = static_cast<Method>(state.range(0));
  c.segments = 150;
  c.switch_probability = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(run_session(c));
}
BENCHMARK(BM_Session)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
