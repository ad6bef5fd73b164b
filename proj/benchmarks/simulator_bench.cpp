// Copyright 2026 The edgescale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "edgescale/config.hpp"
#include "edgescale/scalers.hpp"
#include "edgescale/simulator.hpp"

namespace edgescale {
namespace {

void BM_SimulateMonitoring(benchmark::State& state) {
  SimConfig sim;
  sim.scaling = presets::small_network_reduced(2, 2);
  sim.horizon_events = static_cast<std::uint64_t>(state.range(0));
  sim.allocator = state.range(1) == 0 ? Allocator::FirstFit : Allocator::RandomFit;
  for (auto _ : state) {
    auto scaler = make_scaler(ScalerSpec{ScalerKind::Monitoring, 0.05, {}}, 1, nullptr);
    benchmark::DoNotOptimize(run(sim, *scaler).total_arrivals);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateMonitoring)->Args({20'000, 0})->Args({20'000, 1})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace edgescale

BENCHMARK_MAIN();
