// Copyright 2026 The TeNCA Authors. All Rights Reserved.
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

#include <random>

#include "tenca/autodiff.hpp"
#include "tenca/grid.hpp"
#include "tenca/metrics.hpp"
#include "tenca/phantom.hpp"

namespace {

using namespace tenca;

Image noise_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  Image img(h, w);
  for (auto& v : img.pixels()) v = u(gen);
  return img;
}

ModelParams live_params(ModelShape shape) {
  ModelParams p = init_params(shape, 3);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<Real> u(-0.05, 0.05);
  for (auto& v : p.w2()) v = u(gen);
  return p;
}

void BM_Perceive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams params = live_params({24, 128});
  const CellGrid grid = init_state(noise_image(n, n, 1), 24);
  for (auto _ : state) benchmark::DoNotOptimize(perceive(grid, params));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_Perceive)->Arg(64)->Arg(128);

void BM_UpdateStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams params = live_params({24, 128});
  CellGrid grid = init_state(noise_image(n, n, 1), 24);
  const FireMask mask = sample_mask(RngKey{1, 0, 0, 1}, n, n, 0.5);
  for (auto _ : state) grid = update_step(grid, params, mask, 1e-3);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_UpdateStep)->Arg(64)->Arg(128);

TrainingCase bench_case() {
  TrainingCase c;
  c.pre_contrast = noise_image(64, 64, 2);
  c.frames.push_back({noise_image(64, 64, 3), 64.0});
  c.frames.push_back({noise_image(64, 64, 4), 256.0});
  return c;
}

void BM_ForwardBackward(benchmark::State& state) {
  const ModelParams params = live_params({24, 128});
  const TrainingCase c = bench_case();
  Schedule sched{32, {8, 32}};
  TapeOptions opt;
  opt.segment_length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const ForwardResult fwd = forward_with_tape(c, params, sched, RngKey{1, 0, 0, 0}, opt);
    benchmark::DoNotOptimize(backward(fwd.tape, params));
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MsSsim(benchmark::State& state) {
  const Image a = noise_image(64, 64, 6);
  const Image b = noise_image(64, 64, 7);
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(a, b, max_ms_ssim_levels(64, 64)));
}
BENCHMARK(BM_MsSsim);

void BM_Phantom(benchmark::State& state) {
  PhantomSpec spec;
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_phantom(spec, id++));
}
BENCHMARK(BM_Phantom)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
