// Copyright 2026 The STMD Tracker Authors
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

// Serial reference vs OpenMP kernels.

#include "stmd/backbone.hpp"
#include "stmd/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

stmd::Matrix cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  stmd::Matrix p(n, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

void BM_PairwiseSerial(benchmark::State& st) {
  const auto a = cloud(static_cast<int>(st.range(0)), 1), b = cloud(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::pairwise_sq_dist_serial(a, b));
}
void BM_PairwiseParallel(benchmark::State& st) {
  const auto a = cloud(static_cast<int>(st.range(0)), 1), b = cloud(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::pairwise_sq_dist(a, b));
}

void BM_FpsSerial(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::farthest_point_sampling_serial(p, 64, 0));
}
void BM_FpsParallel(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::farthest_point_sampling(p, 64, 0));
}

void BM_KnnSerial(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 4);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::knn_search_serial(p, p, 16, true));
}
void BM_KnnParallel(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 4);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::knn_search(p, p, 16, true));
}

void BM_KnnGraphSerial(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::knn_graph_serial(p, 8));
}
void BM_KnnGraphParallel(benchmark::State& st) {
  const auto p = cloud(static_cast<int>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(stmd::knn_graph(p, 8));
}

}  // namespace

BENCHMARK(BM_PairwiseSerial)->Arg(128)->Arg(1024);
BENCHMARK(BM_PairwiseParallel)->Arg(128)->Arg(1024);
BENCHMARK(BM_FpsSerial)->Arg(1024)->Arg(8192);
BENCHMARK(BM_FpsParallel)->Arg(1024)->Arg(8192);
BENCHMARK(BM_KnnSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_KnnParallel)->Arg(256)->Arg(2048);
BENCHMARK(BM_KnnGraphSerial)->Arg(64)->Arg(512);
BENCHMARK(BM_KnnGraphParallel)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
