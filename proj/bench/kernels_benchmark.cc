/*
 * Copyright (C) 2026 The appgrease Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial against OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "appgrease/kernels.h"

namespace appgrease::kernels {
namespace {

Bytes Random(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out(n);
  for (auto& b : out) b = static_cast<uint8_t>(rng());
  return out;
}

// `old` with a scattering of 4 KiB rewrites, about 2% of the file.
Bytes Edited(const Bytes& old_data, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out = old_data;
  for (size_t i = 0; i < old_data.size() / (200 << 10); ++i) {
    size_t at = rng() % (out.size() - 4096);
    for (size_t k = 0; k < 4096; ++k) out[at + k] = static_cast<uint8_t>(rng());
  }
  return out;
}

const Bytes& Data(size_t mib) {
  static std::map<size_t, Bytes> cache;
  auto it = cache.find(mib);
  if (it == cache.end()) it = cache.emplace(mib, Random(mib << 20, mib)).first;
  return it->second;
}

template <bool kParallel>
void BM_ChunkDigests(benchmark::State& state) {
  const Bytes& data = Data(static_cast<size_t>(state.range(0)));
  ByteView sections[] = {ByteView(data)};
  for (auto _ : state) {
    auto d = kParallel ? ChunkDigestsParallel(sections, 1 << 20) : ChunkDigestsSerial(sections, 1 << 20);
    benchmark::DoNotOptimize(d.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(data.size()));
  state.counters["threads"] = kParallel ? MaxThreads() : 1;
}

template <bool kParallel>
void BM_BuildBlockIndex(benchmark::State& state) {
  const Bytes& data = Data(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    BlockIndex index = kParallel ? BuildBlockIndexParallel(data, 4096) : BuildBlockIndexSerial(data, 4096);
    benchmark::DoNotOptimize(index.entries.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(data.size()));
  state.counters["threads"] = kParallel ? MaxThreads() : 1;
}

template <bool kParallel>
void BM_MatchSegments(benchmark::State& state) {
  const Bytes& old_data = Data(static_cast<size_t>(state.range(0)));
  Bytes new_data = Edited(old_data, 7);
  BlockIndex index = BuildBlockIndexSerial(old_data, 4096);
  for (auto _ : state) {
    auto spans = kParallel ? MatchSegmentsParallel(old_data, new_data, index, 1 << 20)
                           : MatchSegmentsSerial(old_data, new_data, index, 1 << 20);
    benchmark::DoNotOptimize(spans.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(new_data.size()));
  state.counters["threads"] = kParallel ? MaxThreads() : 1;
}

BENCHMARK(BM_ChunkDigests<false>)->Name("ChunkDigests/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChunkDigests<true>)->Name("ChunkDigests/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildBlockIndex<false>)->Name("BuildBlockIndex/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildBlockIndex<true>)->Name("BuildBlockIndex/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchSegments<false>)->Name("MatchSegments/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchSegments<true>)->Name("MatchSegments/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace appgrease::kernels

BENCHMARK_MAIN();
