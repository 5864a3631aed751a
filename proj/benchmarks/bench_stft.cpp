// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include "sad/band_split.hpp"
#include "sad/data.hpp"
#include "sad/signal.hpp"

namespace {

void BM_Stft(benchmark::State& state) {
  const sad::Waveform w = sad::synth_speech(static_cast<double>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sad::stft(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_Stft)->Arg(1)->Arg(6);

void BM_RoundTrip(benchmark::State& state) {
  const sad::Waveform w = sad::synth_speech(6.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sad::istft(sad::stft(w)));
}
BENCHMARK(BM_RoundTrip);

void BM_DivisionPoint(benchmark::State& state) {
  const sad::Tensor mag = sad::magnitude(sad::stft(sad::synth_speech(6.0, 3)));
  for (auto _ : state) benchmark::DoNotOptimize(sad::dfkd_division_point(mag));
}
BENCHMARK(BM_DivisionPoint);

void BM_SoftSplit(benchmark::State& state) {
  const sad::Tensor mag = sad::magnitude(sad::stft(sad::synth_speech(6.0, 4)));
  for (auto _ : state) benchmark::DoNotOptimize(sad::soft_split(mag, 0.45, 0.01));
}
BENCHMARK(BM_SoftSplit);

}  // namespace

BENCHMARK_MAIN();
