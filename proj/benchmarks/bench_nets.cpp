// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <random>

#include <benchmark/benchmark.h>

#include "sad/checkpoint.hpp"
#include "sad/data.hpp"
#include "sad/nets/models.hpp"
#include "sad/training.hpp"

namespace {

sad::Tensor frames(std::size_t n) {
  const sad::Tensor mag = sad::magnitude(sad::stft(sad::synth_speech(6.0, 5)));
  sad::Tensor out = sad::make_matrix(n, mag.dim(1));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mag[i];
  return out;
}

void BM_GeneratorForwardBackward(benchmark::State& state) {
  sad::nets::Generator g(1);
  const sad::Tensor x = frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    sad::nets::Generator::Trace tr;
    const sad::Tensor y = g.forward(x, &tr);
    g.backward(tr, y);
  }
}
BENCHMARK(BM_GeneratorForwardBackward)->Arg(64)->Arg(374);

void BM_SplitterForward(benchmark::State& state) {
  const sad::nets::Splitter f(2);
  const sad::Tensor x = frames(64);
  for (auto _ : state) benchmark::DoNotOptimize(f.forward(x, x));
}
BENCHMARK(BM_SplitterForward);

void BM_DiscriminatorForward(benchmark::State& state) {
  const sad::nets::MetricDiscriminator d(3);
  const sad::Tensor x = frames(64);
  for (auto _ : state) benchmark::DoNotOptimize(d.forward(x));
}
BENCHMARK(BM_DiscriminatorForward);

void BM_TrainStep(benchmark::State& state) {
  std::vector<sad::Utterance> utts;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const sad::Waveform clean = sad::synth_speech(2.0, s);
    const sad::Waveform noisy =
        sad::mix_at_snr(clean, sad::synth_noise(sad::NoiseKind::kPink, 2.0, s + 9), 8.0);
    sad::Utterance u;
    u.id = "u" + std::to_string(s);
    u.clean_mag = sad::magnitude(sad::stft(clean));
    u.noisy_mag = sad::magnitude(sad::stft(noisy));
    u.snr_db = 8.0;
    u.oracle = sad::dfkd_division_point(u.clean_mag);
    utts.push_back(std::move(u));
  }
  sad::Batch batch;
  for (const auto& u : utts) batch.items.push_back(&u);
  sad::ModelBundle mb = sad::ModelBundle::create(7, 257);
  const sad::TrainConfig cfg;
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sad::train_step(mb, batch, cfg, 1, 20.0, rng));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
