// Copyright 2026 The ssk Authors.
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

#include "ssk/metrics.h"
#include "ssk/room_sim.h"
#include "ssk/spatial_features.h"
#include "ssk/spectral.h"

namespace ssk {
namespace {

Waveform noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Waveform x(n);
  for (double& v : x) v = g(rng);
  return x;
}

MultiWaveform noise_channels(std::size_t channels, std::size_t n) {
  MultiWaveform x;
  for (std::size_t j = 0; j < channels; ++j) x.push_back(noise(n, j + 1));
  return x;
}

void BM_StftFeatureConfig(benchmark::State& state) {
  const StftKernel kernel(StftConfig::hann(40, 20, 64, 16000.0));
  const Waveform x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, kernel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StftFeatureConfig)->Arg(16000)->Arg(64000);

void BM_StftIstftRoundTrip(benchmark::State& state) {
  const StftKernel kernel(StftConfig::hann(256, 128, 256, 16000.0));
  const Waveform x = noise(32000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(istft(stft(x, kernel), kernel, x.size()));
}
BENCHMARK(BM_StftIstftRoundTrip);

void BM_DprAllDirections(benchmark::State& state) {
  const StftConfig config = StftConfig::hann(40, 20, 64, 16000.0);
  const StftKernel kernel(config);
  const MicArray array = circular_array(6, 0.07);
  const DasFilterbank bank(array, DirectionGrid::uniform(36), config);
  const MultichannelSpectrogram spec = stft_multichannel(noise_channels(6, 32000), kernel);
  for (auto _ : state) benchmark::DoNotOptimize(dpr_all(spec, bank));
}
BENCHMARK(BM_DprAllDirections);

void BM_AngleFeature(benchmark::State& state) {
  const StftKernel kernel(StftConfig::hann(40, 20, 64, 16000.0));
  const MicArray array = circular_array(6, 0.07);
  const MultichannelSpectrogram spec = stft_multichannel(noise_channels(6, 32000), kernel);
  const PairSelection pairs = PairSelection::six_mic_default();
  for (auto _ : state) benchmark::DoNotOptimize(angle_feature(spec, 45.0, array, pairs));
}
BENCHMARK(BM_AngleFeature);

void BM_SimulateRir(benchmark::State& state) {
  RoomConfig room;
  room.dimensions = {5.0, 6.0, 3.0};
  room.t60 = static_cast<double>(state.range(0)) / 1000.0;
  room.array_center = {2.3, 2.9, 1.4};
  room.source_positions = {{3.7, 4.6, 1.4}};
  const Vec3 mic = room.mic_positions().front();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_rir(room, 0, mic));
}
BENCHMARK(BM_SimulateRir)->Arg(150)->Arg(300)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SiSdr(benchmark::State& state) {
  const Waveform ref = noise(32000, 3);
  Waveform est = noise(32000, 4);
  for (std::size_t n = 0; n < est.size(); ++n) est[n] = ref[n] + 0.1 * est[n];
  for (auto _ : state) benchmark::DoNotOptimize(si_sdr(est, ref));
}
BENCHMARK(BM_SiSdr);

}  // namespace
}  // namespace ssk

BENCHMARK_MAIN();
