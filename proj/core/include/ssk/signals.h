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

// Built-in synthetic dry sources. All generators are deterministic in their
// seed and return mono waveforms with peak amplitude 0.5.

#ifndef SSK_SIGNALS_H_
#define SSK_SIGNALS_H_

#include <cstdint>

#include "ssk/spectral.h"

namespace ssk {

// Voiced syllables (harmonic series with a wandering f0 shaped by three
// formants), short fricative noise bursts and pauses. Sparse in T-F like
// speech, which is what masking-based separation relies on.
Waveform speech_like(std::uint64_t seed, double duration_s,
                     double sample_rate = 16000.0);

// Gated white noise limited to [low_hz, high_hz].
Waveform noise_bursts(std::uint64_t seed, double duration_s, double low_hz,
                      double high_hz, double sample_rate = 16000.0);

Waveform am_tone(double carrier_hz, double modulation_hz, double depth,
                 double duration_s, double sample_rate = 16000.0);

Waveform linear_chirp(double start_hz, double end_hz, double duration_s,
                      double sample_rate = 16000.0);

Waveform white_noise(std::uint64_t seed, std::size_t length);

}  // namespace ssk

#endif  // SSK_SIGNALS_H_
