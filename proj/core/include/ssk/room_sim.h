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

// Shoebox-room simulation with the Allen-Berkley image method, and rendering
// of reverberant multi-speaker mixtures.
//
// Walls share one frequency-independent reflection coefficient derived from
// T60 by inverting Sabine's formula (Eyring's when Sabine would need an
// absorption above 1). Every image arrival, the direct path included, is
// placed with a 9-tap Hann-windowed sinc whose taps are normalised to unit
// DC gain, so integer delays produce a single tap.

#ifndef SSK_ROOM_SIM_H_
#define SSK_ROOM_SIM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssk/geometry.h"
#include "ssk/spectral.h"

namespace ssk {

inline constexpr double kWallMargin = 0.3;
inline constexpr int kSincHalfWidth = 4;

struct RoomConfig {
  Vec3 dimensions;  // length (x), width (y), height (z) in meters
  double t60 = 0.0;  // seconds; 0 means anechoic
  MicArray array = circular_array(6, 0.07);  // positions relative to centre
  Vec3 array_center;
  std::vector<Vec3> source_positions;
  double sample_rate = 16000.0;
  // Uniform wall absorption in [0, 1]; overrides the T60-derived value.
  std::optional<double> absorption;

  // Throws kInvalidArgument when a mic or source sits closer than `margin` to
  // a wall, or t60 is negative, or t60 == 0 with reflecting walls.
  void validate(double margin = 0.0) const;

  std::vector<Vec3> mic_positions() const;
  double source_azimuth(std::size_t source_index) const;
  std::vector<double> source_azimuths() const;

  // Wall pressure reflection coefficient beta = sqrt(1 - alpha). Without an
  // explicit absorption, alpha starts from the Sabine (or, above 1, Eyring)
  // inversion of t60 and beta is then refined so the image lattice from the
  // first source to the array centre decays 60 dB in t60 (T20 fit).
  double reflection_coefficient() const;
  // max(t60 * fs, direct-path span), samples.
  std::size_t rir_length() const;
};

// Image-method impulse response from source `source_index` to an absolute
// microphone position. Responses with reflections are high-passed at 100 Hz;
// an anechoic room gives the bare direct-path impulse. The length is
// rir_length(), extended if this mic's direct path arrives later.
Waveform simulate_rir(const RoomConfig& room, std::size_t source_index,
                      const Vec3& mic);

struct DrySource {
  Waveform samples;
  double sample_rate = 16000.0;
};

struct MixtureScene {
  MultiWaveform mixture;               // J channels
  std::vector<MultiWaveform> images;   // per source, J channels each
  std::vector<Waveform> dry_sources;   // per source, mono
  std::vector<double> azimuths;        // per source, degrees
  std::vector<double> gains_db;        // requested levels
  double t60 = 0.0;
  Vec3 room_dimensions;
  double sample_rate = 16000.0;

  std::size_t num_sources() const { return images.size(); }
  std::size_t length() const {
    return mixture.empty() ? 0 : mixture.front().size();
  }
};

// Convolves each dry source with its RIRs, scales source c so that its
// reference-channel image power equals 10^(gain_c/10) times the unscaled
// reference-channel power of source 0, and sums the images. Every waveform
// has the length of the longest dry source; image tails past it are cut.
MixtureScene render_mixture(const std::vector<DrySource>& dry_sources,
                            const RoomConfig& room,
                            std::span<const double> mixing_gains_db);

// Linear convolution, FFT based.
Waveform convolve(std::span<const double> a, std::span<const double> b);

struct SceneSpec {
  RoomConfig room;
  std::vector<double> azimuths;
  std::vector<double> gains_db;
};

struct SamplerRanges {
  Vec3 min_dimensions{3.0, 3.0, 2.5};
  Vec3 max_dimensions{8.0, 10.0, 6.0};
  double min_t60 = 0.05;
  double max_t60 = 0.5;
  double wall_margin = kWallMargin;
  double min_source_distance = 0.5;  // from the array centre
  double max_level_spread_db = 5.0;  // relative levels in [-2.5, 2.5] dB
  int max_retries = 1000;
};

// Random room, T60, array placement and 2 or 3 co-planar sources. Fully
// determined by `seed`. Throws kGeneration when no valid placement is found.
SceneSpec sample_scene(std::uint64_t seed, std::size_t n_sources,
                       double sample_rate = 16000.0,
                       const MicArray& array = circular_array(6, 0.07),
                       const SamplerRanges& ranges = {});

}  // namespace ssk

#endif  // SSK_ROOM_SIM_H_
