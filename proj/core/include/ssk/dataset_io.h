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

// On-disk formats: multichannel WAV, JSON scene manifests and TSNF1 feature
// files. Writers go through a temporary file and a rename so readers never
// observe a partial file.

#ifndef SSK_DATASET_IO_H_
#define SSK_DATASET_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssk/geometry.h"
#include "ssk/spatial_features.h"
#include "ssk/spectral.h"

namespace ssk {

namespace fs = std::filesystem;

// ---- WAV ----

enum class WavEncoding { kPcm16, kFloat32 };

struct WavData {
  MultiWaveform channels;
  double sample_rate = 0.0;
  WavEncoding encoding = WavEncoding::kFloat32;
};

// All channels must have equal length and finite samples. PCM16 clips to
// [-1, 1) before quantizing.
void write_wav(const fs::path& path, const MultiWaveform& channels,
               double sample_rate, WavEncoding encoding = WavEncoding::kFloat32);

// Reads PCM16 or float32 (plain or WAVE_FORMAT_EXTENSIBLE). When
// `expected_rate` is set, a different file rate throws kRateMismatch.
WavData read_wav(const fs::path& path,
                 std::optional<double> expected_rate = std::nullopt);

// ---- Manifest ----

inline constexpr int kManifestSchemaVersion = 1;

struct UtteranceEntry {
  std::string id;
  fs::path mixture;              // J-channel mixture
  std::vector<fs::path> images;  // per source, J-channel reverberant image
  std::vector<fs::path> dry;     // per source, mono
  std::vector<double> azimuths;  // degrees, per source
  double t60 = 0.0;
  Vec3 room_dimensions;
  double angle_difference = 0.0;  // target (source 0) to closest interferer
  double sample_rate = 16000.0;
  std::uint64_t seed = 0;

  std::size_t num_sources() const { return azimuths.size(); }
  friend bool operator==(const UtteranceEntry&, const UtteranceEntry&) = default;
};

struct ArraySpec {
  std::vector<Vec3> positions;  // relative to the array center
  std::size_t ref_index = 0;
  double sound_speed = kDefaultSoundSpeed;

  MicArray to_array() const;
  static ArraySpec from_array(const MicArray& array);
  friend bool operator==(const ArraySpec&, const ArraySpec&) = default;
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  ArraySpec array;
  std::vector<UtteranceEntry> utterances;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Paths are stored relative to the manifest's directory when they live under
// it and resolved back to absolute paths on read.
void write_manifest(const fs::path& path, const Manifest& manifest);

// Throws kSchema on a version mismatch, an unknown field, or a missing or
// mistyped field; kMissingFile (naming the path) when `validate_files` is set
// and a referenced WAV does not exist.
Manifest read_manifest(const fs::path& path, bool validate_files = true);

// ---- TSNF1 feature files ----

inline constexpr std::array<char, 5> kFeatureMagic{'T', 'S', 'N', 'F', '1'};
inline constexpr std::uint16_t kFeatureVersion = 1;

// Layout (little-endian): magic[5], u16 version, u32 T, u32 D, u32 n,
// n bytes of layout descriptor, then T*D float32 row-major.
void write_features(const fs::path& path, const FeatureStack& features);

// Throws kFormat on bad magic or header, kUnsupported on an unknown version,
// kTruncated when the payload is short.
FeatureStack read_features(const fs::path& path);

struct FeatureHeader {
  std::uint16_t version = 0;
  std::uint32_t frames = 0;
  std::uint32_t dim = 0;
  std::string descriptor;
};

// Header only; does not read or check the payload.
FeatureHeader read_feature_header(const fs::path& path);

// ---- Helpers ----

// Writes `bytes` to a sibling temporary file, then renames it over `path`.
// Parent directories are created as needed.
void write_file_atomic(const fs::path& path, const std::string& bytes);

std::string read_file(const fs::path& path);

}  // namespace ssk

#endif  // SSK_DATASET_IO_H_
