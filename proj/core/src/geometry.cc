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

#include "ssk/geometry.h"

#include <algorithm>
#include <string>

#include "ssk/error.h"

namespace ssk {
namespace {

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace

MicArray::MicArray(std::vector<Vec3> positions, std::size_t ref_index,
                   double sound_speed)
    : positions_(std::move(positions)),
      ref_index_(ref_index),
      sound_speed_(sound_speed) {
  require(!positions_.empty(), "microphone array needs at least one mic");
  require(ref_index_ < positions_.size(), "reference index out of range");
  require(std::isfinite(sound_speed_) && sound_speed_ > 0.0,
          "sound speed must be positive");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    require(finite(positions_[i]),
            "mic " + std::to_string(i) + " has a non-finite position");
    for (std::size_t j = 0; j < i; ++j) {
      require(positions_[i] != positions_[j],
              "mics " + std::to_string(j) + " and " + std::to_string(i) +
                  " share a position");
    }
  }
}

double MicArray::aperture() const {
  double widest = 0.0;
  for (std::size_t i = 0; i < positions_.size(); ++i)
    for (std::size_t j = i + 1; j < positions_.size(); ++j)
      widest = std::max(widest, (positions_[i] - positions_[j]).norm());
  return widest;
}

MicArray circular_array(std::size_t count, double diameter) {
  require(count >= 1, "circular array needs at least one mic");
  require(std::isfinite(diameter) && diameter > 0.0,
          "array diameter must be positive");
  const double radius = diameter / 2.0;
  std::vector<Vec3> positions(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double angle = 2.0 * kPi * static_cast<double>(j) /
                         static_cast<double>(count);
    positions[j] = {radius * std::cos(angle), radius * std::sin(angle), 0.0};
  }
  return MicArray(std::move(positions), 0);
}

double normalize_azimuth(double degrees) {
  double a = std::fmod(degrees, 360.0);
  if (a < 0.0) a += 360.0;
  // fmod of a tiny negative value can round up to exactly 360.
  if (a >= 360.0) a = 0.0;
  return a;
}

SourceDirection::SourceDirection(double azimuth_deg,
                                 std::optional<double> distance)
    : azimuth_(normalize_azimuth(azimuth_deg)), distance_(distance) {
  require(std::isfinite(azimuth_deg), "azimuth must be finite");
  if (distance_) {
    require(std::isfinite(*distance_) && *distance_ > 0.0,
            "source distance must be positive");
  }
}

Vec3 SourceDirection::unit_vector() const {
  const double a = deg2rad(azimuth_);
  return {std::cos(a), std::sin(a), 0.0};
}

DirectionGrid::DirectionGrid(std::vector<double> azimuths)
    : azimuths_(std::move(azimuths)) {
  require(azimuths_.size() >= 2, "direction grid needs at least two entries");
  for (std::size_t p = 0; p < azimuths_.size(); ++p) {
    require(azimuths_[p] >= 0.0 && azimuths_[p] < 360.0,
            "grid azimuths must lie in [0, 360)");
    if (p > 0)
      require(azimuths_[p] > azimuths_[p - 1],
              "grid azimuths must be strictly ascending");
  }
}

DirectionGrid DirectionGrid::uniform(std::size_t count) {
  require(count >= 2, "direction grid needs at least two entries");
  std::vector<double> az(count);
  for (std::size_t p = 0; p < count; ++p)
    az[p] = 360.0 * static_cast<double>(p) / static_cast<double>(count);
  return DirectionGrid(std::move(az));
}

PairSelection::PairSelection(std::vector<MicPair> pairs, std::size_t num_mics)
    : pairs_(std::move(pairs)), num_mics_(num_mics) {
  require(!pairs_.empty(), "pair selection is empty");
  for (const auto& p : pairs_) {
    require(p.first < num_mics_ && p.second < num_mics_,
            "pair index out of range");
    require(p.first != p.second, "pair must join two different mics");
  }
}

PairSelection PairSelection::from_one_based(const std::vector<MicPair>& pairs,
                                            std::size_t num_mics) {
  std::vector<MicPair> zero_based;
  zero_based.reserve(pairs.size());
  for (const auto& p : pairs) {
    require(p.first >= 1 && p.second >= 1, "1-based pair index must be >= 1");
    zero_based.push_back({p.first - 1, p.second - 1});
  }
  return PairSelection(std::move(zero_based), num_mics);
}

PairSelection PairSelection::six_mic_default() {
  return from_one_based({{1, 4}, {2, 5}, {3, 6}, {1, 2}, {3, 4}, {5, 6}}, 6);
}

std::vector<double> tdoa(const MicArray& array, const SourceDirection& dir) {
  // A plane wave travelling along -u reaches position r at time -u.r/c.
  const Vec3 u = dir.unit_vector();
  const Vec3& ref = array.position(array.ref_index());
  std::vector<double> delay(array.size());
  for (std::size_t j = 0; j < array.size(); ++j)
    delay[j] = -u.dot(array.position(j) - ref) / array.sound_speed();
  delay[array.ref_index()] = 0.0;
  return delay;
}

double steering_phase(const MicArray& array, const SourceDirection& dir,
                      MicPair pair, std::size_t band, std::size_t fft_size,
                      double sample_rate) {
  require(fft_size >= 2, "fft size must be at least 2");
  require(band < fft_size / 2 + 1, "band index out of range");
  require(pair.first < array.size() && pair.second < array.size(),
          "pair index out of range");
  if (band == 0) return 0.0;
  const std::vector<double> delay = tdoa(array, dir);
  const double freq = static_cast<double>(band) * sample_rate /
                      static_cast<double>(fft_size);
  return 2.0 * kPi * freq * (delay[pair.second] - delay[pair.first]);
}

double angle_difference(double phi1, double phi2) {
  const double d = std::fabs(normalize_azimuth(phi1) - normalize_azimuth(phi2));
  return std::min(d, 360.0 - d);
}

double min_angle_difference(double target, std::span<const double> others) {
  require(!others.empty(), "min_angle_difference needs at least one other");
  double best = 180.0;
  for (double o : others) best = std::min(best, angle_difference(target, o));
  return best;
}

double azimuth_between(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  return normalize_azimuth(std::atan2(d.y, d.x) * 180.0 / kPi);
}

}  // namespace ssk
