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

// Microphone-array geometry: positions, far-field TDOAs, steering phases and
// circular azimuth arithmetic. Azimuths are in degrees, counter-clockwise from
// the +x axis in the horizontal plane.

#ifndef SSK_GEOMETRY_H_
#define SSK_GEOMETRY_H_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ssk {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultSoundSpeed = 343.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

class MicArray {
 public:
  // Throws kInvalidArgument on an empty, non-finite or duplicated layout, or
  // an out-of-range reference index.
  explicit MicArray(std::vector<Vec3> positions, std::size_t ref_index = 0,
                    double sound_speed = kDefaultSoundSpeed);

  std::size_t size() const { return positions_.size(); }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(std::size_t j) const { return positions_.at(j); }
  std::size_t ref_index() const { return ref_index_; }
  double sound_speed() const { return sound_speed_; }

  // Largest inter-microphone distance in meters.
  double aperture() const;

  friend bool operator==(const MicArray&, const MicArray&) = default;

 private:
  std::vector<Vec3> positions_;
  std::size_t ref_index_;
  double sound_speed_;
};

// `count` microphones on a horizontal circle of the given diameter centred on
// the origin. Mic 0 sits at azimuth 0, numbering runs counter-clockwise.
MicArray circular_array(std::size_t count, double diameter);

double normalize_azimuth(double degrees);

// Direction of a source in the array plane. An empty distance means
// far-field; it is only consulted by the room simulator.
class SourceDirection {
 public:
  explicit SourceDirection(double azimuth_deg,
                           std::optional<double> distance = std::nullopt);

  double azimuth() const { return azimuth_; }
  const std::optional<double>& distance() const { return distance_; }

  // Unit vector pointing from the array towards the source.
  Vec3 unit_vector() const;

 private:
  double azimuth_;
  std::optional<double> distance_;
};

class DirectionGrid {
 public:
  // Azimuths must be strictly ascending in [0, 360) with at least two entries.
  explicit DirectionGrid(std::vector<double> azimuths);

  // `count` directions spaced 360/count degrees apart, starting at 0.
  static DirectionGrid uniform(std::size_t count);

  std::size_t size() const { return azimuths_.size(); }
  double operator[](std::size_t p) const { return azimuths_[p]; }
  std::span<const double> azimuths() const { return azimuths_; }

 private:
  std::vector<double> azimuths_;
};

struct MicPair {
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const MicPair&, const MicPair&) = default;
};

class PairSelection {
 public:
  // Zero-based pairs. Validated against `num_mics`.
  PairSelection(std::vector<MicPair> pairs, std::size_t num_mics);

  // Converts the 1-based pair notation used in configuration files.
  static PairSelection from_one_based(const std::vector<MicPair>& pairs,
                                      std::size_t num_mics);

  // (1,4) (2,5) (3,6) (1,2) (3,4) (5,6) on a six-element array: the three
  // diameters plus three adjacent pairs.
  static PairSelection six_mic_default();

  std::size_t size() const { return pairs_.size(); }
  const MicPair& operator[](std::size_t u) const { return pairs_[u]; }
  const std::vector<MicPair>& pairs() const { return pairs_; }
  std::size_t num_mics() const { return num_mics_; }

 private:
  std::vector<MicPair> pairs_;
  std::size_t num_mics_;
};

// Far-field arrival delay of each microphone relative to the reference mic,
// in seconds. Positive values arrive later than the reference.
std::vector<double> tdoa(const MicArray& array, const SourceDirection& dir);

// Expected anechoic IPD (unwrapped, radians) of the pair at STFT band `band`:
// 2*pi*f_m*(delay[second] - delay[first]) with f_m = band*sample_rate/fft_size.
// This matches angle(Y_first) - angle(Y_second) for a source from `dir`.
double steering_phase(const MicArray& array, const SourceDirection& dir,
                      MicPair pair, std::size_t band, std::size_t fft_size,
                      double sample_rate);

// Minimal circular separation in degrees, in [0, 180].
double angle_difference(double phi1, double phi2);

// Distance from `target` to its closest entry in `others`.
double min_angle_difference(double target, std::span<const double> others);

// Azimuth of `to` as seen from `from`, projected onto the horizontal plane.
double azimuth_between(const Vec3& from, const Vec3& to);

}  // namespace ssk

#endif  // SSK_GEOMETRY_H_
