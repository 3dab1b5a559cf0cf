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

// Independent reference computations used only by tests. None of these call
// into the library code they check.

#ifndef SSK_TESTS_ORACLES_H_
#define SSK_TESTS_ORACLES_H_

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace oracle {

// Zero-padded N-point DFT of window .* frame, bins 0..N/2, by direct summation.
std::vector<std::complex<double>> windowed_dft(std::span<const double> frame,
                                               std::span<const double> window,
                                               std::size_t fft_size);

// Hann window written out from its definition, periodic form.
std::vector<double> hann(std::size_t n);

// Reverberation time from Schroeder backward integration: a least-squares
// line through the energy decay curve between -5 dB and -5-`range_db`,
// extrapolated to 60 dB. Returns nullopt if the curve never reaches the lower
// end of the range.
std::optional<double> schroeder_t60(std::span<const double> rir,
                                    double sample_rate, double range_db = 20.0);

// Lag d (in samples, |d| <= max_lag) maximising sum_n a[n] * b[n + d]. A
// positive lag means b is a delayed copy of a.
long xcorr_lag(std::span<const double> a, std::span<const double> b,
               long max_lag);

struct Point {
  double x, y, z;
};

// Far-field arrival delay of mic j relative to mic `ref`, seconds, for a
// plane wave arriving from azimuth `azimuth_deg` in the x-y plane.
double plane_wave_delay(const std::vector<Point>& mics, std::size_t ref,
                        std::size_t j, double azimuth_deg, double c);

// Euclidean distance.
double distance(const Point& a, const Point& b);

// n draws from a fixed-seed standard normal distribution.
std::vector<double> gaussian(std::uint64_t seed, std::size_t n);

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle

#endif  // SSK_TESTS_ORACLES_H_
