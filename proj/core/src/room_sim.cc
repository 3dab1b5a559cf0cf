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

#include "ssk/room_sim.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

#include "ssk/error.h"

namespace ssk {
namespace {

// 24*ln(10): Sabine's constant in T60 = 24 ln10 V / (c S alpha).
constexpr double kSabine = 55.262042231857095;

bool inside(double v, double extent, double margin) {
  return v > 0.0 && v < extent && v >= margin && v <= extent - margin;
}

void check_inside(const Vec3& p, const Vec3& dims, double margin,
                  const std::string& what) {
  require(inside(p.x, dims.x, margin) && inside(p.y, dims.y, margin) &&
              inside(p.z, dims.z, margin),
          what + " lies outside the room or within " + std::to_string(margin) +
              " m of a wall");
}

// Adds a fractional-delay impulse of area `gain` centred at `position`
// (in samples) using a Hann-windowed sinc, taps normalised to sum to 1.
void add_arrival(Waveform& h, double position, double gain) {
  const auto centre = static_cast<long>(std::lround(position));
  const double frac = static_cast<double>(centre) - position;  // in [-.5, .5]
  if (frac == 0.0) {
    if (centre >= 0 && centre < static_cast<long>(h.size())) h[centre] += gain;
    return;
  }
  constexpr int kTaps = 2 * kSincHalfWidth + 1;
  constexpr double kWindowHalf = kSincHalfWidth + 1.0;
  double taps[kTaps];
  double sum = 0.0;
  // x_k = k + frac for k in [-4, 4]; sin(pi*x_k) alternates sign with k.
  const double s0 = std::sin(kPi * frac);
  for (int k = -kSincHalfWidth; k <= kSincHalfWidth; ++k) {
    const double x = k + frac;
    const double sinc = ((k & 1) ? -s0 : s0) / (kPi * x);
    const double win = 0.5 * (1.0 + std::cos(kPi * x / kWindowHalf));
    taps[k + kSincHalfWidth] = sinc * win;
    sum += sinc * win;
  }
  const double scale = gain / sum;
  for (int k = -kSincHalfWidth; k <= kSincHalfWidth; ++k) {
    const long n = centre + k;
    if (n >= 0 && n < static_cast<long>(h.size()))
      h[n] += scale * taps[k + kSincHalfWidth];
  }
}

// Allen and Berkley's second-order high-pass at 100 Hz. Image amplitudes are
// all positive, so without it the dense late tail sums coherently into a
// slowly decaying DC offset that lengthens the measured decay.
void high_pass(Waveform& h, double fs) {
  const double w = 2.0 * kPi * 100.0 / fs;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : h) {
    const double y0 = v + a1 * x1 + r1 * x2 + b1 * y1 + b2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y0;
    v = y0;
  }
}

// Calls visit(distance, reflection_order) for every image of `src` seen from
// `mic` no further than `max_dist`. Reflection orders follow Allen and
// Berkley: |l - u| + |l| wall hits along each axis.
template <typename Visit>
void for_each_image(const Vec3& L, const Vec3& src, const Vec3& mic,
                    double max_dist, Visit&& visit) {
  const int nx = static_cast<int>(std::ceil(max_dist / (2 * L.x))) + 1;
  const int ny = static_cast<int>(std::ceil(max_dist / (2 * L.y))) + 1;
  const int nz = static_cast<int>(std::ceil(max_dist / (2 * L.z))) + 1;
  const double max_d2 = max_dist * max_dist;
  for (int u = 0; u <= 1; ++u) {
    for (int l = -nx; l <= nx; ++l) {
      const double dx = (1 - 2 * u) * src.x + 2 * l * L.x - mic.x;
      const int rx = std::abs(l - u) + std::abs(l);
      for (int v = 0; v <= 1; ++v) {
        for (int m = -ny; m <= ny; ++m) {
          const double dy = (1 - 2 * v) * src.y + 2 * m * L.y - mic.y;
          const int ry = std::abs(m - v) + std::abs(m);
          const double dxy2 = dx * dx + dy * dy;
          if (dxy2 > max_d2) continue;
          for (int w = 0; w <= 1; ++w) {
            for (int n = -nz; n <= nz; ++n) {
              const double dz = (1 - 2 * w) * src.z + 2 * n * L.z - mic.z;
              const double d2 = dxy2 + dz * dz;
              if (d2 > max_d2) continue;
              visit(std::sqrt(d2), rx + ry + std::abs(n - w) + std::abs(n));
            }
          }
        }
      }
    }
  }
}

// Image energy binned by arrival time and reflection order. The decay for
// any reflection coefficient beta is then sum_k bins[t][k] * beta^(2k).
struct LatticeDecay {
  std::vector<std::vector<double>> bins;
  double bin_seconds = 1e-3;
};

LatticeDecay lattice_decay(const Vec3& L, const Vec3& src, const Vec3& mic,
                           double c, double duration) {
  LatticeDecay out;
  out.bins.resize(static_cast<std::size_t>(std::ceil(duration / out.bin_seconds)) + 1);
  for_each_image(L, src, mic, c * duration, [&](double d, int order) {
    auto& row = out.bins[static_cast<std::size_t>(d / c / out.bin_seconds)];
    if (row.size() <= static_cast<std::size_t>(order)) row.resize(order + 1, 0.0);
    row[order] += 1.0 / std::max(d * d, 1e-12);
  });
  return out;
}

// Reverberation time of the binned decay: Schroeder integration, line fit
// between -5 and -25 dB, extrapolated to 60 dB. Infinite when the decay never
// falls 25 dB.
double decay_t60(const LatticeDecay& decay, double beta) {
  const double b2 = beta * beta;
  std::vector<double> edc(decay.bins.size());
  double acc = 0.0;
  for (std::size_t i = decay.bins.size(); i-- > 0;) {
    double e = 0.0, w = 1.0;
    for (double v : decay.bins[i]) {
      e += v * w;
      w *= b2;
    }
    acc += e;
    edc[i] = acc;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / acc);
    if (db < -25.0) {
      if (n < 2) return 0.0;
      const double k = static_cast<double>(n);
      const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
      return slope < 0.0 ? -60.0 / slope : INFINITY;
    }
    if (db > -5.0) continue;
    const double t = (static_cast<double>(i) + 0.5) * decay.bin_seconds;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++n;
  }
  return INFINITY;
}

Waveform rir_with_beta(const RoomConfig& room, std::size_t source_index,
                       const Vec3& mic, double beta) {
  const Vec3& src = room.source_positions[source_index];
  const double c = room.array.sound_speed();
  const double fs = room.sample_rate;
  const double direct = (src - mic).norm();
  const std::size_t length = std::max(
      room.rir_length(),
      static_cast<std::size_t>(std::ceil(direct / c * fs)) + kSincHalfWidth + 1);
  Waveform h(length, 0.0);
  if (beta <= 0.0) {
    const double d = direct;
    add_arrival(h, d / c * fs, 1.0 / (4.0 * kPi * d));
    return h;
  }
  // Arrivals later than the last sample (plus the sinc tail) are dropped.
  const double max_dist = (static_cast<double>(length) + kSincHalfWidth) * c / fs;
  std::vector<double> beta_pow(1, 1.0);
  for_each_image(room.dimensions, src, mic, max_dist, [&](double d, int order) {
    while (beta_pow.size() <= static_cast<std::size_t>(order))
      beta_pow.push_back(beta_pow.back() * beta);
    add_arrival(h, d / c * fs, beta_pow[order] / (4.0 * kPi * d));
  });
  high_pass(h, fs);
  return h;
}

}  // namespace

void RoomConfig::validate(double margin) const {
  require(std::isfinite(dimensions.x) && std::isfinite(dimensions.y) &&
              std::isfinite(dimensions.z) && dimensions.x > 0.0 &&
              dimensions.y > 0.0 && dimensions.z > 0.0,
          "room dimensions must be positive");
  require(std::isfinite(t60) && t60 >= 0.0, "t60 must be non-negative");
  require(sample_rate > 0.0, "sample rate must be positive");
  if (absorption) {
    require(*absorption >= 0.0 && *absorption <= 1.0,
            "absorption must lie in [0, 1]");
    require(t60 > 0.0 || *absorption == 1.0,
            "t60 <= 0 with reflecting walls");
  }
  require(!source_positions.empty(), "room has no sources");
  const auto mics = mic_positions();
  for (std::size_t j = 0; j < mics.size(); ++j)
    check_inside(mics[j], dimensions, margin, "mic " + std::to_string(j));
  for (std::size_t c = 0; c < source_positions.size(); ++c)
    check_inside(source_positions[c], dimensions, margin,
                 "source " + std::to_string(c));
}

std::vector<Vec3> RoomConfig::mic_positions() const {
  std::vector<Vec3> out;
  out.reserve(array.size());
  for (const auto& p : array.positions()) out.push_back(array_center + p);
  return out;
}

double RoomConfig::source_azimuth(std::size_t source_index) const {
  return azimuth_between(array_center, source_positions.at(source_index));
}

std::vector<double> RoomConfig::source_azimuths() const {
  std::vector<double> az;
  for (std::size_t c = 0; c < source_positions.size(); ++c)
    az.push_back(source_azimuth(c));
  return az;
}

double RoomConfig::reflection_coefficient() const {
  if (absorption) return std::sqrt(1.0 - *absorption);
  if (t60 <= 0.0) return 0.0;
  const double volume = dimensions.x * dimensions.y * dimensions.z;
  const double surface = 2.0 * (dimensions.x * dimensions.y +
                                dimensions.x * dimensions.z +
                                dimensions.y * dimensions.z);
  const double c = array.sound_speed();
  double alpha = kSabine * volume / (c * surface * t60);
  if (alpha >= 1.0) alpha = 1.0 - std::exp(-kSabine * volume / (c * surface * t60));
  const double closed_form = std::sqrt(1.0 - alpha);
  if (source_positions.empty()) return closed_form;

  // The closed forms assume a diffuse field, which a shoebox lattice is not:
  // strongly absorbing rooms decay faster than Sabine predicts and weakly
  // absorbing ones slower. Refine beta by bisection on the decay of the
  // lattice itself, over the same span the impulse response covers.
  const LatticeDecay decay =
      lattice_decay(dimensions, source_positions.front(), array_center, c,
                    static_cast<double>(rir_length()) / sample_rate);
  double lo = 0.0, hi = 1.0;
  if (decay_t60(decay, closed_form) < t60)
    lo = closed_form;
  else
    hi = closed_form;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (decay_t60(decay, mid) < t60 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::size_t RoomConfig::rir_length() const {
  double farthest = 0.0;
  for (const auto& m : mic_positions())
    for (const auto& s : source_positions)
      farthest = std::max(farthest, (m - s).norm());
  const auto direct = static_cast<std::size_t>(
      std::ceil(farthest / array.sound_speed() * sample_rate) +
      kSincHalfWidth + 1);
  const auto decay =
      static_cast<std::size_t>(std::llround(t60 * sample_rate));
  return std::max(direct, decay);
}

Waveform simulate_rir(const RoomConfig& room, std::size_t source_index,
                      const Vec3& mic) {
  room.validate();
  require(source_index < room.source_positions.size(),
          "source index out of range");
  return rir_with_beta(room, source_index, mic, room.reflection_coefficient());
}

Waveform convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  if (std::min(a.size(), b.size()) <= 64) {
    Waveform out(out_len, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
    return out;
  }
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  Eigen::FFT<double> fft;
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out;
  fft.inv(out, fa);
  out.resize(out_len);
  return out;
}

MixtureScene render_mixture(const std::vector<DrySource>& dry_sources,
                            const RoomConfig& room,
                            std::span<const double> mixing_gains_db) {
  require(!dry_sources.empty(), "at least one source is required");
  require(dry_sources.size() == room.source_positions.size(),
          "source count differs from the room's source positions");
  require(mixing_gains_db.size() == dry_sources.size(),
          "one mixing gain per source is required");
  room.validate();

  std::size_t length = 0;
  for (std::size_t c = 0; c < dry_sources.size(); ++c) {
    const DrySource& s = dry_sources[c];
    require(s.sample_rate == room.sample_rate,
            "source " + std::to_string(c) + " has sample rate " +
                std::to_string(s.sample_rate) + ", room uses " +
                std::to_string(room.sample_rate));
    const bool silent = std::all_of(s.samples.begin(), s.samples.end(),
                                    [](double v) { return v == 0.0; });
    if (silent)
      fail(ErrorCode::kDegenerateInput,
           "source " + std::to_string(c) + " is silent");
    length = std::max(length, s.samples.size());
  }

  const std::vector<Vec3> mics = room.mic_positions();
  const std::size_t J = mics.size();
  const double beta = room.reflection_coefficient();
  const std::size_t ref = room.array.ref_index();

  MixtureScene scene;
  scene.t60 = room.t60;
  scene.room_dimensions = room.dimensions;
  scene.sample_rate = room.sample_rate;
  scene.azimuths = room.source_azimuths();
  scene.gains_db.assign(mixing_gains_db.begin(), mixing_gains_db.end());

  auto power = [](const Waveform& x) {
    double p = 0.0;
    for (double v : x) p += v * v;
    return p / static_cast<double>(std::max<std::size_t>(x.size(), 1));
  };

  double ref_power0 = 0.0;
  for (std::size_t c = 0; c < dry_sources.size(); ++c) {
    MultiWaveform image(J);
    for (std::size_t j = 0; j < J; ++j) {
      const Waveform h = rir_with_beta(room, c, mics[j], beta);
      image[j] = convolve(dry_sources[c].samples, h);
      image[j].resize(length, 0.0);
    }
    const double p = power(image[ref]);
    if (!(p > 0.0))
      fail(ErrorCode::kDegenerateInput,
           "source " + std::to_string(c) + " produces a silent image");
    if (c == 0) ref_power0 = p;
    const double target = ref_power0 * std::pow(10.0, mixing_gains_db[c] / 10.0);
    const double g = std::sqrt(target / p);
    for (auto& ch : image)
      for (double& v : ch) v *= g;
    Waveform dry = dry_sources[c].samples;
    for (double& v : dry) v *= g;
    dry.resize(length, 0.0);
    scene.dry_sources.push_back(std::move(dry));
    scene.images.push_back(std::move(image));
  }

  scene.mixture.assign(J, Waveform(length, 0.0));
  for (const auto& image : scene.images)
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t n = 0; n < length; ++n) scene.mixture[j][n] += image[j][n];
  return scene;
}

SceneSpec sample_scene(std::uint64_t seed, std::size_t n_sources,
                       double sample_rate, const MicArray& array,
                       const SamplerRanges& ranges) {
  require(n_sources == 2 || n_sources == 3,
          "scene sampler supports 2 or 3 sources");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  double radius = 0.0;
  for (const auto& p : array.positions()) radius = std::max(radius, p.norm());

  SceneSpec spec;
  RoomConfig& room = spec.room;
  room.array = array;
  room.sample_rate = sample_rate;
  room.dimensions = {uniform(ranges.min_dimensions.x, ranges.max_dimensions.x),
                     uniform(ranges.min_dimensions.y, ranges.max_dimensions.y),
                     uniform(ranges.min_dimensions.z, ranges.max_dimensions.z)};
  room.t60 = uniform(ranges.min_t60, ranges.max_t60);

  const double m = ranges.wall_margin;
  const Vec3& L = room.dimensions;
  const double z = uniform(m + radius, L.z - m - radius);
  room.array_center = {uniform(m + radius, L.x - m - radius),
                       uniform(m + radius, L.y - m - radius), z};

  for (std::size_t c = 0; c < n_sources; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < ranges.max_retries && !placed; ++attempt) {
      const Vec3 p{uniform(m, L.x - m), uniform(m, L.y - m), z};
      const Vec3 d = p - room.array_center;
      if (std::hypot(d.x, d.y) < ranges.min_source_distance) continue;
      room.source_positions.push_back(p);
      placed = true;
    }
    if (!placed)
      fail(ErrorCode::kGeneration,
           "could not place source " + std::to_string(c) + " for seed " +
               std::to_string(seed));
  }

  // Relative levels in the style of the WSJ0-2mix recipe: a uniform spread
  // split symmetrically between the first two speakers.
  const double spread = uniform(0.0, ranges.max_level_spread_db);
  spec.gains_db = {spread / 2.0, -spread / 2.0};
  if (n_sources == 3)
    spec.gains_db.push_back(uniform(-ranges.max_level_spread_db / 2.0,
                                    ranges.max_level_spread_db / 2.0));
  spec.azimuths = room.source_azimuths();
  room.validate(ranges.wall_margin);
  return spec;
}

}  // namespace ssk
