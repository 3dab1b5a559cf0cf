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

#include "ssk/signals.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

#include "ssk/error.h"
#include "ssk/geometry.h"

namespace ssk {
namespace {

constexpr std::size_t kEnvelopeHop = 64;

std::size_t samples_for(double duration_s, double sample_rate) {
  require(duration_s > 0.0 && sample_rate > 0.0,
          "duration and sample rate must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

void normalize_peak(Waveform& x, double peak = 0.5) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (m > 0.0)
    for (double& v : x) v *= peak / m;
}

// Zero every FFT bin outside [low_hz, high_hz].
void band_limit(Waveform& x, double low_hz, double high_hz,
                double sample_rate) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const std::size_t folded = std::min(k, n - k);
    const double f = static_cast<double>(folded) * sample_rate /
                     static_cast<double>(n);
    if (f < low_hz || f > high_hz) spec[k] = 0.0;
  }
  fft.inv(x, spec);
}

double raised_cosine_gate(std::size_t i, std::size_t len, std::size_t ramp) {
  if (ramp == 0) return 1.0;
  if (i < ramp) return 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / ramp);
  if (i + ramp >= len)
    return 0.5 - 0.5 * std::cos(kPi * static_cast<double>(len - 1 - i) / ramp);
  return 1.0;
}

}  // namespace

Waveform white_noise(std::uint64_t seed, std::size_t length) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Waveform x(length);
  for (double& v : x) v = gauss(rng);
  return x;
}

Waveform speech_like(std::uint64_t seed, double duration_s,
                     double sample_rate) {
  const std::size_t n = samples_for(duration_s, sample_rate);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);

  Waveform out(n, 0.0);
  const double base_f0 = uniform(90.0, 240.0);
  const double nyquist_guard = 0.45 * sample_rate;

  std::size_t pos = static_cast<std::size_t>(uniform(0.0, 0.08) * sample_rate);
  while (pos < n) {
    const auto len = std::min<std::size_t>(
        static_cast<std::size_t>(uniform(0.12, 0.32) * sample_rate), n - pos);
    // Per-syllable formants and pitch gesture.
    const std::array<double, 3> formant{uniform(300.0, 900.0),
                                        uniform(900.0, 2500.0),
                                        uniform(2400.0, 3500.0)};
    const std::array<double, 3> bandwidth{90.0, 140.0, 220.0};
    const double f0_start = base_f0 * uniform(0.85, 1.2);
    const double f0_end = base_f0 * uniform(0.8, 1.15);
    const double level = uniform(0.5, 1.0);
    const std::size_t ramp = std::min<std::size_t>(len / 4, 0.02 * sample_rate);

    double phase = uniform(0.0, 2.0 * kPi);
    std::vector<double> amps;
    for (std::size_t i = 0; i < len; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(len);
      const double f0 = f0_start + (f0_end - f0_start) * frac;
      phase += 2.0 * kPi * f0 / sample_rate;
      // The harmonic envelope moves slowly; refresh it every 4 ms.
      if (i % kEnvelopeHop == 0) {
        amps.clear();
        for (int k = 1; k * f0 < nyquist_guard; ++k) {
          const double fk = k * f0;
          double amp = 0.0;
          for (std::size_t q = 0; q < formant.size(); ++q) {
            const double d = (fk - formant[q]) / bandwidth[q];
            amp += std::exp(-0.5 * d * d) / static_cast<double>(q + 1);
          }
          // Spectral tilt keeps some energy across the whole band.
          amps.push_back(amp + 0.05 / std::sqrt(static_cast<double>(k)));
        }
      }
      double s = 0.0;
      for (std::size_t k = 0; k < amps.size(); ++k)
        s += amps[k] * std::sin(static_cast<double>(k + 1) * phase);
      out[pos + i] += level * raised_cosine_gate(i, len, ramp) * s;
    }
    pos += len;

    // Occasional unvoiced burst (high-band noise) after a syllable.
    if (pos < n && uniform(0.0, 1.0) < 0.4) {
      const auto blen = std::min<std::size_t>(
          static_cast<std::size_t>(uniform(0.03, 0.08) * sample_rate), n - pos);
      Waveform burst(blen);
      for (double& v : burst) v = gauss(rng);
      if (blen > 16) band_limit(burst, 2500.0, 7000.0, sample_rate);
      const std::size_t bramp = blen / 4;
      for (std::size_t i = 0; i < blen; ++i)
        out[pos + i] += 0.6 * level * raised_cosine_gate(i, blen, bramp) * burst[i];
      pos += blen;
    }
    pos += static_cast<std::size_t>(uniform(0.03, 0.15) * sample_rate);
  }
  normalize_peak(out);
  return out;
}

Waveform noise_bursts(std::uint64_t seed, double duration_s, double low_hz,
                      double high_hz, double sample_rate) {
  require(low_hz >= 0.0 && high_hz > low_hz, "invalid noise band");
  const std::size_t n = samples_for(duration_s, sample_rate);
  Waveform x = white_noise(seed, n);
  band_limit(x, low_hz, high_hz, sample_rate);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dur(0.1, 0.4);
  std::size_t pos = 0;
  bool on = true;
  while (pos < n) {
    const auto len = std::min<std::size_t>(
        static_cast<std::size_t>(dur(rng) * sample_rate), n - pos);
    for (std::size_t i = 0; i < len; ++i)
      x[pos + i] *= on ? raised_cosine_gate(i, len, len / 8) : 0.0;
    pos += len;
    on = !on;
  }
  normalize_peak(x);
  return x;
}

Waveform am_tone(double carrier_hz, double modulation_hz, double depth,
                 double duration_s, double sample_rate) {
  const std::size_t n = samples_for(duration_s, sample_rate);
  Waveform x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] = (1.0 + depth * std::sin(2.0 * kPi * modulation_hz * t)) *
           std::sin(2.0 * kPi * carrier_hz * t);
  }
  normalize_peak(x);
  return x;
}

Waveform linear_chirp(double start_hz, double end_hz, double duration_s,
                      double sample_rate) {
  const std::size_t n = samples_for(duration_s, sample_rate);
  Waveform x(n);
  const double rate = (end_hz - start_hz) / duration_s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] = std::sin(2.0 * kPi * (start_hz * t + 0.5 * rate * t * t));
  }
  normalize_peak(x);
  return x;
}

}  // namespace ssk
