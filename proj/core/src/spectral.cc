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

#include "ssk/spectral.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssk/error.h"
#include "ssk/geometry.h"

namespace ssk {
namespace {

// Relative tolerance on the overlap-add sum of the window.
constexpr double kColaTolerance = 1e-9;

void check_cola(const StftConfig& cfg) {
  const std::size_t L = cfg.kernel_length();
  const std::size_t hop = cfg.hop;
  std::vector<double> sum(hop, 0.0);
  for (std::size_t t = 0; t < L; ++t) sum[t % hop] += cfg.window[t];
  const auto [lo, hi] = std::minmax_element(sum.begin(), sum.end());
  if (*hi <= 0.0 || (*hi - *lo) > kColaTolerance * *hi) {
    fail(ErrorCode::kConfiguration,
         "window of length " + std::to_string(L) +
             " is not constant-overlap-add at hop " + std::to_string(hop));
  }
}

}  // namespace

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

std::vector<double> rectangular_window(std::size_t n) {
  return std::vector<double>(n, 1.0);
}

StftConfig StftConfig::hann(std::size_t win_len, std::size_t hop,
                            std::size_t fft_size, double sample_rate) {
  return StftConfig{periodic_hann(win_len), fft_size, hop, sample_rate};
}

StftConfig StftConfig::feature_default(double sample_rate) {
  return hann(40, 20, 64, sample_rate);
}

StftConfig StftConfig::oracle_default(double sample_rate) {
  return hann(256, 128, 256, sample_rate);
}

StftKernel::StftKernel(StftConfig config) : config_(std::move(config)) {
  const std::size_t L = config_.kernel_length();
  const std::size_t N = config_.fft_size;
  if (L == 0) fail(ErrorCode::kConfiguration, "empty analysis window");
  if (config_.hop == 0 || config_.hop > L)
    fail(ErrorCode::kConfiguration, "hop must lie in [1, window length]");
  if (N < L) fail(ErrorCode::kConfiguration, "fft size smaller than window");
  if (!(config_.sample_rate > 0.0))
    fail(ErrorCode::kConfiguration, "sample rate must be positive");
  check_cola(config_);

  const std::size_t F = config_.num_bins();
  real_.resize(F, L);
  imag_.resize(F, L);
  for (std::size_t m = 0; m < F; ++m) {
    for (std::size_t t = 0; t < L; ++t) {
      // Reduce t*m mod N first so the argument stays small and exact.
      const double arg = 2.0 * kPi * static_cast<double>((t * m) % N) /
                         static_cast<double>(N);
      real_(m, t) = config_.window[t] * std::cos(arg);
      imag_(m, t) = m == 0 ? 0.0 : -config_.window[t] * std::sin(arg);
    }
  }
}

std::size_t num_frames(std::size_t signal_length, const StftConfig& config) {
  const std::size_t L = config.kernel_length();
  if (signal_length < L) return 0;
  return 1 + (signal_length - L) / config.hop;
}

ComplexSpectrogram stft(std::span<const double> signal,
                        const StftKernel& kernel) {
  const StftConfig& cfg = kernel.config();
  const std::size_t L = cfg.kernel_length();
  require(signal.size() >= L,
          "signal of " + std::to_string(signal.size()) +
              " samples is shorter than one frame (" + std::to_string(L) +
              ")");
  const std::size_t T = num_frames(signal.size(), cfg);
  const std::size_t F = cfg.num_bins();

  ComplexSpectrogram spec{ComplexMap(T, F), cfg};
  const RealMap& kr = kernel.real_rows();
  const RealMap& ki = kernel.imag_rows();
  for (std::size_t t = 0; t < T; ++t) {
    const Eigen::Map<const Eigen::Array<double, 1, Eigen::Dynamic>> frame(
        signal.data() + t * cfg.hop, static_cast<Eigen::Index>(L));
    for (std::size_t m = 0; m < F; ++m) {
      const double re = (kr.row(m) * frame).sum();
      const double im = (ki.row(m) * frame).sum();
      spec.bins(t, m) = Complex(re, im);
    }
  }
  return spec;
}

Waveform istft(const ComplexSpectrogram& spec, const StftKernel& kernel,
               std::size_t length) {
  const StftConfig& cfg = kernel.config();
  require(spec.config == cfg,
          "spectrogram was produced with a different STFT configuration");
  const std::size_t L = cfg.kernel_length();
  const std::size_t N = cfg.fft_size;
  const std::size_t F = cfg.num_bins();
  const std::size_t T = spec.frames();
  require(spec.num_bins() == F, "spectrogram bin count mismatch");

  const std::size_t covered = T == 0 ? 0 : (T - 1) * cfg.hop + L;
  if (length == 0) length = covered;
  Waveform out(std::max(length, covered), 0.0);
  std::vector<double> norm(out.size(), 0.0);

  // Real inverse DFT of the Hermitian half-spectrum, already multiplied by the
  // synthesis window: the transpose of the analysis convolution.
  std::vector<double> scale(F, 2.0 / static_cast<double>(N));
  scale[0] = 1.0 / static_cast<double>(N);
  if (N % 2 == 0) scale[F - 1] = 1.0 / static_cast<double>(N);

  const RealMap& kr = kernel.real_rows();
  const RealMap& ki = kernel.imag_rows();
  Eigen::Array<double, 1, Eigen::Dynamic> frame(static_cast<Eigen::Index>(L));
  for (std::size_t t = 0; t < T; ++t) {
    frame.setZero();
    for (std::size_t m = 0; m < F; ++m) {
      const Complex y = spec.bins(t, m);
      frame += scale[m] * (y.real() * kr.row(m) + y.imag() * ki.row(m));
    }
    const std::size_t start = t * cfg.hop;
    for (std::size_t i = 0; i < L; ++i) {
      out[start + i] += frame(static_cast<Eigen::Index>(i));
      norm[start + i] += cfg.window[i] * cfg.window[i];
    }
  }

  // Positions with vanishing window support cannot be recovered.
  double peak = 0.0;
  for (double v : norm) peak = std::max(peak, v);
  const double floor = peak * 1e-10;
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = norm[n] > floor ? out[n] / norm[n] : 0.0;
  out.resize(length);
  return out;
}

RealMap lps(const ComplexSpectrogram& spec) {
  return 10.0 * (spec.bins.abs2() + kLpsFloor).log10();
}

}  // namespace ssk
