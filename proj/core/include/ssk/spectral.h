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

// STFT expressed as a pair of real-valued convolution kernels.
//
// Row m of the kernels holds w[t]*cos(2*pi*t*m/N) and -w[t]*sin(2*pi*t*m/N)
// for t in [0, L). Convolving a frame with both rows gives the real and
// imaginary part of bin m of the zero-padded N-point DFT of the windowed
// frame. The per-frame linear phase term of a sliding DFT is dropped: it has
// unit modulus and is common to all channels, so neither magnitudes nor phase
// differences depend on it.
//
// Frames are fully interior: frame t covers [t*hop, t*hop + L) and no
// boundary padding is applied.

#ifndef SSK_SPECTRAL_H_
#define SSK_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ssk {

using Complex = std::complex<double>;
using RealMap =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMap =
    Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Waveform = std::vector<double>;
// Channel-major multichannel signal: one Waveform per microphone.
using MultiWaveform = std::vector<Waveform>;

inline constexpr double kLpsFloor = 1e-12;

// Periodic Hann window of length n (w[0] == 0). Sums to a constant at hop n/2.
std::vector<double> periodic_hann(std::size_t n);
std::vector<double> rectangular_window(std::size_t n);

struct StftConfig {
  std::vector<double> window;
  std::size_t fft_size = 0;
  std::size_t hop = 0;
  double sample_rate = 16000.0;

  std::size_t kernel_length() const { return window.size(); }
  std::size_t num_bins() const { return fft_size / 2 + 1; }
  double bin_frequency(std::size_t m) const {
    return static_cast<double>(m) * sample_rate /
           static_cast<double>(fft_size);
  }

  // 40-sample periodic Hann, hop 20, 64-point FFT, 16 kHz: 33 bins at a
  // 2.5 ms / 1.25 ms frame rate.
  static StftConfig feature_default(double sample_rate = 16000.0);
  // 256-point periodic Hann, hop 128, 256-point FFT (16 ms at 16 kHz).
  static StftConfig oracle_default(double sample_rate = 16000.0);
  static StftConfig hann(std::size_t win_len, std::size_t hop,
                         std::size_t fft_size, double sample_rate = 16000.0);

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

class StftKernel {
 public:
  // Throws kConfiguration if hop > L, N < L, or the window does not
  // overlap-add to a constant at the given hop.
  explicit StftKernel(StftConfig config);

  const StftConfig& config() const { return config_; }
  std::size_t num_bins() const { return config_.num_bins(); }
  std::size_t length() const { return config_.kernel_length(); }

  double real(std::size_t m, std::size_t t) const { return real_(m, t); }
  double imag(std::size_t m, std::size_t t) const { return imag_(m, t); }
  const RealMap& real_rows() const { return real_; }
  const RealMap& imag_rows() const { return imag_; }

 private:
  StftConfig config_;
  RealMap real_;  // F x L
  RealMap imag_;  // F x L
};

inline StftKernel build_kernel(StftConfig config) {
  return StftKernel(std::move(config));
}

struct ComplexSpectrogram {
  ComplexMap bins;  // T x F
  StftConfig config;

  std::size_t frames() const { return static_cast<std::size_t>(bins.rows()); }
  std::size_t num_bins() const {
    return static_cast<std::size_t>(bins.cols());
  }
};

std::size_t num_frames(std::size_t signal_length, const StftConfig& config);

// Throws kInvalidArgument if the signal is shorter than one frame.
ComplexSpectrogram stft(std::span<const double> signal,
                        const StftKernel& kernel);

// Weighted overlap-add inverse using the analysis window as synthesis window,
// normalised by the accumulated squared window. Output length defaults to the
// span covered by the frames, (T-1)*hop + L; a longer `length` is
// zero-filled past that point. Samples with no window support come out 0.
Waveform istft(const ComplexSpectrogram& spec, const StftKernel& kernel,
               std::size_t length = 0);

// 10*log10(re^2 + im^2 + 1e-12), T x F.
RealMap lps(const ComplexSpectrogram& spec);

}  // namespace ssk

#endif  // SSK_SPECTRAL_H_
