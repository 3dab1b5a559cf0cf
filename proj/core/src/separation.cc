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

#include "ssk/separation.h"

#include <algorithm>
#include <cmath>

#include "ssk/error.h"

namespace ssk {

const char* to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::kIbm: return "ibm";
    case MaskKind::kIrm: return "irm";
    case MaskKind::kIpsm: return "ipsm";
    case MaskKind::kDirectionalHeuristic: return "heuristic";
  }
  return "unknown";
}

std::size_t padded_length(std::size_t length, const StftConfig& config) {
  const std::size_t L = config.kernel_length();
  const std::size_t hop = config.hop;
  const std::size_t extra = (hop - (length + L) % hop) % hop;
  return L + length + L + extra;
}

Waveform pad_for_masking(std::span<const double> signal,
                         const StftConfig& config) {
  Waveform out(padded_length(signal.size(), config), 0.0);
  std::copy(signal.begin(), signal.end(),
            out.begin() + static_cast<std::ptrdiff_t>(config.kernel_length()));
  return out;
}

MultiWaveform pad_for_masking(const MultiWaveform& signals,
                              const StftConfig& config) {
  MultiWaveform out;
  out.reserve(signals.size());
  for (const auto& s : signals) out.push_back(pad_for_masking(s, config));
  return out;
}

Mask oracle_mask(std::span<const double> target_image_ref,
                 const std::vector<Waveform>& other_images_ref, MaskKind kind,
                 const StftConfig& oracle_config,
                 const OracleMaskOptions& options) {
  require(kind != MaskKind::kDirectionalHeuristic,
          "oracle_mask computes IBM, IRM or IPSM only");
  for (const auto& o : other_images_ref)
    require(o.size() == target_image_ref.size(),
            "interference image length differs from the target");

  const StftKernel kernel(oracle_config);
  const ComplexSpectrogram s =
      stft(pad_for_masking(target_image_ref, oracle_config), kernel);
  const auto T = s.bins.rows();
  const auto F = s.bins.cols();
  const double eps = options.epsilon;

  ComplexMap mixture = s.bins;
  RealMap interference_max = RealMap::Zero(T, F);
  RealMap interference_sum = RealMap::Zero(T, F);
  RealMap interference_pow = RealMap::Zero(T, F);
  for (const auto& other : other_images_ref) {
    const ComplexSpectrogram i =
        stft(pad_for_masking(other, oracle_config), kernel);
    const RealMap mag = i.bins.abs();
    mixture += i.bins;
    interference_max = interference_max.max(mag);
    interference_sum += mag;
    interference_pow += mag.square();
  }

  const RealMap target_mag = s.bins.abs();
  Mask mask{RealMap(T, F), oracle_config, kind};
  switch (kind) {
    case MaskKind::kIbm:
      mask.values = (target_mag > interference_max).cast<double>();
      break;
    case MaskKind::kIrm:
      if (options.irm_domain == IrmDomain::kMagnitude) {
        mask.values = target_mag / (target_mag + interference_sum + eps);
      } else {
        const RealMap p = target_mag.square();
        mask.values = p / (p + interference_pow + eps);
      }
      break;
    case MaskKind::kIpsm: {
      for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index m = 0; m < F; ++m) {
          const Complex y = mixture(t, m);
          const Complex x = s.bins(t, m);
          // |S| cos(angle S - angle Y) == Re(S conj(Y)) / |Y|.
          const double ym = std::abs(y);
          const double num = ym > 0.0 ? (x * std::conj(y)).real() / ym : 0.0;
          mask.values(t, m) = std::clamp(num / (ym + eps), 0.0, 1.0);
        }
      }
      break;
    }
    case MaskKind::kDirectionalHeuristic:
      break;
  }
  return mask;
}

Mask directional_mask(const DirectionalEvidence& target,
                      const DirectionalEvidence* interference,
                      const HeuristicParams& params, const StftConfig& config) {
  require(params.af_weight >= 0.0 && params.dpr_weight >= 0.0 &&
              params.af_weight + params.dpr_weight > 0.0,
          "heuristic weights must be non-negative and not both zero");
  const auto T = target.af.rows();
  const auto F = target.af.cols();
  const bool use_dpr = params.dpr_weight > 0.0;
  auto same_shape = [&](const RealMap& m) {
    return m.rows() == T && m.cols() == F;
  };
  require(!use_dpr || same_shape(target.dpr),
          "target AF and DPR maps differ in shape");
  if (interference) {
    require(same_shape(interference->af), "interference AF shape mismatch");
    require(!use_dpr || same_shape(interference->dpr),
            "interference DPR shape mismatch");
  }

  RealMap score = params.af_weight * (target.af + 1.0) / 2.0;
  if (use_dpr) score += params.dpr_weight * target.dpr;
  score /= params.af_weight + params.dpr_weight;

  if (interference) {
    auto wins = (target.af >= interference->af);
    if (use_dpr) {
      score *= (wins || (target.dpr >= interference->dpr)).cast<double>();
    } else {
      score *= wins.cast<double>();
    }
  }
  return Mask{score.max(0.0).min(1.0), config, MaskKind::kDirectionalHeuristic};
}

SeparationResult apply_mask(std::span<const double> mixture_ref,
                            const Mask& mask, const StftKernel& kernel) {
  const StftConfig& cfg = kernel.config();
  require(mask.config == cfg, "mask was computed with a different STFT config");
  ComplexSpectrogram spec = stft(pad_for_masking(mixture_ref, cfg), kernel);
  require(mask.values.rows() == spec.bins.rows() &&
              mask.values.cols() == spec.bins.cols(),
          "mask shape " + std::to_string(mask.values.rows()) + "x" +
              std::to_string(mask.values.cols()) +
              " does not match the mixture spectrogram " +
              std::to_string(spec.bins.rows()) + "x" +
              std::to_string(spec.bins.cols()));
  spec.bins *= mask.values.cast<Complex>();
  const Waveform padded = istft(spec, kernel, padded_length(mixture_ref.size(), cfg));
  const auto begin = padded.begin() + static_cast<std::ptrdiff_t>(cfg.kernel_length());
  return SeparationResult{
      Waveform(begin, begin + static_cast<std::ptrdiff_t>(mixture_ref.size())),
      to_string(mask.kind), 0.0};
}

SeparationResult das_beamform(const MultiWaveform& mixture, double azimuth,
                              const MicArray& array, const StftKernel& kernel) {
  require(!mixture.empty(), "beamformer needs at least one channel");
  require(mixture.size() == array.size(),
          "mixture channel count differs from the array size");
  const StftConfig& cfg = kernel.config();
  const std::size_t length = mixture.front().size();

  const std::vector<double> dt = tdoa(array, SourceDirection(azimuth));
  const double inv_j = 1.0 / static_cast<double>(array.size());
  ComplexSpectrogram out;
  for (std::size_t j = 0; j < mixture.size(); ++j) {
    require(mixture[j].size() == length, "channels differ in length");
    ComplexSpectrogram ch = stft(pad_for_masking(mixture[j], cfg), kernel);
    for (Eigen::Index m = 0; m < ch.bins.cols(); ++m) {
      // conj(w_j) with w_j = exp(-i 2 pi f dt_j) / J.
      const Complex w_conj =
          std::polar(inv_j, 2.0 * kPi * cfg.bin_frequency(static_cast<std::size_t>(m)) * dt[j]);
      ch.bins.col(m) *= w_conj;
    }
    if (j == 0) {
      out = std::move(ch);
    } else {
      out.bins += ch.bins;
    }
  }
  const Waveform padded = istft(out, kernel, padded_length(length, cfg));
  const auto begin = padded.begin() + static_cast<std::ptrdiff_t>(cfg.kernel_length());
  return SeparationResult{
      Waveform(begin, begin + static_cast<std::ptrdiff_t>(length)), "das",
      normalize_azimuth(azimuth)};
}

}  // namespace ssk
