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

// Non-neural separators: oracle T-F masks computed from ground-truth images,
// a directional heuristic mask driven by AF/DPR, mask application with the
// mixture phase, and a fixed delay-and-sum beamformer.

#ifndef SSK_SEPARATION_H_
#define SSK_SEPARATION_H_

#include <optional>
#include <string>
#include <vector>

#include "ssk/geometry.h"
#include "ssk/spectral.h"

namespace ssk {

enum class MaskKind { kIbm, kIrm, kIpsm, kDirectionalHeuristic };

const char* to_string(MaskKind kind);

struct Mask {
  RealMap values;  // T x F
  StftConfig config;
  MaskKind kind = MaskKind::kIrm;
};

enum class IrmDomain {
  kMagnitude,  // |S| / (|S| + sum |I|)
  kPower,      // |S|^2 / (|S|^2 + sum |I|^2)
};

struct OracleMaskOptions {
  IrmDomain irm_domain = IrmDomain::kMagnitude;
  double epsilon = 1e-12;
};

// IBM: 1 where |S| > max_c |I_c| (ties -> 0). IRM per `irm_domain`.
// IPSM: clip(|S| cos(angle S - angle Y) / (|Y| + eps), 0, 1), Y = S + sum I.
// An empty interference list is allowed. Spectrograms are taken on the
// signals padded by pad_for_masking, so the mask lines up with apply_mask.
Mask oracle_mask(std::span<const double> target_image_ref,
                 const std::vector<Waveform>& other_images_ref, MaskKind kind,
                 const StftConfig& oracle_config = StftConfig::oracle_default(),
                 const OracleMaskOptions& options = {});

// AF in [-1, 1] and DPR in [0, 1] for one direction. The DPR map is expected
// already scaled so that 1 means "dominated by this direction" (see
// dpr_share_normalized); it may be left empty when its weight is zero.
struct DirectionalEvidence {
  RealMap af;
  RealMap dpr;
};

struct HeuristicParams {
  double af_weight = 1.0;   // alpha
  double dpr_weight = 1.0;  // beta
};

// score = (alpha*(af+1)/2 + beta*dpr) / (alpha + beta), clipped to [0, 1].
// With interference evidence, bins where the target loses on both AF and DPR
// are zeroed.
//
// This is a hand-built stand-in for a trained separator, useful for
// exercising the directional features end to end.
Mask directional_mask(const DirectionalEvidence& target,
                      const DirectionalEvidence* interference,
                      const HeuristicParams& params, const StftConfig& config);

struct SeparationResult {
  Waveform estimate;  // reference channel, same length as the mixture
  std::string method;
  double target_azimuth = 0.0;
};

// istft(mask * stft(mixture)). The mixture is zero-padded by one window on
// both sides internally so every sample receives full overlap-add support.
SeparationResult apply_mask(std::span<const double> mixture_ref,
                            const Mask& mask, const StftKernel& kernel);

// Padding shared by every mask producer and apply_mask: one window of zeros
// in front, at least one window behind, rounded so the last frame ends on the
// last sample. Masks for a mixture of `length` samples therefore have
// num_frames(padded_length(length)) rows.
std::size_t padded_length(std::size_t length, const StftConfig& config);
Waveform pad_for_masking(std::span<const double> signal,
                         const StftConfig& config);
MultiWaveform pad_for_masking(const MultiWaveform& signals,
                              const StftConfig& config);

// Fixed beamformer steered at `azimuth`: per-bin w^H Y, then inverse STFT.
SeparationResult das_beamform(const MultiWaveform& mixture, double azimuth,
                              const MicArray& array, const StftKernel& kernel);

}  // namespace ssk

#endif  // SSK_SEPARATION_H_
