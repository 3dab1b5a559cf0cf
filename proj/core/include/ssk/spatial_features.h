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

// Inter-channel and direction-dependent T-F features:
//
//   IPD   per-pair phase difference between two channels.
//   AF    angle feature: mean over pairs of cos(IPD - expected IPD of a
//         hypothesised direction), zeroed on pre-masked low-energy bins.
//   DPR   directional power ratio: share of the output power of a bank of
//         delay-and-sum beamformers that falls on one look direction.
//
// All maps are frames x bins (T x F), matching the ComplexSpectrogram layout.

#ifndef SSK_SPATIAL_FEATURES_H_
#define SSK_SPATIAL_FEATURES_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ssk/geometry.h"
#include "ssk/spectral.h"

namespace ssk {

inline constexpr double kDprSilenceThreshold = 1e-12;

struct MultichannelSpectrogram {
  std::vector<ComplexSpectrogram> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t frames() const;
  std::size_t num_bins() const;
  const StftConfig& config() const { return channels.at(0).config; }

  // Throws kInvalidArgument unless all channels share T, F and config.
  void validate() const;
};

MultichannelSpectrogram stft_multichannel(const MultiWaveform& signals,
                                          const StftKernel& kernel);

struct IpdMaps {
  std::vector<RealMap> ipd;  // radians in (-pi, pi]
  std::vector<RealMap> cos;
  std::vector<RealMap> sin;
};

// Wrap an angle into (-pi, pi].
double wrap_phase(double radians);

IpdMaps ipd(const MultichannelSpectrogram& spec, const PairSelection& pairs);

struct AngleFeatureOptions {
  // Bins whose reference-channel magnitude lies further than this below the
  // utterance maximum are set to 0.
  double premask_db = 40.0;
};

RealMap angle_feature(const MultichannelSpectrogram& spec, double azimuth,
                      const MicArray& array, const PairSelection& pairs,
                      const AngleFeatureOptions& options = {});

// Pre-computed-IPD variant, used when several directions share one mixture.
RealMap angle_feature(const IpdMaps& ipds, const ComplexSpectrogram& ref,
                      double azimuth, const MicArray& array,
                      const PairSelection& pairs,
                      const AngleFeatureOptions& options = {});

// Boolean-valued (0/1) map of bins that survive the AF pre-mask.
RealMap premask(const ComplexSpectrogram& ref, double premask_db);

class DasFilterbank {
 public:
  DasFilterbank(const MicArray& array, const DirectionGrid& grid,
                const StftConfig& config);

  std::size_t num_directions() const { return grid_.size(); }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_channels() const { return num_channels_; }
  const DirectionGrid& grid() const { return grid_; }

  // exp(-i*2*pi*f_m*dt_{p,j}) / J.
  const Complex& weight(std::size_t p, std::size_t m, std::size_t j) const {
    return weights_[(p * num_bins_ + m) * num_channels_ + j];
  }

  // |w_{p,m}^H y|^2 for the J-vector y of one T-F bin.
  double output_power(std::size_t p, std::size_t m,
                      const Complex* y_per_channel) const;

 private:
  DirectionGrid grid_;
  std::size_t num_bins_;
  std::size_t num_channels_;
  std::vector<Complex> weights_;
};

inline DasFilterbank das_filterbank(const MicArray& array,
                                    const DirectionGrid& grid,
                                    const StftConfig& config) {
  return DasFilterbank(array, grid, config);
}

// DPR for one look direction, T x F in [0, 1]. Bins with total beamformed
// power below 1e-12 get the uniform value 1/P.
RealMap dpr(const MultichannelSpectrogram& spec, const DasFilterbank& bank,
            std::size_t direction_index);

// DPR for every look direction at once (P maps).
std::vector<RealMap> dpr_all(const MultichannelSpectrogram& spec,
                             const DasFilterbank& bank);

// DPR rescaled against the uniform share 1/P: clip(P * dpr / share, 0, 1).
// A bin where the direction collects `share` times its uniform share or more
// reads 1; silent bins read 1/share.
inline constexpr double kDprDefaultShare = 2.0;
RealMap dpr_share_normalized(const RealMap& dpr_map, std::size_t num_directions,
                             double share = kDprDefaultShare);

// Grid index closest to `azimuth` in circular distance; ties go to the lower
// index.
std::size_t nearest_direction(const DirectionGrid& grid, double azimuth);

struct FeatureBlock {
  std::string name;
  RealMap values;  // T x width
};

struct BlockLayout {
  std::string name;
  std::size_t width = 0;
  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

using FeatureMatrix =
    Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-frame concatenation of feature blocks (T x D, float32).
struct FeatureStack {
  FeatureMatrix data;
  std::vector<BlockLayout> layout;

  std::size_t frames() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data.cols()); }

  // "name:width;name:width;..." in block order.
  std::string layout_descriptor() const;
  static std::vector<BlockLayout> parse_layout(const std::string& descriptor);
};

// Throws kInvalidArgument on an empty block list or a frame-count mismatch.
FeatureStack assemble_features(const std::vector<FeatureBlock>& blocks);

enum class DirectionalCondition { kTarget, kTargetPlusInterference };

struct FeatureSelection {
  bool lps = true;
  bool cosipd = true;
  bool sinipd = false;
  bool af = true;
  bool dpr = true;
  DirectionalCondition condition = DirectionalCondition::kTarget;

  // Parses a comma list of {lps, cosipd, sinipd, af, dpr}.
  static FeatureSelection parse(const std::string& csv,
                                DirectionalCondition condition);
  // Feature dimension per frame for F bins and U pairs.
  std::size_t dimension(std::size_t num_bins, std::size_t num_pairs) const;
};

struct FeatureContext {
  const MicArray* array = nullptr;
  const PairSelection* pairs = nullptr;
  const DasFilterbank* bank = nullptr;  // required when dpr is selected
  AngleFeatureOptions af_options;
};

// The joint representation: LPS of the reference channel, cos/sin IPD per
// pair, then AF and DPR for the target (and the interferer for
// tgt+intf). DPR blocks hold the raw ratio of the grid direction closest to
// the requested azimuth.
FeatureStack compute_features(const MultichannelSpectrogram& spec,
                              const FeatureContext& context,
                              const FeatureSelection& selection,
                              double target_azimuth,
                              std::optional<double> interferer_azimuth);

}  // namespace ssk

#endif  // SSK_SPATIAL_FEATURES_H_
