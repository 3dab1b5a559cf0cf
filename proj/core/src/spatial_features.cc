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

#include "ssk/spatial_features.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssk/error.h"

namespace ssk {

std::size_t MultichannelSpectrogram::frames() const {
  return channels.empty() ? 0 : channels.front().frames();
}

std::size_t MultichannelSpectrogram::num_bins() const {
  return channels.empty() ? 0 : channels.front().num_bins();
}

void MultichannelSpectrogram::validate() const {
  require(!channels.empty(), "multichannel spectrogram has no channels");
  for (const auto& ch : channels) {
    require(ch.frames() == frames() && ch.num_bins() == num_bins(),
            "channels disagree on spectrogram shape");
    require(ch.config == channels.front().config,
            "channels disagree on STFT configuration");
  }
}

MultichannelSpectrogram stft_multichannel(const MultiWaveform& signals,
                                          const StftKernel& kernel) {
  require(!signals.empty(), "no channels to transform");
  MultichannelSpectrogram out;
  out.channels.reserve(signals.size());
  for (const auto& s : signals) {
    require(s.size() == signals.front().size(),
            "channels differ in length");
    out.channels.push_back(stft(s, kernel));
  }
  return out;
}

double wrap_phase(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

IpdMaps ipd(const MultichannelSpectrogram& spec, const PairSelection& pairs) {
  spec.validate();
  require(pairs.num_mics() <= spec.num_channels(),
          "pair selection refers to more channels than available");
  const auto T = static_cast<Eigen::Index>(spec.frames());
  const auto F = static_cast<Eigen::Index>(spec.num_bins());

  std::vector<RealMap> phase(spec.num_channels());
  for (std::size_t j = 0; j < spec.num_channels(); ++j)
    phase[j] = spec.channels[j].bins.arg();

  IpdMaps out;
  for (const MicPair& p : pairs.pairs()) {
    RealMap d(T, F);
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index m = 0; m < F; ++m)
        d(t, m) = wrap_phase(phase[p.first](t, m) - phase[p.second](t, m));
    out.cos.push_back(d.cos());
    out.sin.push_back(d.sin());
    out.ipd.push_back(std::move(d));
  }
  return out;
}

RealMap premask(const ComplexSpectrogram& ref, double premask_db) {
  const RealMap mag = ref.bins.abs();
  const double peak = mag.size() > 0 ? mag.maxCoeff() : 0.0;
  if (peak <= 0.0) return RealMap::Zero(mag.rows(), mag.cols());
  const double threshold = peak * std::pow(10.0, -premask_db / 20.0);
  return (mag >= threshold).cast<double>();
}

RealMap angle_feature(const IpdMaps& ipds, const ComplexSpectrogram& ref,
                      double azimuth, const MicArray& array,
                      const PairSelection& pairs,
                      const AngleFeatureOptions& options) {
  require(ipds.ipd.size() == pairs.size(), "IPD count does not match pairs");
  const StftConfig& cfg = ref.config;
  const auto T = static_cast<Eigen::Index>(ref.frames());
  const auto F = static_cast<Eigen::Index>(ref.num_bins());
  const SourceDirection dir(azimuth);

  RealMap af = RealMap::Zero(T, F);
  for (std::size_t u = 0; u < pairs.size(); ++u) {
    Eigen::Array<double, 1, Eigen::Dynamic> expected(F);
    for (Eigen::Index m = 0; m < F; ++m)
      expected(m) = steering_phase(array, dir, pairs[u],
                                   static_cast<std::size_t>(m), cfg.fft_size,
                                   cfg.sample_rate);
    // Re(e^{i*ipd} * e^{-i*expected}) / |.| == cos(ipd - expected).
    af += (ipds.ipd[u].rowwise() - expected).cos();
  }
  af /= static_cast<double>(pairs.size());
  return af * premask(ref, options.premask_db);
}

RealMap angle_feature(const MultichannelSpectrogram& spec, double azimuth,
                      const MicArray& array, const PairSelection& pairs,
                      const AngleFeatureOptions& options) {
  require(spec.num_channels() == array.size(),
          "spectrogram channel count differs from the array size");
  const IpdMaps ipds = ipd(spec, pairs);
  return angle_feature(ipds, spec.channels[array.ref_index()], azimuth, array,
                       pairs, options);
}

DasFilterbank::DasFilterbank(const MicArray& array, const DirectionGrid& grid,
                             const StftConfig& config)
    : grid_(grid),
      num_bins_(config.num_bins()),
      num_channels_(array.size()),
      weights_(grid.size() * config.num_bins() * array.size()) {
  const double inv_j = 1.0 / static_cast<double>(num_channels_);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const std::vector<double> dt = tdoa(array, SourceDirection(grid_[p]));
    for (std::size_t m = 0; m < num_bins_; ++m) {
      const double f = config.bin_frequency(m);
      for (std::size_t j = 0; j < num_channels_; ++j) {
        weights_[(p * num_bins_ + m) * num_channels_ + j] =
            m == 0 ? Complex(inv_j, 0.0)
                   : std::polar(inv_j, -2.0 * kPi * f * dt[j]);
      }
    }
  }
}

double DasFilterbank::output_power(std::size_t p, std::size_t m,
                                   const Complex* y) const {
  Complex acc(0.0, 0.0);
  const Complex* w = &weights_[(p * num_bins_ + m) * num_channels_];
  for (std::size_t j = 0; j < num_channels_; ++j) acc += std::conj(w[j]) * y[j];
  return std::norm(acc);
}

std::vector<RealMap> dpr_all(const MultichannelSpectrogram& spec,
                             const DasFilterbank& bank) {
  spec.validate();
  require(spec.num_channels() == bank.num_channels(),
          "filterbank channel count differs from the spectrogram");
  require(spec.num_bins() == bank.num_bins(),
          "filterbank bin count differs from the spectrogram");
  const std::size_t T = spec.frames();
  const std::size_t F = spec.num_bins();
  const std::size_t P = bank.num_directions();
  const std::size_t J = spec.num_channels();
  const double uniform = 1.0 / static_cast<double>(P);

  std::vector<RealMap> out(P, RealMap(T, F));
  std::vector<Complex> y(J);
  std::vector<double> power(P);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < F; ++m) {
      for (std::size_t j = 0; j < J; ++j) y[j] = spec.channels[j].bins(t, m);
      double total = 0.0;
      for (std::size_t p = 0; p < P; ++p) {
        power[p] = bank.output_power(p, m, y.data());
        total += power[p];
      }
      const bool silent = total < kDprSilenceThreshold;
      for (std::size_t p = 0; p < P; ++p)
        out[p](t, m) = silent ? uniform : power[p] / total;
    }
  }
  return out;
}

RealMap dpr(const MultichannelSpectrogram& spec, const DasFilterbank& bank,
            std::size_t direction_index) {
  require(direction_index < bank.num_directions(),
          "direction index out of range");
  return std::move(dpr_all(spec, bank)[direction_index]);
}

RealMap dpr_share_normalized(const RealMap& dpr_map, std::size_t num_directions,
                             double share) {
  require(num_directions > 0, "direction count must be positive");
  require(share > 0.0, "share must be positive");
  return (dpr_map * (static_cast<double>(num_directions) / share)).min(1.0).max(0.0);
}

std::size_t nearest_direction(const DirectionGrid& grid, double azimuth) {
  std::size_t best = 0;
  double best_d = angle_difference(grid[0], azimuth);
  for (std::size_t p = 1; p < grid.size(); ++p) {
    const double d = angle_difference(grid[p], azimuth);
    if (d < best_d) {
      best = p;
      best_d = d;
    }
  }
  return best;
}

std::string FeatureStack::layout_descriptor() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i) os << ';';
    os << layout[i].name << ':' << layout[i].width;
  }
  return os.str();
}

std::vector<BlockLayout> FeatureStack::parse_layout(
    const std::string& descriptor) {
  std::vector<BlockLayout> out;
  std::istringstream is(descriptor);
  std::string item;
  while (std::getline(is, item, ';')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      fail(ErrorCode::kFormat, "malformed layout entry '" + item + "'");
    BlockLayout b;
    b.name = item.substr(0, colon);
    try {
      std::size_t used = 0;
      b.width = std::stoul(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::kFormat, "malformed layout width in '" + item + "'");
    }
    out.push_back(std::move(b));
  }
  if (out.empty()) fail(ErrorCode::kFormat, "empty layout descriptor");
  return out;
}

FeatureStack assemble_features(const std::vector<FeatureBlock>& blocks) {
  require(!blocks.empty(), "no feature blocks to assemble");
  const Eigen::Index T = blocks.front().values.rows();
  Eigen::Index D = 0;
  for (const auto& b : blocks) {
    require(b.values.rows() == T,
            "block '" + b.name + "' has " + std::to_string(b.values.rows()) +
                " frames, expected " + std::to_string(T));
    require(!b.name.empty() && b.name.find_first_of(";:") == std::string::npos,
            "invalid block name '" + b.name + "'");
    D += b.values.cols();
  }
  FeatureStack stack;
  stack.data.resize(T, D);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    stack.data.block(0, col, T, b.values.cols()) = b.values.cast<float>();
    col += b.values.cols();
    stack.layout.push_back({b.name, static_cast<std::size_t>(b.values.cols())});
  }
  return stack;
}

FeatureSelection FeatureSelection::parse(const std::string& csv,
                                         DirectionalCondition condition) {
  FeatureSelection sel{false, false, false, false, false, condition};
  std::istringstream is(csv);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item == "lps") sel.lps = true;
    else if (item == "cosipd") sel.cosipd = true;
    else if (item == "sinipd") sel.sinipd = true;
    else if (item == "af") sel.af = true;
    else if (item == "dpr") sel.dpr = true;
    else if (!item.empty())
      fail(ErrorCode::kInvalidArgument, "unknown feature '" + item + "'");
  }
  require(sel.lps || sel.cosipd || sel.sinipd || sel.af || sel.dpr,
          "feature selection is empty");
  return sel;
}

std::size_t FeatureSelection::dimension(std::size_t num_bins,
                                        std::size_t num_pairs) const {
  const std::size_t directions =
      condition == DirectionalCondition::kTargetPlusInterference ? 2 : 1;
  std::size_t d = 0;
  if (lps) d += num_bins;
  if (cosipd) d += num_pairs * num_bins;
  if (sinipd) d += num_pairs * num_bins;
  if (af) d += directions * num_bins;
  if (dpr) d += directions * num_bins;
  return d;
}

namespace {

RealMap concat_pairs(const std::vector<RealMap>& maps) {
  const Eigen::Index T = maps.front().rows();
  const Eigen::Index F = maps.front().cols();
  RealMap out(T, F * static_cast<Eigen::Index>(maps.size()));
  for (std::size_t u = 0; u < maps.size(); ++u)
    out.block(0, static_cast<Eigen::Index>(u) * F, T, F) = maps[u];
  return out;
}

}  // namespace

FeatureStack compute_features(const MultichannelSpectrogram& spec,
                              const FeatureContext& ctx,
                              const FeatureSelection& sel,
                              double target_azimuth,
                              std::optional<double> interferer_azimuth) {
  spec.validate();
  require(ctx.array != nullptr && ctx.pairs != nullptr,
          "feature context needs an array and a pair selection");
  require(spec.num_channels() == ctx.array->size(),
          "spectrogram channel count differs from the array size");
  const bool with_intf =
      sel.condition == DirectionalCondition::kTargetPlusInterference;
  require(!with_intf || interferer_azimuth.has_value(),
          "tgt+intf features need an interferer direction");
  require(!sel.dpr || ctx.bank != nullptr, "dpr features need a filterbank");

  const ComplexSpectrogram& ref = spec.channels[ctx.array->ref_index()];
  std::vector<FeatureBlock> blocks;
  if (sel.lps) blocks.push_back({"lps", lps(ref)});

  IpdMaps ipds;
  if (sel.cosipd || sel.sinipd || sel.af) ipds = ipd(spec, *ctx.pairs);
  if (sel.cosipd) blocks.push_back({"cosipd", concat_pairs(ipds.cos)});
  if (sel.sinipd) blocks.push_back({"sinipd", concat_pairs(ipds.sin)});

  if (sel.af) {
    blocks.push_back({"af_tgt", angle_feature(ipds, ref, target_azimuth,
                                              *ctx.array, *ctx.pairs,
                                              ctx.af_options)});
    if (with_intf)
      blocks.push_back({"af_intf", angle_feature(ipds, ref, *interferer_azimuth,
                                                 *ctx.array, *ctx.pairs,
                                                 ctx.af_options)});
  }
  if (sel.dpr) {
    std::vector<RealMap> all = dpr_all(spec, *ctx.bank);
    const DirectionGrid& grid = ctx.bank->grid();
    blocks.push_back(
        {"dpr_tgt", all[nearest_direction(grid, target_azimuth)]});
    if (with_intf)
      blocks.push_back(
          {"dpr_intf", all[nearest_direction(grid, *interferer_azimuth)]});
  }
  return assemble_features(blocks);
}

}  // namespace ssk
