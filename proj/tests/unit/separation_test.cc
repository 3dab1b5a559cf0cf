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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"
#include "ssk/error.h"
#include "ssk/metrics.h"
#include "ssk/pipeline.h"
#include "ssk/room_sim.h"
#include "ssk/signals.h"

namespace ssk {
namespace {

const StftConfig kOracle = StftConfig::oracle_default();

Waveform scaled(const Waveform& x, double a) {
  Waveform y = x;
  for (double& v : y) v *= a;
  return y;
}

// Active bins of the padded target spectrogram.
RealMap active_bins(const Waveform& target) {
  return (stft(pad_for_masking(target, kOracle), StftKernel(kOracle)).bins.abs() > 1e-9)
      .cast<double>();
}

MixtureScene scene_from(std::uint64_t seed, double t60, double duration = 1.0) {
  SceneSpec spec = sample_scene(seed, 2);
  spec.room.t60 = t60;
  return render_mixture({{speech_like(seed * 2 + 1, duration), 16000.0},
                         {speech_like(seed * 2 + 2, duration), 16000.0}},
                        spec.room, spec.gains_db);
}

TEST(OracleMask, EqualMagnitudes) {
  const auto x = oracle::gaussian(1, 4000);
  const RealMap active = active_bins(x);
  const Mask irm = oracle_mask(x, {x}, MaskKind::kIrm);
  const Mask ibm = oracle_mask(x, {x}, MaskKind::kIbm);
  EXPECT_EQ(irm.values.rows(), active.rows());
  for (Eigen::Index t = 0; t < active.rows(); ++t)
    for (Eigen::Index m = 0; m < active.cols(); ++m)
      if (active(t, m) > 0) {
        EXPECT_NEAR(irm.values(t, m), 0.5, 1e-9);
        EXPECT_EQ(ibm.values(t, m), 0.0);
      }
}

TEST(OracleMask, ZeroInterference) {
  const auto x = oracle::gaussian(2, 4000);
  const RealMap active = active_bins(x);
  const Mask ipsm = oracle_mask(x, {}, MaskKind::kIpsm);
  const Mask ibm = oracle_mask(x, {}, MaskKind::kIbm);
  const Mask silent = oracle_mask(x, {Waveform(4000, 0.0)}, MaskKind::kIpsm);
  for (Eigen::Index t = 0; t < active.rows(); ++t)
    for (Eigen::Index m = 0; m < active.cols(); ++m)
      if (active(t, m) > 0) {
        EXPECT_NEAR(ipsm.values(t, m), 1.0, 1e-9);
        EXPECT_EQ(ibm.values(t, m), 1.0);
        EXPECT_NEAR(silent.values(t, m), 1.0, 1e-9);
      }
}

TEST(OracleMask, DominantTarget) {
  const auto i = oracle::gaussian(3, 4000);
  const Waveform s = scaled(i, 2.0);
  const RealMap active = active_bins(s);
  const Mask ibm = oracle_mask(s, {i}, MaskKind::kIbm);
  const Mask irm = oracle_mask(s, {i}, MaskKind::kIrm);
  const Mask pow = oracle_mask(s, {i}, MaskKind::kIrm, kOracle, {IrmDomain::kPower, 1e-12});
  for (Eigen::Index t = 0; t < active.rows(); ++t)
    for (Eigen::Index m = 0; m < active.cols(); ++m)
      if (active(t, m) > 0) {
        EXPECT_EQ(ibm.values(t, m), 1.0);
        EXPECT_NEAR(irm.values(t, m), 2.0 / 3.0, 1e-9);
        EXPECT_NEAR(pow.values(t, m), 0.8, 1e-9);
      }
}

TEST(OracleMask, RangesAndScaleCovariance) {
  const auto s = oracle::gaussian(4, 6000);
  const std::vector<Waveform> others{oracle::gaussian(5, 6000), oracle::gaussian(6, 6000)};
  for (MaskKind k : {MaskKind::kIbm, MaskKind::kIrm, MaskKind::kIpsm}) {
    const Mask a = oracle_mask(s, others, k);
    EXPECT_GE(a.values.minCoeff(), 0.0);
    EXPECT_LE(a.values.maxCoeff(), 1.0);
    if (k == MaskKind::kIbm) {
      EXPECT_TRUE(((a.values == 0.0) || (a.values == 1.0)).all());
    }
    const Mask b =
        oracle_mask(scaled(s, 7.0), {scaled(others[0], 7.0), scaled(others[1], 7.0)}, k);
    EXPECT_LT((a.values - b.values).abs().maxCoeff(), 1e-9);
  }
  EXPECT_THROW(oracle_mask(s, {Waveform(10, 0.0)}, MaskKind::kIrm), Error);
  EXPECT_THROW(oracle_mask(s, others, MaskKind::kDirectionalHeuristic), Error);
}

TEST(DirectionalMask, Extremes) {
  const StftConfig cfg = StftConfig::feature_default();
  const DirectionalEvidence max{RealMap::Ones(4, 33), RealMap::Ones(4, 33)};
  const DirectionalEvidence min{RealMap::Constant(4, 33, -1.0), RealMap::Zero(4, 33)};
  EXPECT_EQ(directional_mask(max, nullptr, {}, cfg).values.minCoeff(), 1.0);
  EXPECT_EQ(directional_mask(min, nullptr, {}, cfg).values.maxCoeff(), 0.0);
  // Target loses on both AF and DPR against the interferer: zeroed.
  EXPECT_EQ(directional_mask(min, &max, {}, cfg).values.maxCoeff(), 0.0);
  // Target wins: unchanged.
  EXPECT_EQ(directional_mask(max, &min, {}, cfg).values.minCoeff(), 1.0);
}

TEST(DirectionalMask, ScoreAndContrast) {
  const StftConfig cfg = StftConfig::feature_default();
  RealMap af(1, 3), dpr(1, 3), af_i(1, 3), dpr_i(1, 3);
  af << 0.0, 0.5, -0.5;
  dpr << 0.5, 0.0, 0.9;
  af_i << 0.5, 0.0, 0.0;
  dpr_i << 0.1, 0.5, 0.5;
  const DirectionalEvidence t{af, dpr}, i{af_i, dpr_i};
  const Mask plain = directional_mask(t, nullptr, {1.0, 1.0}, cfg);
  EXPECT_DOUBLE_EQ(plain.values(0, 0), (0.5 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(plain.values(0, 1), (0.75 + 0.0) / 2.0);
  EXPECT_EQ(plain.kind, MaskKind::kDirectionalHeuristic);
  // Column 0 wins on DPR only, column 1 on AF only, column 2 on DPR only.
  const Mask both = directional_mask(t, &i, {1.0, 1.0}, cfg);
  EXPECT_TRUE((both.values == plain.values).all());
  // Without DPR only the AF comparison counts.
  const Mask af_only = directional_mask(t, &i, {1.0, 0.0}, cfg);
  EXPECT_EQ(af_only.values(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(af_only.values(0, 1), 0.75);
  EXPECT_EQ(af_only.values(0, 2), 0.0);
}

TEST(DirectionalMask, Errors) {
  const StftConfig cfg = StftConfig::feature_default();
  const DirectionalEvidence a{RealMap::Zero(4, 33), RealMap::Zero(4, 33)};
  const DirectionalEvidence bad{RealMap::Zero(4, 33), RealMap::Zero(5, 33)};
  const DirectionalEvidence other{RealMap::Zero(3, 33), RealMap::Zero(3, 33)};
  EXPECT_THROW(directional_mask(bad, nullptr, {}, cfg), Error);
  EXPECT_THROW(directional_mask(a, &other, {}, cfg), Error);
  EXPECT_THROW(directional_mask(a, nullptr, {0.0, 0.0}, cfg), Error);
  EXPECT_THROW(directional_mask(a, nullptr, {-1.0, 1.0}, cfg), Error);
}

TEST(ApplyMask, OnesAndZeros) {
  const StftKernel kernel(kOracle);
  const auto x = oracle::gaussian(7, 5000);
  const std::size_t T = num_frames(padded_length(x.size(), kOracle), kOracle);
  const Mask ones{RealMap::Ones(T, 129), kOracle, MaskKind::kIrm};
  const Mask zeros{RealMap::Zero(T, 129), kOracle, MaskKind::kIrm};
  const Waveform y = apply_mask(x, ones, kernel).estimate;
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(y[n], x[n], 1e-9);
  for (double v : apply_mask(x, zeros, kernel).estimate) EXPECT_EQ(v, 0.0);
  const Mask wrong_cfg{RealMap::Ones(T, 129), StftConfig::feature_default(), MaskKind::kIrm};
  EXPECT_THROW(apply_mask(x, wrong_cfg, kernel), Error);
  const Mask wrong_shape{RealMap::Ones(T + 1, 129), kOracle, MaskKind::kIrm};
  EXPECT_THROW(apply_mask(x, wrong_shape, kernel), Error);
}

TEST(ApplyMask, IpsmImprovesReverberantMixture) {
  const MixtureScene scene = scene_from(11, 0.3);
  const Mask m = oracle_mask(scene.images[0][0], {scene.images[1][0]}, MaskKind::kIpsm);
  const Waveform est = apply_mask(scene.mixture[0], m, StftKernel(kOracle)).estimate;
  EXPECT_GT(si_sdri(est, scene.images[0][0], scene.mixture[0]), 0.0);
}

TEST(DasBeamform, SingleChannelPassThrough) {
  const MicArray one = circular_array(1, 0.07);
  const auto x = oracle::gaussian(8, 3000);
  const Waveform y = das_beamform({x}, 123.0, one, StftKernel(kOracle)).estimate;
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(y[n], x[n], 1e-9);
  EXPECT_THROW(das_beamform({x, x}, 0.0, one, StftKernel(kOracle)), Error);
}

TEST(DasBeamform, SteeringAndSeparation) {
  const MicArray array = circular_array(6, 0.07);
  const StftKernel kernel(kOracle);
  double on = 0.0, off = 0.0, improvement = 0.0;
  const int n = 20;
  for (int s = 0; s < n; ++s) {
    RoomConfig room;
    room.array = array;
    room.dimensions = {8.0, 8.0, 3.0};
    room.array_center = {4.0, 4.0, 1.5};
    const double a = (18.0 * s) * kPi / 180.0;
    const Vec3 u{std::cos(a), std::sin(a), 0.0};
    room.source_positions = {room.array_center + 2.5 * u, room.array_center - 2.5 * u};
    const MixtureScene scene = render_mixture(
        {{white_noise(100 + s, 16000), 16000.0}, {white_noise(200 + s, 16000), 16000.0}}, room,
        std::vector<double>{0.0, 0.0});
    const MixtureScene single = render_mixture({{scene.dry_sources[0], 16000.0}},
                                              [&] {
                                                RoomConfig r = room;
                                                r.source_positions.resize(1);
                                                return r;
                                              }(),
                                              std::vector<double>{0.0});
    const double az = scene.azimuths[0];
    const auto& ref = single.images[0][0];
    on += si_sdr(das_beamform(single.mixture, az, array, kernel).estimate, ref);
    off += si_sdr(das_beamform(single.mixture, az + 90.0, array, kernel).estimate, ref);
    improvement += si_sdri(das_beamform(scene.mixture, az, array, kernel).estimate,
                           scene.images[0][0], scene.mixture[0]);
  }
  EXPECT_GT(on / n, off / n);
  EXPECT_GT(improvement / n, 0.0);
}

TEST(Heuristic, AnechoicWideSeparationImproves) {
  RunConfig cfg;
  const MicArray array = circular_array(6, 0.07);
  double total = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; count < 50; ++seed) {
    const SceneSpec spec = sample_scene(seed, 2);
    if (angle_difference(spec.azimuths[0], spec.azimuths[1]) <= 90.0) continue;
    const MixtureScene scene = scene_from(seed, 0.0);
    LoadedUtterance utt;
    utt.entry.azimuths = scene.azimuths;
    utt.entry.sample_rate = 16000.0;
    utt.mixture = scene.mixture;
    const DirectionalSeparator sep(utt, array, cfg);
    total += si_sdri(sep.separate(0), scene.images[0][0], scene.mixture[0]);
    ++count;
  }
  EXPECT_GT(total / count, 0.0);
}

TEST(Padding, LengthCoversOverlapAdd) {
  for (const StftConfig& cfg : {kOracle, StftConfig::feature_default()}) {
    for (std::size_t len : {1u, 100u, 16000u, 16001u}) {
      const std::size_t p = padded_length(len, cfg);
      EXPECT_GE(p, len + 2 * cfg.kernel_length());
      EXPECT_EQ((p - cfg.kernel_length()) % cfg.hop, 0u);
      const Waveform x(len, 1.0);
      const Waveform y = pad_for_masking(x, cfg);
      ASSERT_EQ(y.size(), p);
      for (std::size_t n = 0; n < p; ++n)
        EXPECT_EQ(y[n], n >= cfg.kernel_length() && n < cfg.kernel_length() + len ? 1.0 : 0.0);
    }
  }
}

}  // namespace
}  // namespace ssk
