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

// Batch driver behind the `ssk` executable. Each cmd_* function is what the
// matching subcommand runs; they are kept in a library so tests can call them
// directly.

#ifndef SSK_PIPELINE_H_
#define SSK_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssk/dataset_io.h"
#include "ssk/metrics.h"
#include "ssk/separation.h"
#include "ssk/spatial_features.h"
#include "ssk/spectral.h"

namespace ssk {

enum class Subcommand { kSimulate, kFeatures, kSeparate, kEvaluate, kPerturb };

// Separation methods accepted by cmd_separate. "mixture" and "reference"
// pass through the unprocessed mixture or the true image; they anchor the
// evaluation scale.
inline constexpr std::array<const char*, 7> kMethods{
    "ibm", "irm", "ipsm", "heuristic", "das", "mixture", "reference"};

struct RunConfig {
  Subcommand subcommand = Subcommand::kSimulate;
  std::uint64_t seed = 1;

  // simulate
  std::size_t num_scenes = 100;
  std::size_t num_speakers = 2;
  std::size_t num_mics = 6;
  double array_diameter = 0.07;
  double duration_s = 2.0;
  double sample_rate = 16000.0;
  std::optional<fs::path> source_dir;  // WAVs; synthetic sources when unset

  // feature STFT; the oracle masks and DAS use the 256-point configuration
  std::size_t fft_size = 64;
  std::size_t win_len = 40;
  std::size_t hop = 20;
  double grid_step_deg = 10.0;
  std::string features = "lps,cosipd,af,dpr";
  DirectionalCondition condition = DirectionalCondition::kTarget;

  std::string method = "ipsm";
  double direction_error_deg = 10.0;  // perturb: largest error magnitude

  fs::path out = "out";
  std::optional<fs::path> manifest;   // defaults to <out>/manifest.json
  std::optional<fs::path> estimates;  // evaluate: defaults to <out>

  std::size_t jobs = 1;

  // Throws kConfiguration on inconsistent settings.
  void validate() const;

  StftConfig feature_stft() const;
  DirectionGrid grid() const;
  FeatureSelection selection() const;
  fs::path manifest_path() const;
};

// Microphone pairs used for IPD/AF: the default six pairs on a six-element
// array, otherwise neighbouring pairs around the array.
PairSelection default_pairs(std::size_t num_mics);

// Deterministic per-item seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index);

// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
// after all workers have stopped.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

std::string utterance_id(std::size_t index);

struct SimulateSummary {
  fs::path manifest;
  std::size_t num_scenes = 0;
  std::array<std::size_t, kNumAngleBins> bin_counts{};
};

// Writes <out>/<id>/{mixture,image_k,dry_k}.wav (float32) and the manifest.
SimulateSummary cmd_simulate(const RunConfig& config);

// One TSNF1 file per utterance and target speaker: <out>/<id>_t<k>.tsnf.
std::vector<fs::path> cmd_features(const RunConfig& config);

// One estimate per utterance and target speaker: <out>/<id>_t<k>.wav plus a
// JSON sidecar naming the method.
std::vector<fs::path> cmd_separate(const RunConfig& config);

// Reads estimates from `estimates` (or `out`), writes report.json and
// report.csv to `out`. Missing estimates throw kMissingFile listing them all.
EvalReport cmd_evaluate(const RunConfig& config);

struct PerturbRow {
  double error_deg = 0.0;
  EvalReport report;
};

struct PerturbReport {
  std::string features;
  std::vector<PerturbRow> rows;
};

// Heuristic separation with the target direction offset by 0, 1, ..., N
// degrees (N = direction_error_deg), random sign per utterance and target.
// Writes perturb.json and perturb.csv to `out`.
PerturbReport cmd_perturb(const RunConfig& config);

nlohmann::json to_json(const PerturbReport& report);
std::string to_csv(const PerturbReport& report);

// Mean SI-SDRi over the bins at or above `min_angle_deg` (count-weighted).
std::optional<double> mean_above(const EvalReport& report,
                                 double min_angle_deg);

// ---- shared pieces, also used by tests ----

struct LoadedUtterance {
  UtteranceEntry entry;
  MultiWaveform mixture;
  std::vector<MultiWaveform> images;  // empty unless requested
};

LoadedUtterance load_utterance(const UtteranceEntry& entry, bool with_images);

// Estimate of source `target` for one utterance. `azimuth_offset_deg` shifts
// the target direction given to the directional methods.
Waveform separate_one(const LoadedUtterance& utt, const MicArray& array,
                      std::size_t target, const RunConfig& config,
                      double azimuth_offset_deg = 0.0);

// The directional heuristic for one utterance. Spectrograms, IPDs and the
// DPR of every grid direction are computed once, so several targets and
// direction offsets can be tried cheaply.
class DirectionalSeparator {
 public:
  // Keeps references to `utt` and `array`; both must outlive the separator.
  DirectionalSeparator(const LoadedUtterance& utt, const MicArray& array,
                       const RunConfig& config);

  Waveform separate(std::size_t target, double azimuth_offset_deg = 0.0) const;
  DirectionalEvidence evidence(double azimuth) const;

 private:
  const LoadedUtterance& utt_;
  const MicArray& array_;
  FeatureSelection selection_;
  StftConfig config_;
  StftKernel kernel_;
  PairSelection pairs_;
  MultichannelSpectrogram spec_;
  IpdMaps ipd_;
  std::optional<DasFilterbank> bank_;
  std::vector<RealMap> dpr_;
};

// Index of the interferer closest in azimuth to `target`.
std::size_t closest_interferer(const std::vector<double>& azimuths,
                               std::size_t target);

}  // namespace ssk

#endif  // SSK_PIPELINE_H_
