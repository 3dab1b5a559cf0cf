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

#ifndef SSK_METRICS_H_
#define SSK_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssk {

// SI-SDR saturates here instead of reaching +/-inf.
inline constexpr double kSiSdrCap = 300.0;

// Scale-invariant SDR in dB. Both signals are made zero-mean first.
// Throws kInvalidArgument on a length mismatch or an all-zero reference.
double si_sdr(std::span<const double> estimate,
              std::span<const double> reference);

// si_sdr(estimate, reference) - si_sdr(mixture_ref, reference).
double si_sdri(std::span<const double> estimate,
               std::span<const double> reference,
               std::span<const double> mixture_ref);

struct EvalRecord {
  std::string utterance_id;
  double target_azimuth = 0.0;
  double angle_difference = 0.0;  // degrees, [0, 180]
  double si_sdr_est = 0.0;
  double si_sdr_mix = 0.0;
  std::string method;

  double improvement() const { return si_sdr_est - si_sdr_mix; }
};

inline constexpr std::size_t kNumAngleBins = 4;

// Bins [0,15) [15,45) [45,90) [90,180].
std::size_t angle_bin(double angle_difference);
const char* angle_bin_label(std::size_t bin);

struct BinSummary {
  std::string label;
  std::size_t count = 0;
  std::optional<double> mean_si_sdri;
};

struct EvalReport {
  std::array<BinSummary, kNumAngleBins> bins;
  std::size_t count = 0;
  std::optional<double> mean_si_sdri;
  std::string method;
};

EvalReport aggregate(std::span<const EvalRecord> records);

// {"method": ..., "count": n, "mean_si_sdri": x|null,
//  "bins": [{"bin": "<15", "lo": 0, "hi": 15, "count": n,
//            "mean_si_sdri": x|null}, ...]}
nlohmann::json to_json(const EvalReport& report);
// Header "bin,count,mean_si_sdri"; one row per bin plus an "all" row. Empty
// bins leave the mean column blank.
std::string to_csv(const EvalReport& report);

}  // namespace ssk

#endif  // SSK_METRICS_H_
