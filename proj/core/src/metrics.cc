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

#include "ssk/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ssk/error.h"

namespace ssk {
namespace {

constexpr std::array<double, kNumAngleBins + 1> kBinEdges{0.0, 15.0, 45.0,
                                                          90.0, 180.0};
constexpr std::array<const char*, kNumAngleBins> kBinLabels{
    "<15", "15-45", "45-90", ">90"};

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double si_sdr(std::span<const double> estimate,
              std::span<const double> reference) {
  require(estimate.size() == reference.size(),
          "estimate has " + std::to_string(estimate.size()) +
              " samples, reference " + std::to_string(reference.size()));
  require(!reference.empty(), "empty reference");
  const double mu_est = mean(estimate);
  const double mu_ref = mean(reference);

  double ref_energy = 0.0;
  double cross = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    const double r = reference[n] - mu_ref;
    ref_energy += r * r;
    cross += (estimate[n] - mu_est) * r;
  }
  require(ref_energy > 0.0, "reference is identically zero after mean removal");

  const double alpha = cross / ref_energy;
  double target_energy = 0.0;
  double error_energy = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    const double t = alpha * (reference[n] - mu_ref);
    const double e = (estimate[n] - mu_est) - t;
    target_energy += t * t;
    error_energy += e * e;
  }
  if (error_energy <= 1e-30 * target_energy) return kSiSdrCap;
  if (target_energy <= 1e-30 * error_energy) return -kSiSdrCap;
  const double db = 10.0 * std::log10(target_energy / error_energy);
  return std::clamp(db, -kSiSdrCap, kSiSdrCap);
}

double si_sdri(std::span<const double> estimate,
               std::span<const double> reference,
               std::span<const double> mixture_ref) {
  return si_sdr(estimate, reference) - si_sdr(mixture_ref, reference);
}

std::size_t angle_bin(double angle_difference) {
  for (std::size_t b = 1; b < kNumAngleBins; ++b)
    if (angle_difference < kBinEdges[b]) return b - 1;
  return kNumAngleBins - 1;
}

const char* angle_bin_label(std::size_t bin) { return kBinLabels.at(bin); }

EvalReport aggregate(std::span<const EvalRecord> records) {
  EvalReport report;
  std::array<double, kNumAngleBins> sums{};
  double total = 0.0;
  for (std::size_t b = 0; b < kNumAngleBins; ++b)
    report.bins[b].label = kBinLabels[b];
  for (const auto& r : records) {
    const std::size_t b = angle_bin(r.angle_difference);
    sums[b] += r.improvement();
    report.bins[b].count += 1;
    total += r.improvement();
    if (report.method.empty()) report.method = r.method;
  }
  for (std::size_t b = 0; b < kNumAngleBins; ++b)
    if (report.bins[b].count > 0)
      report.bins[b].mean_si_sdri =
          sums[b] / static_cast<double>(report.bins[b].count);
  report.count = records.size();
  if (report.count > 0)
    report.mean_si_sdri = total / static_cast<double>(report.count);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < kNumAngleBins; ++b) {
    bins.push_back({{"bin", report.bins[b].label},
                    {"lo", kBinEdges[b]},
                    {"hi", kBinEdges[b + 1]},
                    {"count", report.bins[b].count},
                    {"mean_si_sdri", opt(report.bins[b].mean_si_sdri)}});
  }
  return {{"method", report.method},
          {"count", report.count},
          {"mean_si_sdri", opt(report.mean_si_sdri)},
          {"bins", std::move(bins)}};
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream os;
  auto row = [&os](const std::string& label, std::size_t count,
                   const std::optional<double>& mean) {
    os << label << ',' << count << ',';
    if (mean) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", *mean);
      os << buf;
    }
    os << '\n';
  };
  os << "bin,count,mean_si_sdri\n";
  for (const auto& b : report.bins) row(b.label, b.count, b.mean_si_sdri);
  row("all", report.count, report.mean_si_sdri);
  return os.str();
}

}  // namespace ssk
