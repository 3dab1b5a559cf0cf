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

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ssk/error.h"
#include "ssk/pipeline.h"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("ssk");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SSK_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour an explicit "off".
    if (level != spdlog::level::off || std::string(env) == "off")
      spdlog::set_level(level);
    else
      spdlog::warn("ignoring unknown SSK_LOG level '{}'", env);
  }
}

void add_common(CLI::App* cmd, ssk::RunConfig& cfg, std::string& cond,
                std::string& out, std::string& manifest) {
  cmd->add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
  cmd->add_option("--num-speakers", cfg.num_speakers, "Sources per scene (2 or 3)")
      ->capture_default_str();
  cmd->add_option("--array-diameter", cfg.array_diameter,
                  "Circular array diameter in meters")
      ->capture_default_str();
  cmd->add_option("--num-mics", cfg.num_mics, "Microphones on the circle")
      ->capture_default_str();
  cmd->add_option("--fft-size", cfg.fft_size, "Feature FFT size")->capture_default_str();
  cmd->add_option("--win-len", cfg.win_len, "Feature window length")->capture_default_str();
  cmd->add_option("--hop", cfg.hop, "Feature hop")->capture_default_str();
  cmd->add_option("--grid-step", cfg.grid_step_deg, "DPR direction grid step in degrees")
      ->capture_default_str();
  cmd->add_option("--features", cfg.features,
                  "Comma list of lps,cosipd,sinipd,af,dpr")
      ->capture_default_str();
  cmd->add_option("--cond", cond, "Directional condition")
      ->check(CLI::IsMember({"tgt", "tgt+intf"}))
      ->capture_default_str();
  cmd->add_option("--method", cfg.method,
                  "ibm, irm, ipsm, heuristic, das, mixture or reference")
      ->capture_default_str();
  cmd->add_option("--out", out, "Output directory")->capture_default_str();
  cmd->add_option("--manifest", manifest, "Manifest path (default <out>/manifest.json)");
  cmd->add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Multichannel direction-informed separation toolkit"};
  app.require_subcommand(1);

  ssk::RunConfig cfg;
  std::string cond = "tgt";
  std::string out = cfg.out.string();
  std::string manifest;
  std::string estimates;
  std::string source_dir;

  const std::map<std::string, ssk::Subcommand> kinds{
      {"simulate", ssk::Subcommand::kSimulate},
      {"features", ssk::Subcommand::kFeatures},
      {"separate", ssk::Subcommand::kSeparate},
      {"evaluate", ssk::Subcommand::kEvaluate},
      {"perturb", ssk::Subcommand::kPerturb}};

  auto* simulate = app.add_subcommand("simulate", "Render reverberant multi-speaker scenes");
  auto* features = app.add_subcommand("features", "Write TSNF1 feature files");
  auto* separate = app.add_subcommand("separate", "Estimate every source of every scene");
  auto* evaluate = app.add_subcommand("evaluate", "Binned SI-SDRi report");
  auto* perturb = app.add_subcommand("perturb", "Direction-error sweep for the heuristic");
  for (auto* cmd : {simulate, features, separate, evaluate, perturb})
    add_common(cmd, cfg, cond, out, manifest);

  simulate->add_option("--num-scenes", cfg.num_scenes, "Scenes to render")
      ->capture_default_str();
  simulate->add_option("--duration", cfg.duration_s, "Seconds per scene")
      ->capture_default_str();
  simulate->add_option("--source-dir", source_dir,
                       "Directory of mono WAVs (synthetic sources when omitted)");
  evaluate->add_option("--estimates", estimates,
                       "Directory holding the estimates (default --out)");
  perturb->add_option("--direction-error-deg", cfg.direction_error_deg,
                      "Largest direction error; swept in 1 degree steps")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (const auto* cmd : app.get_subcommands()) cfg.subcommand = kinds.at(cmd->get_name());
  cfg.condition = cond == "tgt+intf" ? ssk::DirectionalCondition::kTargetPlusInterference
                                     : ssk::DirectionalCondition::kTarget;
  cfg.out = out;
  if (!manifest.empty()) cfg.manifest = manifest;
  if (!estimates.empty()) cfg.estimates = estimates;
  if (!source_dir.empty()) cfg.source_dir = source_dir;
  if (cfg.jobs == 0) cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

  try {
    switch (cfg.subcommand) {
      case ssk::Subcommand::kSimulate: {
        const auto s = ssk::cmd_simulate(cfg);
        std::cout << "scenes: " << s.num_scenes << "\nmanifest: " << s.manifest.string()
                  << "\nangle difference histogram:\n";
        for (std::size_t b = 0; b < ssk::kNumAngleBins; ++b)
          std::cout << "  " << ssk::angle_bin_label(b) << ": " << s.bin_counts[b] << '\n';
        break;
      }
      case ssk::Subcommand::kFeatures: {
        const auto files = ssk::cmd_features(cfg);
        std::cout << "feature files: " << files.size() << '\n';
        break;
      }
      case ssk::Subcommand::kSeparate: {
        const auto files = ssk::cmd_separate(cfg);
        std::cout << "estimates: " << files.size() << '\n';
        break;
      }
      case ssk::Subcommand::kEvaluate:
        std::cout << ssk::to_csv(ssk::cmd_evaluate(cfg));
        break;
      case ssk::Subcommand::kPerturb:
        std::cout << ssk::to_csv(ssk::cmd_perturb(cfg));
        break;
    }
  } catch (const ssk::Error& e) {
    spdlog::error("{} ({})", e.what(), ssk::to_string(e.code()));
    return e.code() == ssk::ErrorCode::kConfiguration ? 2 : 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
