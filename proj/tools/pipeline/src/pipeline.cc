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

#include "ssk/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "ssk/error.h"
#include "ssk/geometry.h"
#include "ssk/room_sim.h"
#include "ssk/separation.h"
#include "ssk/signals.h"

namespace ssk {
namespace {

// Independent seed streams.
constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kSourceStream = 2;
constexpr std::uint64_t kSignStream = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_method(const std::string& m) {
  return std::any_of(kMethods.begin(), kMethods.end(),
                     [&](const char* k) { return m == k; });
}

fs::path estimate_path(const fs::path& dir, const std::string& id,
                       std::size_t target, const char* ext) {
  return dir / (id + "_t" + std::to_string(target) + ext);
}

std::vector<double> others_of(const std::vector<double>& az, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < az.size(); ++i)
    if (i != k) out.push_back(az[i]);
  return out;
}

double target_angle_difference(const std::vector<double>& az, std::size_t k) {
  const auto others = others_of(az, k);
  return others.empty() ? 180.0 : min_angle_difference(az[k], others);
}

std::vector<fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir))
    fail(ErrorCode::kMissingFile, "source directory " + dir.string() + " does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Waveform crop_or_pad(const Waveform& x, std::size_t n, std::mt19937_64& rng) {
  if (x.size() <= n) {
    Waveform out(n, 0.0);
    std::copy(x.begin(), x.end(), out.begin());
    return out;
  }
  std::uniform_int_distribution<std::size_t> off(0, x.size() - n);
  const auto b = x.begin() + static_cast<std::ptrdiff_t>(off(rng));
  return Waveform(b, b + static_cast<std::ptrdiff_t>(n));
}

Manifest load_manifest(const RunConfig& config) {
  const fs::path path = config.manifest_path();
  spdlog::debug("reading manifest {}", path.string());
  return read_manifest(path);
}

StftConfig with_rate(StftConfig config, double sample_rate) {
  config.sample_rate = sample_rate;
  return config;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace

// ---- config ----

void RunConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kConfiguration, msg); };
  if (num_speakers < 2 || num_speakers > 3) bad("--num-speakers must be 2 or 3");
  if (num_mics < 1) bad("at least one microphone is required");
  if (!(array_diameter > 0.0)) bad("--array-diameter must be positive");
  if (!(duration_s > 0.0)) bad("--duration must be positive");
  if (!(sample_rate > 0.0)) bad("sample rate must be positive");
  if (!(grid_step_deg > 0.0) || grid_step_deg > 180.0) bad("--grid-step must be in (0, 180]");
  const double n = 360.0 / grid_step_deg;
  if (std::fabs(n - std::round(n)) > 1e-9) bad("--grid-step must divide 360");
  if (!is_method(method)) bad("unknown --method '" + method + "'");
  if (direction_error_deg < 0.0 || direction_error_deg > 180.0)
    bad("--direction-error-deg must be in [0, 180]");
  if (jobs < 1) bad("--jobs must be at least 1");
  try {
    StftKernel check(feature_stft());
  } catch (const Error& e) {
    bad(std::string("feature STFT: ") + e.what());
  }
  FeatureSelection sel;
  try {
    sel = selection();
  } catch (const Error& e) {
    bad(std::string("--features: ") + e.what());
  }
  if ((sel.cosipd || sel.sinipd || sel.af) && num_mics < 2)
    bad("IPD and AF features need at least two microphones");
  if (subcommand == Subcommand::kPerturb && !sel.af)
    bad("perturb runs the directional heuristic, which needs 'af' in --features");
}

StftConfig RunConfig::feature_stft() const {
  return StftConfig::hann(win_len, hop, fft_size, sample_rate);
}

DirectionGrid RunConfig::grid() const {
  return DirectionGrid::uniform(
      static_cast<std::size_t>(std::lround(360.0 / grid_step_deg)));
}

FeatureSelection RunConfig::selection() const {
  return FeatureSelection::parse(features, condition);
}

fs::path RunConfig::manifest_path() const {
  return manifest ? *manifest : out / "manifest.json";
}

PairSelection default_pairs(std::size_t num_mics) {
  if (num_mics == 6) return PairSelection::six_mic_default();
  std::vector<MicPair> pairs;
  for (std::size_t j = 0; j + 1 < num_mics; ++j) pairs.push_back({j, j + 1});
  if (num_mics > 2) pairs.push_back({num_mics - 1, 0});
  return PairSelection(pairs, num_mics);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!stop) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string utterance_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", index);
  return buf;
}

std::size_t closest_interferer(const std::vector<double>& azimuths,
                               std::size_t target) {
  require(azimuths.size() >= 2, "no interferer to choose from");
  std::size_t best = target == 0 ? 1 : 0;
  for (std::size_t i = 0; i < azimuths.size(); ++i) {
    if (i == target) continue;
    if (angle_difference(azimuths[target], azimuths[i]) <
        angle_difference(azimuths[target], azimuths[best]))
      best = i;
  }
  return best;
}

// ---- simulate ----

SimulateSummary cmd_simulate(const RunConfig& config) {
  config.validate();
  const MicArray array = circular_array(config.num_mics, config.array_diameter);
  const std::size_t n_samples =
      static_cast<std::size_t>(std::llround(config.duration_s * config.sample_rate));

  std::vector<fs::path> pool;
  if (config.source_dir) {
    pool = list_wavs(*config.source_dir);
    if (pool.size() < config.num_speakers)
      fail(ErrorCode::kInvalidArgument,
           "insufficient source audio: " + std::to_string(pool.size()) +
               " WAV files in " + config.source_dir->string() + ", need " +
               std::to_string(config.num_speakers));
  }

  const fs::path manifest_path = config.manifest_path();
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + config.out.string() + ": " + ec.message());
  const fs::path out_dir = fs::absolute(config.out).lexically_normal();

  Manifest manifest;
  manifest.array = ArraySpec::from_array(array);
  manifest.utterances.resize(config.num_scenes);

  parallel_for(config.num_scenes, config.jobs, [&](std::size_t i) {
    const std::string id = utterance_id(i);
    const std::uint64_t scene_seed = derive_seed(config.seed, kSceneStream, i);
    const SceneSpec spec =
        sample_scene(scene_seed, config.num_speakers, config.sample_rate, array);

    std::vector<DrySource> dry;
    std::mt19937_64 rng(derive_seed(config.seed, kSourceStream, i));
    if (pool.empty()) {
      for (std::size_t k = 0; k < config.num_speakers; ++k)
        dry.push_back({speech_like(derive_seed(scene_seed, kSourceStream, k),
                                   config.duration_s, config.sample_rate),
                       config.sample_rate});
    } else {
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t k = 0; k < config.num_speakers; ++k) {
        const WavData w = read_wav(pool[idx[k]], config.sample_rate);
        dry.push_back({crop_or_pad(w.channels.front(), n_samples, rng), config.sample_rate});
      }
    }

    const MixtureScene scene = render_mixture(dry, spec.room, spec.gains_db);
    const fs::path dir = out_dir / id;
    UtteranceEntry e;
    e.id = id;
    e.mixture = dir / "mixture.wav";
    write_wav(e.mixture, scene.mixture, config.sample_rate);
    for (std::size_t k = 0; k < scene.num_sources(); ++k) {
      e.images.push_back(dir / ("image_" + std::to_string(k) + ".wav"));
      e.dry.push_back(dir / ("dry_" + std::to_string(k) + ".wav"));
      write_wav(e.images.back(), scene.images[k], config.sample_rate);
      write_wav(e.dry.back(), {scene.dry_sources[k]}, config.sample_rate);
    }
    e.azimuths = scene.azimuths;
    e.t60 = scene.t60;
    e.room_dimensions = scene.room_dimensions;
    e.angle_difference = target_angle_difference(e.azimuths, 0);
    e.sample_rate = config.sample_rate;
    e.seed = scene_seed;
    spdlog::debug("{}: t60 {:.2f} s, angle difference {:.1f} deg", id, e.t60,
                  e.angle_difference);
    manifest.utterances[i] = std::move(e);
  });

  write_manifest(manifest_path, manifest);

  SimulateSummary summary;
  summary.manifest = manifest_path;
  summary.num_scenes = config.num_scenes;
  for (const auto& u : manifest.utterances)
    summary.bin_counts[angle_bin(u.angle_difference)] += 1;
  spdlog::info("simulated {} scenes into {}", summary.num_scenes, out_dir.string());
  return summary;
}

// ---- shared ----

LoadedUtterance load_utterance(const UtteranceEntry& entry, bool with_images) {
  LoadedUtterance u;
  u.entry = entry;
  u.mixture = read_wav(entry.mixture, entry.sample_rate).channels;
  if (with_images) {
    for (const auto& p : entry.images) {
      MultiWaveform img = read_wav(p, entry.sample_rate).channels;
      if (img.size() != u.mixture.size() || img.front().size() != u.mixture.front().size())
        fail(ErrorCode::kFormat, entry.id + ": image " + p.string() +
                                     " does not match the mixture shape");
      u.images.push_back(std::move(img));
    }
  }
  return u;
}

Waveform separate_one(const LoadedUtterance& utt, const MicArray& array,
                      std::size_t target, const RunConfig& config,
                      double azimuth_offset_deg) {
  const auto& az = utt.entry.azimuths;
  require(target < az.size(), utt.entry.id + ": target index out of range");
  require(utt.mixture.size() == array.size(),
          utt.entry.id + ": mixture has " + std::to_string(utt.mixture.size()) +
              " channels, array has " + std::to_string(array.size()));
  const std::size_t ref = array.ref_index();
  const Waveform& mix_ref = utt.mixture[ref];
  const std::string& m = config.method;
  const double look = normalize_azimuth(az[target] + azimuth_offset_deg);

  if (m == "mixture") return mix_ref;

  if (m == "ibm" || m == "irm" || m == "ipsm" || m == "reference") {
    if (utt.images.size() != az.size())
      fail(ErrorCode::kMissingFile,
           utt.entry.id + ": oracle method '" + m + "' needs the source images");
    if (m == "reference") return utt.images[target][ref];
    const MaskKind kind = m == "ibm"   ? MaskKind::kIbm
                          : m == "irm" ? MaskKind::kIrm
                                       : MaskKind::kIpsm;
    const StftConfig oc = StftConfig::oracle_default(utt.entry.sample_rate);
    std::vector<Waveform> others;
    for (std::size_t k = 0; k < utt.images.size(); ++k)
      if (k != target) others.push_back(utt.images[k][ref]);
    const Mask mask = oracle_mask(utt.images[target][ref], others, kind, oc);
    return apply_mask(mix_ref, mask, StftKernel(oc)).estimate;
  }

  if (m == "das") {
    const StftKernel kernel(StftConfig::oracle_default(utt.entry.sample_rate));
    return das_beamform(utt.mixture, look, array, kernel).estimate;
  }

  return DirectionalSeparator(utt, array, config).separate(target, azimuth_offset_deg);
}

DirectionalSeparator::DirectionalSeparator(const LoadedUtterance& utt,
                                           const MicArray& array,
                                           const RunConfig& config)
    : utt_(utt),
      array_(array),
      selection_(config.selection()),
      config_(with_rate(config.feature_stft(), utt.entry.sample_rate)),
      kernel_(config_),
      pairs_(default_pairs(array.size())) {
  require(selection_.af, "the heuristic needs 'af' in --features");
  require(utt.mixture.size() == array.size(),
          utt.entry.id + ": mixture channel count differs from the array");
  spec_ = stft_multichannel(pad_for_masking(utt.mixture, config_), kernel_);
  ipd_ = ipd(spec_, pairs_);
  if (selection_.dpr) {
    bank_.emplace(array, config.grid(), config_);
    dpr_ = dpr_all(spec_, *bank_);
  }
}

DirectionalEvidence DirectionalSeparator::evidence(double azimuth) const {
  DirectionalEvidence e;
  e.af = angle_feature(ipd_, spec_.channels[array_.ref_index()], azimuth, array_, pairs_);
  if (selection_.dpr)
    e.dpr = dpr_share_normalized(dpr_[nearest_direction(bank_->grid(), azimuth)],
                                 dpr_.size());
  return e;
}

Waveform DirectionalSeparator::separate(std::size_t target,
                                        double azimuth_offset_deg) const {
  const auto& az = utt_.entry.azimuths;
  require(target < az.size(), utt_.entry.id + ": target index out of range");
  const DirectionalEvidence tgt = evidence(normalize_azimuth(az[target] + azimuth_offset_deg));
  std::optional<DirectionalEvidence> intf;
  if (selection_.condition == DirectionalCondition::kTargetPlusInterference && az.size() > 1)
    intf = evidence(az[closest_interferer(az, target)]);
  const HeuristicParams params{1.0, selection_.dpr ? 1.0 : 0.0};
  const Mask mask = directional_mask(tgt, intf ? &*intf : nullptr, params, config_);
  return apply_mask(utt_.mixture[array_.ref_index()], mask, kernel_).estimate;
}

// ---- features ----

std::vector<fs::path> cmd_features(const RunConfig& config) {
  config.validate();
  const Manifest manifest = load_manifest(config);
  const MicArray array = manifest.array.to_array();
  const FeatureSelection sel = config.selection();
  if ((sel.cosipd || sel.sinipd || sel.af) && array.size() < 2)
    fail(ErrorCode::kConfiguration, "IPD and AF features need at least two microphones");
  const PairSelection pairs = array.size() >= 2 ? default_pairs(array.size())
                                                : PairSelection({}, array.size());

  std::vector<std::vector<fs::path>> written(manifest.utterances.size());
  parallel_for(manifest.utterances.size(), config.jobs, [&](std::size_t i) {
    const UtteranceEntry& e = manifest.utterances[i];
    StftConfig fc = config.feature_stft();
    fc.sample_rate = e.sample_rate;
    const StftKernel kernel(fc);
    const MultiWaveform mix = read_wav(e.mixture, e.sample_rate).channels;
    if (mix.size() != array.size())
      fail(ErrorCode::kFormat, e.id + ": mixture channel count differs from the array");
    if (sel.condition == DirectionalCondition::kTargetPlusInterference && e.num_sources() < 2)
      fail(ErrorCode::kConfiguration, e.id + ": tgt+intf needs at least two sources");
    const MultichannelSpectrogram spec = stft_multichannel(mix, kernel);
    std::optional<DasFilterbank> bank;
    if (sel.dpr) bank.emplace(array, config.grid(), fc);
    FeatureContext ctx{&array, &pairs, bank ? &*bank : nullptr, {}};
    for (std::size_t k = 0; k < e.num_sources(); ++k) {
      std::optional<double> intf;
      if (sel.condition == DirectionalCondition::kTargetPlusInterference)
        intf = e.azimuths[closest_interferer(e.azimuths, k)];
      const FeatureStack fs_ = compute_features(spec, ctx, sel, e.azimuths[k], intf);
      const fs::path p = estimate_path(config.out, e.id, k, ".tsnf");
      write_features(p, fs_);
      written[i].push_back(p);
    }
  });
  std::vector<fs::path> out;
  for (auto& w : written) out.insert(out.end(), w.begin(), w.end());
  spdlog::info("wrote {} feature files to {}", out.size(), config.out.string());
  return out;
}

// ---- separate ----

std::vector<fs::path> cmd_separate(const RunConfig& config) {
  config.validate();
  const Manifest manifest = load_manifest(config);
  const MicArray array = manifest.array.to_array();
  const bool needs_images = config.method == "ibm" || config.method == "irm" ||
                            config.method == "ipsm" || config.method == "reference";

  std::vector<std::vector<fs::path>> written(manifest.utterances.size());
  parallel_for(manifest.utterances.size(), config.jobs, [&](std::size_t i) {
    const LoadedUtterance utt = load_utterance(manifest.utterances[i], needs_images);
    for (std::size_t k = 0; k < utt.entry.num_sources(); ++k) {
      const Waveform est = separate_one(utt, array, k, config);
      const fs::path wav = estimate_path(config.out, utt.entry.id, k, ".wav");
      write_wav(wav, {est}, utt.entry.sample_rate);
      write_json(estimate_path(config.out, utt.entry.id, k, ".json"),
                 {{"utterance", utt.entry.id},
                  {"target_index", k},
                  {"target_azimuth", utt.entry.azimuths[k]},
                  {"method", config.method},
                  {"features", config.method == "heuristic" ? config.features : ""}});
      written[i].push_back(wav);
    }
  });
  std::vector<fs::path> out;
  for (auto& w : written) out.insert(out.end(), w.begin(), w.end());
  spdlog::info("{}: wrote {} estimates to {}", config.method, out.size(),
               config.out.string());
  return out;
}

// ---- evaluate ----

EvalReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  const Manifest manifest = load_manifest(config);
  const MicArray array = manifest.array.to_array();
  const fs::path dir = config.estimates ? *config.estimates : config.out;

  std::vector<std::string> missing;
  for (const auto& e : manifest.utterances)
    for (std::size_t k = 0; k < e.num_sources(); ++k) {
      const fs::path p = estimate_path(dir, e.id, k, ".wav");
      if (!fs::exists(p)) missing.push_back(p.string());
    }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " estimate(s) missing:";
    for (const auto& m : missing) msg += "\n  " + m;
    fail(ErrorCode::kMissingFile, msg);
  }

  std::vector<std::vector<EvalRecord>> per_utt(manifest.utterances.size());
  parallel_for(manifest.utterances.size(), config.jobs, [&](std::size_t i) {
    const LoadedUtterance utt = load_utterance(manifest.utterances[i], true);
    const std::size_t ref = array.ref_index();
    for (std::size_t k = 0; k < utt.entry.num_sources(); ++k) {
      const Waveform est =
          read_wav(estimate_path(dir, utt.entry.id, k, ".wav"), utt.entry.sample_rate)
              .channels.front();
      const Waveform& reference = utt.images[k][ref];
      if (est.size() != reference.size())
        fail(ErrorCode::kFormat, utt.entry.id + " target " + std::to_string(k) +
                                     ": estimate length differs from the reference");
      std::string method = config.method;
      const fs::path side = estimate_path(dir, utt.entry.id, k, ".json");
      if (fs::exists(side)) {
        const auto j = nlohmann::json::parse(read_file(side));
        if (j.contains("method")) method = j.at("method").get<std::string>();
      }
      EvalRecord r;
      r.utterance_id = utt.entry.id;
      r.target_azimuth = utt.entry.azimuths[k];
      r.angle_difference = target_angle_difference(utt.entry.azimuths, k);
      r.si_sdr_est = si_sdr(est, reference);
      r.si_sdr_mix = si_sdr(utt.mixture[ref], reference);
      r.method = method;
      per_utt[i].push_back(std::move(r));
    }
  });
  std::vector<EvalRecord> records;
  for (auto& v : per_utt) records.insert(records.end(), v.begin(), v.end());
  const EvalReport report = aggregate(records);

  write_json(config.out / "report.json", to_json(report));
  write_file_atomic(config.out / "report.csv", to_csv(report));
  spdlog::info("evaluated {} estimates; mean SI-SDRi {}", report.count,
               report.mean_si_sdri ? std::to_string(*report.mean_si_sdri) : "n/a");
  return report;
}

// ---- perturb ----

PerturbReport cmd_perturb(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.subcommand = Subcommand::kPerturb;
  cfg.method = "heuristic";
  cfg.validate();
  const Manifest manifest = load_manifest(cfg);
  const MicArray array = manifest.array.to_array();
  const auto steps = static_cast<std::size_t>(std::floor(cfg.direction_error_deg + 1e-9));

  // records[u][e] for utterance u and error magnitude e.
  std::vector<std::vector<std::vector<EvalRecord>>> records(manifest.utterances.size());
  parallel_for(manifest.utterances.size(), cfg.jobs, [&](std::size_t i) {
    const LoadedUtterance utt = load_utterance(manifest.utterances[i], true);
    const std::size_t ref = array.ref_index();
    const DirectionalSeparator separator(utt, array, cfg);
    records[i].resize(steps + 1);
    for (std::size_t k = 0; k < utt.entry.num_sources(); ++k) {
      const Waveform& reference = utt.images[k][ref];
      const double mix_sdr = si_sdr(utt.mixture[ref], reference);
      const double sign =
          (derive_seed(cfg.seed, kSignStream, i * 8 + k) & 1u) ? 1.0 : -1.0;
      for (std::size_t e = 0; e <= steps; ++e) {
        const Waveform est = separator.separate(k, sign * static_cast<double>(e));
        EvalRecord r;
        r.utterance_id = utt.entry.id;
        r.target_azimuth = utt.entry.azimuths[k];
        r.angle_difference = target_angle_difference(utt.entry.azimuths, k);
        r.si_sdr_est = si_sdr(est, reference);
        r.si_sdr_mix = mix_sdr;
        r.method = "heuristic";
        records[i][e].push_back(std::move(r));
      }
    }
  });

  PerturbReport report;
  report.features = cfg.features;
  for (std::size_t e = 0; e <= steps; ++e) {
    std::vector<EvalRecord> flat;
    for (const auto& u : records) flat.insert(flat.end(), u[e].begin(), u[e].end());
    report.rows.push_back({static_cast<double>(e), aggregate(flat)});
  }
  write_json(cfg.out / "perturb.json", to_json(report));
  write_file_atomic(cfg.out / "perturb.csv", to_csv(report));
  spdlog::info("perturbation sweep over {} error steps written to {}", steps + 1,
               cfg.out.string());
  return report;
}

nlohmann::json to_json(const PerturbReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = to_json(r.report);
    j["error_deg"] = r.error_deg;
    rows.push_back(std::move(j));
  }
  return {{"method", "heuristic"},
          {"features", report.features},
          {"rows", std::move(rows)},
          {"note",
           "single-target estimates; no permutation is solved, so the <15 bin "
           "is not comparable to two-output systems"}};
}

std::string to_csv(const PerturbReport& report) {
  std::ostringstream os;
  os << "error_deg,bin,count,mean_si_sdri\n";
  for (const auto& r : report.rows) {
    const std::string body = to_csv(r.report);
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line))
      os << static_cast<long long>(std::lround(r.error_deg)) << ',' << line << '\n';
  }
  return os.str();
}

std::optional<double> mean_above(const EvalReport& report, double min_angle_deg) {
  static constexpr std::array<double, kNumAngleBins> kLower{0.0, 15.0, 45.0, 90.0};
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < kNumAngleBins; ++b) {
    if (kLower[b] < min_angle_deg || !report.bins[b].mean_si_sdri) continue;
    sum += *report.bins[b].mean_si_sdri * static_cast<double>(report.bins[b].count);
    count += report.bins[b].count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace ssk
