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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "oracles.h"
#include "ssk/error.h"

namespace ssk {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ssk::Error thrown";
  return ErrorCode::kIo;
}

RunConfig small_run(const fs::path& out, std::size_t scenes, std::uint64_t seed = 7) {
  RunConfig c;
  c.out = out;
  c.seed = seed;
  c.num_scenes = scenes;
  c.duration_s = 0.5;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

// One simulated dataset shared by the separation and evaluation tests.
const fs::path& shared_dataset() {
  static oracle::TempDir dir;
  static bool built = false;
  if (!built) {
    cmd_simulate(small_run(dir.path(), 3, 11));
    built = true;
  }
  return dir.path();
}

TEST(Simulate, RerunIsByteIdentical) {
  oracle::TempDir a, b;
  const SimulateSummary s = cmd_simulate(small_run(a.path(), 10));
  cmd_simulate(small_run(b.path(), 10));
  EXPECT_EQ(s.num_scenes, 10u);
  std::size_t binned = 0;
  for (std::size_t c : s.bin_counts) binned += c;
  EXPECT_EQ(binned, 10u);
  const auto fa = snapshot(a.path()), fb = snapshot(b.path());
  EXPECT_EQ(fa.size(), 1u + 10u * 5u);
  EXPECT_EQ(fa, fb);
  const Manifest m = read_manifest(s.manifest);
  ASSERT_EQ(m.utterances.size(), 10u);
  for (const auto& e : m.utterances) {
    EXPECT_EQ(e.num_sources(), 2u);
    EXPECT_EQ(read_wav(e.mixture).channels.size(), 6u);
  }
}

TEST(Simulate, SeedChangesOutput) {
  oracle::TempDir a, b;
  cmd_simulate(small_run(a.path(), 2, 1));
  cmd_simulate(small_run(b.path(), 2, 2));
  EXPECT_NE(read_file(a.path() / "manifest.json"), read_file(b.path() / "manifest.json"));
}

TEST(Simulate, ZeroScenesGivesEmptyManifest) {
  oracle::TempDir dir;
  const SimulateSummary s = cmd_simulate(small_run(dir.path(), 0));
  EXPECT_EQ(s.num_scenes, 0u);
  EXPECT_TRUE(read_manifest(s.manifest).utterances.empty());
}

TEST(Features, DimensionsAndDeterminism) {
  const fs::path& data = shared_dataset();
  oracle::TempDir f1, f2, f3;
  RunConfig c = small_run(f1.path(), 0);
  c.manifest = data / "manifest.json";
  const auto files = cmd_features(c);
  ASSERT_EQ(files.size(), 6u);
  for (const auto& p : files) {
    const FeatureHeader h = read_feature_header(p);
    EXPECT_EQ(h.dim, 297u);
    EXPECT_EQ(h.frames, read_features(p).frames());
  }
  c.out = f2.path();
  cmd_features(c);
  EXPECT_EQ(snapshot(f1.path()), snapshot(f2.path()));

  c.out = f3.path();
  c.features = "cosipd";
  for (const auto& p : cmd_features(c)) EXPECT_EQ(read_feature_header(p).dim, 198u);
}

TEST(Separate, IpsmImprovesAndSidecarNamesMethod) {
  const fs::path& data = shared_dataset();
  oracle::TempDir est;
  RunConfig c = small_run(est.path(), 0);
  c.manifest = data / "manifest.json";
  c.method = "ipsm";
  const auto files = cmd_separate(c);
  ASSERT_EQ(files.size(), 6u);
  EXPECT_TRUE(fs::exists(est.path() / "scene_00000_t1.wav"));
  const auto side = nlohmann::json::parse(read_file(est.path() / "scene_00000_t1.json"));
  EXPECT_EQ(side["method"], "ipsm");
  const EvalReport r = cmd_evaluate(c);
  EXPECT_EQ(r.count, 6u);
  ASSERT_TRUE(r.mean_si_sdri);
  EXPECT_GT(*r.mean_si_sdri, 0.0);
}

TEST(Separate, UnknownMethodIsConfigurationError) {
  RunConfig c = small_run("unused", 0);
  c.method = "magic";
  EXPECT_EQ(code_of([&] { cmd_separate(c); }), ErrorCode::kConfiguration);
}

TEST(Separate, DasWithOneMicEqualsMixture) {
  oracle::TempDir data, est;
  RunConfig c = small_run(data.path(), 1, 3);
  c.num_mics = 1;
  c.features = "lps";
  cmd_simulate(c);
  c.out = est.path();
  c.manifest = data.path() / "manifest.json";
  c.method = "das";
  cmd_separate(c);
  const Manifest m = read_manifest(*c.manifest);
  const Waveform mix = read_wav(m.utterances[0].mixture).channels[0];
  for (std::size_t k = 0; k < 2; ++k) {
    const Waveform e =
        read_wav(est.path() / ("scene_00000_t" + std::to_string(k) + ".wav")).channels[0];
    ASSERT_EQ(e.size(), mix.size());
    for (std::size_t n = 0; n < e.size(); ++n) EXPECT_NEAR(e[n], mix[n], 1e-6);
  }
}

TEST(Evaluate, MixtureAndReferenceAnchors) {
  const fs::path& data = shared_dataset();
  const Manifest m = read_manifest(data / "manifest.json");
  oracle::TempDir mix_dir, ref_dir;
  RunConfig c = small_run(mix_dir.path(), 0);
  c.manifest = data / "manifest.json";

  c.method = "mixture";
  cmd_separate(c);
  const EvalReport mix = cmd_evaluate(c);
  EXPECT_EQ(mix.method, "mixture");
  for (const auto& b : mix.bins)
    if (b.count) {
      EXPECT_NEAR(*b.mean_si_sdri, 0.0, 1e-9) << b.label;
    }

  c.out = ref_dir.path();
  c.method = "reference";
  cmd_separate(c);
  const EvalReport ref = cmd_evaluate(c);
  double expected = 0.0;
  std::size_t n = 0;
  for (const auto& e : m.utterances) {
    const LoadedUtterance u = load_utterance(e, true);
    for (std::size_t k = 0; k < e.num_sources(); ++k, ++n)
      expected += kSiSdrCap - si_sdr(u.mixture[0], u.images[k][0]);
  }
  ASSERT_TRUE(ref.mean_si_sdri);
  EXPECT_NEAR(*ref.mean_si_sdri, expected / static_cast<double>(n), 1e-6);
  EXPECT_TRUE(fs::exists(ref_dir.path() / "report.json"));
  EXPECT_TRUE(fs::exists(ref_dir.path() / "report.csv"));
}

TEST(Evaluate, MissingEstimatesAreListed) {
  const fs::path& data = shared_dataset();
  oracle::TempDir est;
  RunConfig c = small_run(est.path(), 0);
  c.manifest = data / "manifest.json";
  c.method = "mixture";
  cmd_separate(c);
  fs::remove(est.path() / "scene_00001_t0.wav");
  fs::remove(est.path() / "scene_00002_t1.wav");
  try {
    cmd_evaluate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("scene_00001_t0.wav"), std::string::npos);
    EXPECT_NE(msg.find("scene_00002_t1.wav"), std::string::npos);
  }
}

TEST(Perturb, ZeroErrorMatchesHeuristicAndIsDeterministic) {
  const fs::path& data = shared_dataset();
  oracle::TempDir p1, p2, h;
  RunConfig c = small_run(p1.path(), 0, 5);
  c.manifest = data / "manifest.json";
  c.direction_error_deg = 2.0;
  c.subcommand = Subcommand::kPerturb;
  const PerturbReport r = cmd_perturb(c);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].error_deg, 0.0);
  EXPECT_EQ(r.rows[2].error_deg, 2.0);
  c.out = p2.path();
  cmd_perturb(c);
  EXPECT_EQ(snapshot(p1.path()), snapshot(p2.path()));

  RunConfig s = small_run(h.path(), 0);
  s.manifest = c.manifest;
  s.method = "heuristic";
  cmd_separate(s);
  const EvalReport base = cmd_evaluate(s);
  ASSERT_TRUE(base.mean_si_sdri && r.rows[0].report.mean_si_sdri);
  EXPECT_NEAR(*r.rows[0].report.mean_si_sdri, *base.mean_si_sdri, 1e-4);
}

TEST(RunConfig, Validation) {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_NO_THROW(RunConfig{}.validate());
  EXPECT_EQ(bad([](RunConfig& c) { c.num_speakers = 1; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.num_speakers = 4; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.grid_step_deg = 7.0; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.jobs = 0; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.features = "lps,bogus"; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.win_len = 80; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) { c.num_mics = 1; }), ErrorCode::kConfiguration);
  EXPECT_EQ(bad([](RunConfig& c) {
              c.subcommand = Subcommand::kPerturb;
              c.features = "lps,dpr";
            }),
            ErrorCode::kConfiguration);
}

TEST(Helpers, DefaultPairs) {
  EXPECT_EQ(default_pairs(6).pairs(), PairSelection::six_mic_default().pairs());
  EXPECT_EQ(default_pairs(2).pairs(), (std::vector<MicPair>{{0, 1}}));
  EXPECT_EQ(default_pairs(4).size(), 4u);
}

TEST(Helpers, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, s, i));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(42, 1, 5), derive_seed(42, 1, 5));
  EXPECT_NE(derive_seed(42, 1, 5), derive_seed(43, 1, 5));
}

TEST(Helpers, ParallelFor) {
  for (std::size_t jobs : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(20, jobs,
                              [](std::size_t i) {
                                if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
  }
  parallel_for(0, 2, [](std::size_t) { FAIL(); });
}

TEST(Helpers, ClosestInterfererAndMeanAbove) {
  EXPECT_EQ(closest_interferer({0.0, 100.0, 350.0}, 0), 2u);
  EXPECT_EQ(closest_interferer({0.0, 100.0, 350.0}, 1), 0u);
  EXPECT_EQ(utterance_id(12), "scene_00012");

  const std::vector<EvalRecord> recs{{"a", 0.0, 10.0, 1.0, 0.0, "x"},
                                     {"b", 0.0, 20.0, 3.0, 0.0, "x"},
                                     {"c", 0.0, 100.0, 5.0, 0.0, "x"}};
  const EvalReport rep = aggregate(recs);
  EXPECT_NEAR(*mean_above(rep, 15.0), 4.0, 1e-12);
  EXPECT_NEAR(*mean_above(rep, 0.0), 3.0, 1e-12);
  EXPECT_FALSE(mean_above(aggregate({}), 15.0));
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(SSK_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  oracle::TempDir dir;
  const std::string out = " --out " + dir.path().string();
  EXPECT_EQ(run_cli("simulate --num-scenes 1 --duration 0.25" + out), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
  EXPECT_EQ(run_cli("separate --method magic" + out), 2);
  EXPECT_EQ(run_cli("simulate --num-speakers 5" + out), 2);
  EXPECT_EQ(run_cli("evaluate --method ipsm" + out), 1);
  EXPECT_NE(run_cli("nonsense"), 0);
}

}  // namespace
}  // namespace ssk
