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

#include "ssk/dataset_io.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

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

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Minimal RIFF/WAVE writer, independent of the library.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& payload, bool extensible = false) {
  std::string fmt;
  put_u16(fmt, extensible ? 0xFFFE : format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  if (extensible) {
    put_u16(fmt, 22);
    put_u16(fmt, bits);
    put_u32(fmt, 0);
    put_u16(fmt, format);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  }
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "LIST";
  put_u32(body, 4);
  body += "INFO";
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

TEST(Wav, Float32RoundTripIsExact) {
  oracle::TempDir dir;
  MultiWaveform x;
  for (std::uint64_t j = 0; j < 6; ++j) {
    Waveform w = oracle::gaussian(j, 16000);
    for (double& v : w) v = static_cast<float>(v * 0.1);
    x.push_back(w);
  }
  write_wav(dir.path() / "a.wav", x, 16000.0);
  const WavData d = read_wav(dir.path() / "a.wav", 16000.0);
  EXPECT_EQ(d.sample_rate, 16000.0);
  EXPECT_EQ(d.encoding, WavEncoding::kFloat32);
  EXPECT_EQ(d.channels, x);
}

TEST(Wav, Pcm16WithinOneLsb) {
  oracle::TempDir dir;
  Waveform w = oracle::gaussian(1, 8000);
  for (double& v : w) v = std::clamp(v * 0.3, -1.0, 1.0);
  w[0] = 1.0;
  w[1] = -1.0;
  write_wav(dir.path() / "p.wav", {w, w}, 16000.0, WavEncoding::kPcm16);
  const WavData d = read_wav(dir.path() / "p.wav");
  EXPECT_EQ(d.encoding, WavEncoding::kPcm16);
  ASSERT_EQ(d.channels.size(), 2u);
  for (std::size_t n = 0; n < w.size(); ++n)
    EXPECT_LE(std::fabs(d.channels[1][n] - w[n]), 1.0 / 32768.0);
}

TEST(Wav, ReadsForeignFiles) {
  oracle::TempDir dir;
  std::string pcm;
  for (std::int16_t v : {0, 16384, -32768, 32767}) put_u16(pcm, static_cast<std::uint16_t>(v));
  write_bytes(dir.path() / "pcm.wav", wav_bytes(1, 1, 8000, 16, pcm));
  const WavData a = read_wav(dir.path() / "pcm.wav");
  EXPECT_EQ(a.channels[0], (Waveform{0.0, 0.5, -1.0, 32767.0 / 32768.0}));
  EXPECT_EQ(a.sample_rate, 8000.0);

  std::string flt(8, '\0');
  const float f[2] = {0.25f, -0.75f};
  std::memcpy(flt.data(), f, 8);
  write_bytes(dir.path() / "ext.wav", wav_bytes(3, 2, 16000, 32, flt, true));
  const WavData b = read_wav(dir.path() / "ext.wav");
  EXPECT_EQ(b.channels, (MultiWaveform{{0.25}, {-0.75}}));
}

TEST(Wav, Errors) {
  oracle::TempDir dir;
  write_wav(dir.path() / "r.wav", {Waveform(100, 0.1)}, 8000.0);
  EXPECT_EQ(code_of([&] { read_wav(dir.path() / "r.wav", 16000.0); }), ErrorCode::kRateMismatch);

  write_bytes(dir.path() / "u8.wav", wav_bytes(1, 1, 16000, 8, std::string(10, '\x80')));
  EXPECT_EQ(code_of([&] { read_wav(dir.path() / "u8.wav"); }), ErrorCode::kUnsupported);

  std::string bytes = wav_bytes(1, 1, 16000, 16, std::string(100, '\0'));
  write_bytes(dir.path() / "t.wav", bytes.substr(0, bytes.size() - 10));
  EXPECT_EQ(code_of([&] { read_wav(dir.path() / "t.wav"); }), ErrorCode::kTruncated);

  write_bytes(dir.path() / "bad.wav", "RIFX0000WAVEjunk");
  EXPECT_EQ(code_of([&] { read_wav(dir.path() / "bad.wav"); }), ErrorCode::kFormat);

  EXPECT_THROW(read_wav(dir.path() / "missing.wav"), Error);
  EXPECT_THROW(write_wav(dir.path() / "n.wav", {Waveform{NAN}}, 16000.0), Error);
}

Manifest two_source_manifest(const fs::path& dir) {
  Manifest m;
  m.array = ArraySpec::from_array(circular_array(6, 0.07));
  UtteranceEntry e;
  e.id = "scene_00000";
  e.mixture = dir / "scene_00000" / "mixture.wav";
  e.images = {dir / "scene_00000" / "image_0.wav", dir / "scene_00000" / "image_1.wav"};
  e.dry = {dir / "scene_00000" / "dry_0.wav", dir / "scene_00000" / "dry_1.wav"};
  e.azimuths = {12.5, 271.25};
  e.t60 = 0.321;
  e.room_dimensions = {5.5, 6.25, 3.0};
  e.angle_difference = angle_difference(12.5, 271.25);
  e.seed = 0xFFFFFFFFFFFFFFF1ull;
  m.utterances.push_back(e);
  for (const auto& p : {e.mixture, e.images[0], e.images[1], e.dry[0], e.dry[1]}) {
    fs::create_directories(p.parent_path());
    write_wav(p, {Waveform(10, 0.0)}, 16000.0);
  }
  return m;
}

TEST(Manifest, RoundTrip) {
  oracle::TempDir dir;
  const Manifest m = two_source_manifest(dir.path());
  write_manifest(dir.path() / "manifest.json", m);
  const Manifest r = read_manifest(dir.path() / "manifest.json");
  EXPECT_EQ(r, m);
  EXPECT_EQ(r.array.to_array(), circular_array(6, 0.07));
  // Paths under the manifest directory are stored relative to it.
  const auto j = nlohmann::json::parse(read_file(dir.path() / "manifest.json"));
  EXPECT_EQ(j["utterances"][0]["mixture"], "scene_00000/mixture.wav");
}

TEST(Manifest, EmptyIsValid) {
  oracle::TempDir dir;
  Manifest m;
  m.array = ArraySpec::from_array(circular_array(6, 0.07));
  write_manifest(dir.path() / "m.json", m);
  EXPECT_TRUE(read_manifest(dir.path() / "m.json").utterances.empty());
}

TEST(Manifest, MissingFileIsNamed) {
  oracle::TempDir dir;
  const Manifest m = two_source_manifest(dir.path());
  write_manifest(dir.path() / "m.json", m);
  fs::remove(m.utterances[0].images[1]);
  try {
    read_manifest(dir.path() / "m.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
    EXPECT_NE(std::string(e.what()).find("image_1.wav"), std::string::npos);
  }
  EXPECT_NO_THROW(read_manifest(dir.path() / "m.json", false));
}

TEST(Manifest, SchemaErrors) {
  oracle::TempDir dir;
  const Manifest m = two_source_manifest(dir.path());
  write_manifest(dir.path() / "m.json", m);
  const auto base = nlohmann::json::parse(read_file(dir.path() / "m.json"));
  auto check = [&](nlohmann::json j, ErrorCode code) {
    write_file_atomic(dir.path() / "x.json", j.dump());
    EXPECT_EQ(code_of([&] { read_manifest(dir.path() / "x.json"); }), code) << j.dump();
  };
  auto j = base;
  j["extra"] = 1;
  check(j, ErrorCode::kSchema);
  j = base;
  j["schema_version"] = 2;
  check(j, ErrorCode::kSchema);
  j = base;
  j["utterances"][0]["color"] = "red";
  check(j, ErrorCode::kSchema);
  j = base;
  j["utterances"][0].erase("t60");
  check(j, ErrorCode::kSchema);
  j = base;
  j["utterances"][0]["azimuths"] = "north";
  check(j, ErrorCode::kSchema);
  j = base;
  j["utterances"][0]["azimuths"] = {1.0};
  check(j, ErrorCode::kSchema);
  write_file_atomic(dir.path() / "y.json", "{not json");
  EXPECT_EQ(code_of([&] { read_manifest(dir.path() / "y.json"); }), ErrorCode::kFormat);
}

FeatureStack random_stack(std::size_t T, std::size_t D) {
  FeatureStack s;
  const auto g = oracle::gaussian(T * D, T * D);
  s.data.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(D));
  for (std::size_t i = 0; i < T * D; ++i) s.data.data()[i] = static_cast<float>(g[i]);
  s.layout = {{"lps", 33}, {"cosipd", 198}, {"af_tgt", 33}, {"dpr_tgt", D - 264}};
  return s;
}

TEST(Features, RoundTripIsBitExact) {
  oracle::TempDir dir;
  const FeatureStack s = random_stack(100, 297);
  write_features(dir.path() / "f.tsnf", s);
  const FeatureStack r = read_features(dir.path() / "f.tsnf");
  EXPECT_EQ(r.layout, s.layout);
  ASSERT_EQ(r.frames(), 100u);
  ASSERT_EQ(r.dim(), 297u);
  EXPECT_EQ(std::memcmp(r.data.data(), s.data.data(), 100 * 297 * sizeof(float)), 0);
  const FeatureHeader h = read_feature_header(dir.path() / "f.tsnf");
  EXPECT_EQ(h.version, kFeatureVersion);
  EXPECT_EQ(h.frames, 100u);
  EXPECT_EQ(h.dim, 297u);
  EXPECT_EQ(h.descriptor, "lps:33;cosipd:198;af_tgt:33;dpr_tgt:33");
  const std::string bytes = read_file(dir.path() / "f.tsnf");
  EXPECT_EQ(bytes.substr(0, 5), "TSNF1");
}

TEST(Features, Errors) {
  oracle::TempDir dir;
  const FeatureStack s = random_stack(10, 297);
  write_features(dir.path() / "f.tsnf", s);
  const std::string bytes = read_file(dir.path() / "f.tsnf");

  write_file_atomic(dir.path() / "t.tsnf", bytes.substr(0, bytes.size() - 4));
  EXPECT_EQ(code_of([&] { read_features(dir.path() / "t.tsnf"); }), ErrorCode::kTruncated);

  write_file_atomic(dir.path() / "m.tsnf", "XXXX" + bytes.substr(4));
  EXPECT_EQ(code_of([&] { read_features(dir.path() / "m.tsnf"); }), ErrorCode::kFormat);

  std::string v2 = bytes;
  v2[5] = 2;
  write_file_atomic(dir.path() / "v.tsnf", v2);
  EXPECT_EQ(code_of([&] { read_features(dir.path() / "v.tsnf"); }), ErrorCode::kUnsupported);

  write_file_atomic(dir.path() / "x.tsnf", bytes + "junk");
  EXPECT_EQ(code_of([&] { read_features(dir.path() / "x.tsnf"); }), ErrorCode::kFormat);

  FeatureStack no_layout = s;
  no_layout.layout.clear();
  EXPECT_THROW(write_features(dir.path() / "e.tsnf", no_layout), Error);
}

TEST(AtomicWrite, CreatesParentsAndReplaces) {
  oracle::TempDir dir;
  const fs::path p = dir.path() / "a" / "b" / "c.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace ssk
