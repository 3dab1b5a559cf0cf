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

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssk/error.h"

namespace ssk {
namespace {

using json = nlohmann::json;

// ---- little-endian byte helpers ----

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      fail(ErrorCode::kTruncated, path_.string() + ": truncated " + what +
                                      " (need " + std::to_string(n) +
                                      " bytes, have " +
                                      std::to_string(remaining()) + ")");
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  const std::string& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

// ---- WAV ----

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// ---- manifest ----

[[noreturn]] void schema_error(const fs::path& path, const std::string& msg) {
  fail(ErrorCode::kSchema, path.string() + ": " + msg +
                               " (manifest schema version " +
                               std::to_string(kManifestSchemaVersion) + ")");
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where, const fs::path& path) {
  if (!obj.is_object()) schema_error(path, where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) schema_error(path, "unknown field '" + key + "' in " + where);
  for (const auto& key : allowed)
    if (!obj.contains(key)) schema_error(path, "missing field '" + key + "' in " + where);
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

std::string store_path(const fs::path& p, const fs::path& base) {
  if (p.is_absolute()) {
    const fs::path rel = p.lexically_normal().lexically_relative(base);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  }
  return p.generic_string();
}

fs::path load_path(const std::string& s, const fs::path& base) {
  const fs::path p(s);
  return p.is_absolute() ? p.lexically_normal() : (base / p).lexically_normal();
}

fs::path manifest_base(const fs::path& path) {
  return fs::absolute(path).lexically_normal().parent_path();
}

}  // namespace

// ---- helpers ----

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(fs::exists(path) ? ErrorCode::kIo : ErrorCode::kMissingFile,
         "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  static std::atomic<std::uint64_t> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1)) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      fail(ErrorCode::kIo, "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    fail(ErrorCode::kIo, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

// ---- WAV ----

void write_wav(const fs::path& path, const MultiWaveform& channels,
               double sample_rate, WavEncoding encoding) {
  require(!channels.empty(), "write_wav needs at least one channel");
  require(sample_rate > 0.0 && sample_rate == std::floor(sample_rate) &&
              sample_rate <= 4294967295.0,
          "sample rate must be a positive integer");
  const std::size_t n = channels.front().size();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    require(channels[c].size() == n, "channels differ in length");
    for (double v : channels[c])
      require(std::isfinite(v), path.string() + ": non-finite sample in channel " +
                                    std::to_string(c));
  }
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bytes_per = encoding == WavEncoding::kPcm16 ? 2 : 4;
  const std::uint64_t data_bytes64 = static_cast<std::uint64_t>(n) * nch * bytes_per;
  require(data_bytes64 < 0xFFFFFFFFull - 64, "WAV payload exceeds 4 GiB");
  const auto data_bytes = static_cast<std::uint32_t>(data_bytes64);
  const auto rate = static_cast<std::uint32_t>(sample_rate);

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, nch);
  put_u32(out, rate);
  put_u32(out, rate * nch * bytes_per);
  put_u16(out, static_cast<std::uint16_t>(nch * bytes_per));
  put_u16(out, static_cast<std::uint16_t>(8 * bytes_per));
  out += "data";
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ch : channels) {
      if (encoding == WavEncoding::kPcm16) {
        const double q = std::round(std::clamp(ch[i], -1.0, 1.0) * 32768.0);
        put_u16(out, static_cast<std::uint16_t>(
                         static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
      } else {
        put_f32(out, static_cast<float>(ch[i]));
      }
    }
  }
  write_file_atomic(path, out);
}

WavData read_wav(const fs::path& path, std::optional<double> expected_rate) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path);
  if (r.text(4, "RIFF header") != "RIFF") fail(ErrorCode::kFormat, path.string() + ": not a RIFF file");
  r.u32("RIFF size");
  if (r.text(4, "RIFF header") != "WAVE") fail(ErrorCode::kFormat, path.string() + ": not a WAVE file");

  std::optional<std::uint16_t> format;
  std::uint16_t channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  while (true) {
    if (r.remaining() < 8) fail(ErrorCode::kTruncated, path.string() + ": no data chunk");
    const std::string id = r.text(4, "chunk id");
    const std::uint32_t size = r.u32("chunk size");
    const std::size_t body = r.position();
    if (id == "fmt ") {
      r.need(size, "fmt chunk");
      if (size < 16) fail(ErrorCode::kFormat, path.string() + ": fmt chunk too small");
      format = r.u16("format");
      channels = r.u16("channels");
      rate = r.u32("sample rate");
      r.u32("byte rate");
      block_align = r.u16("block align");
      bits = r.u16("bits per sample");
      if (*format == kFormatExtensible) {
        if (size < 40) fail(ErrorCode::kFormat, path.string() + ": short extensible fmt chunk");
        r.u16("cb size");
        r.u16("valid bits");
        r.u32("channel mask");
        format = r.u16("sub format");
      }
    } else if (id == "data") {
      if (!format) fail(ErrorCode::kFormat, path.string() + ": data chunk before fmt");
      const bool pcm16 = *format == kFormatPcm && bits == 16;
      const bool f32 = *format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32)
        fail(ErrorCode::kUnsupported,
             path.string() + ": unsupported encoding (format " +
                 std::to_string(*format) + ", " + std::to_string(bits) +
                 " bits); only PCM16 and float32 are read");
      if (channels == 0 || block_align != channels * (bits / 8))
        fail(ErrorCode::kFormat, path.string() + ": inconsistent channel layout");
      if (r.remaining() < size)
        fail(ErrorCode::kTruncated, path.string() + ": data chunk declares " +
                                        std::to_string(size) + " bytes, file has " +
                                        std::to_string(r.remaining()));
      if (size % block_align != 0)
        fail(ErrorCode::kTruncated, path.string() + ": partial sample frame");
      if (expected_rate && static_cast<double>(rate) != *expected_rate)
        fail(ErrorCode::kRateMismatch,
             path.string() + ": sample rate " + std::to_string(rate) +
                 " Hz, expected " + std::to_string(static_cast<long long>(*expected_rate)) + " Hz");

      const std::size_t frames = size / block_align;
      WavData out;
      out.sample_rate = rate;
      out.encoding = pcm16 ? WavEncoding::kPcm16 : WavEncoding::kFloat32;
      out.channels.assign(channels, Waveform(frames));
      for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
          if (pcm16) {
            out.channels[c][i] =
                static_cast<std::int16_t>(r.u16("sample")) / 32768.0;
          } else {
            out.channels[c][i] = r.f32("sample");
          }
        }
      }
      return out;
    }
    r.seek(body);
    r.need(size, "chunk");
    r.seek(body + size + (size & 1u));
    if (r.position() > bytes.size()) r.seek(bytes.size());
  }
}

// ---- Manifest ----

MicArray ArraySpec::to_array() const {
  return MicArray(positions, ref_index, sound_speed);
}

ArraySpec ArraySpec::from_array(const MicArray& array) {
  return {array.positions(), array.ref_index(), array.sound_speed()};
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  const fs::path base = manifest_base(path);
  json positions = json::array();
  for (const auto& p : manifest.array.positions) positions.push_back(vec3_json(p));

  json utts = json::array();
  for (const auto& u : manifest.utterances) {
    require(u.images.size() == u.azimuths.size() && u.dry.size() == u.azimuths.size(),
            "utterance " + u.id + ": azimuth count differs from source count");
    json images = json::array();
    json dry = json::array();
    for (const auto& p : u.images) images.push_back(store_path(p, base));
    for (const auto& p : u.dry) dry.push_back(store_path(p, base));
    utts.push_back({{"id", u.id},
                    {"mixture", store_path(u.mixture, base)},
                    {"images", std::move(images)},
                    {"dry", std::move(dry)},
                    {"azimuths", u.azimuths},
                    {"t60", u.t60},
                    {"room_dimensions", vec3_json(u.room_dimensions)},
                    {"angle_difference", u.angle_difference},
                    {"sample_rate", u.sample_rate},
                    {"seed", u.seed}});
  }
  const json doc = {{"schema_version", manifest.schema_version},
                    {"array",
                     {{"positions", std::move(positions)},
                      {"ref_index", manifest.array.ref_index},
                      {"sound_speed", manifest.array.sound_speed}}},
                    {"utterances", std::move(utts)}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& path, bool validate_files) {
  const fs::path base = manifest_base(path);
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kFormat, path.string() + ": invalid JSON: " + e.what());
  }

  Manifest m;
  try {
    check_keys(doc, {"schema_version", "array", "utterances"}, "manifest", path);
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion)
      schema_error(path, "unsupported schema_version " + std::to_string(m.schema_version));

    const json& arr = doc.at("array");
    check_keys(arr, {"positions", "ref_index", "sound_speed"}, "array", path);
    for (const auto& p : arr.at("positions")) m.array.positions.push_back(vec3_from(p));
    m.array.ref_index = arr.at("ref_index").get<std::size_t>();
    m.array.sound_speed = arr.at("sound_speed").get<double>();

    const json& utts = doc.at("utterances");
    if (!utts.is_array()) schema_error(path, "utterances must be an array");
    for (const auto& j : utts) {
      check_keys(j,
                 {"id", "mixture", "images", "dry", "azimuths", "t60",
                  "room_dimensions", "angle_difference", "sample_rate", "seed"},
                 "utterance", path);
      UtteranceEntry u;
      u.id = j.at("id").get<std::string>();
      u.mixture = load_path(j.at("mixture").get<std::string>(), base);
      for (const auto& p : j.at("images")) u.images.push_back(load_path(p.get<std::string>(), base));
      for (const auto& p : j.at("dry")) u.dry.push_back(load_path(p.get<std::string>(), base));
      u.azimuths = j.at("azimuths").get<std::vector<double>>();
      u.t60 = j.at("t60").get<double>();
      u.room_dimensions = vec3_from(j.at("room_dimensions"));
      u.angle_difference = j.at("angle_difference").get<double>();
      u.sample_rate = j.at("sample_rate").get<double>();
      u.seed = j.at("seed").get<std::uint64_t>();
      if (u.images.size() != u.azimuths.size() || u.dry.size() != u.azimuths.size())
        schema_error(path, "utterance " + u.id + ": azimuth count differs from source count");
      m.utterances.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    schema_error(path, std::string("malformed field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    schema_error(path, e.what());
  }

  if (validate_files) {
    for (const auto& u : m.utterances) {
      std::vector<fs::path> refs{u.mixture};
      refs.insert(refs.end(), u.images.begin(), u.images.end());
      refs.insert(refs.end(), u.dry.begin(), u.dry.end());
      for (const auto& p : refs)
        if (!fs::exists(p))
          fail(ErrorCode::kMissingFile,
               path.string() + ": utterance " + u.id + " references missing file " + p.string());
    }
  }
  return m;
}

// ---- TSNF1 ----

void write_features(const fs::path& path, const FeatureStack& features) {
  const std::string descriptor = features.layout_descriptor();
  require(!descriptor.empty(), "feature layout descriptor is empty");
  require(features.data.rows() <= 0xFFFFFFFF && features.data.cols() <= 0xFFFFFFFF,
          "feature matrix too large for TSNF1");
  std::string out(kFeatureMagic.begin(), kFeatureMagic.end());
  put_u16(out, kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(features.data.rows()));
  put_u32(out, static_cast<std::uint32_t>(features.data.cols()));
  put_u32(out, static_cast<std::uint32_t>(descriptor.size()));
  out += descriptor;
  out.reserve(out.size() + 4 * static_cast<std::size_t>(features.data.size()));
  for (Eigen::Index i = 0; i < features.data.size(); ++i) put_f32(out, features.data.data()[i]);
  write_file_atomic(path, out);
}

namespace {

FeatureHeader parse_header(ByteReader& r, const fs::path& path) {
  if (r.remaining() < kFeatureMagic.size() ||
      r.text(kFeatureMagic.size(), "magic") !=
          std::string(kFeatureMagic.begin(), kFeatureMagic.end()))
    fail(ErrorCode::kFormat, path.string() + ": bad magic, not a TSNF1 feature file");
  FeatureHeader h;
  h.version = r.u16("version");
  if (h.version != kFeatureVersion)
    fail(ErrorCode::kUnsupported,
         path.string() + ": feature file version " + std::to_string(h.version) + " unsupported");
  h.frames = r.u32("frame count");
  h.dim = r.u32("dimension");
  const std::uint32_t n = r.u32("descriptor length");
  h.descriptor = r.text(n, "layout descriptor");
  return h;
}

}  // namespace

FeatureHeader read_feature_header(const fs::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path);
  return parse_header(r, path);
}

FeatureStack read_features(const fs::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path);
  const FeatureHeader h = parse_header(r, path);

  FeatureStack out;
  try {
    out.layout = FeatureStack::parse_layout(h.descriptor);
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  std::size_t width = 0;
  for (const auto& b : out.layout) width += b.width;
  if (width != h.dim)
    fail(ErrorCode::kFormat, path.string() + ": layout width " + std::to_string(width) +
                                 " differs from header dimension " + std::to_string(h.dim));

  const std::uint64_t payload = 4ull * h.frames * h.dim;
  if (r.remaining() < payload)
    fail(ErrorCode::kTruncated, path.string() + ": payload has " +
                                    std::to_string(r.remaining()) + " bytes, expected " +
                                    std::to_string(payload));
  if (r.remaining() > payload)
    fail(ErrorCode::kFormat, path.string() + ": " + std::to_string(r.remaining() - payload) +
                                 " trailing bytes after payload");
  out.data.resize(h.frames, h.dim);
  for (Eigen::Index i = 0; i < out.data.size(); ++i) out.data.data()[i] = r.f32("payload");
  return out;
}

}  // namespace ssk
