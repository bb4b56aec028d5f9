// Copyright 2026 The TeNCA Authors. All Rights Reserved.
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

#include "tenca/dataset.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "byte_io.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

constexpr char kPayloadMagic[4] = {'T', 'N', 'C', 'A'};
constexpr std::size_t kPayloadHeader = 4 + 2 + 2 + 4 + 4;

std::string payload_name(std::uint64_t case_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%06llu.tnca",
                static_cast<unsigned long long>(case_id));
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError("manifest: bad " + what + " '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& what, int base = 10) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v, base);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw IoError("manifest: bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::uint8_t> encode_payload(const TrainingCase& c) {
  validate_case(c);
  detail::ByteWriter w;
  w.bytes(kPayloadMagic, 4);
  w.u16(kPayloadVersion);
  w.u16(static_cast<std::uint16_t>(c.k()));
  w.u32(static_cast<std::uint32_t>(c.pre_contrast.height()));
  w.u32(static_cast<std::uint32_t>(c.pre_contrast.width()));
  auto plane = [&w](const Image& img) {
    for (float v : img.pixels()) w.f32(v);
  };
  plane(c.pre_contrast);
  for (const auto& f : c.frames) plane(f.target);
  const std::uint32_t crc = crc32_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

TrainingCase decode_payload(std::span<const std::uint8_t> bytes, const ManifestEntry& entry) {
  if (bytes.size() < kPayloadHeader) {
    throw TruncatedError("payload " + entry.payload + " is truncated (header)");
  }
  detail::ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kPayloadMagic, 4) != 0) {
    throw IoError("payload " + entry.payload + " has no TNCA magic");
  }
  const std::uint16_t version = r.u16();
  if (version != kPayloadVersion) {
    throw VersionError("payload " + entry.payload + " has version " +
                       std::to_string(version) + ", expected " +
                       std::to_string(kPayloadVersion));
  }
  const std::size_t k = r.u16();
  const std::size_t h = r.u32();
  const std::size_t w = r.u32();
  const std::size_t expected = kPayloadHeader + (k + 1) * h * w * 4 + 4;
  if (bytes.size() < expected) {
    throw TruncatedError("payload " + entry.payload + " is truncated: " +
                         std::to_string(bytes.size()) + " of " + std::to_string(expected) +
                         " bytes");
  }
  if (bytes.size() > expected) {
    throw IoError("payload " + entry.payload + " has trailing bytes");
  }
  const std::uint32_t stored = [&] {
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + expected - 4, 4);
    return v;
  }();
  if (crc32_of(bytes.first(expected - 4)) != stored) {
    throw ChecksumError("payload " + entry.payload + " failed its CRC32 check");
  }
  if (stored != entry.checksum) {
    throw ChecksumError("payload " + entry.payload + " CRC32 does not match the manifest");
  }
  if (k != entry.k() || h != entry.height || w != entry.width) {
    throw IoError("payload " + entry.payload + " header disagrees with the manifest");
  }

  auto plane = [&] {
    std::vector<float> px(h * w);
    for (auto& v : px) v = r.f32();
    return Image(h, w, std::move(px));
  };
  TrainingCase c;
  c.case_id = entry.case_id;
  c.pre_contrast = plane();
  for (std::size_t i = 0; i < k; ++i) c.frames.push_back(Frame{plane(), entry.times[i]});
  validate_case(c);
  return c;
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "format: tenca-dataset\n";
  out << "version: " << m.version << "\n";
  out << "cases: " << m.entries.size() << "\n";
  out << "delta_t_hint: " << format_double(m.delta_t_hint) << "\n";
  out << "\n";
  out << "# id h w k times payload crc32\n";
  for (const auto& e : m.entries) {
    out << e.case_id << ' ' << e.height << ' ' << e.width << ' ' << e.k() << ' ';
    for (std::size_t i = 0; i < e.times.size(); ++i) {
      if (i) out << ',';
      out << format_double(e.times[i]);
    }
    out << ' ' << e.payload << ' ' << std::hex << std::setw(8) << std::setfill('0')
        << e.checksum << std::dec << std::setfill(' ') << "\n";
  }
  return out.str();
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  bool in_header = true;
  bool saw_format = false;
  long declared = -1;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (in_header) {
      if (t.empty()) {
        in_header = false;
        continue;
      }
      if (t[0] == '#') continue;
      const auto colon = t.find(':');
      if (colon == std::string::npos) throw IoError("manifest: bad header line '" + t + "'");
      const std::string key = trim(t.substr(0, colon));
      const std::string value = trim(t.substr(colon + 1));
      if (key == "format") {
        if (value != "tenca-dataset") throw IoError("manifest: unknown format '" + value + "'");
        saw_format = true;
      } else if (key == "version") {
        m.version = static_cast<int>(parse_uint(value, "version"));
        if (m.version != kManifestVersion) {
          throw VersionError("manifest version " + value + " is not supported (expected " +
                             std::to_string(kManifestVersion) + ")");
        }
      } else if (key == "cases") {
        declared = static_cast<long>(parse_uint(value, "case count"));
      } else if (key == "delta_t_hint") {
        m.delta_t_hint = parse_double(value, "delta_t_hint");
      } else {
        throw IoError("manifest: unknown header key '" + key + "'");
      }
      continue;
    }
    if (t.empty() || t[0] == '#') continue;
    std::istringstream fields(t);
    std::string id, hs, ws, ks, times, payload, crc;
    if (!(fields >> id >> hs >> ws >> ks >> times >> payload >> crc)) {
      throw IoError("manifest: incomplete case line '" + t + "'");
    }
    std::string extra;
    if (fields >> extra) throw IoError("manifest: trailing fields in '" + t + "'");
    ManifestEntry e;
    e.case_id = parse_uint(id, "case id");
    e.height = parse_uint(hs, "height");
    e.width = parse_uint(ws, "width");
    const std::size_t k = parse_uint(ks, "frame count");
    std::istringstream ts(times);
    std::string tok;
    while (std::getline(ts, tok, ',')) e.times.push_back(parse_double(tok, "time"));
    if (e.times.size() != k) {
      throw IoError("manifest: case " + id + " declares k=" + ks + " but lists " +
                    std::to_string(e.times.size()) + " times");
    }
    for (std::size_t i = 1; i < e.times.size(); ++i) {
      if (!(e.times[i] > e.times[i - 1])) {
        throw IoError("manifest: case " + id + " times are not strictly increasing");
      }
    }
    e.payload = payload;
    e.checksum = static_cast<std::uint32_t>(parse_uint(crc, "checksum", 16));
    m.entries.push_back(std::move(e));
  }
  if (!saw_format) throw IoError("manifest: missing 'format: tenca-dataset' header");
  if (declared >= 0 && static_cast<std::size_t>(declared) != m.entries.size()) {
    throw TruncatedError("manifest declares " + std::to_string(declared) + " cases but lists " +
                         std::to_string(m.entries.size()));
  }
  return m;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ManifestEntry write_case(const std::filesystem::path& dir, const TrainingCase& c) {
  const auto bytes = encode_payload(c);
  ManifestEntry e;
  e.case_id = c.case_id;
  e.height = c.pre_contrast.height();
  e.width = c.pre_contrast.width();
  for (const auto& f : c.frames) e.times.push_back(f.time_s);
  e.payload = payload_name(c.case_id);
  std::memcpy(&e.checksum, bytes.data() + bytes.size() - 4, 4);
  write_file_bytes(dir / e.payload, bytes);
  return e;
}

TrainingCase read_case(const std::filesystem::path& dir, const ManifestEntry& entry) {
  return decode_payload(read_file_bytes(dir / entry.payload), entry);
}

DatasetManifest write_dataset(const std::filesystem::path& dir,
                              std::span<const TrainingCase> cases, double delta_t_hint) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  DatasetManifest m;
  m.delta_t_hint = delta_t_hint;
  for (const auto& c : cases) m.entries.push_back(write_case(dir, c));
  const std::string text = format_manifest(m);
  write_file_bytes(dir / kManifestName,
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const auto bytes = read_file_bytes(dir / kManifestName);
  return parse_manifest(std::string(bytes.begin(), bytes.end()));
}

std::vector<TrainingCase> read_dataset(const std::filesystem::path& dir) {
  const DatasetManifest m = read_manifest(dir);
  std::vector<TrainingCase> cases;
  cases.reserve(m.entries.size());
  for (const auto& e : m.entries) cases.push_back(read_case(dir, e));
  return cases;
}

}  // namespace tenca
