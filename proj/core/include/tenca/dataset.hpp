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

#ifndef TENCA_DATASET_HPP_
#define TENCA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tenca/training_case.hpp"

namespace tenca {

// On-disk layout of a dataset directory:
//
//   manifest.txt   "key: value" header lines, a blank line, then one line per
//                  case: id h w k t1,t2,... payload-file crc32-hex
//   <payload>      "TNCA" u16 version u16 k u32 h u32 w, then k + 1 raw
//                  f32 little-endian planes (pre-contrast first, frames in
//                  time order), then the CRC32 of everything before it.

inline constexpr std::uint16_t kPayloadVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestName = "manifest.txt";

struct ManifestEntry {
  std::uint64_t case_id = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> times;
  std::string payload;
  std::uint32_t checksum = 0;

  std::size_t k() const { return times.size(); }
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  int version = kManifestVersion;
  double delta_t_hint = 8.0;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

// Payload bytes of one case (times are kept in the manifest).
std::vector<std::uint8_t> encode_payload(const TrainingCase& c);

// Inverse of encode_payload. Throws IoError on a bad magic, VersionError,
// TruncatedError or ChecksumError.
TrainingCase decode_payload(std::span<const std::uint8_t> bytes,
                            const ManifestEntry& entry);

std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Writes the payload file and returns its manifest entry.
ManifestEntry write_case(const std::filesystem::path& dir, const TrainingCase& c);
TrainingCase read_case(const std::filesystem::path& dir, const ManifestEntry& entry);

DatasetManifest write_dataset(const std::filesystem::path& dir,
                              std::span<const TrainingCase> cases, double delta_t_hint);
std::vector<TrainingCase> read_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace tenca

#endif  // TENCA_DATASET_HPP_
