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

#ifndef TENCA_CHECKPOINT_HPP_
#define TENCA_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tenca/grid.hpp"
#include "tenca/trainer.hpp"

namespace tenca {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little-endian):
//   "TNCK" u32 version u64 config_hash u64 epoch u64 seed u64 adam_step
//   u32 channels u32 hidden u32 config_len, config text (canonical form)
//   params, first moment, second moment as f64 planes, then CRC32.
struct Checkpoint {
  TrainConfig config;
  ModelParams params;
  OptimizerState optimizer;
  std::uint64_t epoch = 0;  // completed epochs
  std::uint64_t seed = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws IoError / VersionError / TruncatedError / ChecksumError.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Config hash stored in the file header, without decoding the rest.
std::uint64_t checkpoint_config_hash(std::span<const std::uint8_t> bytes);

}  // namespace tenca

#endif  // TENCA_CHECKPOINT_HPP_
