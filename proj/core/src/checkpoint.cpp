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

#include "tenca/checkpoint.hpp"

#include <cstring>
#include <string>

#include "byte_io.hpp"
#include "tenca/config.hpp"
#include "tenca/dataset.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'C', 'K'};

void write_plane(detail::ByteWriter& w, const ParamBlock& block) {
  for (Real v : block.flat()) w.f64(static_cast<double>(v));
}

void read_plane(detail::ByteReader& r, ParamBlock& block) {
  for (auto& v : block.flat()) v = static_cast<Real>(r.f64());
}

void check_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw TruncatedError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("not a TNCK checkpoint");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " cannot be read by this build (expects version " +
                       std::to_string(kCheckpointVersion) + ")");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const ModelShape shape = ckpt.params.shape();
  if (!(ckpt.optimizer.first_moment.shape() == shape) ||
      !(ckpt.optimizer.second_moment.shape() == shape)) {
    throw ContractViolation("optimizer state shape does not match parameters");
  }
  const std::string text = format_train_config(ckpt.config);
  detail::ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(config_hash(ckpt.config));
  w.u64(ckpt.epoch);
  w.u64(ckpt.seed);
  w.u64(ckpt.optimizer.step);
  w.u32(static_cast<std::uint32_t>(shape.channels));
  w.u32(static_cast<std::uint32_t>(shape.hidden));
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  write_plane(w, ckpt.params);
  write_plane(w, ckpt.optimizer.first_moment);
  write_plane(w, ckpt.optimizer.second_moment);
  const std::uint32_t crc = crc32_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

std::uint64_t checkpoint_config_hash(std::span<const std::uint8_t> bytes) {
  check_header(bytes);
  if (bytes.size() < 16) throw TruncatedError("checkpoint is truncated");
  std::uint64_t h;
  std::memcpy(&h, bytes.data() + 8, 8);
  return h;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  check_header(bytes);
  if (bytes.size() < 12) throw TruncatedError("checkpoint is truncated");
  detail::ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  r.u32();
  const std::uint64_t hash = r.u64();
  Checkpoint ckpt;
  ckpt.epoch = r.u64();
  ckpt.seed = r.u64();
  const std::uint64_t adam_step = r.u64();
  const ModelShape shape{r.u32(), r.u32()};
  const std::uint32_t text_len = r.u32();
  if (r.remaining() < text_len) throw TruncatedError("checkpoint is truncated (config)");
  std::string text(text_len, '\0');
  r.bytes(text.data(), text_len);

  const std::size_t count = param_count(shape.channels, shape.hidden);
  const std::size_t expected = r.position() + 3 * count * 8 + 4;
  if (bytes.size() < expected) {
    throw TruncatedError("checkpoint is truncated: " + std::to_string(bytes.size()) + " of " +
                         std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) throw IoError("checkpoint has trailing bytes");
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + expected - 4, 4);
  if (crc32_of(bytes.first(expected - 4)) != stored) {
    throw ChecksumError("checkpoint failed its CRC32 check");
  }

  ckpt.config = parse_train_config(text);
  if (config_hash(ckpt.config) != hash) {
    throw ChecksumError("checkpoint config hash does not match its config text");
  }
  if (!(ckpt.config.shape() == shape)) {
    throw IoError("checkpoint model shape disagrees with its config");
  }
  ckpt.params = ModelParams(shape);
  ckpt.optimizer = OptimizerState(shape);
  ckpt.optimizer.step = adam_step;
  read_plane(r, ckpt.params);
  read_plane(r, ckpt.optimizer.first_moment);
  read_plane(r, ckpt.optimizer.second_moment);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  // Write then rename so an interrupted save never leaves a torn file.
  auto tmp = path;
  tmp += ".tmp";
  write_file_bytes(tmp, bytes);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace tenca
