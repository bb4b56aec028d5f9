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

#ifndef TENCA_CONFIG_HPP_
#define TENCA_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tenca/phantom.hpp"
#include "tenca/trainer.hpp"

namespace tenca {

// Config files are flat "key = value" lines grouped under [section]
// headers; '#' starts a comment. Unknown sections or keys are errors.

struct RunConfig {
  TrainConfig train;
  std::filesystem::path dataset;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path report_dir;
  std::size_t checkpoint_every = 10;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_run_config(const std::string& text);
// Canonical text: every key, fixed order, shortest round-trip numbers.
std::string format_run_config(const RunConfig& config);
// Canonical text of the training settings alone (no paths).
std::string format_train_config(const TrainConfig& config);
TrainConfig parse_train_config(const std::string& text);

// Hash of the settings that determine the training trajectory. Epoch count,
// segment length, thread mode and paths are excluded.
std::uint64_t config_hash(const TrainConfig& config);

struct DataGenSpec {
  PhantomSpec phantom;
  std::size_t cases = 10;
  std::uint64_t first_case_id = 0;
  bool normalize = false;    // percentile window of each pre-contrast image
  std::size_t crop_size = 0; // 0: keep the full image; else centered patch

  friend bool operator==(const DataGenSpec& a, const DataGenSpec& b);
};

DataGenSpec parse_datagen_spec(const std::string& text);
std::string format_datagen_spec(const DataGenSpec& spec);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tenca

#endif  // TENCA_CONFIG_HPP_
