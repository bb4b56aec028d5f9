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

#ifndef TENCA_TRAINING_CASE_HPP_
#define TENCA_TRAINING_CASE_HPP_

#include <cstdint>
#include <vector>

#include "tenca/image.hpp"

namespace tenca {

inline constexpr std::size_t kMaxFrames = 5;
inline constexpr double kMaxTimeSeconds = 1024.0;

struct Frame {
  Image target;
  double time_s = 0.0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// A pre-contrast image and its post-contrast frames in acquisition order.
struct TrainingCase {
  std::uint64_t case_id = 0;
  Image pre_contrast;
  std::vector<Frame> frames;

  std::size_t k() const { return frames.size(); }
  friend bool operator==(const TrainingCase&, const TrainingCase&) = default;
};

// Throws DataError unless 1 <= k <= 5, times are in (0, 1024] and strictly
// increasing, and all images share the pre-contrast shape.
void validate_case(const TrainingCase& c);

}  // namespace tenca

#endif  // TENCA_TRAINING_CASE_HPP_
