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

#ifndef TENCA_PGM_HPP_
#define TENCA_PGM_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tenca/image.hpp"

namespace tenca {

// 8-bit binary portable graymap of clamp01(image) * 255, rounded.
std::vector<std::uint8_t> encode_pgm(const Image& image);
void write_pgm(const std::filesystem::path& path, const Image& image);

// Reads P5 (8- or 16-bit) and P2 graymaps, scaled to [0, 1] by maxval.
Image decode_pgm(const std::vector<std::uint8_t>& bytes);
Image read_pgm(const std::filesystem::path& path);

// 0.5 + 0.5 * (frame - pre): zero enhancement maps to mid-gray.
Image subtraction_image(const Image& frame, const Image& pre_contrast);

}  // namespace tenca

#endif  // TENCA_PGM_HPP_
