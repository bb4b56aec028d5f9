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

#include "tenca/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "tenca/dataset.hpp"
#include "tenca/error.hpp"

namespace tenca {

std::vector<std::uint8_t> encode_pgm(const Image& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (float v : image.pixels()) {
    const double c = std::clamp(double(v), 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  write_file_bytes(path, encode_pgm(image));
}

Image decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) throw IoError("malformed PGM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw IoError("not a PGM file (expected P5 or P2)");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const std::size_t w = read_int();
  const std::size_t h = read_int();
  const std::size_t maxval = read_int();
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw IoError("bad PGM dimensions");
  Image img(h, w);
  auto px = img.pixels();
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + h * w * bps) throw TruncatedError("PGM pixel data is truncated");
    for (std::size_t i = 0; i < h * w; ++i) {
      std::size_t v = bytes[pos + i * bps];
      if (bps == 2) v = (v << 8) | bytes[pos + i * bps + 1];
      px[i] = static_cast<float>(double(v) / double(maxval));
    }
  } else {
    for (std::size_t i = 0; i < h * w; ++i) {
      px[i] = static_cast<float>(double(read_int()) / double(maxval));
    }
  }
  return img;
}

Image read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file_bytes(path)); }

Image subtraction_image(const Image& frame, const Image& pre_contrast) {
  if (!frame.same_shape(pre_contrast)) throw DataError("subtraction inputs differ in shape");
  Image out(frame.height(), frame.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = static_cast<float>(
        0.5 + 0.5 * (double(frame.pixels()[i]) - double(pre_contrast.pixels()[i])));
  }
  return out;
}

}  // namespace tenca
