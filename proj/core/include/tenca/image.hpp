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

#ifndef TENCA_IMAGE_HPP_
#define TENCA_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tenca/error.hpp"

namespace tenca {

// Scalar type of the cell state and model parameters. Images on disk are
// always 32-bit; the state defaults to 64-bit so that gradient checks are
// meaningful.
#if defined(TENCA_SINGLE_PRECISION)
using Real = float;
#else
using Real = double;
#endif

// Single-channel row-major image with 32-bit samples, the storage format
// of every frame in a dataset.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, float fill = 0.0f)
      : height_(height), width_(width), pixels_(height * width, fill) {}
  Image(std::size_t height, std::size_t width, std::vector<float> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != height * width) {
      throw DataError("image pixel count does not match its shape");
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  float& operator()(std::size_t row, std::size_t col) {
    return pixels_[row * width_ + col];
  }
  float operator()(std::size_t row, std::size_t col) const {
    return pixels_[row * width_ + col];
  }

  std::span<float> pixels() { return pixels_; }
  std::span<const float> pixels() const { return pixels_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> pixels_;
};

}  // namespace tenca

#endif  // TENCA_IMAGE_HPP_
