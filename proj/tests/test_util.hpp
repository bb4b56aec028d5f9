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

#ifndef TENCA_TESTS_TEST_UTIL_HPP_
#define TENCA_TESTS_TEST_UTIL_HPP_

#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "tenca/grid.hpp"
#include "tenca/image.hpp"
#include "tenca/training_case.hpp"

namespace tenca::testing {

inline Image random_image(std::size_t h, std::size_t w, std::uint64_t seed, float lo = 0.f,
                          float hi = 1.f) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  Image img(h, w);
  for (auto& v : img.pixels()) v = u(gen);
  return img;
}

inline CellGrid random_grid(std::size_t h, std::size_t w, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<Real> u(-1, 1);
  CellGrid g(h, w, d);
  for (auto& v : g.values()) v = u(gen);
  return g;
}

// Parameters with every block populated, so no path is trivially zero.
inline ModelParams random_params(ModelShape shape, std::uint64_t seed, Real scale = 0.5) {
  ModelParams p(shape);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<Real> u(-scale, scale);
  for (auto& v : p.flat()) v = u(gen);
  return p;
}

inline TrainingCase random_case(std::size_t h, std::size_t w, std::vector<double> times,
                                std::uint64_t seed) {
  TrainingCase c;
  c.case_id = seed;
  c.pre_contrast = random_image(h, w, seed);
  for (std::size_t i = 0; i < times.size(); ++i) {
    c.frames.push_back({random_image(h, w, seed * 31 + i + 1), times[i]});
  }
  return c;
}

// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tenca_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace tenca::testing

#endif  // TENCA_TESTS_TEST_UTIL_HPP_
