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

#ifndef TENCA_RNG_HPP_
#define TENCA_RNG_HPP_

#include <cstdint>

namespace tenca {

// Counter-based randomness: every random bit is a pure function of its
// coordinates, so masks can be regenerated during the backward pass
// instead of being stored.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t case_id = 0;
  std::uint64_t step = 0;

  RngKey with_step(std::uint64_t s) const { return {seed, epoch, case_id, s}; }
  friend bool operator==(const RngKey&, const RngKey&) = default;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(const RngKey& key) {
  std::uint64_t h = mix64(key.seed);
  h = mix64(h ^ key.epoch);
  h = mix64(h ^ key.case_id);
  h = mix64(h ^ key.step);
  return h;
}

// Uniform double in [0, 1) for counter `index` under a pre-hashed key.
constexpr double counter_uniform(std::uint64_t hashed_key, std::uint64_t index) {
  const std::uint64_t bits = mix64(hashed_key ^ mix64(index));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace tenca

#endif  // TENCA_RNG_HPP_
