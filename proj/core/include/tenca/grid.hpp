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

#ifndef TENCA_GRID_HPP_
#define TENCA_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tenca/image.hpp"
#include "tenca/rng.hpp"

namespace tenca {

// Number of perception pathways: identity plus two learned 3x3 kernels.
inline constexpr std::size_t kPathways = 3;
inline constexpr std::size_t kTaps = 9;

// NCA state: height x width cells of `channels` values each, stored
// cell-major (all channels of a cell are contiguous). Channel 0 is the
// visible image; the rest are hidden.
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(std::size_t height, std::size_t width, std::size_t channels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t cells() const { return height_ * width_; }

  Real& at(std::size_t row, std::size_t col, std::size_t ch) {
    return values_[(row * width_ + col) * channels_ + ch];
  }
  Real at(std::size_t row, std::size_t col, std::size_t ch) const {
    return values_[(row * width_ + col) * channels_ + ch];
  }

  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }

  bool all_finite() const;

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<Real> values_;
};

// Visible channel of a state, kept at state precision for loss evaluation.
struct VisiblePlane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Real> values;

  Image to_image() const;
  friend bool operator==(const VisiblePlane&, const VisiblePlane&) = default;
};

VisiblePlane visible_plane(const CellGrid& grid);

struct ModelShape {
  std::size_t channels = 24;
  std::size_t hidden = 128;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// Flat parameter storage with named views. Layouts:
//   kernel_a, kernel_b : [tap][channel], tap = (dy + 1) * 3 + (dx + 1)
//   w1                 : [input][hidden], input in [0, 3 * channels)
//   b1                 : [hidden]
//   w2                 : [hidden][channel]
//   b2                 : [channel]
class ParamBlock {
 public:
  ParamBlock() = default;
  explicit ParamBlock(ModelShape shape);

  const ModelShape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<Real> flat() { return data_; }
  std::span<const Real> flat() const { return data_; }

  std::span<Real> kernel_a() { return slice(0, ka_size()); }
  std::span<Real> kernel_b() { return slice(ka_size(), ka_size()); }
  std::span<Real> w1() { return slice(w1_offset(), w1_size()); }
  std::span<Real> b1() { return slice(b1_offset(), shape_.hidden); }
  std::span<Real> w2() { return slice(w2_offset(), w2_size()); }
  std::span<Real> b2() { return slice(b2_offset(), shape_.channels); }

  std::span<const Real> kernel_a() const { return slice(0, ka_size()); }
  std::span<const Real> kernel_b() const { return slice(ka_size(), ka_size()); }
  std::span<const Real> w1() const { return slice(w1_offset(), w1_size()); }
  std::span<const Real> b1() const { return slice(b1_offset(), shape_.hidden); }
  std::span<const Real> w2() const { return slice(w2_offset(), w2_size()); }
  std::span<const Real> b2() const { return slice(b2_offset(), shape_.channels); }

  bool all_finite() const;
  void fill(Real value);

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;

 private:
  std::size_t ka_size() const { return kTaps * shape_.channels; }
  std::size_t w1_size() const { return kPathways * shape_.channels * shape_.hidden; }
  std::size_t w2_size() const { return shape_.hidden * shape_.channels; }
  std::size_t w1_offset() const { return 2 * ka_size(); }
  std::size_t b1_offset() const { return w1_offset() + w1_size(); }
  std::size_t w2_offset() const { return b1_offset() + shape_.hidden; }
  std::size_t b2_offset() const { return w2_offset() + w2_size(); }

  std::span<Real> slice(std::size_t off, std::size_t n) {
    return std::span<Real>(data_).subspan(off, n);
  }
  std::span<const Real> slice(std::size_t off, std::size_t n) const {
    return std::span<const Real>(data_).subspan(off, n);
  }

  ModelShape shape_{};
  std::vector<Real> data_;
};

struct ModelParams : ParamBlock {
  using ParamBlock::ParamBlock;
};

// Total scalar count: 2*9*d + (3d*H + H) + (H*d + d).
std::size_t param_count(std::size_t channels, std::size_t hidden);

// Kernels and w1 uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; b1, w2 and
// b2 zero so that the untrained model leaves the state unchanged.
ModelParams init_params(ModelShape shape, std::uint64_t seed);

// Per-cell perception vectors [s, conv_a(s), conv_b(s)] with 3*d values per
// cell, cell-major.
struct PerceptionField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t width_per_cell = 0;
  std::vector<Real> values;

  std::span<const Real> cell(std::size_t row, std::size_t col) const {
    return std::span<const Real>(values).subspan(
        (row * width + col) * width_per_cell, width_per_cell);
  }
};

// One bit per cell, broadcast over channels.
struct FireMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  std::size_t active_count() const;
  friend bool operator==(const FireMask&, const FireMask&) = default;
};

// How masks are drawn at each step. In deterministic mode every cell fires
// and the update is scaled by fire_rate instead (debugging aid).
struct StepRule {
  double fire_rate = 0.5;
  bool deterministic_mask = false;
};

CellGrid init_state(const Image& pre_contrast, std::size_t channels);

PerceptionField perceive(const CellGrid& grid, const ModelParams& params);

FireMask sample_mask(const RngKey& key, std::size_t height, std::size_t width,
                     double fire_rate);

// The mask for update number `step` (1-based) of a rollout.
FireMask step_mask(const RngKey& key, std::size_t step, std::size_t height,
                   std::size_t width, const StepRule& rule);

// grid + mask * scale * MLP(perceive(grid)). Throws NumericError if the
// update produces a non-finite value; `step` is only used for reporting.
CellGrid update_step(const CellGrid& grid, const ModelParams& params,
                     const FireMask& mask, Real scale = 1, long step = 0);

struct RolloutResult {
  std::vector<VisiblePlane> snapshots;
  CellGrid final_state;
};

// Applies n_steps updates. snapshots[j] is the visible channel right after
// update number snapshot_steps[j]; steps must be sorted and in [1, n_steps].
RolloutResult rollout(const CellGrid& grid0, const ModelParams& params,
                      std::size_t n_steps,
                      std::span<const std::size_t> snapshot_steps,
                      const RngKey& key, const StepRule& rule = {});

// Visible channel after every step 1..n_steps (used for frame export).
std::vector<VisiblePlane> rollout_all_steps(const CellGrid& grid0,
                                            const ModelParams& params,
                                            std::size_t n_steps,
                                            const RngKey& key,
                                            const StepRule& rule = {});

}  // namespace tenca

#endif  // TENCA_GRID_HPP_
