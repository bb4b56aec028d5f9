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

#ifndef TENCA_SRC_STEP_KERNEL_HPP_
#define TENCA_SRC_STEP_KERNEL_HPP_

// Building blocks of one transition step, shared by the plain rollout and
// the tape-based backward pass so both execute identical arithmetic.

#include <cstdint>
#include <span>
#include <vector>

#include "tenca/grid.hpp"

namespace tenca::detail {

// Scratch buffers for one step over the cells that fire.
struct StepBuffers {
  std::vector<std::uint32_t> active;  // fired cell indices, ascending
  std::vector<Real> z;                // active x 3d
  std::vector<Real> pre;              // active x H, before ReLU
  std::vector<Real> delta;            // active x d
};

// Fills `active` from the rule for update number `step`, returning the
// scale applied to each fired cell's delta.
Real select_active(const RngKey& key, std::size_t step, std::size_t height,
                   std::size_t width, const StepRule& rule,
                   std::vector<std::uint32_t>& active);

void active_from_mask(const FireMask& mask, std::vector<std::uint32_t>& active);

// Perception rows for the listed cells (replicate padding).
void perceive_cells(const CellGrid& grid, const ParamBlock& params,
                    std::span<const std::uint32_t> cells, Real* z);

// pre = z W1 + b1; delta = relu(pre) W2 + b2. Returns false if any delta
// entry is non-finite.
bool mlp_forward(const ParamBlock& params, std::size_t rows, const Real* z,
                 Real* pre, Real* delta);

// state[cell] += scale * delta[row] for every active row.
void apply_delta(CellGrid& state, std::span<const std::uint32_t> active,
                 const Real* delta, Real scale);

// Runs one full step in place. Buffers keep z/pre/delta of this step.
// Throws NumericError on non-finite deltas.
void forward_step(CellGrid& state, const ParamBlock& params,
                  const RngKey& key, std::size_t step, const StepRule& rule,
                  StepBuffers& buf);

// Reverse of one step S_t = S_{t-1} + scale * M * MLP(perceive(S_{t-1})).
// On entry `grad` holds dL/dS_t; on exit dL/dS_{t-1}. Parameter gradients
// are accumulated into `grads`. `prev` is S_{t-1}; `pre` holds the
// pre-activations recorded in the forward pass for the active cells.
void backward_step(const CellGrid& prev, const ParamBlock& params,
                   std::span<const std::uint32_t> active,
                   std::span<const Real> pre, Real scale,
                   std::span<Real> grad, ParamBlock& grads,
                   std::vector<Real>& scratch);

}  // namespace tenca::detail

#endif  // TENCA_SRC_STEP_KERNEL_HPP_
