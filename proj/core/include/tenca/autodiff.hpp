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

#ifndef TENCA_AUTODIFF_HPP_
#define TENCA_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tenca/grid.hpp"
#include "tenca/rng.hpp"
#include "tenca/training_case.hpp"

namespace tenca {

struct ParamGradients : ParamBlock {
  using ParamBlock::ParamBlock;
};

// Which steps a rollout runs and where the loss is evaluated.
struct Schedule {
  std::size_t n_steps = 0;
  std::vector<std::size_t> snapshot_steps;  // one per frame, increasing
};

inline constexpr std::size_t kDefaultSegment = 16;

// Everything the backward pass needs. Only every K-th state is kept; the
// states in between, and all fire masks, are regenerated on demand.
struct RolloutTape {
  ModelShape shape;
  std::uint64_t params_fingerprint = 0;
  std::size_t segment_length = kDefaultSegment;
  std::size_t n_steps = 0;
  RngKey key;
  StepRule rule;
  std::vector<CellGrid> boundaries;  // S_0, S_K, S_2K, ...
  std::vector<std::size_t> snapshot_steps;
  std::vector<std::vector<Real>> loss_seeds;  // dL/dS_vis at each snapshot
  std::vector<Real> frame_losses;             // per-frame pixel MSE
  Real loss = 0;

  std::size_t stored_bytes() const;
};

struct TapeOptions {
  std::size_t segment_length = kDefaultSegment;
  StepRule rule;
};

struct ForwardResult {
  Real loss = 0;
  RolloutTape tape;
};

std::uint64_t params_fingerprint(const ParamBlock& params);

// Rolls the case forward from its pre-contrast image and evaluates the
// mean-over-frames pixel MSE at the scheduled steps.
ForwardResult forward_with_tape(const TrainingCase& c, const ModelParams& params,
                                const Schedule& schedule, const RngKey& key,
                                const TapeOptions& options = {});

// Loss only, without keeping a tape.
Real case_loss(const TrainingCase& c, const ModelParams& params,
               const Schedule& schedule, const RngKey& key, const StepRule& rule = {});

// Smallest |pre-activation| over every fired cell and step of the rollout.
// Central differences are only meaningful when the perturbation cannot push
// any hidden unit across its ReLU kink.
Real relu_margin(const TrainingCase& c, const ModelParams& params, const Schedule& schedule,
                 const RngKey& key, const StepRule& rule = {});

// Exact reverse-mode gradient of tape.loss with respect to every parameter.
ParamGradients backward(const RolloutTape& tape, const ModelParams& params);

struct FiniteDiffOptions {
  double epsilon = 1e-5;
  std::size_t samples = 100;  // 0 or >= parameter count: full sweep
  std::uint64_t sample_seed = 0;
  std::size_t segment_length = kDefaultSegment;
  StepRule rule;
  // Negative-control hook: perturbs the analytic gradient before comparing.
  bool corrupt_backward = false;
};

struct FiniteDiffReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<std::size_t> indices;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// |a - b| / (|a| + |b| + 1e-12), the comparison used by the checker.
double relative_error(double a, double b);

FiniteDiffReport finite_diff_check(const ModelParams& params, const TrainingCase& c,
                                   const Schedule& schedule, const RngKey& key,
                                   const FiniteDiffOptions& options = {});

}  // namespace tenca

#endif  // TENCA_AUTODIFF_HPP_
