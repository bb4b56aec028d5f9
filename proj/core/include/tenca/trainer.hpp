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

#ifndef TENCA_TRAINER_HPP_
#define TENCA_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tenca/autodiff.hpp"
#include "tenca/grid.hpp"
#include "tenca/training_case.hpp"

namespace tenca {

struct TrainConfig {
  double delta_t_s = 8.0;
  std::size_t n_steps = 128;
  double fire_rate = 0.5;
  std::size_t channels = 24;
  std::size_t hidden = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 1.0;
  std::size_t batch_size = 4;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::size_t segment_length = kDefaultSegment;
  bool full_horizon = false;
  bool deterministic_mask = false;
  bool reproducible = false;

  ModelShape shape() const { return {channels, hidden}; }
  StepRule rule() const { return {fire_rate, deterministic_mask}; }
  double horizon_s() const { return static_cast<double>(n_steps) * delta_t_s; }

  // Throws ConfigError naming the first invalid field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct OptimizerState {
  ParamBlock first_moment;
  ParamBlock second_moment;
  std::uint64_t step = 0;

  OptimizerState() = default;
  explicit OptimizerState(ModelShape shape)
      : first_moment(shape), second_moment(shape) {}

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

// round(time_s / delta_t_s), half rounded up, never below 1.
std::size_t time_to_step(double time_s, double delta_t_s);

// Snapshot steps for every frame of a case. Throws DataError when two frames
// land on the same step and ConfigError when a frame lies beyond n_steps.
// Frames whose time is off the step grid by more than delta_t/2 produce a
// warning string.
Schedule make_schedule(const TrainingCase& c, const TrainConfig& config,
                       std::vector<std::string>* warnings = nullptr);

// Mean over frames of the per-frame pixel mean squared error.
Real sparse_loss(std::span<const VisiblePlane> snapshots, std::span<const Image> targets);

// Global L2 norm over every gradient entry.
double global_norm(const ParamBlock& grads);

// Rescales in place so the global norm is at most max_norm. Returns the norm
// before clipping.
double clip_gradients(ParamBlock& grads, double max_norm);

// Bias-corrected Adam step. Throws NumericError (leaving everything
// untouched) if any gradient is non-finite.
void adam_update(ModelParams& params, const ParamBlock& grads, OptimizerState& state,
                 const TrainConfig& config);

// Per-case key used for masks during training.
RngKey training_key(const TrainConfig& config, std::size_t epoch, std::uint64_t case_id);

struct CaseGradient {
  Real loss = 0;
  ParamGradients grads;
};

CaseGradient case_gradient(const TrainingCase& c, const ModelParams& params,
                           const TrainConfig& config, const RngKey& key);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm over optimizer steps
  double seconds = 0.0;
  std::size_t optimizer_steps = 0;
  std::size_t failed_cases = 0;
  std::vector<std::string> incidents;
};

// One pass of sparse-time conditioned training over the dataset in a
// seeded shuffled order, one Adam step per minibatch.
EpochStats train_epoch(std::span<const TrainingCase> dataset, ModelParams& params,
                       OptimizerState& state, const TrainConfig& config,
                       std::size_t epoch);

// Rollout predictions at each frame's step (evaluation path).
std::vector<VisiblePlane> predict_frames(const TrainingCase& c, const ModelParams& params,
                                         const TrainConfig& config, const RngKey& key);

// Key used for evaluation rollouts, disjoint from any training epoch.
RngKey evaluation_key(const TrainConfig& config, std::uint64_t case_id);

}  // namespace tenca

#endif  // TENCA_TRAINER_HPP_
