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

#ifndef TENCA_TOOLS_COMMANDS_HPP_
#define TENCA_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tenca/autodiff.hpp"
#include "tenca/grid.hpp"
#include "tenca/training_case.hpp"

namespace tenca::cli {

int cmd_gen_data(const std::filesystem::path& spec, const std::filesystem::path& out_dir,
                 std::ostream& log);

struct TrainArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> resume;
  bool reproducible = false;
  // Stop after this many epochs of this invocation (0: run to config.epochs).
  std::size_t max_epochs = 0;
};
int cmd_train(const TrainArgs& args, std::ostream& log);

struct RolloutArgs {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> data;
  std::optional<std::uint64_t> case_id;
  std::optional<std::filesystem::path> image;
  std::vector<double> times;
  bool all_steps = false;
  std::filesystem::path out_dir;
};
int cmd_rollout(const RolloutArgs& args, std::ostream& log);

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::filesystem::path out;
  bool reproducible = false;
};
int cmd_eval(const EvalArgs& args, std::ostream& log);

struct GradcheckArgs {
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  double epsilon = 1e-5;
  std::size_t samples = 100;
  bool deterministic_mask = true;
  bool corrupt_backward = false;  // negative-control hook
};
int cmd_gradcheck(const GradcheckArgs& args, std::ostream& log);

inline constexpr double kGradcheckTolerance = 1e-4;

// Draws are redrawn until every pre-activation stays this far from zero, so
// an epsilon step cannot cross a ReLU kink.
inline constexpr double kGradcheckReluMargin = 2e-4;

// The tiny seeded problem gradcheck runs: 8x8 grid, 4 channels, 8 hidden
// units, 5 steps, loss at steps 2 and 5.
struct GradcheckProblem {
  TrainingCase data;
  ModelParams params;
  Schedule schedule;
  RngKey key;
  StepRule rule;
  std::size_t draws = 0;
};
GradcheckProblem make_gradcheck_problem(std::uint64_t seed, bool deterministic_mask = true);

}  // namespace tenca::cli

#endif  // TENCA_TOOLS_COMMANDS_HPP_
