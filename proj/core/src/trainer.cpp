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

#include "tenca/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "tenca/error.hpp"
#include "tenca/parallel.hpp"

namespace tenca {

void validate_case(const TrainingCase& c) {
  const std::string id = "case " + std::to_string(c.case_id);
  if (c.pre_contrast.empty()) throw DataError(id + ": empty pre-contrast image");
  if (c.frames.empty() || c.frames.size() > kMaxFrames) {
    throw DataError(id + ": frame count " + std::to_string(c.frames.size()) +
                    " outside [1, " + std::to_string(kMaxFrames) + "]");
  }
  double last = 0.0;
  for (const auto& f : c.frames) {
    if (!(f.time_s > 0.0 && f.time_s <= kMaxTimeSeconds)) {
      throw DataError(id + ": frame time " + std::to_string(f.time_s) +
                      " s outside (0, 1024]");
    }
    if (f.time_s <= last) throw DataError(id + ": frame times must strictly increase");
    last = f.time_s;
    if (!f.target.same_shape(c.pre_contrast)) {
      throw DataError(id + ": frame shape differs from pre-contrast shape");
    }
  }
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config field '" + field + "': " + why);
  };
  if (!(delta_t_s > 0.0) || !std::isfinite(delta_t_s)) fail("delta_t", "must be > 0");
  if (n_steps < 1) fail("n_steps", "must be >= 1");
  if (!(fire_rate >= 0.0 && fire_rate <= 1.0)) fail("fire_rate", "must lie in [0, 1]");
  if (channels < 2) fail("channels", "must be >= 2");
  if (hidden < 1) fail("hidden", "must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps", "must be > 0");
  if (!(grad_clip_norm > 0.0)) fail("grad_clip", "must be > 0");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (segment_length < 1) fail("segment", "must be >= 1");
}

std::size_t time_to_step(double time_s, double delta_t_s) {
  if (!(time_s > 0.0)) throw DataError("frame time must be > 0");
  if (!(delta_t_s > 0.0)) throw ConfigError("delta_t must be > 0");
  const double step = std::floor(time_s / delta_t_s + 0.5);
  return std::max<std::size_t>(1, static_cast<std::size_t>(step));
}

Schedule make_schedule(const TrainingCase& c, const TrainConfig& config,
                       std::vector<std::string>* warnings) {
  if (c.frames.empty()) throw DataError("case has no frames");
  Schedule schedule;
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    const double t = c.frames[i].time_s;
    const std::size_t step = time_to_step(t, config.delta_t_s);
    if (step > config.n_steps) {
      std::ostringstream msg;
      msg << "frame time " << t << " s maps to step " << step << ", beyond the horizon of "
          << config.n_steps << " steps (" << config.horizon_s() << " s)";
      throw ConfigError(msg.str());
    }
    if (!schedule.snapshot_steps.empty() && step <= schedule.snapshot_steps.back()) {
      std::ostringstream msg;
      msg << "case " << c.case_id << ": frames " << i - 1 << " and " << i
          << " both map to step " << step;
      throw DataError(msg.str());
    }
    if (warnings && std::abs(t - double(step) * config.delta_t_s) > config.delta_t_s / 2) {
      std::ostringstream msg;
      msg << "case " << c.case_id << ": frame time " << t << " s is more than delta_t/2 from step "
          << step;
      warnings->push_back(msg.str());
    }
    schedule.snapshot_steps.push_back(step);
  }
  schedule.n_steps = config.full_horizon ? config.n_steps : schedule.snapshot_steps.back();
  return schedule;
}

Real sparse_loss(std::span<const VisiblePlane> snapshots, std::span<const Image> targets) {
  if (snapshots.size() != targets.size()) {
    throw ContractViolation("sparse_loss: " + std::to_string(snapshots.size()) +
                            " snapshots vs " + std::to_string(targets.size()) + " targets");
  }
  if (snapshots.empty()) return 0;
  Real total = 0;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& s = snapshots[i];
    const auto& t = targets[i];
    if (s.height != t.height() || s.width != t.width()) {
      throw ContractViolation("sparse_loss: snapshot/target shape mismatch");
    }
    Real acc = 0;
    const auto px = t.pixels();
    for (std::size_t j = 0; j < px.size(); ++j) {
      const Real diff = s.values[j] - static_cast<Real>(px[j]);
      acc += diff * diff;
    }
    total += acc / static_cast<Real>(px.size());
  }
  return total / static_cast<Real>(snapshots.size());
}

double global_norm(const ParamBlock& grads) {
  double acc = 0.0;
  for (Real g : grads.flat()) acc += double(g) * double(g);
  return std::sqrt(acc);
}

double clip_gradients(ParamBlock& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("max_norm must be > 0");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads.flat()) g = static_cast<Real>(double(g) * scale);
  }
  return norm;
}

void adam_update(ModelParams& params, const ParamBlock& grads, OptimizerState& state,
                 const TrainConfig& config) {
  if (!(grads.shape() == params.shape())) {
    throw ContractViolation("gradient shape does not match parameters");
  }
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!grads.all_finite()) {
    throw NumericError("non-finite gradient; update skipped",
                       static_cast<long>(state.step));
  }
  if (state.first_moment.size() != params.size()) state = OptimizerState(params.shape());

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  auto p = params.flat();
  auto m = state.first_moment.flat();
  auto v = state.second_moment.flat();
  const auto g = grads.flat();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = g[i];
    const double mi = config.beta1 * double(m[i]) + (1.0 - config.beta1) * gi;
    const double vi = config.beta2 * double(v[i]) + (1.0 - config.beta2) * gi * gi;
    m[i] = static_cast<Real>(mi);
    v[i] = static_cast<Real>(vi);
    const double mhat = mi / c1;
    const double vhat = vi / c2;
    p[i] = static_cast<Real>(double(p[i]) -
                             config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps));
  }
}

RngKey training_key(const TrainConfig& config, std::size_t epoch, std::uint64_t case_id) {
  return RngKey{config.seed, static_cast<std::uint64_t>(epoch), case_id, 0};
}

RngKey evaluation_key(const TrainConfig& config, std::uint64_t case_id) {
  return RngKey{config.seed, ~std::uint64_t{0}, case_id, 0};
}

CaseGradient case_gradient(const TrainingCase& c, const ModelParams& params,
                           const TrainConfig& config, const RngKey& key) {
  const Schedule schedule = make_schedule(c, config);
  TapeOptions options{config.segment_length, config.rule()};
  ForwardResult fwd = forward_with_tape(c, params, schedule, key, options);
  CaseGradient out;
  out.loss = fwd.loss;
  out.grads = backward(fwd.tape, params);
  return out;
}

EpochStats train_epoch(std::span<const TrainingCase> dataset, ModelParams& params,
                       OptimizerState& state, const TrainConfig& config,
                       std::size_t epoch) {
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  config.validate();
  if (!(params.shape() == config.shape())) {
    throw ConfigError("model shape does not match config");
  }
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(mix64(config.seed ^ mix64(static_cast<std::uint64_t>(epoch))));
  std::shuffle(order.begin(), order.end(), gen);

  const std::size_t workers = worker_count(config.reproducible);
  const std::size_t max_failures = dataset.size() / 10;

  EpochStats stats;
  stats.epoch = epoch;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  double norm_sum = 0.0;

  for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
    const std::size_t end = std::min(order.size(), begin + config.batch_size);
    const std::size_t m = end - begin;
    std::vector<std::optional<CaseGradient>> results(m);
    std::vector<std::string> errors(m);
    parallel_for(m, workers, [&](std::size_t i) {
      const TrainingCase& c = dataset[order[begin + i]];
      try {
        results[i] = case_gradient(c, params, config, training_key(config, epoch, c.case_id));
      } catch (const NumericError& e) {
        errors[i] = "case " + std::to_string(c.case_id) + ": " + e.what();
      }
    });

    ParamGradients batch_grads(params.shape());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!results[i]) {
        stats.incidents.push_back(errors[i]);
        ++stats.failed_cases;
        continue;
      }
      auto dst = batch_grads.flat();
      const auto src = results[i]->grads.flat();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      loss_sum += results[i]->loss;
      ++loss_count;
      ++ok;
    }
    if (stats.failed_cases > max_failures) {
      throw Error("epoch " + std::to_string(epoch) + " aborted: " +
                  std::to_string(stats.failed_cases) + " of " +
                  std::to_string(dataset.size()) + " cases failed");
    }
    if (ok == 0) continue;
    const Real inv = Real(1) / static_cast<Real>(ok);
    for (auto& g : batch_grads.flat()) g *= inv;
    norm_sum += clip_gradients(batch_grads, config.grad_clip_norm);
    try {
      adam_update(params, batch_grads, state, config);
      ++stats.optimizer_steps;
    } catch (const NumericError& e) {
      stats.incidents.push_back(e.what());
    }
  }

  stats.mean_loss = loss_count ? loss_sum / double(loss_count) : 0.0;
  stats.grad_norm = stats.optimizer_steps ? norm_sum / double(stats.optimizer_steps) : 0.0;
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

std::vector<VisiblePlane> predict_frames(const TrainingCase& c, const ModelParams& params,
                                         const TrainConfig& config, const RngKey& key) {
  TrainConfig eval = config;
  eval.full_horizon = false;
  const Schedule schedule = make_schedule(c, eval);
  const CellGrid grid0 = init_state(c.pre_contrast, params.shape().channels);
  return rollout(grid0, params, schedule.n_steps, schedule.snapshot_steps, key,
                 config.rule())
      .snapshots;
}

}  // namespace tenca
