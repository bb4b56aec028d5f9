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

#include "tenca/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "step_kernel.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

void check_schedule(const TrainingCase& c, const Schedule& schedule) {
  if (schedule.snapshot_steps.size() != c.frames.size()) {
    throw ContractViolation("schedule has " +
                            std::to_string(schedule.snapshot_steps.size()) +
                            " snapshot steps for " + std::to_string(c.frames.size()) +
                            " frames");
  }
  for (std::size_t i = 0; i < schedule.snapshot_steps.size(); ++i) {
    const std::size_t s = schedule.snapshot_steps[i];
    if (s < 1 || s > schedule.n_steps) {
      throw ConfigError("snapshot step " + std::to_string(s) + " outside [1, " +
                        std::to_string(schedule.n_steps) + "]");
    }
    if (i > 0 && s <= schedule.snapshot_steps[i - 1]) {
      throw ConfigError("snapshot steps must be strictly increasing");
    }
  }
}

// Squared error of the visible channel against a target, plus its gradient
// seed scaled by `seed_scale`.
Real frame_mse(const CellGrid& state, const Image& target, Real seed_scale,
               std::vector<Real>* seed) {
  const std::size_t cells = state.cells();
  const std::size_t d = state.channels();
  const auto v = state.values();
  const auto y = target.pixels();
  if (seed) seed->resize(cells);
  Real acc = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const Real diff = v[i * d] - static_cast<Real>(y[i]);
    acc += diff * diff;
    if (seed) (*seed)[i] = seed_scale * Real(2) * diff;
  }
  return acc / static_cast<Real>(cells);
}

}  // namespace

std::size_t RolloutTape::stored_bytes() const {
  std::size_t bytes = 0;
  for (const auto& b : boundaries) bytes += b.values().size() * sizeof(Real);
  for (const auto& s : loss_seeds) bytes += s.size() * sizeof(Real);
  return bytes;
}

std::uint64_t params_fingerprint(const ParamBlock& params) {
  // FNV-1a over the raw parameter bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto flat = params.flat();
  const auto* bytes = reinterpret_cast<const unsigned char*>(flat.data());
  for (std::size_t i = 0; i < flat.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

ForwardResult forward_with_tape(const TrainingCase& c, const ModelParams& params,
                                const Schedule& schedule, const RngKey& key,
                                const TapeOptions& options) {
  check_schedule(c, schedule);
  if (options.segment_length == 0) throw ConfigError("segment length must be >= 1");
  for (const auto& f : c.frames) {
    if (!f.target.same_shape(c.pre_contrast)) {
      throw DataError("frame shape differs from pre-contrast shape");
    }
  }

  ForwardResult out;
  RolloutTape& tape = out.tape;
  tape.shape = params.shape();
  tape.params_fingerprint = params_fingerprint(params);
  tape.segment_length = options.segment_length;
  tape.n_steps = schedule.n_steps;
  tape.key = key;
  tape.rule = options.rule;
  tape.snapshot_steps = schedule.snapshot_steps;

  CellGrid state = init_state(c.pre_contrast, params.shape().channels);
  if (params.shape().channels != state.channels()) {
    throw ConfigError("parameter channel count does not match grid");
  }
  const Real frame_weight = Real(1) / static_cast<Real>(c.frames.size());
  const Real seed_scale = frame_weight / static_cast<Real>(state.cells());

  tape.boundaries.push_back(state);
  detail::StepBuffers buf;
  std::size_t next = 0;
  Real loss = 0;
  for (std::size_t step = 1; step <= schedule.n_steps; ++step) {
    detail::forward_step(state, params, key, step, options.rule, buf);
    if (step % options.segment_length == 0 && step < schedule.n_steps) {
      tape.boundaries.push_back(state);
    }
    if (next < schedule.snapshot_steps.size() && schedule.snapshot_steps[next] == step) {
      std::vector<Real> seed;
      const Real mse = frame_mse(state, c.frames[next].target, seed_scale, &seed);
      if (!std::isfinite(mse)) {
        throw NumericError("non-finite frame loss", static_cast<long>(step));
      }
      tape.frame_losses.push_back(mse);
      tape.loss_seeds.push_back(std::move(seed));
      loss += frame_weight * mse;
      ++next;
    }
  }
  tape.loss = loss;
  out.loss = loss;
  return out;
}

Real case_loss(const TrainingCase& c, const ModelParams& params,
               const Schedule& schedule, const RngKey& key, const StepRule& rule) {
  check_schedule(c, schedule);
  CellGrid state = init_state(c.pre_contrast, params.shape().channels);
  const Real frame_weight = Real(1) / static_cast<Real>(c.frames.size());
  detail::StepBuffers buf;
  std::size_t next = 0;
  Real loss = 0;
  for (std::size_t step = 1; step <= schedule.n_steps; ++step) {
    detail::forward_step(state, params, key, step, rule, buf);
    if (next < schedule.snapshot_steps.size() && schedule.snapshot_steps[next] == step) {
      const Real mse = frame_mse(state, c.frames[next].target, 0, nullptr);
      if (!std::isfinite(mse)) {
        throw NumericError("non-finite frame loss", static_cast<long>(step));
      }
      loss += frame_weight * mse;
      ++next;
    }
  }
  return loss;
}

Real relu_margin(const TrainingCase& c, const ModelParams& params, const Schedule& schedule,
                 const RngKey& key, const StepRule& rule) {
  check_schedule(c, schedule);
  CellGrid state = init_state(c.pre_contrast, params.shape().channels);
  detail::StepBuffers buf;
  Real margin = std::numeric_limits<Real>::infinity();
  for (std::size_t step = 1; step <= schedule.n_steps; ++step) {
    detail::forward_step(state, params, key, step, rule, buf);
    for (Real p : buf.pre) margin = std::min(margin, std::abs(p));
  }
  return margin;
}

ParamGradients backward(const RolloutTape& tape, const ModelParams& params) {
  if (!(tape.shape == params.shape())) {
    throw ContractViolation("tape was recorded for a different model shape");
  }
  if (tape.params_fingerprint != params_fingerprint(params)) {
    throw ContractViolation("tape was recorded under different parameters");
  }
  if (tape.boundaries.empty()) throw ContractViolation("empty tape");
  if (tape.loss_seeds.size() != tape.snapshot_steps.size()) {
    throw ContractViolation("tape seeds do not match snapshot steps");
  }

  ParamGradients grads(params.shape());
  const CellGrid& s0 = tape.boundaries.front();
  const std::size_t d = s0.channels();
  const std::size_t cells = s0.cells();
  const std::size_t K = tape.segment_length;
  const std::size_t T = tape.n_steps;
  if (T == 0) return grads;
  const std::size_t segments = (T + K - 1) / K;
  if (tape.boundaries.size() != segments) {
    throw ContractViolation("tape boundary count does not match its segment length");
  }

  std::vector<Real> grad(cells * d, Real(0));
  std::vector<Real> scratch;

  // Per-step records of the segment being replayed.
  std::vector<CellGrid> prev_states;
  std::vector<std::vector<std::uint32_t>> actives;
  std::vector<std::vector<Real>> pres;
  std::vector<Real> scales;
  detail::StepBuffers buf;

  // Snapshot index to visit next while walking steps backwards.
  std::ptrdiff_t snap = static_cast<std::ptrdiff_t>(tape.snapshot_steps.size()) - 1;

  for (std::size_t seg = segments; seg-- > 0;) {
    const std::size_t start = seg * K;
    const std::size_t end = std::min(start + K, T);
    const std::size_t len = end - start;
    prev_states.resize(len);
    actives.resize(len);
    pres.resize(len);
    scales.resize(len);

    CellGrid state = tape.boundaries[seg];
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t step = start + i + 1;
      prev_states[i] = state;
      detail::forward_step(state, params, tape.key, step, tape.rule, buf);
      actives[i] = buf.active;
      pres[i] = buf.pre;
      scales[i] = tape.rule.deterministic_mask ? static_cast<Real>(tape.rule.fire_rate)
                                               : Real(1);
    }

    for (std::size_t i = len; i-- > 0;) {
      const std::size_t step = start + i + 1;
      if (snap >= 0 && tape.snapshot_steps[std::size_t(snap)] == step) {
        const auto& seed = tape.loss_seeds[std::size_t(snap)];
        for (std::size_t cell = 0; cell < cells; ++cell) grad[cell * d] += seed[cell];
        --snap;
      }
      detail::backward_step(prev_states[i], params, actives[i], pres[i], scales[i],
                            grad, grads, scratch);
    }
  }

  if (!grads.all_finite()) {
    throw NumericError("non-finite parameter gradient", 0);
  }
  return grads;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / (std::abs(a) + std::abs(b) + 1e-12);
}

FiniteDiffReport finite_diff_check(const ModelParams& params, const TrainingCase& c,
                                   const Schedule& schedule, const RngKey& key,
                                   const FiniteDiffOptions& options) {
  if (!(options.epsilon >= 1e-7 && options.epsilon <= 1e-3)) {
    throw ConfigError("finite-difference epsilon must lie in [1e-7, 1e-3]");
  }
  TapeOptions topt{options.segment_length, options.rule};
  const ForwardResult fwd = forward_with_tape(c, params, schedule, key, topt);
  ParamGradients grads = backward(fwd.tape, params);
  if (options.corrupt_backward) {
    for (auto& g : grads.flat()) g = g * Real(1.01) + Real(1e-6);
  }

  const std::size_t total = params.size();
  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  if (options.samples != 0 && options.samples < total) {
    std::mt19937_64 gen(options.sample_seed);
    std::shuffle(indices.begin(), indices.end(), gen);
    indices.resize(options.samples);
    std::sort(indices.begin(), indices.end());
  }

  FiniteDiffReport report;
  report.indices = indices;
  ModelParams probe = params;
  for (std::size_t idx : indices) {
    const Real original = probe.flat()[idx];
    probe.flat()[idx] = original + static_cast<Real>(options.epsilon);
    const double up = case_loss(c, probe, schedule, key, options.rule);
    probe.flat()[idx] = original - static_cast<Real>(options.epsilon);
    const double down = case_loss(c, probe, schedule, key, options.rule);
    probe.flat()[idx] = original;
    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double analytic = grads.flat()[idx];
    report.analytic.push_back(analytic);
    report.numeric.push_back(numeric);
    const double err = relative_error(analytic, numeric);
    if (err > report.max_relative_error || report.analytic.size() == 1) {
      report.max_relative_error = std::max(report.max_relative_error, err);
      report.worst_index = idx;
    }
  }
  return report;
}

}  // namespace tenca
