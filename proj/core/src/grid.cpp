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

#include "tenca/grid.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "step_kernel.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

bool finite_span(std::span<const Real> v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

}  // namespace

CellGrid::CellGrid(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels),
      values_(height * width * channels, Real(0)) {
  if (channels < 2) {
    throw ConfigError("cell grid needs at least 2 channels, got " +
                      std::to_string(channels));
  }
  if (height == 0 || width == 0) throw ConfigError("cell grid must be non-empty");
}

bool CellGrid::all_finite() const { return finite_span(values_); }

Image VisiblePlane::to_image() const {
  Image img(height, width);
  for (std::size_t i = 0; i < values.size(); ++i) {
    img.pixels()[i] = static_cast<float>(values[i]);
  }
  return img;
}

VisiblePlane visible_plane(const CellGrid& grid) {
  VisiblePlane plane{grid.height(), grid.width(), {}};
  plane.values.resize(grid.cells());
  const auto v = grid.values();
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    plane.values[i] = v[i * grid.channels()];
  }
  return plane;
}

ParamBlock::ParamBlock(ModelShape shape)
    : shape_(shape), data_(param_count(shape.channels, shape.hidden), Real(0)) {}

bool ParamBlock::all_finite() const { return finite_span(data_); }

void ParamBlock::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

std::size_t param_count(std::size_t channels, std::size_t hidden) {
  if (channels < 2 || hidden < 1) {
    throw ConfigError("param_count needs channels >= 2 and hidden >= 1");
  }
  const std::size_t perception = 2 * kTaps * channels;
  const std::size_t layer1 = kPathways * channels * hidden + hidden;
  const std::size_t layer2 = hidden * channels + channels;
  return perception + layer1 + layer2;
}

ModelParams init_params(ModelShape shape, std::uint64_t seed) {
  ModelParams p(shape);
  std::mt19937_64 gen(seed);
  auto fill_uniform = [&gen](std::span<Real> dst, double fan_in) {
    const double s = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-s, s);
    for (auto& x : dst) x = static_cast<Real>(dist(gen));
  };
  fill_uniform(p.kernel_a(), double(kTaps));
  fill_uniform(p.kernel_b(), double(kTaps));
  fill_uniform(p.w1(), double(kPathways * shape.channels));
  return p;
}

std::size_t FireMask::active_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

CellGrid init_state(const Image& pre_contrast, std::size_t channels) {
  if (channels < 2) {
    throw ConfigError("channel count must be >= 2, got " + std::to_string(channels));
  }
  if (pre_contrast.empty()) throw DataError("pre-contrast image is empty");
  for (float v : pre_contrast.pixels()) {
    if (!std::isfinite(v)) throw DataError("pre-contrast image has non-finite pixels");
  }
  CellGrid grid(pre_contrast.height(), pre_contrast.width(), channels);
  auto values = grid.values();
  const auto px = pre_contrast.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) values[i * channels] = px[i];
  return grid;
}

static void check_shapes(const CellGrid& grid, const ParamBlock& params) {
  if (params.shape().channels != grid.channels()) {
    throw ConfigError("parameter channel count " +
                      std::to_string(params.shape().channels) +
                      " does not match grid channel count " +
                      std::to_string(grid.channels()));
  }
  if (params.size() != param_count(params.shape().channels, params.shape().hidden)) {
    throw ConfigError("parameter block is not initialized");
  }
}

PerceptionField perceive(const CellGrid& grid, const ModelParams& params) {
  check_shapes(grid, params);
  const std::size_t d = grid.channels();
  PerceptionField field{grid.height(), grid.width(), kPathways * d, {}};
  field.values.resize(grid.cells() * kPathways * d);
  std::vector<std::uint32_t> all(grid.cells());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  detail::perceive_cells(grid, params, all, field.values.data());
  return field;
}

FireMask sample_mask(const RngKey& key, std::size_t height, std::size_t width,
                     double fire_rate) {
  if (!(fire_rate >= 0.0 && fire_rate <= 1.0)) {
    throw ConfigError("fire rate must lie in [0, 1]");
  }
  FireMask mask{height, width, std::vector<std::uint8_t>(height * width)};
  const std::uint64_t hk = hash_key(key);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    mask.bits[i] = counter_uniform(hk, i) < fire_rate ? 1 : 0;
  }
  return mask;
}

FireMask step_mask(const RngKey& key, std::size_t step, std::size_t height,
                   std::size_t width, const StepRule& rule) {
  if (rule.deterministic_mask) {
    return FireMask{height, width, std::vector<std::uint8_t>(height * width, 1)};
  }
  return sample_mask(key.with_step(step), height, width, rule.fire_rate);
}

CellGrid update_step(const CellGrid& grid, const ModelParams& params,
                     const FireMask& mask, Real scale, long step) {
  check_shapes(grid, params);
  if (mask.height != grid.height() || mask.width != grid.width()) {
    throw ConfigError("fire mask shape does not match grid");
  }
  detail::StepBuffers buf;
  detail::active_from_mask(mask, buf.active);
  const std::size_t n = buf.active.size();
  const std::size_t d = grid.channels();
  const std::size_t hidden = params.shape().hidden;
  buf.z.resize(n * kPathways * d);
  buf.pre.resize(n * hidden);
  buf.delta.resize(n * d);
  detail::perceive_cells(grid, params, buf.active, buf.z.data());
  if (!detail::mlp_forward(params, n, buf.z.data(), buf.pre.data(), buf.delta.data())) {
    throw NumericError("non-finite cell update", step);
  }
  CellGrid out = grid;
  detail::apply_delta(out, buf.active, buf.delta.data(), scale);
  return out;
}

static void check_snapshot_steps(std::span<const std::size_t> steps, std::size_t n_steps) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 1 || steps[i] > n_steps) {
      throw ConfigError("snapshot step " + std::to_string(steps[i]) +
                        " outside [1, " + std::to_string(n_steps) + "]");
    }
    if (i > 0 && steps[i] <= steps[i - 1]) {
      throw ConfigError("snapshot steps must be strictly increasing");
    }
  }
}

RolloutResult rollout(const CellGrid& grid0, const ModelParams& params,
                      std::size_t n_steps, std::span<const std::size_t> snapshot_steps,
                      const RngKey& key, const StepRule& rule) {
  check_shapes(grid0, params);
  check_snapshot_steps(snapshot_steps, n_steps);
  RolloutResult result{{}, grid0};
  detail::StepBuffers buf;
  std::size_t next = 0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    detail::forward_step(result.final_state, params, key, step, rule, buf);
    if (next < snapshot_steps.size() && snapshot_steps[next] == step) {
      result.snapshots.push_back(visible_plane(result.final_state));
      ++next;
    }
  }
  return result;
}

std::vector<VisiblePlane> rollout_all_steps(const CellGrid& grid0,
                                            const ModelParams& params,
                                            std::size_t n_steps, const RngKey& key,
                                            const StepRule& rule) {
  check_shapes(grid0, params);
  std::vector<VisiblePlane> frames;
  frames.reserve(n_steps);
  CellGrid state = grid0;
  detail::StepBuffers buf;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    detail::forward_step(state, params, key, step, rule, buf);
    frames.push_back(visible_plane(state));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Step kernel

namespace detail {

Real select_active(const RngKey& key, std::size_t step, std::size_t height,
                   std::size_t width, const StepRule& rule,
                   std::vector<std::uint32_t>& active) {
  const std::size_t cells = height * width;
  active.clear();
  if (rule.deterministic_mask) {
    active.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) active[i] = static_cast<std::uint32_t>(i);
    return static_cast<Real>(rule.fire_rate);
  }
  if (!(rule.fire_rate >= 0.0 && rule.fire_rate <= 1.0)) {
    throw ConfigError("fire rate must lie in [0, 1]");
  }
  const std::uint64_t hk = hash_key(key.with_step(step));
  for (std::size_t i = 0; i < cells; ++i) {
    if (counter_uniform(hk, i) < rule.fire_rate) {
      active.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return Real(1);
}

void active_from_mask(const FireMask& mask, std::vector<std::uint32_t>& active) {
  active.clear();
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i]) active.push_back(static_cast<std::uint32_t>(i));
  }
}

void perceive_cells(const CellGrid& grid, const ParamBlock& params,
                    std::span<const std::uint32_t> cells, Real* z) {
  const std::size_t d = grid.channels();
  const std::size_t h = grid.height();
  const std::size_t w = grid.width();
  const Real* s = grid.values().data();
  const Real* ka = params.kernel_a().data();
  const Real* kb = params.kernel_b().data();
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const std::size_t idx = cells[r];
    const std::size_t row = idx / w;
    const std::size_t col = idx % w;
    Real* zr = z + r * kPathways * d;
    Real* za = zr + d;
    Real* zb = zr + 2 * d;
    const Real* self = s + idx * d;
    for (std::size_t c = 0; c < d; ++c) {
      zr[c] = self[c];
      za[c] = 0;
      zb[c] = 0;
    }
    for (int dy = -1; dy <= 1; ++dy) {
      const std::size_t rr = std::clamp<long>(long(row) + dy, 0, long(h) - 1);
      for (int dx = -1; dx <= 1; ++dx) {
        const std::size_t cc = std::clamp<long>(long(col) + dx, 0, long(w) - 1);
        const std::size_t tap = std::size_t((dy + 1) * 3 + (dx + 1));
        const Real* nb = s + (rr * w + cc) * d;
        const Real* ka_t = ka + tap * d;
        const Real* kb_t = kb + tap * d;
        for (std::size_t c = 0; c < d; ++c) {
          za[c] += ka_t[c] * nb[c];
          zb[c] += kb_t[c] * nb[c];
        }
      }
    }
  }
}

bool mlp_forward(const ParamBlock& params, std::size_t rows, const Real* z,
                 Real* pre, Real* delta) {
  if (rows == 0) return true;
  const auto d = static_cast<Eigen::Index>(params.shape().channels);
  const auto hidden = static_cast<Eigen::Index>(params.shape().hidden);
  const auto n = static_cast<Eigen::Index>(rows);
  Eigen::Map<const RowMat> Z(z, n, 3 * d);
  Eigen::Map<const RowMat> W1(params.w1().data(), 3 * d, hidden);
  Eigen::Map<const RowVec> B1(params.b1().data(), hidden);
  Eigen::Map<const RowMat> W2(params.w2().data(), hidden, d);
  Eigen::Map<const RowVec> B2(params.b2().data(), d);
  Eigen::Map<RowMat> Pre(pre, n, hidden);
  Eigen::Map<RowMat> Delta(delta, n, d);

  Pre.noalias() = Z * W1;
  Pre.rowwise() += B1;
  Delta.noalias() = Pre.cwiseMax(Real(0)) * W2;
  Delta.rowwise() += B2;
  return Delta.allFinite();
}

void apply_delta(CellGrid& state, std::span<const std::uint32_t> active,
                 const Real* delta, Real scale) {
  const std::size_t d = state.channels();
  Real* s = state.values().data();
  for (std::size_t r = 0; r < active.size(); ++r) {
    Real* cell = s + std::size_t(active[r]) * d;
    const Real* dr = delta + r * d;
    for (std::size_t c = 0; c < d; ++c) cell[c] += scale * dr[c];
  }
}

void forward_step(CellGrid& state, const ParamBlock& params, const RngKey& key,
                  std::size_t step, const StepRule& rule, StepBuffers& buf) {
  const Real scale =
      select_active(key, step, state.height(), state.width(), rule, buf.active);
  const std::size_t n = buf.active.size();
  const std::size_t d = state.channels();
  buf.z.resize(n * kPathways * d);
  buf.pre.resize(n * params.shape().hidden);
  buf.delta.resize(n * d);
  perceive_cells(state, params, buf.active, buf.z.data());
  if (!mlp_forward(params, n, buf.z.data(), buf.pre.data(), buf.delta.data())) {
    throw NumericError("non-finite cell update", static_cast<long>(step));
  }
  apply_delta(state, buf.active, buf.delta.data(), scale);
}

void backward_step(const CellGrid& prev, const ParamBlock& params,
                   std::span<const std::uint32_t> active, std::span<const Real> pre,
                   Real scale, std::span<Real> grad, ParamBlock& grads,
                   std::vector<Real>& scratch) {
  const std::size_t n = active.size();
  if (n == 0) return;
  const std::size_t d = prev.channels();
  const std::size_t hidden = params.shape().hidden;
  const std::size_t zw = kPathways * d;
  const std::size_t h = prev.height();
  const std::size_t w = prev.width();

  // scratch layout: dDelta (n*d) | z (n*3d) | dPre (n*H) | dZ (n*3d)
  scratch.resize(n * d + n * zw + n * hidden + n * zw);
  Real* dd = scratch.data();
  Real* z = dd + n * d;
  Real* dpre = z + n * zw;
  Real* dz = dpre + n * hidden;

  Real* g = grad.data();
  for (std::size_t r = 0; r < n; ++r) {
    const Real* src = g + std::size_t(active[r]) * d;
    for (std::size_t c = 0; c < d; ++c) dd[r * d + c] = scale * src[c];
  }
  perceive_cells(prev, params, active, z);

  const auto ed = static_cast<Eigen::Index>(d);
  const auto eh = static_cast<Eigen::Index>(hidden);
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::Map<const RowMat> DD(dd, en, ed);
  Eigen::Map<const RowMat> Z(z, en, 3 * ed);
  Eigen::Map<const RowMat> Pre(pre.data(), en, eh);
  Eigen::Map<const RowMat> W1(params.w1().data(), 3 * ed, eh);
  Eigen::Map<const RowMat> W2(params.w2().data(), eh, ed);
  Eigen::Map<RowMat> DPre(dpre, en, eh);
  Eigen::Map<RowMat> DZ(dz, en, 3 * ed);
  Eigen::Map<RowMat> GW1(grads.w1().data(), 3 * ed, eh);
  Eigen::Map<RowVec> GB1(grads.b1().data(), eh);
  Eigen::Map<RowMat> GW2(grads.w2().data(), eh, ed);
  Eigen::Map<RowVec> GB2(grads.b2().data(), ed);

  // Plain row loops: Eigen's colwise reductions split by buffer alignment.
  for (Eigen::Index r = 0; r < en; ++r) GB2 += DD.row(r);
  GW2.noalias() += Pre.cwiseMax(Real(0)).transpose() * DD;
  DPre.noalias() = DD * W2.transpose();
  DPre = (Pre.array() > Real(0)).select(DPre, Real(0));
  GW1.noalias() += Z.transpose() * DPre;
  for (Eigen::Index r = 0; r < en; ++r) GB1 += DPre.row(r);
  DZ.noalias() = DPre * W1.transpose();

  const Real* s = prev.values().data();
  const Real* ka = params.kernel_a().data();
  const Real* kb = params.kernel_b().data();
  Real* gka = grads.kernel_a().data();
  Real* gkb = grads.kernel_b().data();
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t idx = active[r];
    const std::size_t row = idx / w;
    const std::size_t col = idx % w;
    const Real* dzr = dz + r * zw;
    const Real* dza = dzr + d;
    const Real* dzb = dzr + 2 * d;
    Real* gself = g + idx * d;
    for (std::size_t c = 0; c < d; ++c) gself[c] += dzr[c];
    for (int dy = -1; dy <= 1; ++dy) {
      const std::size_t rr = std::clamp<long>(long(row) + dy, 0, long(h) - 1);
      for (int dx = -1; dx <= 1; ++dx) {
        const std::size_t cc = std::clamp<long>(long(col) + dx, 0, long(w) - 1);
        const std::size_t tap = std::size_t((dy + 1) * 3 + (dx + 1));
        const std::size_t nb = rr * w + cc;
        const Real* snb = s + nb * d;
        Real* gnb = g + nb * d;
        const Real* ka_t = ka + tap * d;
        const Real* kb_t = kb + tap * d;
        Real* gka_t = gka + tap * d;
        Real* gkb_t = gkb + tap * d;
        for (std::size_t c = 0; c < d; ++c) {
          gnb[c] += ka_t[c] * dza[c] + kb_t[c] * dzb[c];
          gka_t[c] += dza[c] * snb[c];
          gkb_t[c] += dzb[c] * snb[c];
        }
      }
    }
  }
}

}  // namespace detail
}  // namespace tenca
