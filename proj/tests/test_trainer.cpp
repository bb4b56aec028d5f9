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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "tenca/error.hpp"
#include "tenca/phantom.hpp"
#include "tenca/trainer.hpp"
#include "test_util.hpp"

using namespace tenca;
using tenca::testing::random_case;
using tenca::testing::random_image;
using tenca::testing::random_params;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.channels = 4;
  cfg.hidden = 8;
  cfg.n_steps = 16;
  cfg.batch_size = 2;
  return cfg;
}

ParamBlock two_entry_block(Real a, Real b) {
  ParamBlock g(ModelShape{2, 1});
  g.fill(0);
  g.flat()[0] = a;
  g.flat()[45] = b;
  return g;
}

}  // namespace

TEST_CASE("time_to_step") {
  CHECK(time_to_step(1024, 8) == 128);
  CHECK(time_to_step(8, 8) == 1);
  CHECK(time_to_step(100, 8) == 13);
  CHECK(time_to_step(99.9, 8) == 12);
  CHECK(time_to_step(1, 8) == 1);
  CHECK(time_to_step(3.99, 8) == 1);
  CHECK_THROWS_AS(time_to_step(0, 8), DataError);
}

TEST_CASE("make_schedule: steps, horizon and collisions") {
  TrainConfig cfg;
  TrainingCase c = random_case(4, 4, {64, 192, 448, 960}, 1);
  Schedule s = make_schedule(c, cfg);
  CHECK(s.snapshot_steps == std::vector<std::size_t>{8, 24, 56, 120});
  CHECK(s.n_steps == 120);
  cfg.full_horizon = true;
  CHECK(make_schedule(c, cfg).n_steps == 128);

  std::vector<std::string> warnings;
  make_schedule(c, cfg, &warnings);
  CHECK(warnings.empty());

  TrainingCase clash = random_case(4, 4, {60, 62}, 2);
  CHECK_THROWS_AS(make_schedule(clash, cfg), DataError);

  cfg.n_steps = 100;
  CHECK_THROWS_AS(make_schedule(c, cfg), ConfigError);
}

TEST_CASE("sparse_loss") {
  const VisiblePlane zero{2, 2, {0, 0, 0, 0}};
  const Image half(2, 2, 0.5f);
  CHECK(sparse_loss(std::vector<VisiblePlane>{zero}, std::vector<Image>{half}) == 0.25);
  const VisiblePlane same{2, 2, {0.5, 0.5, 0.5, 0.5}};
  CHECK(sparse_loss(std::vector<VisiblePlane>{zero, same}, std::vector<Image>{half, half}) ==
        0.125);
  CHECK(sparse_loss(std::vector<VisiblePlane>{same}, std::vector<Image>{half}) == 0);
  CHECK_THROWS_AS(sparse_loss(std::vector<VisiblePlane>{zero}, std::vector<Image>{}),
                  ContractViolation);
}

TEST_CASE("loss is evaluated at exactly the conditioned steps") {
  TrainConfig cfg = tiny_config();
  cfg.n_steps = 64;
  const TrainingCase c = random_case(6, 6, {24, 100, 300}, 3);
  const ModelParams p = random_params(cfg.shape(), 4, 0.3);
  const Schedule s = make_schedule(c, cfg);
  CHECK(s.snapshot_steps == std::vector<std::size_t>{3, 13, 38});
  const RngKey key = training_key(cfg, 0, c.case_id);
  const RolloutResult r =
      rollout(init_state(c.pre_contrast, 4), p, s.n_steps, s.snapshot_steps, key, cfg.rule());
  std::vector<Image> targets;
  for (const auto& f : c.frames) targets.push_back(f.target);
  const Real oracle = sparse_loss(r.snapshots, targets);
  const CaseGradient g = case_gradient(c, p, cfg, key);
  CHECK(g.loss == doctest::Approx(oracle).epsilon(1e-13));

  // Shifting any snapshot by one step changes the loss.
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::size_t> shifted = s.snapshot_steps;
    shifted[i] += 1;
    const RolloutResult r2 =
        rollout(init_state(c.pre_contrast, 4), p, 64, shifted, key, cfg.rule());
    CHECK(sparse_loss(r2.snapshots, targets) != oracle);
  }
  CHECK(predict_frames(c, p, cfg, key) == r.snapshots);
}

TEST_CASE("loss is non-negative and zero only at the targets") {
  TrainConfig cfg = tiny_config();
  TrainingCase c = random_case(5, 5, {16, 40}, 5);
  ModelParams p = random_params(cfg.shape(), 6, 0.3);
  CHECK(case_gradient(c, p, cfg, RngKey{}).loss > 0);
  for (auto& v : p.w2()) v = 0;
  for (auto& v : p.b2()) v = 0;
  for (auto& f : c.frames) f.target = c.pre_contrast;
  CHECK(case_gradient(c, p, cfg, RngKey{}).loss == 0);
}

TEST_CASE("adam: zero gradients and the first step") {
  TrainConfig cfg;
  ModelParams p = random_params({2, 1}, 7);
  const ModelParams before = p;
  OptimizerState st(p.shape());
  adam_update(p, ParamBlock(p.shape()), st, cfg);
  CHECK(p == before);
  CHECK(st.step == 1);

  st.first_moment.fill(0.5);
  st.second_moment.fill(0.25);
  OptimizerState decayed = st;
  adam_update(p, ParamBlock(p.shape()), decayed, cfg);
  CHECK(decayed.first_moment.flat()[3] == doctest::Approx(0.45));
  CHECK(decayed.second_moment.flat()[3] == doctest::Approx(0.24975));

  ModelParams q({2, 1});
  OptimizerState fresh(q.shape());
  ParamBlock g(q.shape());
  g.flat()[0] = 1;
  adam_update(q, g, fresh, cfg);
  // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
  CHECK(q.flat()[0] == doctest::Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-12));
  CHECK(q.flat()[1] == 0);
}

TEST_CASE("adam: a repeated gradient moves the parameter monotonically against it") {
  TrainConfig cfg;
  ModelParams p({2, 1});
  OptimizerState st(p.shape());
  ParamBlock g(p.shape());
  g.flat()[5] = 0.3;
  double prev = 0;
  // Scalar oracle of the same recurrence.
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 50; ++t) {
    adam_update(p, g, st, cfg);
    m = 0.9 * m + 0.1 * 0.3;
    v = 0.999 * v + 0.001 * 0.09;
    x -= 1e-3 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    CHECK(p.flat()[5] < prev);
    CHECK(p.flat()[5] == doctest::Approx(x).epsilon(1e-12));
    prev = p.flat()[5];
  }
  CHECK(st.step == 50);
}

TEST_CASE("adam: non-finite gradients leave everything untouched") {
  TrainConfig cfg;
  ModelParams p = random_params({2, 1}, 8);
  OptimizerState st(p.shape());
  st.first_moment.fill(0.1);
  const ModelParams p0 = p;
  const OptimizerState s0 = st;
  ParamBlock g(p.shape());
  g.flat()[2] = std::numeric_limits<Real>::quiet_NaN();
  CHECK_THROWS_AS(adam_update(p, g, st, cfg), NumericError);
  CHECK(p == p0);
  CHECK(st == s0);
}

TEST_CASE("clip_gradients") {
  ParamBlock small = two_entry_block(0.3, 0.4);
  const ParamBlock small0 = small;
  CHECK(clip_gradients(small, 1.0) == doctest::Approx(0.5));
  CHECK(small == small0);

  ParamBlock big = two_entry_block(3, 4);
  CHECK(clip_gradients(big, 1.0) == doctest::Approx(5.0));
  CHECK(big.flat()[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(big.flat()[45] == doctest::Approx(0.8).epsilon(1e-15));

  std::mt19937_64 gen(9);
  std::normal_distribution<Real> n(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    ParamBlock g(ModelShape{4, 6});
    for (auto& v : g.flat()) v = n(gen);
    const double before = global_norm(g);
    const double max_norm = trial % 2 ? 1.0 : before * 2;
    clip_gradients(g, max_norm);
    CHECK(std::abs(global_norm(g) - std::min(before, max_norm)) < 1e-12);
    CHECK(global_norm(g) <= max_norm + 1e-12);
  }
}

TEST_CASE("train_epoch on an already-solved case changes nothing") {
  TrainConfig cfg = tiny_config();
  TrainingCase c = random_case(5, 5, {16, 40}, 10);
  for (auto& f : c.frames) f.target = c.pre_contrast;
  ModelParams p = init_params(cfg.shape(), 1);
  const ModelParams p0 = p;
  OptimizerState st(cfg.shape());
  const std::vector<TrainingCase> ds{c};
  const EpochStats stats = train_epoch(ds, p, st, cfg, 0);
  CHECK(stats.mean_loss == 0);
  CHECK(stats.optimizer_steps == 1);
  CHECK(p == p0);
}

TEST_CASE("train_epoch mixes cases with different frame counts") {
  TrainConfig cfg = tiny_config();
  cfg.n_steps = 128;
  cfg.batch_size = 3;
  std::vector<TrainingCase> ds{random_case(6, 6, {40, 400}, 11),
                               random_case(6, 6, {16, 100, 300, 600, 1000}, 12),
                               random_case(6, 6, {24, 72, 960}, 13)};
  ModelParams p = init_params(cfg.shape(), 2);
  OptimizerState st(cfg.shape());
  const EpochStats stats = train_epoch(ds, p, st, cfg, 0);
  CHECK(stats.failed_cases == 0);
  CHECK(stats.optimizer_steps == 1);
  CHECK(st.step == 1);
  for (const auto& c : ds) {
    const ForwardResult f = forward_with_tape(c, p, make_schedule(c, cfg), RngKey{});
    CHECK(f.tape.frame_losses.size() == c.k());
  }
}

TEST_CASE("train_epoch skips failing cases and aborts past ten percent") {
  TrainConfig cfg = tiny_config();
  cfg.batch_size = 4;
  std::vector<TrainingCase> ds;
  for (std::uint64_t i = 0; i < 20; ++i) ds.push_back(random_case(4, 4, {16, 40}, 100 + i));
  ds[3].frames[0].target(1, 1) = std::numeric_limits<float>::infinity();
  ModelParams p = init_params(cfg.shape(), 3);
  OptimizerState st(cfg.shape());
  const EpochStats stats = train_epoch(ds, p, st, cfg, 0);
  CHECK(stats.failed_cases == 1);
  CHECK(stats.incidents.size() == 1);
  CHECK(stats.optimizer_steps == 5);
  CHECK(p.all_finite());

  std::vector<TrainingCase> bad(ds.begin(), ds.begin() + 5);
  CHECK_THROWS_AS(train_epoch(bad, p, st, cfg, 1), Error);
}

TEST_CASE("train_epoch is deterministic and independent of the worker count") {
  TrainConfig cfg = tiny_config();
  std::vector<TrainingCase> ds;
  for (std::uint64_t i = 0; i < 6; ++i) ds.push_back(random_case(6, 6, {16, 64}, 200 + i));
  auto run = [&](bool reproducible) {
    TrainConfig c2 = cfg;
    c2.reproducible = reproducible;
    ModelParams p = init_params(c2.shape(), 4);
    OptimizerState st(c2.shape());
    for (std::size_t e = 0; e < 2; ++e) train_epoch(ds, p, st, c2, e);
    return std::make_pair(p, st);
  };
  const auto a = run(true);
  const auto b = run(true);
  const auto c = run(false);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first == c.first);
  CHECK(a.second == c.second);
  CHECK_FALSE(a.first == init_params(cfg.shape(), 4));
}

TEST_CASE("training lowers the loss on a tiny phantom") {
  PhantomSpec spec;
  spec.height = 16;
  spec.width = 16;
  for (std::uint64_t seed : {1, 2, 3}) {
    spec.seed = seed;
    TrainConfig cfg;
    cfg.channels = 8;
    cfg.hidden = 32;
    cfg.seed = seed;
    const std::vector<TrainingCase> ds{generate_phantom(spec, 0).data};
    ModelParams p = init_params(cfg.shape(), seed);
    OptimizerState st(cfg.shape());
    const double first = train_epoch(ds, p, st, cfg, 0).mean_loss;
    double last = first;
    for (std::size_t e = 1; e < 50; ++e) last = train_epoch(ds, p, st, cfg, e).mean_loss;
    CHECK(last < first);
  }
}

TEST_CASE("config validation names the field") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("learning_rate"), ConfigError);
  cfg = TrainConfig{};
  cfg.fire_rate = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("fire_rate"), ConfigError);
  cfg = TrainConfig{};
  cfg.channels = 1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("channels"), ConfigError);
}

TEST_CASE("training and evaluation keys differ") {
  TrainConfig cfg;
  CHECK_FALSE(training_key(cfg, 0, 5) == training_key(cfg, 1, 5));
  CHECK_FALSE(training_key(cfg, 0, 5) == training_key(cfg, 0, 6));
  CHECK_FALSE(evaluation_key(cfg, 5) == training_key(cfg, 0, 5));
}
