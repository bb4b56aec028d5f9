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

// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "tenca/autodiff.hpp"
#include "tenca/grid.hpp"
#include "tenca/metrics.hpp"
#include "tenca/phantom.hpp"
#include "tenca/trainer.hpp"

namespace {

using namespace tenca;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& line) {
  std::printf("  %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Parameter count of the default model.
void param_count_fidelity() {
  const auto t0 = Clock::now();
  const std::size_t n = param_count(24, 128);
  const double ms = seconds_since(t0) * 1e3;
  const std::size_t by_hand = 2 * 9 * 24 + (3 * 24) * 128 + 128 + 128 * 24 + 24;
  const bool ok = n == 12872 && n == by_hand &&
                  std::lround(double(n) / 1000.0) == 13 && ms < 1.0;
  verdict(1, ok, "param_count(24,128)=" + std::to_string(n) + " (13e3 rounded), " +
                     fmt("%.4f ms", ms));
}

// 2. BPTT against central differences on five seeded tiny problems.
void gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const cli::GradcheckProblem p = cli::make_gradcheck_problem(seed, true);
    FiniteDiffOptions opt;
    opt.epsilon = 1e-5;
    opt.samples = 0;  // every parameter
    opt.rule = p.rule;
    const FiniteDiffReport r =
        finite_diff_check(p.params, p.data, p.schedule, p.key, opt);
    note("seed " + std::to_string(seed) + ": " + std::to_string(r.indices.size()) +
         " parameters, max relative error " + fmt("%.3g", r.max_relative_error));
    worst = std::max(worst, r.max_relative_error);
  }
  const double sec = seconds_since(t0);
  verdict(2, worst < 1e-4 && sec < 30.0,
          "max relative error " + fmt("%.3g", worst) + " (< 1e-4), " + fmt("%.2f s", sec));
}

// 3. Segment length 1 and 16 give bit-identical gradients.
void recomputation_equivalence() {
  const auto t0 = Clock::now();
  bool same = true;
  for (bool det : {true, false}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const cli::GradcheckProblem p = cli::make_gradcheck_problem(seed, det);
      auto grads = [&](std::size_t k) {
        const ForwardResult f =
            forward_with_tape(p.data, p.params, p.schedule, p.key, {k, p.rule});
        return backward(f.tape, p.params);
      };
      same = same && grads(1) == grads(16);
    }
  }
  const double sec = seconds_since(t0);
  verdict(3, same && sec < 10.0,
          std::string(same ? "bit-identical" : "gradients differ") +
              " for K=1 vs K=16 on 10 problems, " + fmt("%.2f s", sec));
}

// Shared by 4 and 7: one 64x64 phantom conditioned at four uneven times.
struct OverfitCase {
  Phantom phantom;
  TrainingCase data;
};

OverfitCase overfit_case() {
  PhantomSpec spec;
  spec.seed = 12345;
  OverfitCase o{generate_phantom(spec, 0), {}};
  o.data.case_id = 0;
  o.data.pre_contrast = o.phantom.data.pre_contrast;
  for (double t : {64.0, 192.0, 448.0, 960.0}) o.data.frames.push_back({o.phantom.truth.at(t), t});
  return o;
}

constexpr std::size_t kOverfitLimit = 2000;
constexpr std::size_t kOverfitBudget = 300;  // steps trained before the continuity check
constexpr double kOverfitThreshold = 1e-3;

// 4 and 7.
void overfit_and_continuity(bool run4, bool run7) {
  const OverfitCase o = overfit_case();
  const TrainConfig cfg;
  ModelParams params = init_params(cfg.shape(), cfg.seed);
  OptimizerState state(cfg.shape());
  const std::vector<TrainingCase> ds{o.data};

  const auto t0 = Clock::now();
  std::size_t hit = 0;
  double hit_loss = 0, hit_sec = 0;
  const std::size_t budget = run7 ? kOverfitBudget : kOverfitLimit;
  for (std::size_t step = 0; step < std::max(budget, std::size_t{1}); ++step) {
    const EpochStats s = train_epoch(ds, params, state, cfg, step);
    if (hit == 0 && s.mean_loss < kOverfitThreshold) {
      hit = step + 1;
      hit_loss = s.mean_loss;
      hit_sec = seconds_since(t0);
      if (!run7) break;
    }
    if (step % 50 == 0) note("step " + std::to_string(step + 1) + " loss " + fmt("%.4g", s.mean_loss));
  }
  const auto eval = predict_frames(o.data, params, cfg, evaluation_key(cfg, 0));
  double eval_mse = 0;
  for (std::size_t i = 0; i < eval.size(); ++i)
    eval_mse += mse(eval[i].to_image(), o.data.frames[i].target);
  eval_mse /= double(eval.size());

  if (run4) {
    const bool ok = hit != 0 && hit <= kOverfitLimit && hit_sec < 15 * 60;
    verdict(4, ok,
            hit ? "training loss " + fmt("%.4g", hit_loss) + " < 1e-3 at optimizer step " +
                      std::to_string(hit) + " of " + std::to_string(kOverfitLimit) + ", " +
                      fmt("%.1f s", hit_sec)
                : "loss never fell below 1e-3");
    if (run7) note("evaluation-mask MSE after " + std::to_string(budget) + " steps " + fmt("%.4g", eval_mse));
  }
  if (!run7) return;

  // Every step up to the last conditioned one, under the evaluation key.
  const std::size_t last = time_to_step(960.0, cfg.delta_t_s);
  const auto frames = rollout_all_steps(init_state(o.data.pre_contrast, cfg.channels), params,
                                        last, evaluation_key(cfg, 0), cfg.rule());
  auto max_abs_diff = [](const Image& a, const Image& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      m = std::max(m, std::abs(double(a.pixels()[i]) - double(b.pixels()[i])));
    return m;
  };
  double step_change = 0;
  Image prev = o.data.pre_contrast;
  for (const auto& f : frames) {
    const Image cur = f.to_image();
    step_change = std::max(step_change, max_abs_diff(prev, cur));
    prev = cur;
  }
  double interval_change = 0;
  prev = o.data.pre_contrast;
  for (const auto& f : o.data.frames) {
    interval_change = std::max(interval_change, max_abs_diff(prev, f.target));
    prev = f.target;
  }

  // Unconditioned times strictly between conditioned frames.
  bool beats = true;
  std::size_t checked = 0;
  std::set<std::size_t> conditioned;
  for (const auto& f : o.data.frames) conditioned.insert(time_to_step(f.time_s, cfg.delta_t_s));
  for (std::size_t s = time_to_step(64.0, cfg.delta_t_s) + 1; s < last; ++s) {
    if (conditioned.count(s)) continue;
    const double t = double(s) * cfg.delta_t_s;
    const Image truth = o.phantom.truth.at(t);
    const double m = mse(frames[s - 1].to_image(), truth);
    const double b = mse(o.data.pre_contrast, truth);
    beats = beats && m < b;
    ++checked;
    if (s % 16 == 0) note("t=" + fmt("%g s", t) + " model MSE " + fmt("%.3g", m) + " baseline " + fmt("%.3g", b));
  }
  const bool bounded = step_change <= 2.0 * interval_change;
  verdict(7, beats && bounded,
          std::to_string(checked) + " unconditioned steps " +
              (beats ? "all beat" : "do not all beat") + " the baseline; max step change " +
              fmt("%.3g", step_change) + " vs bound 2 x " + fmt("%.3g", interval_change));
}

// 5 and 6: held-out phantoms against the pre-contrast copy.
constexpr std::size_t kTrainCases = 200;
constexpr std::size_t kTestCases = 50;
constexpr std::size_t kGeneralizeEpochs = 6;

void generalization(bool run5, bool run6) {
  const auto t0 = Clock::now();
  PhantomSpec train_spec;
  train_spec.seed = 1001;
  PhantomSpec test_spec = train_spec;
  test_spec.seed = 2002;
  std::vector<TrainingCase> train, test;
  for (std::size_t i = 0; i < kTrainCases; ++i) train.push_back(generate_phantom(train_spec, i).data);
  for (std::size_t i = 0; i < kTestCases; ++i)
    test.push_back(generate_phantom(test_spec, kTrainCases + i).data);

  const TrainConfig cfg;
  ModelParams params = init_params(cfg.shape(), cfg.seed);
  OptimizerState state(cfg.shape());
  for (std::size_t e = 0; e < kGeneralizeEpochs; ++e) {
    const EpochStats s = train_epoch(train, params, state, cfg, e);
    note("epoch " + std::to_string(e) + " loss " + fmt("%.4g", s.mean_loss) + " at " +
         fmt("%.0f s", seconds_since(t0)));
  }

  std::vector<std::vector<Image>> preds;
  for (const auto& c : test) {
    std::vector<Image> p;
    for (const auto& v : predict_frames(c, params, cfg, evaluation_key(cfg, c.case_id)))
      p.push_back(v.to_image());
    preds.push_back(std::move(p));
  }
  const MetricReport model = evaluate_predictions(test, preds, "model");
  const MetricReport base = baseline_report(test);
  const double sec = seconds_since(t0);

  if (run5) {
    std::size_t wins = 0;
    for (const auto& c : test) {
      const MetricMeans m = model.case_mean(c.case_id);
      const MetricMeans b = base.case_mean(c.case_id);
      wins += (m.mse < b.mse && m.ssim > b.ssim) ? 1 : 0;
    }
    const MetricMeans mo = model.overall();
    const MetricMeans bo = base.overall();
    note("model    MSE " + fmt("%.4g", mo.mse) + " SSIM " + fmt("%.4f", mo.ssim) + " MS-SSIM " +
         fmt("%.4f", mo.ms_ssim) + " PSNR " + fmt("%.2f dB", mo.psnr_db));
    note("baseline MSE " + fmt("%.4g", bo.mse) + " SSIM " + fmt("%.4f", bo.ssim) + " MS-SSIM " +
         fmt("%.4f", bo.ms_ssim) + " PSNR " + fmt("%.2f dB", bo.psnr_db));
    const bool ok = wins * 10 >= kTestCases * 9 && mo.ssim > bo.ssim && sec < 3600;
    verdict(5, ok,
            "model beats baseline on MSE and SSIM for " + std::to_string(wins) + "/" +
                std::to_string(kTestCases) + " held-out cases, mean SSIM " +
                fmt("%.4f", mo.ssim) + " vs " + fmt("%.4f", bo.ssim) + ", " + fmt("%.0f s", sec));
  }
  if (run6) {
    double lo = 1e300, hi = -1e300;
    for (const MetricMeans& m : model.per_phase()) {
      note("phase " + std::to_string(m.phase) + " (" + std::to_string(m.count) +
           " frames) SSIM " + fmt("%.4f", m.ssim));
      if (m.phase < 1 || m.phase > 4) continue;
      lo = std::min(lo, m.ssim);
      hi = std::max(hi, m.ssim);
    }
    verdict(6, hi - lo < 0.05, "per-phase SSIM range over phases 1-4 " + fmt("%.4f", hi - lo) + " (< 0.05)");
  }
}

// 8. The invariant suites plus a two-epoch bitwise determinism run.
void invariant_suites() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::istringstream list(TENCA_INVARIANT_SUITES);
  std::string exe;
  while (std::getline(list, exe, ';')) {
    const std::string cmd = "\"" + exe + "\" --minimal > /dev/null 2>&1";
    const bool pass = std::system(cmd.c_str()) == 0;
    note(exe.substr(exe.find_last_of('/') + 1) + (pass ? " passed" : " FAILED"));
    ok = ok && pass;
  }

  PhantomSpec spec;
  spec.height = spec.width = 16;
  std::vector<TrainingCase> ds;
  for (std::uint64_t i = 0; i < 4; ++i) ds.push_back(generate_phantom(spec, i).data);
  TrainConfig cfg;
  cfg.channels = 8;
  cfg.hidden = 16;
  cfg.n_steps = 128;
  cfg.reproducible = true;
  auto run = [&] {
    ModelParams p = init_params(cfg.shape(), cfg.seed);
    OptimizerState st(cfg.shape());
    for (std::size_t e = 0; e < 2; ++e) train_epoch(ds, p, st, cfg, e);
    return std::make_pair(p, st);
  };
  const bool same = run() == run();
  note(std::string("two-epoch reproducible training ") + (same ? "bit-identical" : "DIFFERS"));
  const double sec = seconds_since(t0);
  verdict(8, ok && same && sec < 120.0,
          std::string(ok ? "all invariant suites pass" : "an invariant suite failed") + ", " +
              fmt("%.1f s", sec));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || only.count(id) > 0; };

  if (want(1)) param_count_fidelity();
  if (want(2)) gradient_correctness();
  if (want(3)) recomputation_equivalence();
  if (want(8)) invariant_suites();
  if (want(4) || want(7)) overfit_and_continuity(want(4), want(7));
  if (want(5) || want(6)) generalization(want(5), want(6));

  std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                    : "acceptance: some criteria FAILED");
  return failures == 0 ? 0 : 1;
}
