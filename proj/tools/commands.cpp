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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "tenca/checkpoint.hpp"
#include "tenca/config.hpp"
#include "tenca/dataset.hpp"
#include "tenca/error.hpp"
#include "tenca/metrics.hpp"
#include "tenca/parallel.hpp"
#include "tenca/pgm.hpp"
#include "tenca/phantom.hpp"
#include "tenca/trainer.hpp"

namespace tenca::cli {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base_dir, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string seconds_label(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

}  // namespace

int cmd_gen_data(const fs::path& spec_path, const fs::path& out_dir, std::ostream& log) {
  const DataGenSpec spec = parse_datagen_spec(read_text_file(spec_path));
  ensure_dir(out_dir);

  std::vector<TrainingCase> cases(spec.cases);
  parallel_for(spec.cases, worker_count(false), [&](std::size_t i) {
    TrainingCase c = generate_phantom(spec.phantom, spec.first_case_id + i).data;
    if (spec.normalize) c = normalize_case(c);
    if (spec.crop_size != 0) {
      c = crop_case(c, c.pre_contrast.height() / 2, c.pre_contrast.width() / 2,
                    spec.crop_size);
    }
    cases[i] = std::move(c);
  });
  const DatasetManifest manifest = write_dataset(out_dir, cases, spec.phantom.delta_t_s);

  std::uintmax_t bytes = 0;
  for (const auto& e : manifest.entries) bytes += fs::file_size(out_dir / e.payload);
  log << "wrote " << manifest.entries.size() << " cases (" << bytes << " payload bytes) to "
      << out_dir.string() << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args, std::ostream& log) {
  RunConfig run = parse_run_config(read_text_file(args.config));
  const fs::path base = args.config.parent_path();
  run.dataset = resolve(base, run.dataset);
  run.checkpoint_dir = resolve(base, run.checkpoint_dir.empty() ? "checkpoints" : run.checkpoint_dir);
  run.report_dir = resolve(base, run.report_dir.empty() ? "reports" : run.report_dir);
  if (args.reproducible) run.train.reproducible = true;
  if (run.dataset.empty()) throw ConfigError("config field 'paths.dataset' is required");

  const std::vector<TrainingCase> dataset = read_dataset(run.dataset);
  if (dataset.empty()) throw ConfigError("dataset " + run.dataset.string() + " has no cases");
  for (const auto& c : dataset) {
    validate_case(c);
    std::vector<std::string> warnings;
    make_schedule(c, run.train, &warnings);
    for (const auto& w : warnings) log << "warning: " << w << "\n";
  }

  Checkpoint ckpt;
  if (args.resume) {
    const auto bytes = read_file_bytes(*args.resume);
    if (checkpoint_config_hash(bytes) != config_hash(run.train)) {
      throw ConfigError("refusing to resume: checkpoint " + args.resume->string() +
                        " was trained with a different configuration");
    }
    ckpt = decode_checkpoint(bytes);
    log << "resuming from " << args.resume->string() << " at epoch " << ckpt.epoch << "\n";
  } else {
    ckpt.params = init_params(run.train.shape(), run.train.seed);
    ckpt.optimizer = OptimizerState(run.train.shape());
    ckpt.epoch = 0;
  }
  ckpt.config = run.train;
  ckpt.seed = run.train.seed;

  ensure_dir(run.checkpoint_dir);
  ensure_dir(run.report_dir);
  const fs::path stats_path = run.report_dir / "train_stats.csv";
  const bool fresh_stats = !fs::exists(stats_path) || !args.resume;
  std::ofstream stats_out(stats_path, fresh_stats ? std::ios::trunc : std::ios::app);
  if (!stats_out) throw IoError("cannot write " + stats_path.string());
  if (fresh_stats) stats_out << "epoch,mean_loss,grad_norm,seconds\n";

  std::size_t run_epochs = 0;
  while (ckpt.epoch < run.train.epochs) {
    if (args.max_epochs != 0 && run_epochs == args.max_epochs) break;
    const std::size_t epoch = ckpt.epoch;
    const EpochStats stats =
        train_epoch(dataset, ckpt.params, ckpt.optimizer, run.train, epoch);
    ++ckpt.epoch;
    ++run_epochs;
    for (const auto& incident : stats.incidents) log << "incident: " << incident << "\n";
    stats_out << stats.epoch << ',' << format_double(stats.mean_loss) << ','
              << format_double(stats.grad_norm) << ',' << format_double(stats.seconds) << "\n";
    stats_out.flush();
    log << "epoch " << stats.epoch << " loss " << stats.mean_loss << " grad_norm "
        << stats.grad_norm << " (" << std::fixed << std::setprecision(2) << stats.seconds
        << " s)" << std::defaultfloat << std::setprecision(6) << "\n";
    const bool last = ckpt.epoch == run.train.epochs;
    if (last || (run.checkpoint_every != 0 && ckpt.epoch % run.checkpoint_every == 0)) {
      char name[48];
      std::snprintf(name, sizeof name, "epoch_%06llu.tnck",
                    static_cast<unsigned long long>(ckpt.epoch));
      save_checkpoint(run.checkpoint_dir / name, ckpt);
    }
  }
  save_checkpoint(run.checkpoint_dir / "latest.tnck", ckpt);
  log << "trained to epoch " << ckpt.epoch << "; checkpoint "
      << (run.checkpoint_dir / "latest.tnck").string() << "\n";
  return 0;
}

int cmd_rollout(const RolloutArgs& args, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const TrainConfig& config = ckpt.config;

  Image pre;
  std::uint64_t case_id = 0;
  if (args.image) {
    pre = read_pgm(*args.image);
  } else if (args.data && args.case_id) {
    const DatasetManifest manifest = read_manifest(*args.data);
    const auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                                 [&](const ManifestEntry& e) { return e.case_id == *args.case_id; });
    if (it == manifest.entries.end()) {
      throw DataError("case " + std::to_string(*args.case_id) + " not found in " +
                      args.data->string());
    }
    pre = read_case(*args.data, *it).pre_contrast;
    case_id = *args.case_id;
  } else {
    throw ConfigError("rollout needs --image or --data with --case");
  }

  std::vector<std::size_t> steps;
  if (args.all_steps) {
    for (std::size_t s = 1; s <= config.n_steps; ++s) steps.push_back(s);
  } else {
    if (args.times.empty()) throw ConfigError("rollout needs --times or --all-steps");
    for (double t : args.times) {
      if (!(t > 0.0) || t > config.horizon_s() + config.delta_t_s / 2) {
        std::ostringstream msg;
        msg << "time " << t << " s is outside the model horizon (0, " << config.horizon_s()
            << "] s (" << config.n_steps << " steps of " << config.delta_t_s << " s)";
        throw ConfigError(msg.str());
      }
      steps.push_back(std::min(time_to_step(t, config.delta_t_s), config.n_steps));
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  }

  ensure_dir(args.out_dir);
  const CellGrid grid0 = init_state(pre, config.channels);
  const RolloutResult result = rollout(grid0, ckpt.params, steps.back(), steps,
                                       evaluation_key(config, case_id), config.rule());
  write_pgm(args.out_dir / "pre_contrast.pgm", pre);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Image frame = result.snapshots[i].to_image();
    char stem[64];
    std::snprintf(stem, sizeof stem, "s%04zu_t%ss.pgm", steps[i],
                  seconds_label(double(steps[i]) * config.delta_t_s).c_str());
    write_pgm(args.out_dir / (std::string("frame_") + stem), frame);
    write_pgm(args.out_dir / (std::string("sub_") + stem), subtraction_image(frame, pre));
  }
  log << "wrote " << steps.size() << " frames to " << args.out_dir.string() << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const std::vector<TrainingCase> dataset = read_dataset(args.data);
  if (dataset.empty()) throw ConfigError("dataset " + args.data.string() + " has no cases");
  for (const auto& c : dataset) {
    validate_case(c);
    make_schedule(c, ckpt.config);  // throws on frames beyond the model horizon
  }

  std::vector<std::vector<Image>> predictions(dataset.size());
  parallel_for(dataset.size(), worker_count(args.reproducible || ckpt.config.reproducible),
               [&](std::size_t i) {
                 const auto planes = predict_frames(dataset[i], ckpt.params, ckpt.config,
                                                    evaluation_key(ckpt.config, dataset[i].case_id));
                 for (const auto& p : planes) predictions[i].push_back(p.to_image());
               });
  std::vector<MetricReport> reports;
  reports.push_back(evaluate_predictions(dataset, predictions, "model"));
  reports.push_back(baseline_report(dataset));

  if (args.out.has_parent_path()) ensure_dir(args.out.parent_path());
  write_text_file(args.out, format_report_csv(reports));

  log << std::left << std::setw(10) << "source" << std::setw(7) << "phase" << std::setw(12)
      << "mse" << std::setw(12) << "psnr_db" << std::setw(10) << "ssim" << "ms_ssim\n";
  for (const auto& r : reports) {
    auto row = [&](const MetricMeans& m) {
      log << std::left << std::setw(10) << r.source << std::setw(7)
          << (m.phase == 0 ? std::string("all") : std::to_string(m.phase)) << std::setw(12)
          << m.mse << std::setw(12) << m.psnr_db << std::setw(10) << m.ssim << m.ms_ssim
          << "\n";
    };
    for (const auto& m : r.per_phase()) row(m);
    row(r.overall());
  }
  log << "report written to " << args.out.string() << "\n";
  return 0;
}

GradcheckProblem make_gradcheck_problem(std::uint64_t seed, bool deterministic_mask) {
  constexpr std::size_t kSize = 8;
  constexpr std::size_t kMaxDraws = 1000;
  const ModelShape shape{4, 8};
  std::mt19937_64 gen(mix64(seed ^ 0x67726164ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s2 = 1.0 / std::sqrt(double(shape.hidden));
  std::uniform_real_distribution<double> w2(-s2, s2);
  std::uniform_real_distribution<double> bias(-0.1, 0.1);

  GradcheckProblem p;
  p.schedule.n_steps = 5;
  p.schedule.snapshot_steps = {2, 5};
  p.key = RngKey{seed, 0, seed, 0};
  p.rule.deterministic_mask = deterministic_mask;
  while (p.draws < kMaxDraws) {
    ++p.draws;
    p.data = TrainingCase{};
    p.data.case_id = seed;
    p.data.pre_contrast = Image(kSize, kSize);
    for (auto& v : p.data.pre_contrast.pixels()) v = static_cast<float>(unit(gen));
    for (double t : {16.0, 40.0}) {
      Frame f{Image(kSize, kSize), t};
      for (auto& v : f.target.pixels()) v = static_cast<float>(unit(gen));
      p.data.frames.push_back(std::move(f));
    }
    p.params = init_params(shape, gen());
    for (auto& v : p.params.w2()) v = static_cast<Real>(w2(gen));
    for (auto& v : p.params.b1()) v = static_cast<Real>(bias(gen));
    for (auto& v : p.params.b2()) v = static_cast<Real>(bias(gen));
    if (relu_margin(p.data, p.params, p.schedule, p.key, p.rule) >= kGradcheckReluMargin) {
      return p;
    }
  }
  throw NumericError("no kink-free gradcheck problem found for seed " + std::to_string(seed), 0);
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& log) {
  if (args.trials == 0) throw ConfigError("gradcheck needs at least one trial");
  bool ok = true;
  for (std::size_t t = 0; t < args.trials; ++t) {
    const GradcheckProblem p = make_gradcheck_problem(args.seed + t, args.deterministic_mask);
    FiniteDiffOptions opt;
    opt.epsilon = args.epsilon;
    opt.samples = args.samples;
    opt.sample_seed = args.seed + t;
    opt.rule = p.rule;
    opt.corrupt_backward = args.corrupt_backward;
    const FiniteDiffReport r = finite_diff_check(p.params, p.data, p.schedule, p.key, opt);
    const bool pass = r.max_relative_error < kGradcheckTolerance;
    ok = ok && pass;
    log << "trial " << t << " seed " << args.seed + t << " params " << r.indices.size()
        << " max_rel_error " << std::scientific << std::setprecision(3)
        << r.max_relative_error << std::defaultfloat << std::setprecision(6)
        << (pass ? " ok" : " FAIL") << "\n";
  }
  log << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance "
      << kGradcheckTolerance << ")\n";
  return ok ? 0 : 1;
}

}  // namespace tenca::cli
