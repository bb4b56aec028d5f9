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

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "tenca/error.hpp"

int main(int argc, char** argv) {
  namespace cli = tenca::cli;
  CLI::App app{"Temporal neural cellular automata: data, training, rollout, evaluation"};
  app.require_subcommand(1);
  bool reproducible = false;
  app.add_flag("--reproducible", reproducible,
               "single-threaded, bitwise deterministic execution");

  std::string spec, out_dir;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic phantom dataset");
  gen->add_option("--spec", spec, "phantom spec file")->required();
  gen->add_option("--out", out_dir, "output dataset directory")->required();

  cli::TrainArgs train;
  std::string train_config, resume;
  auto* tr = app.add_subcommand("train", "train a model from a config file");
  tr->add_option("--config", train_config, "run config file")->required();
  tr->add_option("--resume", resume, "checkpoint to resume from");
  tr->add_option("--max-epochs", train.max_epochs, "stop after this many epochs");

  cli::RolloutArgs ro;
  std::string ro_ckpt, ro_data, ro_image, ro_out;
  std::uint64_t ro_case = 0;
  auto* rol = app.add_subcommand("rollout", "export predicted frames for one input");
  rol->add_option("--ckpt", ro_ckpt, "checkpoint")->required();
  auto* case_opt = rol->add_option("--case", ro_case, "case id in --data");
  rol->add_option("--data", ro_data, "dataset directory holding --case");
  auto* image_opt = rol->add_option("--image", ro_image, "pre-contrast PGM image");
  case_opt->excludes(image_opt);
  auto* times_opt = rol->add_option("--times", ro.times, "acquisition times in seconds")
                        ->delimiter(',');
  auto* all_opt = rol->add_flag("--all-steps", ro.all_steps, "export every step");
  times_opt->excludes(all_opt);
  rol->add_option("--out", ro_out, "output directory")->required();

  cli::EvalArgs ev;
  std::string ev_ckpt, ev_data, ev_out;
  auto* eva = app.add_subcommand("eval", "per-phase metrics against the pre-contrast baseline");
  eva->add_option("--ckpt", ev_ckpt, "checkpoint")->required();
  eva->add_option("--data", ev_data, "dataset directory")->required();
  eva->add_option("--out", ev_out, "CSV report path")->required();

  cli::GradcheckArgs gc;
  auto* grad = app.add_subcommand("gradcheck", "compare BPTT gradients with finite differences");
  grad->add_option("--trials", gc.trials, "number of seeded tiny problems");
  grad->add_option("--seed", gc.seed, "first seed");
  grad->add_option("--epsilon", gc.epsilon, "central-difference step");
  grad->add_option("--samples", gc.samples, "parameters probed per trial (0: all)");
  bool stochastic = false;
  grad->add_flag("--stochastic-mask", stochastic, "sample fire masks instead of firing every cell");
  grad->add_flag("--corrupt-backward", gc.corrupt_backward)->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cli::cmd_gen_data(spec, out_dir, std::cout);
    if (*tr) {
      train.config = train_config;
      if (!resume.empty()) train.resume = resume;
      train.reproducible = reproducible;
      return cli::cmd_train(train, std::cout);
    }
    if (*rol) {
      ro.checkpoint = ro_ckpt;
      if (*case_opt) ro.case_id = ro_case;
      if (!ro_data.empty()) ro.data = ro_data;
      if (!ro_image.empty()) ro.image = ro_image;
      ro.out_dir = ro_out;
      return cli::cmd_rollout(ro, std::cout);
    }
    if (*eva) {
      ev.checkpoint = ev_ckpt;
      ev.data = ev_data;
      ev.out = ev_out;
      ev.reproducible = reproducible;
      return cli::cmd_eval(ev, std::cout);
    }
    if (*grad) {
      gc.deterministic_mask = !stochastic;
      return cli::cmd_gradcheck(gc, std::cout);
    }
  } catch (const tenca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
