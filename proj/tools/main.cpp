// Copyright 2026 The abcdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abcdp/config.hpp"
#include "abcdp/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common_options(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args->seed,
                  "master seed override (takes precedence over the config)");
  cmd->add_option("--out", args->out_dir,
                  "output directory (created when missing)");
  cmd->add_option("--override", args->overrides,
                  "dotted-path config override, key=value (repeatable)");
}

int run_mode(const CommonArgs& args, abcdp::RunMode expected) {
  abcdp::ExperimentConfig config =
      abcdp::load_config(args.config_path, args.overrides);
  if (args.seed) config.master_seed = *args.seed;
  if (config.mode != expected) {
    throw abcdp::ValidationError(
        "mode", "config mode '" + abcdp::to_string(config.mode) +
                    "' does not match this subcommand (expected '" +
                    abcdp::to_string(expected) + "')");
  }
  abcdp::RunArtifacts artifacts = abcdp::run_experiment(config, args.out_dir);
  for (const std::string& line : artifacts.ledger_lines) {
    std::cout << line << "\n";
  }
  for (const std::string& warning : artifacts.warnings) {
    std::cout << "warning: " << warning << "\n";
  }
  for (const auto& file : artifacts.files) {
    std::cout << "wrote " << file.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private rejection ABC: noisy-threshold acceptance "
      "with a calibrated privacy budget, paired non-private comparisons, "
      "and the analytic error machinery around them."};
  app.require_subcommand(1);

  CommonArgs run_args, bench_args, grid_args, bounds_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "single private inference run (dp_run mode)");
  add_common_options(run_cmd, &run_args);
  CLI::App* bench_cmd = app.add_subcommand(
      "benchmark", "paired private/plain comparison (paired_benchmark mode)");
  add_common_options(bench_cmd, &bench_args);
  CLI::App* grid_cmd = app.add_subcommand(
      "flip-grid", "closed-form acceptance-flip table (flip_grid mode)");
  add_common_options(grid_cmd, &grid_args);
  CLI::App* bounds_cmd = app.add_subcommand(
      "bounds", "tail bound versus realized error (bounds_report mode)");
  add_common_options(bounds_cmd, &bounds_args);

  std::string plot_kind;
  std::string plot_dir = "out";
  CLI::App* plots_cmd = app.add_subcommand(
      "emit-plots", "reshape a finished run's artifacts into plot tables");
  plots_cmd
      ->add_option("kind", plot_kind,
                   "plot table to emit: fig1, fig2, or posterior_hist")
      ->required();
  plots_cmd->add_option("--out", plot_dir,
                        "directory of the finished run; receives the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(run_cmd)) {
      return run_mode(run_args, abcdp::RunMode::dp_run);
    }
    if (app.got_subcommand(bench_cmd)) {
      return run_mode(bench_args, abcdp::RunMode::paired_benchmark);
    }
    if (app.got_subcommand(grid_cmd)) {
      return run_mode(grid_args, abcdp::RunMode::flip_grid);
    }
    if (app.got_subcommand(bounds_cmd)) {
      return run_mode(bounds_args, abcdp::RunMode::bounds_report);
    }
    if (app.got_subcommand(plots_cmd)) {
      abcdp::RunArtifacts artifacts =
          abcdp::emit_plot_data(plot_dir, plot_kind, plot_dir);
      for (const auto& file : artifacts.files) {
        std::cout << "wrote " << file.string() << "\n";
      }
      return 0;
    }
  } catch (const abcdp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
