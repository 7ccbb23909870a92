// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trainprecode/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Joint pilot/precoder design under statistical channel knowledge"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int n_dirs = 64;

  app.add_option("--seed", seed_override, "override the config master seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_override, "override the output directory");

  CLI::App* opt = app.add_subcommand("optimize", "run one joint optimization");
  opt->add_option("config", config_path, "JSON experiment config")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "SNR sweep with paired baselines");
  sweep->add_option("config", config_path, "JSON experiment config")->required();

  CLI::App* pareto = app.add_subcommand("pareto", "sample the Pareto border");
  pareto->add_option("config", config_path, "JSON experiment config")->required();
  pareto->add_option("--dirs", n_dirs, "number of border directions");

  CLI11_PARSE(app, argc, argv);

  try {
    trainprecode::ExperimentConfig cfg =
        trainprecode::ExperimentConfig::from_json_file(config_path);
    if (seed_given) {
      cfg.seed = seed_override;
      cfg.utility.master_seed = seed_override;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;

    if (opt->parsed()) return trainprecode::cmd_optimize(cfg);
    if (sweep->parsed()) return trainprecode::cmd_sweep(cfg);
    if (pareto->parsed()) return trainprecode::cmd_pareto(cfg, n_dirs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
