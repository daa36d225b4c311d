// SPDX-License-Identifier: Apache-2.0
//
// `led` — experiment driver for the learnable-explicit-density models:
// training, checkpoint evaluation, sampling, density maps, the
// flow-universality demo, sweeps, and synthetic data generation.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "led/checkpoint.hpp"
#include "led/dataset.hpp"
#include "led/experiments.hpp"

namespace {

struct Overrides {
  bool full = false;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out_dir, data_dir;
};

led::ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  led::ExperimentConfig cfg = led::parse_experiment_config(path);
  if (ov.full && cfg.experiment == "mnist") {
    cfg.subset_train = led::kMnistTrainRows;
    cfg.subset_valid = led::kMnistValidRows;
  }
  if (ov.has_seed) cfg.seed = ov.seed;
  if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
  if (!ov.data_dir.empty()) cfg.data_dir = ov.data_dir;
  return cfg;
}

void add_override_options(CLI::App* cmd, Overrides& ov, bool with_full) {
  if (with_full)
    cmd->add_flag("--full", ov.full,
                  "Use the full dataset instead of the desk-scale subset (mnist)");
  cmd->add_option("--seed", ov.seed, "Override train.seed");
  cmd->add_option("--out-dir", ov.out_dir, "Override paths.out_dir");
  cmd->add_option("--data-dir", ov.data_dir, "Override paths.data_dir ($LED_DATA_DIR)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"led: train and evaluate learnable-explicit-density models"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, ckpt_path, out_path, axis, what = "prior";
  long n_samples = 100, k_importance = 128, res = 256;
  double box = 4.0;
  bool resume = false;
  std::uint64_t synth_seed = 1;

  CLI::App* train = app.add_subcommand("train", "Train an experiment from a config file");
  train->add_option("--config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_flag("--resume", resume, "Continue from out_dir/checkpoint.ledf");
  add_override_options(train, ov, /*with_full=*/true);

  CLI::App* eval = app.add_subcommand(
      "eval", "Recompute a checkpoint's validation NLL (matches the logged value when K "
              "equals the config's k_importance)");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file (.ledf)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--k", k_importance, "Importance samples per example")->required();
  eval->add_option("--data-dir", ov.data_dir, "Override the data directory ($LED_DATA_DIR)");

  CLI::App* sample = app.add_subcommand("sample", "Draw model samples from a checkpoint");
  sample->add_option("--checkpoint", ckpt_path, "Checkpoint file (.ledf)")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("-n,--n", n_samples, "Number of samples")->required();
  sample->add_option("-o,--out", out_path, "Output file (CSV for Gaussian decoders, .amat "
                                           "for Bernoulli)")
      ->required();

  CLI::App* dmap = app.add_subcommand(
      "density-map", "Render a 2D checkpoint's prior p(z) (or base p(z0)) as a P5 graymap");
  dmap->add_option("--checkpoint", ckpt_path, "Checkpoint file (.ledf)")
      ->required()
      ->check(CLI::ExistingFile);
  dmap->add_option("--what", what, "prior | base")
      ->check(CLI::IsMember({"prior", "base"}));
  dmap->add_option("--box", box, "Render over [-box, box]^2 (default 4)");
  dmap->add_option("--res", res, "Image resolution per axis (default 256, max 2048)");
  dmap->add_option("-o,--out", out_path, "Output .pgm path")->required();

  CLI::App* nica = app.add_subcommand(
      "nica-demo", "Train the uniform-base IAF chain on the two-component target");
  nica->add_option("--config", config_path, "Experiment config file (experiment = nica)")
      ->required()
      ->check(CLI::ExistingFile);
  add_override_options(nica, ov, /*with_full=*/false);

  CLI::App* sweep = app.add_subcommand("sweep", "Train one cell per axis value");
  sweep->add_option("--config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "Axis spec, e.g. l_prior=0,4,8,12")->required();
  sweep->add_flag("--resume", resume, "Resume each cell from its checkpoint");
  add_override_options(sweep, ov, /*with_full=*/true);

  CLI::App* synth = app.add_subcommand(
      "synth-data", "Write synthetic binarized digit .amat files in the canonical layout");
  synth->add_option("-o,--out", out_path, "Target directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed (default 1)");

  CLI11_PARSE(app, argc, argv);
  ov.has_seed = (train->count("--seed") + nica->count("--seed") + sweep->count("--seed")) > 0;

  try {
    if (*train) return led::run_experiment(load_config(config_path, ov), resume);
    if (*eval) {
      const double nll = led::eval_checkpoint(ckpt_path, k_importance, ov.data_dir);
      std::printf("val_nll_is %.17g\n", nll);
      return led::kExitOk;
    }
    if (*sample) {
      led::sample_checkpoint(ckpt_path, n_samples, out_path);
      return led::kExitOk;
    }
    if (*dmap) {
      const led::CheckpointMeta meta = led::read_checkpoint_meta(ckpt_path);
      led::ExperimentConfig cfg = led::parse_experiment_config_text(
          meta.config_text, ckpt_path + " (embedded config)");
      led::LedVae m = led::build_model(cfg);
      const std::vector<led::NamedParam> params = m.named_params();
      led::AdamState adam;
      led::load_checkpoint(ckpt_path, led::config_digest(cfg), params, adam);
      if (m.latent != 2)
        throw std::invalid_argument("density-map: needs a 2-dimensional latent, model has " +
                                    std::to_string(m.latent));
      const led::FlowChain& prior = m.prior_flow;
      const bool base = what == "base";
      led::emit_density_map(
          [&prior, base](const led::Tensor& pts) {
            return led::exp(base ? prior.base_log_density(pts) : prior.log_density(pts))
                .values();
          },
          -box, box, -box, box, res, out_path);
      return led::kExitOk;
    }
    if (*nica) {
      led::ExperimentConfig cfg = load_config(config_path, ov);
      if (cfg.experiment != "nica")
        throw led::ConfigError("nica-demo: config declares experiment = " + cfg.experiment);
      return led::run_nica_demo(cfg);
    }
    if (*sweep) return led::run_sweep(load_config(config_path, ov), axis, resume);
    if (*synth) {
      std::filesystem::create_directories(out_path);
      led::generate_synthetic_mnist(out_path, synth_seed);
      std::cout << "wrote binarized_mnist_{train,valid,test}.amat to " << out_path << "\n";
      return led::kExitOk;
    }
  } catch (const led::LockError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return led::kExitIo;
  } catch (const led::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return led::kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return led::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
