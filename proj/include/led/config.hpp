// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "led/dataset.hpp"
#include "led/nica.hpp"
#include "led/vae.hpp"

namespace led {

/// Invalid or malformed configuration; messages name the offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A full experiment description, parsed from a plain-text file of
/// `key = value` lines with `#` comments and `[section]` grouping. Every key
/// is validated; unknown keys are rejected. Fields under [paths] are
/// deployment details and excluded from the semantic digest.
struct ExperimentConfig {
  std::string experiment;  // "toy" | "mnist" | "nica"

  // [model]
  Index latent_dim = 2;
  Index l_prior = 0;
  Index l_post = 0;
  std::string post_kind = "made";  // "made" | "nvp"
  std::vector<Index> enc_hidden{200, 200};
  std::vector<Index> dec_hidden{200, 200};
  std::vector<Index> prior_hidden{100};
  std::vector<Index> post_hidden{512, 512};
  std::string prior_mask = "random";  // "random" | "checkerboard"
  std::string decoder = "auto";       // "auto" | "bernoulli" | "gaussian"
  std::string act = "relu";           // encoder/decoder MLPs
  std::string cond_act = "relu";      // flow conditioner MLPs

  // [train]
  Index epochs = 20;
  Index batch = 100;
  double lr = 1e-3;
  std::uint64_t seed = 1;

  // [eval]
  Index k_importance = 128;
  Index eval_every = 1;
  Index eval_points = 500;

  // [paths] (not digested)
  std::string data_dir;  // defaults to $LED_DATA_DIR at parse time
  std::string out_dir;

  // [toy]
  ToyMixture toy;
  Index toy_n_train = 10000;
  Index toy_n_valid = 2000;
  Index toy_n_test = 2000;

  // [mnist] desk-scale subset sizes; --full ignores them
  Index subset_train = 5000;
  Index subset_valid = 1000;

  // [nica]
  Index nica_layers = 8;
  Index nica_epochs = 40;
  Index nica_batch = 256;
  double nica_lr = 1e-3;
  Index nica_n_train = 20000;
  std::vector<Index> nica_hidden{32, 32};
  std::string nica_act = "tanh";
  Index nica_kl_every = 1;
  double nica_mode = 1.5;   // the 2-component target has modes at (+-m, +-m)
  double nica_sigma = 1.0;  // per-component isotropic scale
  double nica_box = 5.0;    // target grid spans [-box, box]^2
  Index nica_res = 100;     // target grid resolution per axis

  /// The Gaussian decoder of the toy experiment, the Bernoulli decoder of the
  /// binary image experiment, or the explicit override.
  DecoderKind resolved_decoder() const;
};

ExperimentConfig parse_experiment_config(const std::string& path);
/// Same parser on in-memory text; `origin` names the source in errors.
ExperimentConfig parse_experiment_config_text(const std::string& text, const std::string& origin);

/// Canonical `key = value` rendering of every semantic field (defaults
/// resolved, [paths] omitted, doubles at %.17g). Parsing it back reproduces
/// the config.
std::string canonical_config_text(const ExperimentConfig& cfg);
/// FNV-1a64 over the canonical text minus the fields that change no
/// per-epoch computation (the epoch budget and the [eval] cadence), so a
/// finished run can be extended under the same digest. Two configs with equal
/// digests train bit-identically epoch for epoch.
std::uint64_t config_digest(const ExperimentConfig& cfg);

/// Model description for the VAE experiments; `input_dim` comes from the
/// dataset (2 for toy, 784 for the image sets).
ModelSpec model_spec_for(const ExperimentConfig& cfg, Index input_dim);

/// Training description for the flow-universality demo.
NicaTrainConfig nica_train_config(const ExperimentConfig& cfg);
/// The demo's two-component mixture target, tabulated on its grid.
GridDensity nica_target(const ExperimentConfig& cfg);

Activation parse_activation(const std::string& s, const std::string& key);

}  // namespace led
