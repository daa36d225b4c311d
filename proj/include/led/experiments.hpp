// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "led/config.hpp"
#include "led/grid_density.hpp"
#include "led/pgm.hpp"
#include "led/vae.hpp"

namespace led {

/// Another process holds the output directory's LOCK file.
struct LockError : IoError {
  using IoError::IoError;
};

/// Exclusive ownership of an output directory via a LOCK file created
/// O_EXCL-style; removed on destruction. A stale lock after a crash must be
/// deleted by hand.
class DirLock {
 public:
  explicit DirLock(const std::string& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
  bool held_ = false;
};

/// Process exit codes (also returned by the run_* entry points).
inline constexpr int kExitOk = 0;
inline constexpr int kExitNonFinite = 2;  // non-finite loss, diagnostics on stderr
inline constexpr int kExitIo = 3;         // IO failure or locked output directory

struct ExperimentData {
  Tensor train_x, valid_x, test_x;
};

/// Deterministic datasets for the experiment: fresh mixture draws from the
/// seed's named streams (toy) or the `.amat` splits under data_dir, cut to
/// the configured subset sizes (mnist).
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

/// Input dimension implied by the experiment kind (2 for toy, 784 for mnist).
Index experiment_input_dim(const ExperimentConfig& cfg);

/// Freshly initialized model from the seed's "init"/"masks" streams.
LedVae build_model(const ExperimentConfig& cfg);

/// Trains per config under an output-directory lock: per-epoch metrics rows,
/// a checkpoint after every epoch (epoch 0 = initialization), figure emission
/// for the 2D toy model, and exit-code semantics as above. `resume` continues
/// from out_dir/checkpoint.ledf bit-identically to an uninterrupted run.
/// Dispatches "nica" configs to run_nica_demo.
int run_experiment(const ExperimentConfig& cfg, bool resume);

/// The flow-universality demo: trains the uniform-base IAF chain on the
/// two-component target and writes nica_kl.csv plus target/model density
/// maps.
int run_nica_demo(const ExperimentConfig& cfg);

/// axis is "l_prior=0,4,8,12" (or l_post); one sub-directory and metrics file
/// per value. Stops at the first failing cell and returns its exit code.
int run_sweep(const ExperimentConfig& cfg, const std::string& axis, bool resume);

/// Mean importance-sampled NLL over the first min(eval_points, rows) examples
/// of `valid_x`, with the per-epoch evaluation stream — the exact computation
/// behind the metrics val_nll_is column.
double validation_nll(const LedVae& m, const Tensor& valid_x, const ExperimentConfig& cfg,
                      std::uint64_t epoch, Index k);

/// Rebuilds the model from the checkpoint's embedded config and recomputes
/// the validation NLL for the checkpoint's epoch; with k = the config's
/// k_importance this reproduces the logged value exactly. A nonempty
/// data_dir_override replaces the environment-derived data directory.
double eval_checkpoint(const std::string& ckpt_path, Index k,
                       const std::string& data_dir_override = "");

/// Draws n model samples (z through the prior flow, x from the decoder) and
/// writes them to out_path: CSV points for 2D Gaussian decoders, `.amat`
/// lines for Bernoulli decoders.
void sample_checkpoint(const std::string& ckpt_path, Index n, const std::string& out_path);

/// The projection figures of the 2D toy experiment, written into out_dir:
///   fig2_agg_z.pgm    aggregate-posterior histogram in prior space z
///   fig2_agg_z0.pgm   the same samples pulled back through the prior flow
///   fig2_prior_z.pgm  density map of p(z)
///   fig2_base_z0.pgm  density map of the base p(z0)
///   fig2_model_x.pgm  model marginal p(x) by Monte Carlo decoder mixture
/// All panels share the box [-4,4]^2 at 200x200, so with an empty prior flow
/// the p(z) and p(z0) files are bit-identical. The aggregate posterior is
/// taken over `train_x`. Requires a 2-dimensional latent and (for the p(x)
/// panel) a Gaussian decoder; throws std::invalid_argument otherwise.
void emit_fig2_panels(const LedVae& m, const Tensor& train_x, std::uint64_t seed,
                      const std::string& out_dir);

/// Normalized 2D histogram of samples [n, 2] as a grid density; points
/// outside the box are dropped and the remaining mass renormalized.
GridDensity histogram_grid_density(const Tensor& samples, double lo0, double hi0, double lo1,
                                   double hi1, Index res0, Index res1);

}  // namespace led
