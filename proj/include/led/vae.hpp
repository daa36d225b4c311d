// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "led/adam.hpp"
#include "led/flow_chain.hpp"

namespace led {

enum class DecoderKind { kBernoulli, kGaussian };

/// Gaussian recognition network: trunk MLP, then mean and log-variance heads.
/// The log-variance is clamped to [-10, 10] before exponentiation.
struct Encoder {
  Mlp trunk;
  DenseLayer mu_head, logvar_head;
  Activation act = Activation::kRelu;

  static Encoder init(Index input_dim, const std::vector<Index>& hidden, Index latent,
                      Activation act, Rng& rng);
  /// x: [batch, input] -> (mu, clamped log-variance), each [batch, latent].
  std::pair<Tensor, Tensor> operator()(const Tensor& x) const;
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

/// Observation model. Bernoulli decoders emit logits and compute the
/// log-likelihood in stable logit form; Gaussian decoders emit means and carry
/// a learned global diagonal log-variance (clamped to [-10, 10]).
struct Decoder {
  Mlp trunk;
  DenseLayer head;
  Tensor gauss_logvar;  // kGaussian only, shape {output_dim}
  DecoderKind kind = DecoderKind::kBernoulli;
  Activation act = Activation::kRelu;

  static Decoder init(Index latent, const std::vector<Index>& hidden, Index output,
                      DecoderKind kind, Activation act, Rng& rng);
  /// z: [batch, latent] -> logits (Bernoulli) or means (Gaussian), [batch, output].
  Tensor operator()(const Tensor& z) const;
  /// Per-example log p(x|z): [batch].
  Tensor log_likelihood(const Tensor& x, const Tensor& z) const;
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

/// The LED-VAE: encoder q(z'|x), posterior flow g (phi together with the
/// encoder), decoder p(x|z) (theta), and prior flow h (pi) over a standard
/// normal base.
struct LedVae {
  Encoder enc;
  Decoder dec;
  FlowChain posterior_flow;  // g: z' -> z
  FlowChain prior_flow;      // h: z0 -> z
  Index input_dim = 0;
  Index latent = 0;

  std::vector<NamedParam> named_params();        // all groups
  std::vector<NamedParam> named_prior_params();  // pi
  std::vector<NamedParam> named_phi_params();    // encoder + posterior flow
  std::vector<NamedParam> named_theta_params();  // decoder
};

struct ModelSpec {
  Index input_dim = 0;
  Index latent = 0;
  std::vector<Index> enc_hidden{200, 200};
  std::vector<Index> dec_hidden{200, 200};
  DecoderKind decoder = DecoderKind::kBernoulli;
  Activation act = Activation::kRelu;       // encoder/decoder MLPs
  Activation cond_act = Activation::kRelu;  // flow conditioner MLPs

  Index l_prior = 0;
  std::vector<Index> prior_hidden{100};
  MaskKind prior_mask = MaskKind::kRandomHalf;

  enum class PostKind { kMade, kNvp };
  Index l_post = 0;
  PostKind post_kind = PostKind::kMade;
  std::vector<Index> post_hidden{512, 512};
};

/// Flows start as the identity (zero-initialized conditioner heads), so
/// configurations differing only in flow depth start as the same model.
LedVae make_led_vae(const ModelSpec& spec, Rng& init_rng, Rng& mask_rng);

/// One reparameterized draw per example.
struct EncodeSample {
  Tensor zp;      // [batch, latent], mu + sigma .* eps
  Tensor log_q;   // [batch], log q(z'|x)
  Tensor mu, logvar, eps;
};
EncodeSample encode_and_sample(const LedVae& m, const Tensor& x, Rng& rng);
/// Deterministic variant with injected noise (finite-difference tests, tiling).
EncodeSample encode_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps);

/// Batch-mean objective pieces, each a rank-0 tensor (on tape when parameters
/// are); elbo is literally reconstruction + prior_term + entropy_term.
struct ObjectiveTerms {
  Tensor elbo, reconstruction, prior_term, entropy_term;
};

/// Eq. 1 estimator: flows are ignored, the prior is the base density.
ObjectiveTerms elbo_plain(const LedVae& m, const Tensor& x, Rng& rng);
ObjectiveTerms elbo_plain_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps);
/// Eq. 5 estimator: z = g(z'), prior term through h's inverse, entropy term
/// picks up log|dg/dz'|. With both flows empty this reduces to elbo_plain
/// exactly (same operations, no zero-padding).
ObjectiveTerms elbo_led(const LedVae& m, const Tensor& x, Rng& rng);
ObjectiveTerms elbo_led_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps);

/// One Adam ascent step on E[L] w.r.t. the prior parameters only: a
/// maximum-likelihood (forward-KL) step fitting p_pi to samples of the
/// projected aggregate posterior. theta and phi are never on the tape.
struct PriorUpdateInfo {
  double loss = 0.0;       // -mean log p_pi(z) on the batch
  double grad_norm = 0.0;  // over pi
};
PriorUpdateInfo prior_only_update(LedVae& m, const Tensor& x_batch, AdamState& state,
                                  const AdamHyper& hyper, Rng& rng);

/// n draws of the doubly stochastic process x ~ data, z' ~ q(z'|x), z = g(z').
Tensor aggregate_posterior_samples(const LedVae& m, const Tensor& dataset, Index n, Rng& rng);

/// -[logsumexp_k(log p(x|z_k) + log p(z_k) - log q(z_k|x)) - log K] for one
/// example x: [1, input]. K=1 with the same stream state equals the negative
/// single-draw elbo_led exactly.
double nll_importance(const LedVae& m, const Tensor& x, Index k, Rng& rng);

}  // namespace led
