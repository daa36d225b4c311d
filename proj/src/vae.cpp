// SPDX-License-Identifier: Apache-2.0
#include "led/vae.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace led {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogvarLo = -10.0;
constexpr double kLogvarHi = 10.0;

Tensor run_trunk(const Mlp& trunk, Activation act, Tensor h) {
  for (const DenseLayer& layer : trunk.layers) h = activate(act, layer(h));
  return h;
}

/// zp = mu + exp(lv/2) .* eps and log q(zp | mu, lv) as a function of the
/// substituted noise. The (zp-mu)^2/sigma^2 term is eps^2 exactly, and its
/// pathwise derivative w.r.t. (mu, lv) cancels identically, so treating eps as
/// a constant here yields both the exact value and the exact total-derivative
/// reparameterized gradient.
std::pair<Tensor, Tensor> reparam(const Tensor& mu, const Tensor& lv, const Tensor& eps) {
  const Tensor sigma = led::exp(mul(lv, Tensor::scalar(0.5)));
  const Tensor zp = add(mul(sigma, eps), mu);
  const Tensor per = add(add(lv, mul(eps, eps)), Tensor::scalar(kLog2Pi));
  const Tensor log_q = mul(sum(per, 1), Tensor::scalar(-0.5));
  return {zp, log_q};
}

Tensor tile_rows(const Tensor& row, Index k) {
  if (row.rank() != 2 || row.dim(0) != 1) throw std::invalid_argument("tile_rows: want [1, d]");
  const Index d = row.dim(1);
  Eigen::ArrayXd out(k * d);
  for (Index i = 0; i < k; ++i) out.segment(i * d, d) = row.values();
  return Tensor({k, d}, std::move(out));
}

ObjectiveTerms objective(const LedVae& m, const Tensor& x, const Tensor& eps, bool use_flows) {
  const EncodeSample es = encode_with_noise(m, x, eps);
  Tensor z = es.zp;
  Tensor entropy_per = neg(es.log_q);
  if (use_flows && !m.posterior_flow.empty()) {
    auto [zg, ld] = m.posterior_flow.forward(es.zp);
    z = zg;
    entropy_per = add(entropy_per, ld);
  }
  // log_density falls back to the base density for an empty chain with no
  // extra arithmetic, so the plain and flowed objectives agree bit for bit
  // when both chains are empty.
  const Tensor prior_per =
      use_flows ? m.prior_flow.log_density(z) : m.prior_flow.base_log_density(z);
  const Tensor recon_per = m.dec.log_likelihood(x, z);

  ObjectiveTerms t;
  t.reconstruction = mean(recon_per);
  t.prior_term = mean(prior_per);
  t.entropy_term = mean(entropy_per);
  t.elbo = add(add(t.reconstruction, t.prior_term), t.entropy_term);
  return t;
}

Tensor draw_noise(Index batch, Index latent, Rng& rng) {
  Eigen::ArrayXd e(batch * latent);
  for (Index i = 0; i < e.size(); ++i) e[i] = rng.normal();
  return Tensor({batch, latent}, std::move(e));
}

}  // namespace

Encoder Encoder::init(Index input_dim, const std::vector<Index>& hidden, Index latent,
                      Activation act, Rng& rng) {
  if (input_dim < 1 || latent < 1) throw std::invalid_argument("Encoder::init: bad dims");
  Encoder e;
  e.act = act;
  if (!hidden.empty()) {
    std::vector<Index> sizes{input_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    e.trunk = Mlp::make(sizes, act, rng);
  }
  const Index top = hidden.empty() ? input_dim : hidden.back();
  e.mu_head = DenseLayer::init(top, latent, rng);
  e.logvar_head = DenseLayer::init(top, latent, rng);
  return e;
}

std::pair<Tensor, Tensor> Encoder::operator()(const Tensor& x) const {
  const Tensor h = run_trunk(trunk, act, x);
  Tensor mu = mu_head(h);
  Tensor lv = clamp(logvar_head(h), kLogvarLo, kLogvarHi);
  return {std::move(mu), std::move(lv)};
}

void Encoder::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  trunk.append_params(prefix + ".trunk", out);
  mu_head.append_params(prefix + ".mu", out);
  logvar_head.append_params(prefix + ".logvar", out);
}

Decoder Decoder::init(Index latent, const std::vector<Index>& hidden, Index output,
                      DecoderKind kind, Activation act, Rng& rng) {
  if (latent < 1 || output < 1) throw std::invalid_argument("Decoder::init: bad dims");
  Decoder d;
  d.kind = kind;
  d.act = act;
  if (!hidden.empty()) {
    std::vector<Index> sizes{latent};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    d.trunk = Mlp::make(sizes, act, rng);
  }
  d.head = DenseLayer::init(hidden.empty() ? latent : hidden.back(), output, rng);
  if (kind == DecoderKind::kGaussian) d.gauss_logvar = Tensor::zeros({output});
  return d;
}

Tensor Decoder::operator()(const Tensor& z) const { return head(run_trunk(trunk, act, z)); }

Tensor Decoder::log_likelihood(const Tensor& x, const Tensor& z) const {
  const Tensor out = (*this)(z);
  if (kind == DecoderKind::kBernoulli) {
    // sum_i x_i * l_i - softplus(l_i), the stable logit form of the Bernoulli
    // log-likelihood; exact for x in {0,1} and the usual relaxation on [0,1].
    return sum(sub(mul(x, out), softplus(out)), 1);
  }
  const Tensor lv = clamp(gauss_logvar, kLogvarLo, kLogvarHi);  // shape {output}
  const Tensor diff = sub(x, out);
  const Tensor per = add(add(mul(mul(diff, diff), led::exp(neg(lv))), lv), Tensor::scalar(kLog2Pi));
  return mul(sum(per, 1), Tensor::scalar(-0.5));
}

void Decoder::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  trunk.append_params(prefix + ".trunk", out);
  head.append_params(prefix + ".head", out);
  if (kind == DecoderKind::kGaussian) out.push_back({prefix + ".logvar", &gauss_logvar});
}

std::vector<NamedParam> LedVae::named_params() {
  std::vector<NamedParam> out;
  enc.append_params("enc", out);
  dec.append_params("dec", out);
  posterior_flow.append_params("post", out);
  prior_flow.append_params("prior", out);
  return out;
}

std::vector<NamedParam> LedVae::named_prior_params() {
  std::vector<NamedParam> out;
  prior_flow.append_params("prior", out);
  return out;
}

std::vector<NamedParam> LedVae::named_phi_params() {
  std::vector<NamedParam> out;
  enc.append_params("enc", out);
  posterior_flow.append_params("post", out);
  return out;
}

std::vector<NamedParam> LedVae::named_theta_params() {
  std::vector<NamedParam> out;
  dec.append_params("dec", out);
  return out;
}

LedVae make_led_vae(const ModelSpec& spec, Rng& init_rng, Rng& mask_rng) {
  if (spec.input_dim < 1 || spec.latent < 1)
    throw std::invalid_argument("make_led_vae: input_dim and latent must be positive");
  if ((spec.l_prior > 0 || spec.l_post > 0) && spec.latent < 2)
    throw std::invalid_argument("make_led_vae: flows need latent dim >= 2");

  LedVae m;
  m.input_dim = spec.input_dim;
  m.latent = spec.latent;
  m.enc = Encoder::init(spec.input_dim, spec.enc_hidden, spec.latent, spec.act, init_rng);
  m.dec = Decoder::init(spec.latent, spec.dec_hidden, spec.input_dim, spec.decoder, spec.act,
                        init_rng);

  if (spec.l_prior > 0) {
    m.prior_flow = make_nvp_chain(spec.latent, spec.l_prior, spec.prior_hidden, spec.cond_act,
                                  mask_rng, init_rng, spec.prior_mask);
  } else {
    m.prior_flow = FlowChain{spec.latent, BaseKind::kStandardNormal, {}};
  }
  if (spec.l_post > 0) {
    if (spec.post_kind == ModelSpec::PostKind::kMade) {
      m.posterior_flow =
          make_iaf_chain(spec.latent, spec.l_post, spec.post_hidden, spec.cond_act, init_rng,
                         IafLayer::Init::kIdentity, /*parallel_is_forward=*/true);
    } else {
      m.posterior_flow = make_nvp_chain(spec.latent, spec.l_post, spec.post_hidden, spec.cond_act,
                                        mask_rng, init_rng, MaskKind::kRandomHalf);
    }
  } else {
    m.posterior_flow = FlowChain{spec.latent, BaseKind::kStandardNormal, {}};
  }
  return m;
}

EncodeSample encode_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps) {
  if (x.rank() != 2 || x.dim(1) != m.input_dim)
    throw std::invalid_argument("encode_with_noise: x must be [batch, input_dim]");
  if (eps.rank() != 2 || eps.dim(0) != x.dim(0) || eps.dim(1) != m.latent)
    throw std::invalid_argument("encode_with_noise: eps must be [batch, latent]");
  auto [mu, lv] = m.enc(x);
  auto [zp, log_q] = reparam(mu, lv, eps);
  return {zp, log_q, mu, lv, eps};
}

EncodeSample encode_and_sample(const LedVae& m, const Tensor& x, Rng& rng) {
  return encode_with_noise(m, x, draw_noise(x.dim(0), m.latent, rng));
}

ObjectiveTerms elbo_plain_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps) {
  return objective(m, x, eps, /*use_flows=*/false);
}

ObjectiveTerms elbo_led_with_noise(const LedVae& m, const Tensor& x, const Tensor& eps) {
  return objective(m, x, eps, /*use_flows=*/true);
}

ObjectiveTerms elbo_plain(const LedVae& m, const Tensor& x, Rng& rng) {
  return objective(m, x, draw_noise(x.dim(0), m.latent, rng), /*use_flows=*/false);
}

ObjectiveTerms elbo_led(const LedVae& m, const Tensor& x, Rng& rng) {
  return objective(m, x, draw_noise(x.dim(0), m.latent, rng), /*use_flows=*/true);
}

PriorUpdateInfo prior_only_update(LedVae& m, const Tensor& x_batch, AdamState& state,
                                  const AdamHyper& hyper, Rng& rng) {
  // Draw z = g(z'), z' ~ q(.|x), entirely off-tape: theta and phi are plain
  // values here, so no gradient can reach them even in principle.
  const EncodeSample es = encode_and_sample(m, x_batch, rng);
  Tensor z = m.posterior_flow.empty() ? es.zp : m.posterior_flow.forward(es.zp).first;
  Tensor z_const(z.shape(), z.values());

  auto named = m.named_prior_params();
  auto params = param_pointers(named);
  if (params.empty()) {  // fixed prior: the loss is still reported, nothing moves
    const Tensor loss = neg(mean(m.prior_flow.log_density(z_const)));
    return {loss.value(), 0.0};
  }
  Tape tape;
  ParamScope scope(tape, params);
  const Tensor loss = neg(mean(m.prior_flow.log_density(z_const)));
  const Gradients grads = tape.backward(loss);
  PriorUpdateInfo info{loss.value(), grads.norm()};
  adam_step(params, grads, state, hyper);
  return info;
}

Tensor aggregate_posterior_samples(const LedVae& m, const Tensor& dataset, Index n, Rng& rng) {
  if (dataset.rank() != 2 || dataset.dim(1) != m.input_dim)
    throw std::invalid_argument("aggregate_posterior_samples: dataset must be [N, input_dim]");
  if (n < 1) throw std::invalid_argument("aggregate_posterior_samples: n must be positive");
  const Index rows = dataset.dim(0);
  const Index dx = m.input_dim;
  const Index dz = m.latent;

  // Fix the stream layout (index then noise row, per sample) up front so the
  // result does not depend on the evaluation chunk size.
  std::vector<Index> pick(static_cast<std::size_t>(n));
  Eigen::ArrayXd eps_all(n * dz);
  for (Index i = 0; i < n; ++i) {
    pick[static_cast<std::size_t>(i)] = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(rows)));
    for (Index j = 0; j < dz; ++j) eps_all[i * dz + j] = rng.normal();
  }

  Eigen::ArrayXd out(n * dz);
  const Index chunk = 1000;
  for (Index start = 0; start < n; start += chunk) {
    const Index c = std::min(chunk, n - start);
    Eigen::ArrayXd xb(c * dx);
    for (Index i = 0; i < c; ++i)
      xb.segment(i * dx, dx) = dataset.values().segment(pick[static_cast<std::size_t>(start + i)] * dx, dx);
    const Tensor x({c, dx}, std::move(xb));
    const Tensor eps({c, dz}, eps_all.segment(start * dz, c * dz));
    const EncodeSample es = encode_with_noise(m, x, eps);
    const Tensor z = m.posterior_flow.empty() ? es.zp : m.posterior_flow.forward(es.zp).first;
    out.segment(start * dz, c * dz) = z.values();
  }
  return Tensor({n, dz}, std::move(out));
}

double nll_importance(const LedVae& m, const Tensor& x, Index k, Rng& rng) {
  if (x.rank() != 2 || x.dim(0) != 1 || x.dim(1) != m.input_dim)
    throw std::invalid_argument("nll_importance: x must be a single row [1, input_dim]");
  if (k < 1) throw std::invalid_argument("nll_importance: k must be positive");

  // Encode once and tile the posterior parameters across the K draws; the
  // K-row path below is elementwise-identical to the single-draw elbo path.
  auto [mu1, lv1] = m.enc(x);
  const Tensor mu = tile_rows(mu1, k);
  const Tensor lv = tile_rows(lv1, k);
  const Tensor eps = draw_noise(k, m.latent, rng);
  auto [zp, log_q] = reparam(mu, lv, eps);

  Tensor z = zp;
  Tensor ent = neg(log_q);
  if (!m.posterior_flow.empty()) {
    auto [zg, ld] = m.posterior_flow.forward(zp);
    z = zg;
    ent = add(ent, ld);
  }
  const Tensor prior = m.prior_flow.log_density(z);
  const Tensor recon = m.dec.log_likelihood(tile_rows(x, k), z);
  const Tensor log_w = add(add(recon, prior), ent);
  return -(logsumexp(log_w).value() - std::log(static_cast<double>(k)));
}

}  // namespace led
