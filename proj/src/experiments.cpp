// SPDX-License-Identifier: Apache-2.0
#include "led/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "led/checkpoint.hpp"
#include "led/dataset.hpp"
#include "led/metrics.hpp"
#include "led/nica.hpp"
#include "led/ops.hpp"
#include "led/tape.hpp"

namespace led {

namespace fs = std::filesystem;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Shared fig-2 geometry: every panel uses the same box and resolution so the
// base and prior density maps of an identity flow come out byte-identical.
constexpr double kFig2Box = 4.0;
constexpr Index kFig2Res = 200;
constexpr Index kFig2AggSamples = 4000;
constexpr Index kFig2DecoderSamples = 200;

Tensor take_rows(const Tensor& x, const std::vector<Index>& order, Index begin, Index end) {
  const Index d = x.dim(1);
  Eigen::ArrayXd out((end - begin) * d);
  for (Index i = begin; i < end; ++i)
    out.segment((i - begin) * d, d) =
        x.values().segment(order[static_cast<std::size_t>(i)] * d, d);
  return Tensor(Shape{end - begin, d}, std::move(out));
}

Tensor one_row(const Tensor& x, Index r) {
  const Index d = x.dim(1);
  return Tensor(Shape{1, d}, x.values().segment(r * d, d));
}

// Adam over every parameter; a parameter the loss never touched steps with a
// zero gradient so the moment decay matches plain Adam semantics.
void apply_adam(const std::vector<NamedParam>& params, const Gradients& grads, AdamState& state,
                const AdamHyper& hyper) {
  std::vector<Tensor*> ptrs = param_pointers(params);
  std::vector<Eigen::ArrayXd> zeros;
  zeros.reserve(ptrs.size());
  std::vector<const Eigen::ArrayXd*> gp;
  gp.reserve(ptrs.size());
  for (Tensor* p : ptrs) {
    if (grads.contains(*p)) {
      gp.push_back(&grads.at(*p));
    } else {
      zeros.emplace_back(Eigen::ArrayXd::Zero(p->size()));
      gp.push_back(&zeros.back());
    }
  }
  adam_step(ptrs, gp, state, hyper);
}

void save_checkpoint_atomic(const std::string& path, const CheckpointMeta& meta,
                            const std::vector<NamedParam>& params, const AdamState& adam) {
  const std::string tmp = path + ".tmp";
  save_checkpoint(tmp, meta, params, adam);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("checkpoint: cannot rename " + tmp + " to " + path + ": " + ec.message());
}

// GridDensity cell (i, j) -> raster pixel (row res1-1-j from the top,
// column i), matching emit_density_map's orientation.
void write_grid_pgm(const GridDensity& g, const std::string& path) {
  const Index r0 = g.res[0], r1 = g.res[1];
  Eigen::ArrayXd img(r0 * r1);
  for (Index r = 0; r < r1; ++r)
    for (Index c = 0; c < r0; ++c) img[r * r0 + c] = g.mass[c * r1 + (r1 - 1 - r)];
  write_pgm(path, img, r1, r0);
}

}  // namespace

DirLock::DirLock(const std::string& dir) {
  try {
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    throw IoError("cannot create output directory " + dir + ": " + e.what());
  }
  path_ = dir + "/LOCK";
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f)
    throw LockError("output directory " + dir + " is locked (" + path_ +
                    " exists; remove it if no other run owns the directory)");
  std::fputs("led experiment lock\n", f);
  std::fclose(f);
  held_ = true;
}

DirLock::~DirLock() {
  if (held_) std::remove(path_.c_str());
}

Index experiment_input_dim(const ExperimentConfig& cfg) {
  if (cfg.experiment == "toy") return 2;
  if (cfg.experiment == "mnist") return kMnistDim;
  throw ConfigError("experiment '" + cfg.experiment + "' has no VAE input dimension");
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  if (cfg.experiment == "toy") {
    Rng tr = Rng::stream(cfg.seed, "toy-train");
    Rng va = Rng::stream(cfg.seed, "toy-valid");
    Rng te = Rng::stream(cfg.seed, "toy-test");
    d.train_x = toy_mixture_sample(cfg.toy, cfg.toy_n_train, tr);
    d.valid_x = toy_mixture_sample(cfg.toy, cfg.toy_n_valid, va);
    d.test_x = toy_mixture_sample(cfg.toy, cfg.toy_n_test, te);
  } else if (cfg.experiment == "mnist") {
    if (cfg.data_dir.empty())
      throw ConfigError("the mnist experiment needs paths.data_dir or LED_DATA_DIR");
    MnistSplits s =
        load_binarized_mnist(cfg.data_dir, cfg.subset_train, cfg.subset_valid, cfg.subset_valid);
    d.train_x = s.train;
    d.valid_x = s.valid;
    d.test_x = s.test;
  } else {
    throw ConfigError("experiment '" + cfg.experiment + "' has no datasets");
  }
  return d;
}

LedVae build_model(const ExperimentConfig& cfg) {
  const ModelSpec spec = model_spec_for(cfg, experiment_input_dim(cfg));
  Rng init = Rng::stream(cfg.seed, "init");
  Rng masks = Rng::stream(cfg.seed, "masks");
  return make_led_vae(spec, init, masks);
}

double validation_nll(const LedVae& m, const Tensor& valid_x, const ExperimentConfig& cfg,
                      std::uint64_t epoch, Index k) {
  const Index n = std::min<Index>(cfg.eval_points, valid_x.dim(0));
  const Rng eval_root = Rng::stream(cfg.seed, "eval").substream(epoch);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    Rng r = eval_root.substream(static_cast<std::uint64_t>(i));
    sum += nll_importance(m, one_row(valid_x, i), k, r);
  }
  return sum / static_cast<double>(n);
}

namespace {

int train_vae(const ExperimentConfig& cfg, bool resume) {
  DirLock lock(cfg.out_dir);
  const std::string ckpt_path = cfg.out_dir + "/checkpoint.ledf";
  const std::string metrics_path = cfg.out_dir + "/metrics.csv";

  ExperimentData data = load_experiment_data(cfg);
  LedVae m = build_model(cfg);
  std::vector<NamedParam> params = m.named_params();
  AdamState adam = AdamState::init(param_pointers(params));
  AdamHyper hyper;
  hyper.lr = cfg.lr;
  Rng work = Rng::stream(cfg.seed, "train");
  const std::uint64_t digest = config_digest(cfg);
  const std::string cfg_text = canonical_config_text(cfg);

  std::uint64_t start_epoch = 0;
  double wall0 = 0.0;
  if (resume && fs::exists(ckpt_path)) {
    const CheckpointMeta meta = load_checkpoint(ckpt_path, digest, params, adam);
    work.set_state(meta.rng_state);
    start_epoch = meta.epoch;
    std::vector<MetricsRow> rows;
    if (fs::exists(metrics_path))
      rows = read_metrics(metrics_path);
    else if (start_epoch > 0)
      throw IoError("resume: checkpoint at epoch " + std::to_string(start_epoch) +
                    " but no " + metrics_path);
    std::vector<MetricsRow> kept;
    for (const MetricsRow& r : rows)
      if (r.epoch <= static_cast<long>(start_epoch)) kept.push_back(r);
    rewrite_metrics(metrics_path, kept);
    if (!kept.empty()) wall0 = kept.back().wall_seconds;
  } else {
    MetricsWriter{metrics_path, /*truncate=*/true};
    save_checkpoint_atomic(ckpt_path, {digest, cfg_text, 0, work.state()}, params, adam);
  }
  MetricsWriter writer(metrics_path, /*truncate=*/false);

  const Index n = data.train_x.dim(0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (std::uint64_t e = start_epoch + 1; e <= static_cast<std::uint64_t>(cfg.epochs); ++e) {
    // The permutation must be a function of the epoch-boundary RNG state only,
    // so a resumed run shuffles the same batches as an uninterrupted one.
    std::iota(order.begin(), order.end(), Index{0});
    work.shuffle(order);
    double sum_r = 0.0, sum_p = 0.0, sum_h = 0.0;
    for (Index b = 0; b < n; b += cfg.batch) {
      const Index bend = std::min<Index>(n, b + cfg.batch);
      const Tensor xb = take_rows(data.train_x, order, b, bend);
      Tape tape;
      ParamScope scope(tape, param_pointers(params));
      const ObjectiveTerms terms = elbo_led(m, xb, work);
      if (!std::isfinite(terms.elbo.value())) {
        std::cerr << "non-finite loss at epoch " << e << ", batch offset " << b
                  << ": elbo=" << terms.elbo.value()
                  << " reconstruction=" << terms.reconstruction.value()
                  << " prior_term=" << terms.prior_term.value()
                  << " entropy_term=" << terms.entropy_term.value()
                  << "; last finite checkpoint: " << ckpt_path << " (epoch "
                  << (e - 1) << ")\n";
        return kExitNonFinite;
      }
      const Tensor loss = neg(terms.elbo);
      const Gradients grads = tape.backward(loss);
      apply_adam(params, grads, adam, hyper);
      const double w = static_cast<double>(bend - b);
      sum_r += w * terms.reconstruction.value();
      sum_p += w * terms.prior_term.value();
      sum_h += w * terms.entropy_term.value();
    }

    MetricsRow row;
    row.epoch = static_cast<long>(e);
    row.reconstruction = sum_r / static_cast<double>(n);
    row.prior_term = sum_p / static_cast<double>(n);
    row.entropy_term = sum_h / static_cast<double>(n);
    row.elbo = row.reconstruction + row.prior_term + row.entropy_term;
    row.val_nll_is = kNan;
    if (e % static_cast<std::uint64_t>(cfg.eval_every) == 0 ||
        e == static_cast<std::uint64_t>(cfg.epochs))
      row.val_nll_is = validation_nll(m, data.valid_x, cfg, e, cfg.k_importance);
    row.wall_seconds = wall0 + elapsed();
    writer.append(row);
    save_checkpoint_atomic(ckpt_path, {digest, cfg_text, e, work.state()}, params, adam);
  }

  if (cfg.experiment == "toy" && m.latent == 2 && m.dec.kind == DecoderKind::kGaussian)
    emit_fig2_panels(m, data.train_x, cfg.seed, cfg.out_dir);
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, bool resume) {
  if (cfg.out_dir.empty()) throw ConfigError("paths.out_dir is required");
  if (cfg.experiment == "nica") return run_nica_demo(cfg);
  return train_vae(cfg, resume);
}

int run_nica_demo(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("paths.out_dir is required");
  DirLock lock(cfg.out_dir);
  const GridDensity target = nica_target(cfg);
  write_grid_pgm(target, cfg.out_dir + "/nica_target.pgm");

  Rng rng = Rng::stream(cfg.seed, "nica-demo");
  const NicaDemoResult res =
      iaf_universality_demo(target, cfg.nica_layers, nica_train_config(cfg), rng);

  std::ofstream csv(cfg.out_dir + "/nica_kl.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot open " + cfg.out_dir + "/nica_kl.csv");
  csv << "epoch,grid_kl\n";
  std::size_t entry = 0;
  char buf[64];
  for (Index e = 0; e <= cfg.nica_epochs; ++e) {
    // Trace entries land at initialization and every kl_every-th epoch plus
    // the last, mirroring the demo's recording rule.
    const bool recorded = e == 0 || e % cfg.nica_kl_every == 0 || e == cfg.nica_epochs;
    if (!recorded || entry >= res.kl_trace.size()) continue;
    std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", static_cast<long>(e), res.kl_trace[entry]);
    csv << buf;
    ++entry;
  }
  if (!csv) throw IoError("write failed: " + cfg.out_dir + "/nica_kl.csv");

  const double b = cfg.nica_box;
  const FlowChain& chain = res.chain;
  emit_density_map(
      [&chain](const Tensor& pts) { return led::exp(chain.log_density(pts)).values(); }, -b, b,
      -b, b, cfg.nica_res, cfg.out_dir + "/nica_model.pgm");

  if (!std::isfinite(res.final_kl())) {
    std::cerr << "non-finite grid KL after training: " << res.final_kl() << "\n";
    return kExitNonFinite;
  }
  std::cout << "final grid KL: " << res.final_kl() << " nats over " << cfg.nica_layers
            << " layers\n";
  return kExitOk;
}

int run_sweep(const ExperimentConfig& cfg, const std::string& axis, bool resume) {
  if (cfg.experiment == "nica")
    throw ConfigError("sweep applies to the toy and mnist experiments");
  if (cfg.out_dir.empty()) throw ConfigError("paths.out_dir is required");
  const auto eq = axis.find('=');
  if (eq == std::string::npos)
    throw ConfigError("sweep axis must look like l_prior=0,4,8,12; got '" + axis + "'");
  const std::string key = axis.substr(0, eq);
  if (key != "l_prior" && key != "l_post")
    throw ConfigError("sweep axis key must be l_prior or l_post; got '" + key + "'");
  std::vector<Index> values;
  std::string item;
  std::istringstream ss(axis.substr(eq + 1));
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("sweep axis: bad value '" + item + "'");
    }
  }
  if (values.empty()) throw ConfigError("sweep axis: no values");

  for (Index v : values) {
    ExperimentConfig sub = cfg;
    (key == "l_prior" ? sub.l_prior : sub.l_post) = v;
    sub.out_dir = cfg.out_dir + "/" + key + "_" + std::to_string(v);
    std::cout << "sweep cell " << key << "=" << v << " -> " << sub.out_dir << "\n";
    const int rc = run_experiment(sub, resume);
    if (rc != kExitOk) return rc;
  }
  return kExitOk;
}

double eval_checkpoint(const std::string& ckpt_path, Index k,
                       const std::string& data_dir_override) {
  const CheckpointMeta meta = read_checkpoint_meta(ckpt_path);
  ExperimentConfig cfg =
      parse_experiment_config_text(meta.config_text, ckpt_path + " (embedded config)");
  if (!data_dir_override.empty()) cfg.data_dir = data_dir_override;
  const ExperimentData data = load_experiment_data(cfg);
  LedVae m = build_model(cfg);
  const std::vector<NamedParam> params = m.named_params();
  AdamState adam;
  load_checkpoint(ckpt_path, config_digest(cfg), params, adam);
  return validation_nll(m, data.valid_x, cfg, meta.epoch, k);
}

void sample_checkpoint(const std::string& ckpt_path, Index n, const std::string& out_path) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const CheckpointMeta meta = read_checkpoint_meta(ckpt_path);
  ExperimentConfig cfg =
      parse_experiment_config_text(meta.config_text, ckpt_path + " (embedded config)");
  LedVae m = build_model(cfg);
  const std::vector<NamedParam> params = m.named_params();
  AdamState adam;
  load_checkpoint(ckpt_path, config_digest(cfg), params, adam);

  Rng rng = Rng::stream(cfg.seed, "sample");
  const Tensor z = m.prior_flow.sample(n, rng);
  const Tensor out = m.dec(z);
  const Index d = out.dim(1);
  if (m.dec.kind == DecoderKind::kGaussian) {
    const Eigen::ArrayXd lv = m.dec.gauss_logvar.values().max(-10.0).min(10.0);
    std::ofstream csv(out_path, std::ios::trunc);
    if (!csv) throw IoError("sample: cannot open " + out_path);
    for (Index c = 0; c < d; ++c) csv << (c ? "," : "") << "x" << c;
    csv << "\n";
    char buf[64];
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < d; ++c) {
        const double x = out.at(r, c) + std::exp(0.5 * lv[c]) * rng.normal();
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        csv << (c ? "," : "") << buf;
      }
      csv << "\n";
    }
    if (!csv) throw IoError("sample: write failed: " + out_path);
  } else {
    const Tensor probs = led::sigmoid(out);
    Eigen::ArrayXd bits(n * d);
    for (Index i = 0; i < n * d; ++i) bits[i] = rng.uniform() < probs.at(i) ? 1.0 : 0.0;
    write_amat(out_path, Tensor(Shape{n, d}, std::move(bits)));
  }
}

GridDensity histogram_grid_density(const Tensor& samples, double lo0, double hi0, double lo1,
                                   double hi1, Index res0, Index res1) {
  if (samples.rank() != 2 || samples.dim(1) != 2)
    throw std::invalid_argument("histogram_grid_density: expected [n, 2], got " +
                                shape_str(samples.shape()));
  if (res0 < 1 || res1 < 1 || !(hi0 > lo0) || !(hi1 > lo1))
    throw std::invalid_argument("histogram_grid_density: bad box or resolution");
  GridDensity g;
  g.dims = 2;
  g.lo = {lo0, lo1};
  g.hi = {hi0, hi1};
  g.res = {res0, res1};
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(res0 * res1);
  const double w0 = (hi0 - lo0) / static_cast<double>(res0);
  const double w1 = (hi1 - lo1) / static_cast<double>(res1);
  Index inside = 0;
  for (Index r = 0; r < samples.dim(0); ++r) {
    const double x = samples.at(r, 0), y = samples.at(r, 1);
    if (x < lo0 || x > hi0 || y < lo1 || y > hi1) continue;
    const Index i = std::min<Index>(res0 - 1, static_cast<Index>((x - lo0) / w0));
    const Index j = std::min<Index>(res1 - 1, static_cast<Index>((y - lo1) / w1));
    counts[i * res1 + j] += 1.0;
    ++inside;
  }
  if (inside == 0)
    throw std::domain_error("histogram_grid_density: no samples inside the box");
  g.mass = counts / static_cast<double>(inside);
  return g;
}

void emit_fig2_panels(const LedVae& m, const Tensor& train_x, std::uint64_t seed,
                      const std::string& out_dir) {
  if (m.latent != 2)
    throw std::invalid_argument("emit_fig2_panels: needs a 2-dimensional latent, model has " +
                                std::to_string(m.latent));
  const double B = kFig2Box;

  Rng agg_rng = Rng::stream(seed, "fig2-agg");
  const Tensor z = aggregate_posterior_samples(m, train_x, kFig2AggSamples, agg_rng);
  const Tensor z0 = m.prior_flow.inverse(z).first;
  write_grid_pgm(histogram_grid_density(z, -B, B, -B, B, kFig2Res, kFig2Res),
                 out_dir + "/fig2_agg_z.pgm");
  write_grid_pgm(histogram_grid_density(z0, -B, B, -B, B, kFig2Res, kFig2Res),
                 out_dir + "/fig2_agg_z0.pgm");

  const FlowChain& prior = m.prior_flow;
  emit_density_map(
      [&prior](const Tensor& pts) { return led::exp(prior.base_log_density(pts)).values(); },
      -B, B, -B, B, kFig2Res, out_dir + "/fig2_base_z0.pgm");
  emit_density_map(
      [&prior](const Tensor& pts) { return led::exp(prior.log_density(pts)).values(); }, -B, B,
      -B, B, kFig2Res, out_dir + "/fig2_prior_z.pgm");

  if (m.dec.kind != DecoderKind::kGaussian)
    throw std::invalid_argument("emit_fig2_panels: the p(x) panel needs a Gaussian decoder");
  Rng px_rng = Rng::stream(seed, "fig2-px");
  const Tensor zs = m.prior_flow.sample(kFig2DecoderSamples, px_rng);
  const Tensor mu = m.dec(zs);  // [S, 2]
  const Eigen::ArrayXd lv = m.dec.gauss_logvar.values().max(-10.0).min(10.0);
  const double inv0 = std::exp(-lv[0]), inv1 = std::exp(-lv[1]);
  const double base = -0.5 * (2.0 * kLog2Pi + lv[0] + lv[1]);
  const double log_s = std::log(static_cast<double>(kFig2DecoderSamples));
  auto px = [&mu, inv0, inv1, base, log_s](const Tensor& pts) {
    Eigen::ArrayXd out(pts.dim(0));
    for (Index i = 0; i < pts.dim(0); ++i) {
      const double x0 = pts.at(i, 0), x1 = pts.at(i, 1);
      double best = -std::numeric_limits<double>::infinity();
      Eigen::ArrayXd ll(mu.dim(0));
      for (Index s = 0; s < mu.dim(0); ++s) {
        const double d0 = x0 - mu.at(s, 0), d1 = x1 - mu.at(s, 1);
        ll[s] = base - 0.5 * (d0 * d0 * inv0 + d1 * d1 * inv1);
        best = std::max(best, ll[s]);
      }
      out[i] = std::exp(best + std::log((ll - best).exp().sum()) - log_s);
    }
    return out;
  };
  emit_density_map(px, -B, B, -B, B, kFig2Res, out_dir + "/fig2_model_x.pgm");
}

}  // namespace led
