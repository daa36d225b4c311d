// SPDX-License-Identifier: Apache-2.0
//
// Data and format layer: strict .amat parsing, the synthetic digit
// generator, the toy mixture and its analytic density, PGM emission, the
// metrics CSV, config parsing/digesting, and checkpoint round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "led/checkpoint.hpp"
#include "led/config.hpp"
#include "led/dataset.hpp"
#include "led/experiments.hpp"
#include "led/metrics.hpp"
#include "led/pgm.hpp"

using namespace led;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("led_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("amat: round-trip and strict rejection") {
  const fs::path dir = temp_dir("amat");
  const fs::path good = dir / "good.amat";

  SUBCASE("accepted token forms and values") {
    write_text(good, "0 1 1.0 0.00\n1. 0. 1 0\n");
    const Tensor x = load_amat(good.string(), 4, 2);
    CHECK(x.dim(0) == 2);
    CHECK(x.at(0, 0) == 0.0);
    CHECK(x.at(0, 1) == 1.0);
    CHECK(x.at(0, 2) == 1.0);
    CHECK(x.at(0, 3) == 0.0);
    CHECK(x.at(1, 0) == 1.0);
    CHECK(x.at(1, 1) == 0.0);
  }

  SUBCASE("trailing spaces and final newline tolerated") {
    write_text(good, "0 1 \n1 0\n");
    const Tensor x = load_amat(good.string(), 2, 2);
    CHECK(x.at(0, 1) == 1.0);
  }

  SUBCASE("keep_rows stores a prefix but validates everything") {
    write_text(good, "0 1\n1 0\n1 1\n");
    const Tensor x = load_amat(good.string(), 2, 3, 1);
    CHECK(x.dim(0) == 1);
    // the short file still fails the count check even with a small keep
    write_text(good, "0 1\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_amat(good.string(), 2, 3, 1)),
                         doctest::Contains("has 1 rows, expected 3"), IoError);
  }

  SUBCASE("bad token rejected, error names file and line") {
    write_text(good, "0 1\n2 0\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_amat(good.string(), 2, 2)),
                         doctest::Contains(":2"), IoError);
    CHECK_THROWS_WITH_AS(static_cast<void>(load_amat(good.string(), 2, 2)),
                         doctest::Contains("'2'"), IoError);
    write_text(good, "0 1.5\n");
    CHECK_THROWS_AS(static_cast<void>(load_amat(good.string(), 2, 1)), IoError);
    write_text(good, "0 01\n");
    CHECK_THROWS_AS(static_cast<void>(load_amat(good.string(), 2, 1)), IoError);
  }

  SUBCASE("wrong line length and line count rejected") {
    write_text(good, "0 1 1\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_amat(good.string(), 2, 1)),
                         doctest::Contains("more than 2 values"), IoError);
    write_text(good, "0\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_amat(good.string(), 2, 1)),
                         doctest::Contains("expected 2 values, got 1"), IoError);
    write_text(good, "0 1\n0 1\n");
    CHECK_THROWS_AS(static_cast<void>(load_amat(good.string(), 2, 1)), IoError);
    CHECK_THROWS_AS(static_cast<void>(load_amat(good.string(), 2, 3)), IoError);
  }

  SUBCASE("blank interior line rejected") {
    write_text(good, "0 1\n\n0 1\n");
    CHECK_THROWS_AS(static_cast<void>(load_amat(good.string(), 2, 3)), IoError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(static_cast<void>(load_amat((dir / "nope.amat").string(), 2, 1)), IoError);
  }

  SUBCASE("write_amat round-trips and rejects non-binary values") {
    const Tensor x = Tensor::from({2, 3}, {1, 0, 1, 0, 0, 1});
    write_amat(good.string(), x);
    const Tensor y = load_amat(good.string(), 3, 2);
    CHECK((x.values() == y.values()).all());
    CHECK_THROWS_AS(write_amat(good.string(), Tensor::from({1, 2}, {0.5, 1})),
                    std::invalid_argument);
  }
}

TEST_CASE("synthetic digits: deterministic, binary, structured") {
  const fs::path dir = temp_dir("synth");
  generate_synthetic_mnist(dir.string(), 9, {40, 12, 12});
  const Tensor train = load_amat((dir / "binarized_mnist_train.amat").string(), kMnistDim, 40);
  const Tensor valid = load_amat((dir / "binarized_mnist_valid.amat").string(), kMnistDim, 12);

  // strictly binary (the loader enforces it) and plausibly inked
  double mean_on = train.values().sum() / 40.0;
  CHECK(mean_on > 20.0);   // every glyph leaves a visible stroke
  CHECK(mean_on < 350.0);  // and nowhere near a full canvas

  // per-class structure: examples 10 apart share a glyph but differ in jitter
  const Eigen::ArrayXd a = train.values().segment(0 * kMnistDim, kMnistDim);
  const Eigen::ArrayXd b = train.values().segment(10 * kMnistDim, kMnistDim);
  CHECK((a != b).any());

  // splits draw from distinct streams
  CHECK((train.values().head(kMnistDim) != valid.values().head(kMnistDim)).any());

  // determinism: same seed, byte-identical; different seed differs
  const std::string first = read_bytes(dir / "binarized_mnist_train.amat");
  generate_synthetic_mnist(dir.string(), 9, {40, 12, 12});
  CHECK(read_bytes(dir / "binarized_mnist_train.amat") == first);
  generate_synthetic_mnist(dir.string(), 10, {40, 12, 12});
  CHECK(read_bytes(dir / "binarized_mnist_train.amat") != first);

  // the canonical loader path wires the three files together
  generate_synthetic_mnist(dir.string(), 9, {40, 12, 12});
  CHECK_THROWS_AS(static_cast<void>(load_binarized_mnist(dir.string())), IoError);  // wrong counts
}

TEST_CASE("toy mixture: validation, sampling, analytic density") {
  SUBCASE("config validation") {
    ToyMixture m;
    m.weights = {0.5, 0.5, 0.1, 0.1};
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("sum"), std::invalid_argument);
    m = ToyMixture{};
    m.sigmas[2] = -1.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = ToyMixture{};
    m.sigmas.pop_back();
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    CHECK_NOTHROW(ToyMixture{}.validate());
  }

  SUBCASE("single component is a plain Gaussian sampler") {
    ToyMixture m;
    m.means = {{1.0, -2.0}};
    m.sigmas = {0.5};
    m.weights = {1.0};
    Rng rng = Rng::stream(3, "toy-single");
    const Tensor x = toy_mixture_sample(m, 3, rng);
    Rng ref = Rng::stream(3, "toy-single");
    for (Index i = 0; i < 3; ++i) {
      (void)ref.uniform();  // the component pick is still drawn
      const double n0 = ref.normal(), n1 = ref.normal();
      CHECK(x.at(i, 0) == 1.0 + 0.5 * n0);
      CHECK(x.at(i, 1) == -2.0 + 0.5 * n1);
    }
  }

  SUBCASE("component frequencies match weights at n = 1e5") {
    ToyMixture m;
    m.means = {{-40.0, 0.0}, {0.0, 0.0}, {40.0, 0.0}, {0.0, 40.0}};
    m.sigmas = {0.5, 0.5, 0.5, 0.5};
    m.weights = {0.1, 0.2, 0.3, 0.4};
    Rng rng = Rng::stream(11, "toy-freq");
    const Index n = 100000;
    const Tensor x = toy_mixture_sample(m, n, rng);
    // components are 80 sigma apart, so nearest-mean assignment is exact
    Eigen::Array4d counts = Eigen::Array4d::Zero();
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = 1e300;
      for (int k = 0; k < 4; ++k) {
        const double d0 = x.at(i, 0) - m.means[static_cast<std::size_t>(k)][0];
        const double d1 = x.at(i, 1) - m.means[static_cast<std::size_t>(k)][1];
        if (d0 * d0 + d1 * d1 < bd) bd = d0 * d0 + d1 * d1, best = k;
      }
      counts[best] += 1.0;
    }
    for (int k = 0; k < 4; ++k) {
      const double w = m.weights[static_cast<std::size_t>(k)];
      const double sd = std::sqrt(w * (1.0 - w) / static_cast<double>(n));
      CHECK(std::abs(counts[k] / static_cast<double>(n) - w) < 4.0 * sd);
    }
  }

  SUBCASE("analytic density integrates to 1 on the grid") {
    const ToyMixture m;  // defaults: modes at (+-2,0),(0,+-2), sigma 0.6
    const Index res = 400;
    const double lo = -6.0, hi = 6.0, w = (hi - lo) / res;
    double total = 0.0;
    for (Index i = 0; i < res; ++i)
      for (Index j = 0; j < res; ++j)
        total += std::exp(toy_mixture_log_density(m, lo + (i + 0.5) * w, lo + (j + 0.5) * w)) *
                 w * w;
    CHECK(std::abs(total - 1.0) < 1e-3);
  }

  SUBCASE("batch density equals the scalar version") {
    const ToyMixture m;
    const Tensor x = Tensor::from({2, 2}, {0.3, -1.2, 2.0, 0.1});
    const Eigen::ArrayXd d = toy_mixture_log_density(m, x);
    CHECK(d[0] == toy_mixture_log_density(m, 0.3, -1.2));
    CHECK(d[1] == toy_mixture_log_density(m, 2.0, 0.1));
  }
}

TEST_CASE("pgm: mapping, round-trip, density maps") {
  const fs::path dir = temp_dir("pgm");

  SUBCASE("constant density maps to all-255") {
    const fs::path p = dir / "const.pgm";
    emit_density_map([](const Tensor& pts) { return Eigen::ArrayXd::Constant(pts.dim(0), 0.7); },
                     0, 1, 0, 1, 16, p.string());
    const PgmImage img = read_pgm(p.string());
    CHECK(img.rows == 16);
    CHECK(img.cols == 16);
    for (auto px : img.pixels) CHECK(px == 255);
  }

  SUBCASE("standard normal: bright center, dark corners, correct orientation") {
    const fs::path p = dir / "normal.pgm";
    auto normal2d = [](const Tensor& pts) {
      Eigen::ArrayXd out(pts.dim(0));
      for (Index i = 0; i < pts.dim(0); ++i) {
        const double x = pts.at(i, 0), y = pts.at(i, 1);
        out[i] = std::exp(-0.5 * (x * x + y * y));
      }
      return out;
    };
    emit_density_map(normal2d, -3, 3, -3, 3, 65, p.string());
    const PgmImage img = read_pgm(p.string());
    CHECK(img.at(32, 32) == 255);  // center cell contains the mode
    CHECK(img.at(0, 0) < 10);      // corners carry e^{-9}-scale density
    CHECK(img.at(64, 64) < 10);
    // row 0 is the top: moving down from the top edge increases density
    CHECK(img.at(10, 32) > img.at(0, 32));
  }

  SUBCASE("resolution and callback contracts") {
    CHECK_THROWS_AS(
        emit_density_map([](const Tensor& t) { return Eigen::ArrayXd::Zero(t.dim(0)); }, 0, 1, 0,
                         1, 4096, (dir / "x.pgm").string()),
        std::invalid_argument);
    CHECK_THROWS_AS(emit_density_map([](const Tensor&) { return Eigen::ArrayXd::Zero(3); }, 0, 1,
                                     0, 1, 16, (dir / "x.pgm").string()),
                    std::invalid_argument);
  }

  SUBCASE("writer validates size, reader validates format") {
    CHECK_THROWS_AS(write_pgm((dir / "bad.pgm").string(), Eigen::ArrayXd::Zero(5), 2, 3),
                    std::invalid_argument);
    write_text(dir / "not.pgm", "P2\n2 2\n255\n0 0 0 0\n");
    CHECK_THROWS_AS(static_cast<void>(read_pgm((dir / "not.pgm").string())), IoError);
    write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_pgm((dir / "short.pgm").string())),
                         doctest::Contains("truncated"), IoError);
  }

  SUBCASE("all-zero density writes an all-black image") {
    const fs::path p = dir / "zero.pgm";
    write_pgm(p.string(), Eigen::ArrayXd::Zero(9), 3, 3);
    for (auto px : read_pgm(p.string()).pixels) CHECK(px == 0);
  }
}

TEST_CASE("metrics: schema, identity, exact round-trip") {
  const fs::path dir = temp_dir("metrics");
  const std::string path = (dir / "metrics.csv").string();

  MetricsRow r1{1, 0.0, -3.25, -1.5, 1.75, 2.625, 0.125};
  r1.elbo = r1.reconstruction + r1.prior_term + r1.entropy_term;
  MetricsRow r2{2, 0.0, -3.0 + 1e-13, -1.25, 1.5, std::nan(""), 0.25};
  r2.elbo = r2.reconstruction + r2.prior_term + r2.entropy_term;

  MetricsWriter w(path, true);
  w.append(r1);
  w.append(r2);

  SUBCASE("header and exact read-back") {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == kMetricsHeader);
    const auto rows = read_metrics(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].epoch == 1);
    CHECK(rows[0].reconstruction == r1.reconstruction);
    CHECK(rows[0].val_nll_is == r1.val_nll_is);
    CHECK(rows[1].reconstruction == r2.reconstruction);  // %.17g round-trips
    CHECK(std::isnan(rows[1].val_nll_is));
  }

  SUBCASE("elbo identity enforced at write") {
    MetricsRow bad = r1;
    bad.elbo += 1e-6;
    CHECK_THROWS_WITH_AS(w.append(bad), doctest::Contains("1e-9"), std::invalid_argument);
  }

  SUBCASE("append mode requires the header") {
    MetricsWriter again(path, false);
    again.append(r1);
    CHECK(read_metrics(path).size() == 3);
    write_text(dir / "other.csv", "epoch,elbo\n");
    CHECK_THROWS_AS(MetricsWriter((dir / "other.csv").string(), false), IoError);
    CHECK_THROWS_AS(MetricsWriter((dir / "missing.csv").string(), false), IoError);
  }

  SUBCASE("rewrite truncates for resume") {
    rewrite_metrics(path, {r1});
    const auto rows = read_metrics(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].epoch == 1);
  }

  SUBCASE("malformed rows rejected") {
    write_text(dir / "bad.csv", std::string(kMetricsHeader) + "\n1,2,3\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_metrics((dir / "bad.csv").string())),
                         doctest::Contains("7 fields"), IoError);
    write_text(dir / "bad2.csv", std::string(kMetricsHeader) + "\n1,x,0,0,0,0,0\n");
    CHECK_THROWS_AS(static_cast<void>(read_metrics((dir / "bad2.csv").string())), IoError);
  }
}

TEST_CASE("config: parsing, validation, canonical round-trip, digest") {
  const std::string sample = R"(# toy experiment
experiment = toy

[model]
latent_dim = 2
l_prior = 4            # NVP layers in the prior
enc_hidden = 64,64

[train]
epochs = 7
lr = 0.002
seed = 42

[toy]
means = -1 0; 1 0
sigmas = 0.5
weights = 0.5,0.5
)";

  SUBCASE("values, sections, comments, defaults") {
    const ExperimentConfig c = parse_experiment_config_text(sample, "sample");
    CHECK(c.experiment == "toy");
    CHECK(c.latent_dim == 2);
    CHECK(c.l_prior == 4);
    CHECK(c.enc_hidden == std::vector<Index>{64, 64});
    CHECK(c.dec_hidden == std::vector<Index>{200, 200});  // default survives
    CHECK(c.epochs == 7);
    CHECK(c.lr == 0.002);
    CHECK(c.seed == 42);
    REQUIRE(c.toy.means.size() == 2);
    CHECK(c.toy.sigmas == std::vector<double>{0.5, 0.5});  // broadcast
    CHECK(c.resolved_decoder() == DecoderKind::kGaussian);
  }

  SUBCASE("strictness") {
    CHECK_THROWS_WITH_AS(
        static_cast<void>(parse_experiment_config_text("experiment = toy\nfoo = 1\n", "t")),
        doctest::Contains("unknown key 'foo'"), ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_experiment_config_text(
                             "experiment = toy\n[model]\nbogus = 1\n", "t")),
                         doctest::Contains("model.bogus"), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_config_text("experiment = maybe\n", "t")),
                    ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_config_text("", "t")), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_config_text(
                        "experiment = toy\nexperiment = toy\n", "t")),
                    ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_config_text(
                        "experiment = toy\n[train]\nlr = -0.5\n", "t")),
                    ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_config_text(
                        "experiment = toy\n[train]\nepochs = two\n", "t")),
                    ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_experiment_config_text(
                             "experiment = toy\n[toy]\nweights = 0.9,0.9\n"
                             "means = 0 0; 1 1\n",
                             "t")),
                         doctest::Contains("sum"), ConfigError);
  }

  SUBCASE("canonical text round-trips and the digest ignores formatting") {
    const ExperimentConfig c = parse_experiment_config_text(sample, "sample");
    const std::string canon = canonical_config_text(c);
    const ExperimentConfig c2 = parse_experiment_config_text(canon, "canon");
    CHECK(canonical_config_text(c2) == canon);
    CHECK(config_digest(c2) == config_digest(c));

    // reordered sections and different comments: same digest
    const std::string shuffled = "experiment = toy\n[toy]\nweights = 0.5,0.5\nsigmas = 0.5\n"
                                 "means = -1 0; 1 0\n[train]\nseed = 42 # moved\nlr = 2e-3\n"
                                 "epochs = 7\n[model]\nenc_hidden = 64, 64\nl_prior = 4\n"
                                 "latent_dim = 2\n";
    CHECK(config_digest(parse_experiment_config_text(shuffled, "s")) == config_digest(c));
  }

  SUBCASE("digest tracks semantics, not paths or epoch budget") {
    const ExperimentConfig base = parse_experiment_config_text(sample, "s");
    ExperimentConfig m = base;
    m.l_prior = 8;
    CHECK(config_digest(m) != config_digest(base));
    m = base;
    m.seed = 43;
    CHECK(config_digest(m) != config_digest(base));
    m = base;
    m.out_dir = "/somewhere/else";
    m.data_dir = "/data";
    CHECK(config_digest(m) == config_digest(base));
    m = base;
    m.epochs = 99;  // extending a run keeps the digest
    CHECK(config_digest(m) == config_digest(base));
    m = base;
    m.k_importance = 7;  // eval cadence is not digested either
    CHECK(config_digest(m) == config_digest(base));
    m = base;
    m.batch = 33;  // but anything touching the training stream is
    CHECK(config_digest(m) != config_digest(base));
  }
}

TEST_CASE("checkpoint: byte-identical round-trip and mismatch errors") {
  const fs::path dir = temp_dir("ckpt");
  ExperimentConfig cfg = parse_experiment_config_text(
      "experiment = toy\n[model]\nenc_hidden = 8\ndec_hidden = 8\nl_prior = 1\n"
      "prior_hidden = 4\n",
      "t");
  LedVae m = build_model(cfg);
  std::vector<NamedParam> params = m.named_params();
  AdamState adam = AdamState::init(param_pointers(params));
  adam.t = 5;
  for (auto& a : adam.m) a.setConstant(0.25);

  CheckpointMeta meta;
  meta.digest = config_digest(cfg);
  meta.config_text = canonical_config_text(cfg);
  meta.epoch = 12;
  meta.rng_state = 0xdeadbeefcafe1234ull;
  const std::string p1 = (dir / "a.ledf").string();
  save_checkpoint(p1, meta, params, adam);

  SUBCASE("save -> load -> save is byte-identical, metadata intact") {
    LedVae m2 = build_model(cfg);
    std::vector<NamedParam> params2 = m2.named_params();
    // perturb the clone so the load has to do real work
    params2[0].tensor->assign(params2[0].tensor->values() + 1.0);
    AdamState adam2;
    const CheckpointMeta got = load_checkpoint(p1, config_digest(cfg), params2, adam2);
    CHECK(got.epoch == 12);
    CHECK(got.rng_state == meta.rng_state);
    CHECK(got.config_text == meta.config_text);
    CHECK(adam2.t == 5);
    const std::string p2 = (dir / "b.ledf").string();
    save_checkpoint(p2, got, params2, adam2);
    CHECK(read_bytes(p1) == read_bytes(p2));
    for (std::size_t i = 0; i < params.size(); ++i)
      CHECK((params[i].tensor->values() == params2[i].tensor->values()).all());
  }

  SUBCASE("digest mismatch is an explicit error") {
    ExperimentConfig other = cfg;
    other.l_prior = 2;
    LedVae m3 = build_model(other);
    std::vector<NamedParam> params3 = m3.named_params();
    AdamState adam3;
    CHECK_THROWS_WITH_AS(
        static_cast<void>(load_checkpoint(p1, config_digest(other), params3, adam3)),
        doctest::Contains("digest"), IoError);
  }

  SUBCASE("tensor name/shape mismatches are named") {
    ExperimentConfig other = cfg;
    other.l_prior = 2;  // more prior tensors than the file holds
    LedVae m3 = build_model(other);
    std::vector<NamedParam> params3 = m3.named_params();
    AdamState adam3;
    CHECK_THROWS_AS(static_cast<void>(load_checkpoint(p1, 0, params3, adam3)), IoError);

    ExperimentConfig wide = cfg;
    wide.enc_hidden = {16};  // same tensor count, different shapes
    LedVae m4 = build_model(wide);
    std::vector<NamedParam> params4 = m4.named_params();
    CHECK_THROWS_WITH_AS(static_cast<void>(load_checkpoint(p1, 0, params4, adam3)),
                         doctest::Contains("shape"), IoError);
  }

  SUBCASE("truncation and wrong magic detected") {
    const std::string bytes = read_bytes(p1);
    write_text(dir / "trunc.ledf", bytes.substr(0, bytes.size() / 2));
    std::vector<NamedParam> params5 = m.named_params();
    AdamState adam5;
    CHECK_THROWS_WITH_AS(
        static_cast<void>(load_checkpoint((dir / "trunc.ledf").string(), 0, params5, adam5)),
        doctest::Contains("truncated"), IoError);
    write_text(dir / "junk.ledf", "not a checkpoint at all");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_checkpoint_meta((dir / "junk.ledf").string())),
                         doctest::Contains("LEDF"), IoError);
  }
}

TEST_CASE("histogram grid density: placement and normalization") {
  // four points, three inside: cells (0,0), (1,1) twice
  const Tensor s = Tensor::from({4, 2}, {0.25, 0.25, 0.75, 0.75, 0.9, 0.6, 7.0, 7.0});
  const GridDensity g = histogram_grid_density(s, 0, 1, 0, 1, 2, 2);
  g.validate();
  CHECK(g.mass[0 * 2 + 0] == doctest::Approx(1.0 / 3.0));
  CHECK(g.mass[1 * 2 + 1] == doctest::Approx(2.0 / 3.0));
  CHECK(g.mass[0 * 2 + 1] == 0.0);
  CHECK_THROWS_AS(static_cast<void>(histogram_grid_density(
                      Tensor::from({1, 2}, {5.0, 5.0}), 0, 1, 0, 1, 2, 2)),
                  std::domain_error);
}
