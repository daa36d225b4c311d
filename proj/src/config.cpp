// SPDX-License-Identifier: Apache-2.0
#include "led/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "led/pgm.hpp"  // IoError
#include "led/rng.hpp"

namespace led {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Flat key -> value map with consumption tracking, so anything left over at
/// the end is an unknown key.
class KeyValues {
 public:
  KeyValues(std::map<std::string, std::string> kv, std::string origin)
      : kv_(std::move(kv)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string raw(const std::string& key) {
    consumed_.insert(key);
    return kv_.at(key);
  }

  std::string get_string(const std::string& key, std::string dflt) {
    return has(key) ? raw(key) : dflt;
  }

  std::string get_enum(const std::string& key, std::string dflt,
                       const std::set<std::string>& allowed) {
    std::string v = get_string(key, std::move(dflt));
    if (!allowed.count(v)) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      throw ConfigError(origin_ + ": key '" + key + "': '" + v + "' is not one of {" + opts +
                        "}");
    }
    return v;
  }

  long get_long(const std::string& key, long dflt, long lo, long hi) {
    if (!has(key)) return check_range(key, dflt, lo, hi);
    const std::string v = raw(key);
    try {
      std::size_t pos = 0;
      long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return check_range(key, out, lo, hi);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + v + "' is not an integer");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) {
    if (!has(key)) return dflt;
    const std::string v = raw(key);
    try {
      std::size_t pos = 0;
      unsigned long long out = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + v +
                        "' is not an unsigned integer");
    }
  }

  double get_double(const std::string& key, double dflt) {
    if (!has(key)) return dflt;
    const std::string v = raw(key);
    try {
      std::size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      if (!std::isfinite(out)) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + v + "' is not a finite number");
    }
  }

  std::vector<Index> get_index_list(const std::string& key, std::vector<Index> dflt) {
    if (!has(key)) return dflt;
    const std::string v = raw(key);
    std::vector<Index> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t pos = 0;
        long x = std::stol(item, &pos);
        if (pos != item.size() || x < 1) throw std::invalid_argument(item);
        out.push_back(x);
      } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': bad list entry '" + item + "'");
      }
    }
    if (out.empty())
      throw ConfigError(origin_ + ": key '" + key + "': empty list");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> dflt) {
    if (!has(key)) return dflt;
    const std::string v = raw(key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t pos = 0;
        double x = std::stod(item, &pos);
        if (pos != item.size() || !std::isfinite(x)) throw std::invalid_argument(item);
        out.push_back(x);
      } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': bad list entry '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError(origin_ + ": key '" + key + "': empty list");
    return out;
  }

  // "x0 y0; x1 y1; ..."
  std::vector<std::array<double, 2>> get_pair_list(const std::string& key,
                                                   std::vector<std::array<double, 2>> dflt) {
    if (!has(key)) return dflt;
    const std::string v = raw(key);
    std::vector<std::array<double, 2>> out;
    std::istringstream ss(v);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
      std::istringstream ps(trim(pair));
      double a = 0, b = 0;
      std::string extra;
      if (!(ps >> a >> b) || (ps >> extra))
        throw ConfigError(origin_ + ": key '" + key + "': bad pair '" + trim(pair) +
                          "' (expected 'x y')");
      out.push_back({a, b});
    }
    if (out.empty()) throw ConfigError(origin_ + ": key '" + key + "': empty list");
    return out;
  }

  void reject_unconsumed() const {
    for (const auto& [k, v] : kv_)
      if (!consumed_.count(k)) throw ConfigError(origin_ + ": unknown key '" + k + "'");
  }

 private:
  long check_range(const std::string& key, long v, long lo, long hi) const {
    if (v < lo || v > hi)
      throw ConfigError(origin_ + ": key '" + key + "': " + std::to_string(v) +
                        " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
  std::string origin_;
};

KeyValues lex_config(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section '" +
                          line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.count(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    kv[key] = val;
  }
  return KeyValues(std::move(kv), origin);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_indices(const std::vector<Index>& v) {
  std::string s;
  for (Index x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt17(x);
  return s;
}

std::string join_pairs(const std::vector<std::array<double, 2>>& v) {
  std::string s;
  for (const auto& p : v) s += (s.empty() ? "" : "; ") + fmt17(p[0]) + " " + fmt17(p[1]);
  return s;
}

constexpr long kMaxIndex = 1L << 40;

}  // namespace

DecoderKind ExperimentConfig::resolved_decoder() const {
  if (decoder == "bernoulli") return DecoderKind::kBernoulli;
  if (decoder == "gaussian") return DecoderKind::kGaussian;
  return experiment == "mnist" ? DecoderKind::kBernoulli : DecoderKind::kGaussian;
}

ExperimentConfig parse_experiment_config_text(const std::string& text,
                                              const std::string& origin) {
  KeyValues kv = lex_config(text, origin);
  ExperimentConfig c;
  if (!kv.has("experiment"))
    throw ConfigError(origin + ": missing required key 'experiment'");
  c.experiment = kv.get_enum("experiment", "", {"toy", "mnist", "nica"});

  c.latent_dim = kv.get_long("model.latent_dim", c.latent_dim, 1, 4096);
  c.l_prior = kv.get_long("model.l_prior", c.l_prior, 0, 256);
  c.l_post = kv.get_long("model.l_post", c.l_post, 0, 256);
  c.post_kind = kv.get_enum("model.post_kind", c.post_kind, {"made", "nvp"});
  c.enc_hidden = kv.get_index_list("model.enc_hidden", c.enc_hidden);
  c.dec_hidden = kv.get_index_list("model.dec_hidden", c.dec_hidden);
  c.prior_hidden = kv.get_index_list("model.prior_hidden", c.prior_hidden);
  c.post_hidden = kv.get_index_list("model.post_hidden", c.post_hidden);
  c.prior_mask = kv.get_enum("model.prior_mask", c.prior_mask, {"random", "checkerboard"});
  c.decoder = kv.get_enum("model.decoder", c.decoder, {"auto", "bernoulli", "gaussian"});
  c.act = kv.get_enum("model.act", c.act, {"relu", "tanh", "elu"});
  c.cond_act = kv.get_enum("model.cond_act", c.cond_act, {"relu", "tanh", "elu"});

  c.epochs = kv.get_long("train.epochs", c.epochs, 0, kMaxIndex);
  c.batch = kv.get_long("train.batch", c.batch, 1, kMaxIndex);
  c.lr = kv.get_double("train.lr", c.lr);
  if (!(c.lr > 0.0)) throw ConfigError(origin + ": key 'train.lr': must be > 0");
  c.seed = kv.get_u64("train.seed", c.seed);

  c.k_importance = kv.get_long("eval.k_importance", c.k_importance, 1, kMaxIndex);
  c.eval_every = kv.get_long("eval.eval_every", c.eval_every, 1, kMaxIndex);
  c.eval_points = kv.get_long("eval.eval_points", c.eval_points, 1, kMaxIndex);

  const char* env = std::getenv("LED_DATA_DIR");
  c.data_dir = kv.get_string("paths.data_dir", env ? env : "");
  c.out_dir = kv.get_string("paths.out_dir", "");

  c.toy.means = kv.get_pair_list("toy.means", c.toy.means);
  {
    const std::size_t n = c.toy.means.size();
    // Absent sigmas default to 0.6 per component, absent weights to uniform;
    // a single listed entry broadcasts across components.
    std::vector<double> sig =
        kv.get_double_list("toy.sigmas", std::vector<double>(n, 0.6));
    if (sig.size() == 1 && n > 1) sig.assign(n, sig[0]);
    c.toy.sigmas = std::move(sig);
    std::vector<double> w = kv.get_double_list(
        "toy.weights", std::vector<double>(n, 1.0 / static_cast<double>(n)));
    if (w.size() == 1 && n > 1) w.assign(n, w[0]);
    c.toy.weights = std::move(w);
    try {
      c.toy.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": [toy] " + e.what());
    }
  }
  c.toy_n_train = kv.get_long("toy.n_train", c.toy_n_train, 1, kMaxIndex);
  c.toy_n_valid = kv.get_long("toy.n_valid", c.toy_n_valid, 1, kMaxIndex);
  c.toy_n_test = kv.get_long("toy.n_test", c.toy_n_test, 1, kMaxIndex);

  c.subset_train = kv.get_long("mnist.subset_train", c.subset_train, 1, kMnistTrainRows);
  c.subset_valid = kv.get_long("mnist.subset_valid", c.subset_valid, 1, kMnistValidRows);

  c.nica_layers = kv.get_long("nica.layers", c.nica_layers, 1, 256);
  c.nica_epochs = kv.get_long("nica.epochs", c.nica_epochs, 0, kMaxIndex);
  c.nica_batch = kv.get_long("nica.batch", c.nica_batch, 1, kMaxIndex);
  c.nica_lr = kv.get_double("nica.lr", c.nica_lr);
  if (!(c.nica_lr > 0.0)) throw ConfigError(origin + ": key 'nica.lr': must be > 0");
  c.nica_n_train = kv.get_long("nica.n_train", c.nica_n_train, 1, kMaxIndex);
  c.nica_hidden = kv.get_index_list("nica.hidden", c.nica_hidden);
  c.nica_act = kv.get_enum("nica.act", c.nica_act, {"relu", "tanh", "elu"});
  c.nica_kl_every = kv.get_long("nica.kl_every", c.nica_kl_every, 1, kMaxIndex);
  c.nica_mode = kv.get_double("nica.mode", c.nica_mode);
  c.nica_sigma = kv.get_double("nica.sigma", c.nica_sigma);
  if (!(c.nica_sigma > 0.0)) throw ConfigError(origin + ": key 'nica.sigma': must be > 0");
  c.nica_box = kv.get_double("nica.box", c.nica_box);
  if (!(c.nica_box > 0.0)) throw ConfigError(origin + ": key 'nica.box': must be > 0");
  c.nica_res = kv.get_long("nica.res", c.nica_res, 2, 2048);

  kv.reject_unconsumed();
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config_text(ss.str(), path);
}

namespace {

// for_digest=true omits the fields that do not change any per-epoch
// computation — the epoch budget and the evaluation cadence — so a finished
// run can be extended or re-evaluated under the same digest.
std::string render_config(const ExperimentConfig& cfg, bool for_digest) {
  std::ostringstream o;
  o << "experiment = " << cfg.experiment << "\n";
  o << "[model]\n";
  o << "latent_dim = " << cfg.latent_dim << "\n";
  o << "l_prior = " << cfg.l_prior << "\n";
  o << "l_post = " << cfg.l_post << "\n";
  o << "post_kind = " << cfg.post_kind << "\n";
  o << "enc_hidden = " << join_indices(cfg.enc_hidden) << "\n";
  o << "dec_hidden = " << join_indices(cfg.dec_hidden) << "\n";
  o << "prior_hidden = " << join_indices(cfg.prior_hidden) << "\n";
  o << "post_hidden = " << join_indices(cfg.post_hidden) << "\n";
  o << "prior_mask = " << cfg.prior_mask << "\n";
  o << "decoder = " << cfg.decoder << "\n";
  o << "act = " << cfg.act << "\n";
  o << "cond_act = " << cfg.cond_act << "\n";
  o << "[train]\n";
  if (!for_digest) o << "epochs = " << cfg.epochs << "\n";
  o << "batch = " << cfg.batch << "\n";
  o << "lr = " << fmt17(cfg.lr) << "\n";
  o << "seed = " << cfg.seed << "\n";
  if (!for_digest) {
    o << "[eval]\n";
    o << "k_importance = " << cfg.k_importance << "\n";
    o << "eval_every = " << cfg.eval_every << "\n";
    o << "eval_points = " << cfg.eval_points << "\n";
  }
  o << "[toy]\n";
  o << "means = " << join_pairs(cfg.toy.means) << "\n";
  o << "sigmas = " << join_doubles(cfg.toy.sigmas) << "\n";
  o << "weights = " << join_doubles(cfg.toy.weights) << "\n";
  o << "n_train = " << cfg.toy_n_train << "\n";
  o << "n_valid = " << cfg.toy_n_valid << "\n";
  o << "n_test = " << cfg.toy_n_test << "\n";
  o << "[mnist]\n";
  o << "subset_train = " << cfg.subset_train << "\n";
  o << "subset_valid = " << cfg.subset_valid << "\n";
  o << "[nica]\n";
  o << "layers = " << cfg.nica_layers << "\n";
  o << "epochs = " << cfg.nica_epochs << "\n";
  o << "batch = " << cfg.nica_batch << "\n";
  o << "lr = " << fmt17(cfg.nica_lr) << "\n";
  o << "n_train = " << cfg.nica_n_train << "\n";
  o << "hidden = " << join_indices(cfg.nica_hidden) << "\n";
  o << "act = " << cfg.nica_act << "\n";
  o << "kl_every = " << cfg.nica_kl_every << "\n";
  o << "mode = " << fmt17(cfg.nica_mode) << "\n";
  o << "sigma = " << fmt17(cfg.nica_sigma) << "\n";
  o << "box = " << fmt17(cfg.nica_box) << "\n";
  o << "res = " << cfg.nica_res << "\n";
  return o.str();
}

}  // namespace

std::string canonical_config_text(const ExperimentConfig& cfg) {
  return render_config(cfg, /*for_digest=*/false);
}

std::uint64_t config_digest(const ExperimentConfig& cfg) {
  return Rng::fnv1a64(render_config(cfg, /*for_digest=*/true));
}

Activation parse_activation(const std::string& s, const std::string& key) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "elu") return Activation::kElu;
  throw ConfigError("key '" + key + "': unknown activation '" + s + "'");
}

ModelSpec model_spec_for(const ExperimentConfig& cfg, Index input_dim) {
  ModelSpec s;
  s.input_dim = input_dim;
  s.latent = cfg.latent_dim;
  s.enc_hidden = cfg.enc_hidden;
  s.dec_hidden = cfg.dec_hidden;
  s.decoder = cfg.resolved_decoder();
  s.act = parse_activation(cfg.act, "model.act");
  s.cond_act = parse_activation(cfg.cond_act, "model.cond_act");
  s.l_prior = cfg.l_prior;
  s.prior_hidden = cfg.prior_hidden;
  s.prior_mask = cfg.prior_mask == "random" ? MaskKind::kRandomHalf : MaskKind::kCheckerboard;
  s.l_post = cfg.l_post;
  s.post_kind =
      cfg.post_kind == "made" ? ModelSpec::PostKind::kMade : ModelSpec::PostKind::kNvp;
  s.post_hidden = cfg.post_hidden;
  return s;
}

NicaTrainConfig nica_train_config(const ExperimentConfig& cfg) {
  NicaTrainConfig t;
  t.n_train = cfg.nica_n_train;
  t.batch = cfg.nica_batch;
  t.epochs = cfg.nica_epochs;
  t.lr = cfg.nica_lr;
  t.hidden = cfg.nica_hidden;
  t.act = parse_activation(cfg.nica_act, "nica.act");
  t.kl_every = cfg.nica_kl_every;
  return t;
}

GridDensity nica_target(const ExperimentConfig& cfg) {
  const double m = cfg.nica_mode, s2 = cfg.nica_sigma * cfg.nica_sigma, b = cfg.nica_box;
  auto f = [m, s2](double x, double y) {
    const double a = (x - m) * (x - m) + (y - m) * (y - m);
    const double c = (x + m) * (x + m) + (y + m) * (y + m);
    return std::exp(-0.5 * a / s2) + std::exp(-0.5 * c / s2);
  };
  return GridDensity::from_function(f, -b, b, -b, b, cfg.nica_res, cfg.nica_res);
}

}  // namespace led
