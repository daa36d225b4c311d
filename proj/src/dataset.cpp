// SPDX-License-Identifier: Apache-2.0
#include "led/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "led/pgm.hpp"  // IoError

namespace led {

namespace {

// "0" or "1", optionally with a decimal point followed by zeros.
bool valid_binary_token(const std::string& t, double& out) {
  if (t.empty() || (t[0] != '0' && t[0] != '1')) return false;
  if (t.size() > 1) {
    if (t[1] != '.') return false;
    for (std::size_t i = 2; i < t.size(); ++i)
      if (t[i] != '0') return false;
  }
  out = t[0] - '0';
  return true;
}

}  // namespace

Tensor load_amat(const std::string& path, Index expect_dim, Index expect_rows, Index keep_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("load_amat: cannot open " + path);
  if (keep_rows < 0 || keep_rows > expect_rows) keep_rows = expect_rows;
  Eigen::ArrayXd data(keep_rows * expect_dim);
  std::string line;
  Index row = 0;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    if (row >= expect_rows)
      throw IoError("load_amat: " + path + " has more than " + std::to_string(expect_rows) +
                    " rows (line " + std::to_string(line_no) + ")");
    Index col = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      const std::string tok = line.substr(i, j - i);
      double v = 0.0;
      if (!valid_binary_token(tok, v))
        throw IoError("load_amat: bad token '" + tok + "' at " + path + ":" +
                      std::to_string(line_no));
      if (col >= expect_dim)
        throw IoError("load_amat: more than " + std::to_string(expect_dim) + " values at " +
                      path + ":" + std::to_string(line_no));
      if (row < keep_rows) data[row * expect_dim + col] = v;
      ++col;
      i = j;
    }
    if (col != expect_dim)
      throw IoError("load_amat: expected " + std::to_string(expect_dim) + " values, got " +
                    std::to_string(col) + " at " + path + ":" + std::to_string(line_no));
    ++row;
  }
  if (row != expect_rows)
    throw IoError("load_amat: " + path + " has " + std::to_string(row) + " rows, expected " +
                  std::to_string(expect_rows));
  return Tensor(Shape{keep_rows, expect_dim}, std::move(data));
}

void write_amat(const std::string& path, const Tensor& x) {
  if (x.rank() != 2) throw std::invalid_argument("write_amat: expected a rank-2 tensor");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_amat: cannot open " + path);
  const Index n = x.dim(0), d = x.dim(1);
  std::string line;
  line.reserve(static_cast<std::size_t>(2 * d));
  for (Index r = 0; r < n; ++r) {
    line.clear();
    for (Index c = 0; c < d; ++c) {
      const double v = x.at(r, c);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("write_amat: non-binary value " + std::to_string(v) +
                                    " at row " + std::to_string(r));
      if (c) line.push_back(' ');
      line.push_back(v == 1.0 ? '1' : '0');
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError("write_amat: write failed: " + path);
}

MnistSplits load_binarized_mnist(const std::string& dir, Index keep_train, Index keep_valid,
                                 Index keep_test) {
  MnistSplits s;
  s.train = load_amat(dir + "/binarized_mnist_train.amat", kMnistDim, kMnistTrainRows, keep_train);
  s.valid = load_amat(dir + "/binarized_mnist_valid.amat", kMnistDim, kMnistValidRows, keep_valid);
  s.test = load_amat(dir + "/binarized_mnist_test.amat", kMnistDim, kMnistTestRows, keep_test);
  return s;
}

// ---------------------------------------------------------------------------
// Synthetic digit images
// ---------------------------------------------------------------------------

namespace {

using Point = std::array<double, 2>;
using Polyline = std::vector<Point>;

// Samples an ellipse arc into a polyline. Screen coordinates (y grows
// downward); the angle runs through (cx + rx cos a, cy + ry sin a).
Polyline arc(double cx, double cy, double rx, double ry, double a0, double a1) {
  Polyline p;
  const int n = 24;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / n;
    p.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
  return p;
}

// Fixed stroke glyphs on the 28x28 canvas, one per class.
const std::vector<std::vector<Polyline>>& glyphs() {
  static const std::vector<std::vector<Polyline>> g = [] {
    constexpr double pi = std::numbers::pi;
    std::vector<std::vector<Polyline>> v(10);
    v[0] = {arc(14, 14, 5.5, 7.5, 0, 2 * pi)};
    v[1] = {{{11, 8}, {14, 5}, {14, 23}}, {{11, 23}, {17, 23}}};
    v[2] = {arc(14, 9.5, 5, 5, pi, 2 * pi + 0.35), {{19.2, 10.3}, {9, 23}}, {{9, 23}, {19, 23}}};
    v[3] = {arc(13.5, 8.8, 4.3, 4.3, pi + 0.6, 2 * pi + pi / 2),
            arc(13.5, 17.8, 5, 5, -pi / 2, pi - 0.5)};
    v[4] = {{{16, 4}, {7, 15}}, {{7, 15}, {20, 15}}, {{16, 4}, {16, 23}}};
    v[5] = {{{18.5, 5}, {10, 5}}, {{10, 5}, {10, 12.5}}, {{10, 12.5}, {12.5, 12}},
            arc(13, 17, 5, 5, -1.77, 2.69)};
    v[6] = {{{17.5, 5}, {12, 10.5}, {9.8, 16}}, arc(14, 17.3, 4.4, 4.4, 0, 2 * pi)};
    v[7] = {{{9, 5}, {19.5, 5}}, {{19.5, 5}, {12, 23}}, {{11.5, 14}, {17.5, 14}}};
    v[8] = {arc(14, 9.3, 3.8, 3.8, 0, 2 * pi), arc(14, 17.8, 4.8, 4.8, 0, 2 * pi)};
    v[9] = {arc(13.8, 9.8, 4.3, 4.3, 0, 2 * pi), {{18.1, 9.8}, {17.2, 17}, {14.5, 22.5}}};
    return v;
  }();
  return g;
}

struct Seg {
  double x0, y0, x1, y1;
  double bx0, by0, bx1, by1;  // bbox expanded by the skip radius
};

double seg_dist_sq(const Seg& s, double px, double py) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double wx = px - s.x0, wy = py - s.y0;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx, dy = wy - t * vy;
  return dx * dx + dy * dy;
}

// One stochastically binarized 28x28 example of class `digit`, appended to
// `row` (784 chars '0'/'1' plus separators handled by the caller).
void render_example(int digit, Rng& rng, double* out) {
  const double scale = 0.9 + 0.2 * rng.uniform();
  const double rot = -0.12 + 0.24 * rng.uniform();
  const double dx = -2.0 + 4.0 * rng.uniform();
  const double dy = -2.0 + 4.0 * rng.uniform();
  const double tau = 1.3 + 0.6 * rng.uniform();
  const double cr = std::cos(rot), sr = std::sin(rot);
  const double skip = 3.0 * tau;  // beyond this the intensity is ~0

  std::vector<Seg> segs;
  for (const Polyline& poly : glyphs()[static_cast<std::size_t>(digit)]) {
    Point prev{};
    bool first = true;
    for (const Point& p : poly) {
      const double ox = (p[0] - 14.0) * scale, oy = (p[1] - 14.0) * scale;
      const Point q{14.0 + cr * ox - sr * oy + dx, 14.0 + sr * ox + cr * oy + dy};
      if (!first) {
        Seg s{prev[0], prev[1], q[0], q[1], 0, 0, 0, 0};
        s.bx0 = std::min(s.x0, s.x1) - skip;
        s.bx1 = std::max(s.x0, s.x1) + skip;
        s.by0 = std::min(s.y0, s.y1) - skip;
        s.by1 = std::max(s.y0, s.y1) + skip;
        segs.push_back(s);
      }
      prev = q;
      first = false;
    }
  }

  const double inv_tau_sq = 1.0 / (tau * tau);
  for (int r = 0; r < 28; ++r) {
    for (int c = 0; c < 28; ++c) {
      const double px = c, py = r;
      double d2 = 1e30;
      for (const Seg& s : segs) {
        if (px < s.bx0 || px > s.bx1 || py < s.by0 || py > s.by1) continue;
        d2 = std::min(d2, seg_dist_sq(s, px, py));
        if (d2 * inv_tau_sq < 1e-3) break;
      }
      const double a = d2 * inv_tau_sq;
      const double intensity = a > 9.0 ? 0.0 : std::exp(-a);
      // One uniform per pixel in raster order, drawn unconditionally so the
      // stream position never depends on the geometry.
      out[r * 28 + c] = rng.uniform() < intensity ? 1.0 : 0.0;
    }
  }
}

void write_synthetic_split(const std::string& path, std::string_view stream_name,
                           std::uint64_t seed, Index rows) {
  Rng root = Rng::stream(seed, stream_name);
  Eigen::ArrayXd data(rows * kMnistDim);
  for (Index i = 0; i < rows; ++i) {
    Rng ex = root.substream(static_cast<std::uint64_t>(i));
    render_example(static_cast<int>(i % 10), ex, data.data() + i * kMnistDim);
  }
  write_amat(path, Tensor(Shape{rows, kMnistDim}, std::move(data)));
}

}  // namespace

void generate_synthetic_mnist(const std::string& dir, std::uint64_t seed,
                              const std::array<Index, 3>& rows_override) {
  write_synthetic_split(dir + "/binarized_mnist_train.amat", "synth-train", seed,
                        rows_override[0]);
  write_synthetic_split(dir + "/binarized_mnist_valid.amat", "synth-valid", seed,
                        rows_override[1]);
  write_synthetic_split(dir + "/binarized_mnist_test.amat", "synth-test", seed, rows_override[2]);
}

// ---------------------------------------------------------------------------
// Toy mixture
// ---------------------------------------------------------------------------

void ToyMixture::validate() const {
  if (means.empty()) throw std::invalid_argument("ToyMixture: no components");
  if (sigmas.size() != means.size() || weights.size() != means.size())
    throw std::invalid_argument("ToyMixture: means/sigmas/weights sizes differ (" +
                                std::to_string(means.size()) + "/" +
                                std::to_string(sigmas.size()) + "/" +
                                std::to_string(weights.size()) + ")");
  double wsum = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (!(sigmas[k] > 0.0))
      throw std::invalid_argument("ToyMixture: sigma[" + std::to_string(k) + "] must be > 0");
    if (weights[k] < 0.0)
      throw std::invalid_argument("ToyMixture: weight[" + std::to_string(k) + "] is negative");
    wsum += weights[k];
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("ToyMixture: weights sum to " + std::to_string(wsum) +
                                ", expected 1");
}

Tensor toy_mixture_sample(const ToyMixture& mix, Index n, Rng& rng) {
  mix.validate();
  Eigen::ArrayXd out(n * 2);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    std::size_t k = 0;
    double acc = 0.0;
    for (; k + 1 < mix.weights.size(); ++k) {
      acc += mix.weights[k];
      if (u < acc) break;
    }
    out[2 * i] = mix.means[k][0] + mix.sigmas[k] * rng.normal();
    out[2 * i + 1] = mix.means[k][1] + mix.sigmas[k] * rng.normal();
  }
  return Tensor(Shape{n, 2}, std::move(out));
}

double toy_mixture_log_density(const ToyMixture& mix, double x0, double x1) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(mix.components());
  for (std::size_t k = 0; k < mix.components(); ++k) {
    const double s2 = mix.sigmas[k] * mix.sigmas[k];
    const double d0 = x0 - mix.means[k][0], d1 = x1 - mix.means[k][1];
    const double lw = mix.weights[k] > 0.0 ? std::log(mix.weights[k])
                                           : -std::numeric_limits<double>::infinity();
    terms[k] = lw - std::log(2.0 * std::numbers::pi * s2) - (d0 * d0 + d1 * d1) / (2.0 * s2);
    best = std::max(best, terms[k]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

Eigen::ArrayXd toy_mixture_log_density(const ToyMixture& mix, const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != 2)
    throw std::invalid_argument("toy_mixture_log_density: expected [n, 2], got " +
                                shape_str(x.shape()));
  Eigen::ArrayXd out(x.dim(0));
  for (Index i = 0; i < x.dim(0); ++i)
    out[i] = toy_mixture_log_density(mix, x.at(i, 0), x.at(i, 1));
  return out;
}

}  // namespace led
