// SPDX-License-Identifier: Apache-2.0
#include "led/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace led {

void write_pgm(const std::string& path, const Eigen::ArrayXd& values, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || values.size() != rows * cols)
    throw std::invalid_argument("write_pgm: values size " + std::to_string(values.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  const double vmax = values.maxCoeff();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(values.size()));
  if (vmax > 0.0) {
    for (Index i = 0; i < values.size(); ++i) {
      const double v = std::clamp(values[i] / vmax, 0.0, 1.0);
      px[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_pgm: cannot open " + path);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw IoError("write_pgm: write failed: " + path);
}

namespace {

// Reads one PGM header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#')
      while (c != EOF && c != '\n') c = in.get();
    c = in.get();
  }
  std::string tok;
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

long parse_dim(const std::string& tok, const std::string& path) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw IoError("read_pgm: bad header token '" + tok + "' in " + path);
  return std::stol(tok);
}

}  // namespace

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_pgm: cannot open " + path);
  if (next_token(in) != "P5") throw IoError("read_pgm: not a P5 file: " + path);
  PgmImage img;
  img.cols = parse_dim(next_token(in), path);
  img.rows = parse_dim(next_token(in), path);
  const long maxval = parse_dim(next_token(in), path);
  if (maxval != 255) throw IoError("read_pgm: expected maxval 255 in " + path);
  // Exactly one whitespace byte separates the header from the raster.
  img.pixels.resize(static_cast<std::size_t>(img.rows * img.cols));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("read_pgm: truncated raster in " + path);
  return img;
}

void emit_density_map(const std::function<Eigen::ArrayXd(const Tensor&)>& density, double lo0,
                      double hi0, double lo1, double hi1, Index res, const std::string& path) {
  if (res < 1 || res > 2048)
    throw std::invalid_argument("emit_density_map: resolution must be in [1, 2048], got " +
                                std::to_string(res));
  if (!(hi0 > lo0) || !(hi1 > lo1))
    throw std::invalid_argument("emit_density_map: empty box");
  const double w0 = (hi0 - lo0) / static_cast<double>(res);
  const double w1 = (hi1 - lo1) / static_cast<double>(res);
  Eigen::ArrayXd img(res * res);
  // One callback batch per row keeps peak memory flat at large resolutions.
  for (Index r = 0; r < res; ++r) {
    const double y = hi1 - (static_cast<double>(r) + 0.5) * w1;
    Eigen::ArrayXd pts(res * 2);
    for (Index c = 0; c < res; ++c) {
      pts[2 * c] = lo0 + (static_cast<double>(c) + 0.5) * w0;
      pts[2 * c + 1] = y;
    }
    Eigen::ArrayXd row = density(Tensor(Shape{res, 2}, std::move(pts)));
    if (row.size() != res)
      throw std::invalid_argument("emit_density_map: density returned " +
                                  std::to_string(row.size()) + " values for " +
                                  std::to_string(res) + " points");
    img.segment(r * res, res) = row;
  }
  write_pgm(path, img, res, res);
}

}  // namespace led
