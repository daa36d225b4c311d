// SPDX-License-Identifier: Apache-2.0
#include "led/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "led/pgm.hpp"  // IoError

namespace led {

namespace {

std::string format_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.epoch, r.elbo,
                r.reconstruction, r.prior_term, r.entropy_term, r.val_nll_is, r.wall_seconds);
  return buf;
}

void check_identity(const MetricsRow& r) {
  const double sum = r.reconstruction + r.prior_term + r.entropy_term;
  if (!(std::abs(r.elbo - sum) <= 1e-9))
    throw std::invalid_argument("metrics: elbo " + std::to_string(r.elbo) +
                                " does not equal reconstruction + prior_term + entropy_term = " +
                                std::to_string(sum) + " within 1e-9 (epoch " +
                                std::to_string(r.epoch) + ")");
}

}  // namespace

MetricsWriter::MetricsWriter(std::string path, bool truncate) : path_(std::move(path)) {
  if (truncate) {
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw IoError("metrics: cannot open " + path_);
    out << kMetricsHeader << '\n';
    if (!out) throw IoError("metrics: write failed: " + path_);
  } else {
    std::ifstream in(path_);
    if (!in) throw IoError("metrics: cannot append, missing file " + path_);
    std::string header;
    std::getline(in, header);
    if (header != kMetricsHeader)
      throw IoError("metrics: unexpected header in " + path_ + ": '" + header + "'");
  }
}

void MetricsWriter::append(const MetricsRow& row) {
  check_identity(row);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("metrics: cannot open " + path_);
  out << format_row(row) << '\n';
  if (!out) throw IoError("metrics: write failed: " + path_);
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("metrics: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw IoError("metrics: unexpected header in " + path + ": '" + line + "'");
  std::vector<MetricsRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == EOF) break;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw IoError("metrics: expected 7 fields at " + path + ":" + std::to_string(line_no) +
                    ", got " + std::to_string(fields.size()));
    MetricsRow r;
    try {
      std::size_t pos = 0;
      r.epoch = std::stol(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
      double* dst[6] = {&r.elbo, &r.reconstruction, &r.prior_term,
                        &r.entropy_term, &r.val_nll_is, &r.wall_seconds};
      for (int i = 0; i < 6; ++i) {
        *dst[i] = std::stod(fields[static_cast<std::size_t>(i) + 1], &pos);
        if (pos != fields[static_cast<std::size_t>(i) + 1].size())
          throw std::invalid_argument(fields[static_cast<std::size_t>(i) + 1]);
      }
    } catch (const std::exception&) {
      throw IoError("metrics: malformed number at " + path + ":" + std::to_string(line_no));
    }
    rows.push_back(r);
  }
  return rows;
}

void rewrite_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("metrics: cannot open " + path);
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    check_identity(r);
    out << format_row(r) << '\n';
  }
  if (!out) throw IoError("metrics: write failed: " + path);
}

}  // namespace led
