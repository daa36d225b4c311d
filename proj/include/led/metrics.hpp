// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "led/tensor.hpp"

namespace led {

/// One training-log line. `val_nll_is` is NaN on epochs without an evaluation
/// pass; `wall_seconds` is cumulative wall time since the start of the run
/// (resumes continue the count) and is the one column exempt from determinism
/// guarantees.
struct MetricsRow {
  long epoch = 0;
  double elbo = 0.0;
  double reconstruction = 0.0;
  double prior_term = 0.0;
  double entropy_term = 0.0;
  double val_nll_is = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,elbo,reconstruction,prior_term,entropy_term,val_nll_is,wall_seconds";

/// Appends rows to a CSV file, writing the header when truncating or creating.
/// Each append re-opens the file so completed rows survive a crash. Values are
/// written with %.17g ('.' decimal), so doubles round-trip exactly.
class MetricsWriter {
 public:
  /// truncate=true starts a fresh file; truncate=false appends and requires an
  /// existing file with the expected header.
  MetricsWriter(std::string path, bool truncate);

  /// Throws std::invalid_argument unless elbo equals the sum of the three
  /// terms within 1e-9.
  void append(const MetricsRow& row);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Strict reader: validates the header and field count, parses %.17g doubles
/// back exactly. Errors name the file and line.
std::vector<MetricsRow> read_metrics(const std::string& path);

/// Rewrites the file to the header plus exactly `rows` (resume truncation).
void rewrite_metrics(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace led
