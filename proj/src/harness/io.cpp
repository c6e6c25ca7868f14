// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::harness {

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    out << r.variant << ',' << r.seed << ',' << format_double(m.center_mae) << ','
        << format_double(m.velocity_mae) << ',' << format_double(m.precision) << ','
        << format_double(m.recall) << ',' << m.matches << ',' << m.predictions << ','
        << m.ground_truth << '\n';
  }
}

void write_training_log(std::ostream& out, const std::vector<EpochRecord>& log) {
  out << kTrainingLogHeader << '\n';
  for (const auto& e : log) {
    out << e.epoch << ',' << format_double(e.mean_loss) << ',' << format_double(e.lr) << '\n';
  }
}

void write_parameters(std::ostream& out, const numerics::ParameterStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    const numerics::Parameter& p = store[i];
    out << "parameter " << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      for (std::size_t c = 0; c < p.value.cols(); ++c) {
        out << (c ? " " : "") << format_double(p.value(r, c));
      }
      out << '\n';
    }
  }
}

numerics::ParameterStore read_parameters(std::istream& in) {
  numerics::ParameterStore store;
  std::string tag;
  while (in >> tag) {
    if (tag != "parameter") throw ConfigurationError("weights: expected 'parameter', got " + tag);
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(in >> name >> rows >> cols)) throw ConfigurationError("weights: malformed header");
    numerics::DenseMatrix value(rows, cols);
    for (double& v : value.values()) {
      std::string token;
      if (!(in >> token)) throw ConfigurationError("weights: truncated values for " + name);
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ConfigurationError("weights: bad value '" + token + "' in " + name);
      }
    }
    store.create(name, std::move(value));
  }
  return store;
}

void write_manifest(std::ostream& out, const RunConfig& config, std::string_view command,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  out << "code_version = " << code_version() << '\n';
  out << "command = " << command << '\n';
  for (const auto& [k, v] : resolved_settings(config)) out << k << " = " << v << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
}

}  // namespace streamrope::harness
