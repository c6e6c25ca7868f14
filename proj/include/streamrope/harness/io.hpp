// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "streamrope/harness/config.hpp"
#include "streamrope/harness/evaluation.hpp"
#include "streamrope/harness/training.hpp"
#include "streamrope/numerics/tape.hpp"

namespace streamrope::harness {

inline constexpr std::string_view kMetricsHeader =
    "variant,seed,center_mae,velocity_mae,precision,recall,matches,predictions,ground_truth";
inline constexpr std::string_view kTrainingLogHeader = "epoch,mean_loss,lr";

struct MetricsRow {
  std::string variant;
  std::string seed;  // run seed, or "mean"
  Metrics metrics;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_training_log(std::ostream& out, const std::vector<EpochRecord>& log);

// One "parameter <name> <rows> <cols>" line per parameter followed by its
// rows, values printed so they parse back exactly.
void write_parameters(std::ostream& out, const numerics::ParameterStore& store);
numerics::ParameterStore read_parameters(std::istream& in);

// code_version, command, every resolved setting, then `extra`, as
// `key = value` lines.
void write_manifest(std::ostream& out, const RunConfig& config, std::string_view command,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace streamrope::harness
