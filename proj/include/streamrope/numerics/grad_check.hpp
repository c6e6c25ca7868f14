// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "streamrope/numerics/tape.hpp"

namespace streamrope::numerics {

// Builds a scalar loss on a fresh tape. Called once for the analytic pass and
// twice per checked parameter entry.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  // max over entries of |analytic - numeric| / max(1, |numeric|)
  double max_relative_error = 0.0;
  bool finite = true;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t entries_checked = 0;
};

// Central differences against reverse mode. A non-finite loss is reported via
// `finite = false` and an infinite error rather than thrown. `analytic_scale`
// multiplies the reverse-mode gradient before comparison; it exists so the
// checker's own sensitivity can be tested.
GradCheckReport grad_check_central_diff(const LossBuilder& build,
                                        std::span<Parameter* const> params, double h = 1e-5,
                                        double analytic_scale = 1.0);

}  // namespace streamrope::numerics
