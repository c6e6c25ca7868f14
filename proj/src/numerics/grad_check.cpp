// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::numerics {

namespace {

double evaluate(const LossBuilder& build) {
  Tape tape;
  const Var loss = build(tape);
  return loss.scalar();
}

GradCheckReport failed(std::string where) {
  GradCheckReport r;
  r.finite = false;
  r.max_relative_error = std::numeric_limits<double>::infinity();
  r.worst_parameter = std::move(where);
  return r;
}

}  // namespace

GradCheckReport grad_check_central_diff(const LossBuilder& build,
                                        std::span<Parameter* const> params, double h,
                                        double analytic_scale) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ConfigurationError("grad_check: h must lie in [1e-7, 1e-3]");

  for (Parameter* p : params) p->grad = DenseMatrix(p->value.rows(), p->value.cols());
  std::vector<DenseMatrix> analytic;
  {
    Tape tape;
    const Var loss = build(tape);
    if (!std::isfinite(loss.scalar())) return failed("<analytic pass>");
    tape.backprop(loss);
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double& slot = p.value.values()[i];
      const double saved = slot;
      slot = saved + h;
      const double plus = evaluate(build);
      slot = saved - h;
      const double minus = evaluate(build);
      slot = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) return failed(p.name);

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k].values()[i] * analytic_scale;
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (err > report.max_relative_error || report.entries_checked == 0) {
        report.max_relative_error = err;
        report.worst_parameter = p.name;
        report.worst_index = i;
      }
      ++report.entries_checked;
    }
  }
  return report;
}

}  // namespace streamrope::numerics
