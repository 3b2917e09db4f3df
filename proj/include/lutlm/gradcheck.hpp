// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lutlm/tensor.hpp"

namespace lutlm {

// Verification harness: compares analytic gradients against central finite
// differences. 64-bit only; the tolerances involved are unreachable in
// 32-bit arithmetic.

struct FdReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Index worst_row = 0;
  Index worst_col = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

struct FdParam {
  std::string name;
  Mat<double>* value;  // mutated in place during probing, restored afterwards
};

// `loss` re-evaluates the scalar objective from the current parameter values;
// `analytic` holds one gradient per parameter, same shapes. Returns the max
// over all coordinates of |analytic - central| / max(|analytic|, |central|, 1e-8).
inline FdReport finite_difference_check(const std::function<double()>& loss,
                                        const std::vector<FdParam>& params,
                                        const std::vector<Mat<double>>& analytic,
                                        double step) {
  if (step < 1e-7 || step > 1e-4) {
    throw NumericError("finite_difference_check: step must lie in [1e-7, 1e-4]");
  }
  if (analytic.size() != params.size()) {
    throw NumericError("finite_difference_check: gradient count mismatch");
  }
  FdReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Mat<double>& theta = *params[p].value;
    if (theta.rows() != analytic[p].rows() || theta.cols() != analytic[p].cols()) {
      throw ShapeError("finite_difference_check: gradient shape mismatch for " + params[p].name);
    }
    for (Index i = 0; i < theta.rows(); ++i) {
      for (Index j = 0; j < theta.cols(); ++j) {
        const double saved = theta(i, j);
        theta(i, j) = saved + step;
        const double up = loss();
        theta(i, j) = saved - step;
        const double down = loss();
        theta(i, j) = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          throw NumericError("finite_difference_check: non-finite objective while probing " +
                             params[p].name);
        }
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[p](i, j);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_parameter = params[p].name;
          report.worst_row = i;
          report.worst_col = j;
          report.analytic_at_worst = a;
          report.numeric_at_worst = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace lutlm
