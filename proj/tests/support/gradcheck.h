// tests/support/gradcheck.h

// Copyright 2026  The lipspot authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LIPSPOT_TESTS_SUPPORT_GRADCHECK_H_
#define LIPSPOT_TESTS_SUPPORT_GRADCHECK_H_

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "lipspot/nn/param.h"

namespace lipspot {
namespace testing {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_row = -1, worst_col = -1;
  double analytic = 0.0, numeric = 0.0;
  int64_t entries_checked = 0;
};

// Central-difference gradient check in double precision.
//
// loss_fn must run a deterministic forward pass and return the scalar loss
// without mutating any state (no dropout draws, no running-statistic
// updates).  backward_fn must zero the gradients, rerun forward + backward
// once, and leave d loss / d theta in the registry's grad buffers.
//
// The relative error per entry is |a - n| / max(1, |a|, |n|), so tiny
// gradients are compared absolutely.
inline GradCheckReport CheckGradients(
    const nn::ParamRegistry<double>& reg,
    const std::function<double()>& loss_fn,
    const std::function<void()>& backward_fn, double h = 1e-5) {
  GradCheckReport report;
  backward_fn();
  // Snapshot the analytic gradients before perturbation runs overwrite them.
  std::map<std::string, nn::Mat<double>> analytic;
  for (const auto& item : reg.items())
    if (!item.state_only()) analytic[item.name] = *item.grad;
  for (const auto& item : reg.items()) {
    if (item.state_only()) continue;
    nn::Mat<double>& value = *item.value;
    const nn::Mat<double>& a = analytic[item.name];
    for (int j = 0; j < value.cols(); ++j) {
      for (int i = 0; i < value.rows(); ++i) {
        double saved = value(i, j);
        value(i, j) = saved + h;
        double loss_plus = loss_fn();
        value(i, j) = saved - h;
        double loss_minus = loss_fn();
        value(i, j) = saved;
        double numeric = (loss_plus - loss_minus) / (2.0 * h);
        double a_ij = a(i, j);
        double denom = std::max({1.0, std::abs(a_ij), std::abs(numeric)});
        double rel = std::abs(a_ij - numeric) / denom;
        ++report.entries_checked;
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_param = item.name;
          report.worst_row = i;
          report.worst_col = j;
          report.analytic = a_ij;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace testing
}  // namespace lipspot

#endif  // LIPSPOT_TESTS_SUPPORT_GRADCHECK_H_
