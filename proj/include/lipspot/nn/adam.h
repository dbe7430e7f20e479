// include/lipspot/nn/adam.h

// Copyright 2026  The lipspot authors

// See ../../../COPYING for clarification regarding multiple authors
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

#ifndef LIPSPOT_NN_ADAM_H_
#define LIPSPOT_NN_ADAM_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"

namespace lipspot {
namespace nn {

// Adam with the usual defaults.  Parameters whose names fall under a frozen
// prefix are skipped entirely for that step: no value update and no moment
// update, so a freeze leaves both the weights and the optimizer state
// bit-identical.  Moments are exposed by name for checkpointing.
template <typename Real>
class AdamOptimizer {
 public:
  struct Moments {
    Mat<Real> m, v;
  };

  explicit AdamOptimizer(Real beta1 = Real(0.9), Real beta2 = Real(0.999),
                         Real eps = Real(1e-8))
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(const ParamRegistry<Real>& params, Real lr,
            const std::vector<std::string>& frozen_prefixes = {}) {
    ++step_;
    Real bc1 = Real(1) - std::pow(beta1_, Real(step_));
    Real bc2 = Real(1) - std::pow(beta2_, Real(step_));
    for (const auto& item : params.items()) {
      if (item.state_only()) continue;
      if (MatchesPrefix(item.name, frozen_prefixes)) continue;
      Moments& mom = slots_[item.name];
      if (mom.m.size() == 0) {
        mom.m = Mat<Real>::Zero(item.value->rows(), item.value->cols());
        mom.v = Mat<Real>::Zero(item.value->rows(), item.value->cols());
      }
      const Mat<Real>& g = *item.grad;
      mom.m = beta1_ * mom.m + (Real(1) - beta1_) * g;
      mom.v = beta2_ * mom.v + (Real(1) - beta2_) * g.cwiseProduct(g);
      Mat<Real> m_hat = mom.m / bc1;
      Mat<Real> v_hat = mom.v / bc2;
      item.value->array() -=
          lr * m_hat.array() / (v_hat.array().sqrt() + eps_);
    }
  }

  int64_t step() const { return step_; }
  void set_step(int64_t s) { step_ = s; }

  std::map<std::string, Moments>& slots() { return slots_; }
  const std::map<std::string, Moments>& slots() const { return slots_; }

 private:
  Real beta1_, beta2_, eps_;
  int64_t step_ = 0;
  std::map<std::string, Moments> slots_;
};

}  // namespace nn
}  // namespace lipspot

#endif  // LIPSPOT_NN_ADAM_H_
