// include/lipspot/nn/param.h

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

#ifndef LIPSPOT_NN_PARAM_H_
#define LIPSPOT_NN_PARAM_H_

#include <string>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/nn/types.h"

namespace lipspot {
namespace nn {

// One named parameter tensor.  grad is null for state-only arrays (e.g.
// batch-norm running statistics), which are persisted in checkpoints but
// never touched by the optimizer.
template <typename Real>
struct ParamRef {
  std::string name;
  Mat<Real>* value = nullptr;
  Mat<Real>* grad = nullptr;

  bool state_only() const { return grad == nullptr; }
};

// Flat, ordered view of every tensor a model owns.  Layers register their
// tensors under hierarchical dot-separated names; the optimizer, the
// checkpoint writer and the freezing logic all address parameters through
// this list.
template <typename Real>
class ParamRegistry {
 public:
  void Add(const std::string& name, Mat<Real>* value, Mat<Real>* grad) {
    CheckFresh(name);
    items_.push_back(ParamRef<Real>{name, value, grad});
  }

  void AddState(const std::string& name, Mat<Real>* value) {
    CheckFresh(name);
    items_.push_back(ParamRef<Real>{name, value, nullptr});
  }

  const std::vector<ParamRef<Real>>& items() const { return items_; }

  const ParamRef<Real>* Find(const std::string& name) const {
    for (const auto& item : items_)
      if (item.name == name) return &item;
    return nullptr;
  }

  void ZeroGrad() {
    for (auto& item : items_)
      if (item.grad != nullptr) item.grad->setZero();
  }

  // Total number of scalar entries across trainable tensors.
  int64_t NumTrainable() const {
    int64_t n = 0;
    for (const auto& item : items_)
      if (!item.state_only()) n += item.value->size();
    return n;
  }

 private:
  void CheckFresh(const std::string& name) const {
    if (Find(name) != nullptr)
      throw std::invalid_argument(StrCat("duplicate parameter name: ", name));
  }

  std::vector<ParamRef<Real>> items_;
};

// True if name falls under any of the given dot-terminated prefixes.
inline bool MatchesPrefix(const std::string& name,
                          const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes)
    if (name.compare(0, p.size(), p) == 0) return true;
  return false;
}

}  // namespace nn
}  // namespace lipspot

#endif  // LIPSPOT_NN_PARAM_H_
