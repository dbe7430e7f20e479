// include/lipspot/nn/types.h

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

#ifndef LIPSPOT_NN_TYPES_H_
#define LIPSPOT_NN_TYPES_H_

#include <Eigen/Dense>
#include <vector>

namespace lipspot {
namespace nn {

template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// A right-padded batch of sequences: one B x D matrix per time step plus a
// B x T validity mask.  Reversed() flips the step order (and the mask with
// it), which turns right padding into left padding; the masked recurrences
// below hold their state across invalid steps, so both layouts run through
// the same code.
template <typename Real>
struct SeqBatch {
  std::vector<Mat<Real>> steps;  // T entries of B x D
  Mat<Real> mask;                // B x T, entries in {0,1}
  std::vector<int> lengths;      // valid steps per row (right-padded layout)

  int batch() const { return steps.empty() ? 0 : static_cast<int>(steps[0].rows()); }
  int dim() const { return steps.empty() ? 0 : static_cast<int>(steps[0].cols()); }
  int num_steps() const { return static_cast<int>(steps.size()); }

  Vec<Real> StepMask(int t) const { return mask.col(t); }

  SeqBatch Reversed() const {
    SeqBatch out;
    out.lengths = lengths;
    out.steps.assign(steps.rbegin(), steps.rend());
    out.mask = mask.rowwise().reverse();
    return out;
  }

  // Zero-filled batch with the same layout.
  SeqBatch ZerosLike() const {
    SeqBatch out;
    out.lengths = lengths;
    out.mask = mask;
    out.steps.reserve(steps.size());
    for (const auto& s : steps)
      out.steps.push_back(Mat<Real>::Zero(s.rows(), s.cols()));
    return out;
  }
};

// Builds a right-padded batch from per-sequence (T_i x D) matrices.
template <typename Real>
SeqBatch<Real> PackSequences(const std::vector<Mat<Real>>& seqs) {
  SeqBatch<Real> out;
  int batch = static_cast<int>(seqs.size());
  int max_t = 0;
  int dim = 0;
  for (const auto& s : seqs) {
    max_t = std::max(max_t, static_cast<int>(s.rows()));
    dim = static_cast<int>(s.cols());
  }
  out.lengths.resize(batch);
  out.mask = Mat<Real>::Zero(batch, max_t);
  out.steps.assign(max_t, Mat<Real>::Zero(batch, dim));
  for (int b = 0; b < batch; ++b) {
    int len = static_cast<int>(seqs[b].rows());
    out.lengths[b] = len;
    for (int t = 0; t < len; ++t) {
      out.steps[t].row(b) = seqs[b].row(t);
      out.mask(b, t) = Real(1);
    }
  }
  return out;
}

struct ForwardMode {
  bool training = false;
  bool update_stats = false;  // batch-norm running statistics
};

inline constexpr ForwardMode kEvalMode{false, false};
inline constexpr ForwardMode kTrainMode{true, true};
inline constexpr ForwardMode kGradCheckMode{true, false};

template <typename Real>
Real Sigmoid(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

}  // namespace nn
}  // namespace lipspot

#endif  // LIPSPOT_NN_TYPES_H_
