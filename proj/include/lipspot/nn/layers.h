// include/lipspot/nn/layers.h

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

#ifndef LIPSPOT_NN_LAYERS_H_
#define LIPSPOT_NN_LAYERS_H_

#include <cmath>
#include <string>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace nn {

// Fills a matrix with uniform draws from [-bound, +bound].
template <typename Real>
void InitUniform(Mat<Real>* m, Real bound, Rng* rng) {
  for (int j = 0; j < m->cols(); ++j)
    for (int i = 0; i < m->rows(); ++i)
      (*m)(i, j) = static_cast<Real>((2.0 * rng->Uniform() - 1.0) * bound);
}

// Affine map y = x W^T + b applied row-wise to a B x in matrix.  Forward
// calls with cache=true push their input on a stack; Backward pops, so a
// layer reused across time steps is backed off in exact reverse order.
template <typename Real>
class Linear {
 public:
  Linear(int in_dim, int out_dim, bool has_bias)
      : in_dim_(in_dim), out_dim_(out_dim), has_bias_(has_bias) {
    w_ = Mat<Real>::Zero(out_dim, in_dim);
    dw_ = Mat<Real>::Zero(out_dim, in_dim);
    if (has_bias_) {
      b_ = Mat<Real>::Zero(out_dim, 1);
      db_ = Mat<Real>::Zero(out_dim, 1);
    }
  }

  void Init(Rng* rng) {
    Real bound = Real(1) / std::sqrt(Real(in_dim_));
    InitUniform(&w_, bound, rng);
    if (has_bias_) InitUniform(&b_, bound, rng);
  }

  void Register(ParamRegistry<Real>* reg, const std::string& prefix) {
    reg->Add(prefix + ".w", &w_, &dw_);
    if (has_bias_) reg->Add(prefix + ".b", &b_, &db_);
  }

  Mat<Real> Forward(const Mat<Real>& x, bool cache = true) {
    if (cache) cache_.push_back(x);
    Mat<Real> y = x * w_.transpose();
    if (has_bias_) y.rowwise() += b_.col(0).transpose();
    return y;
  }

  Mat<Real> Backward(const Mat<Real>& dy) {
    if (cache_.empty())
      throw std::logic_error("Linear::Backward called with empty cache");
    const Mat<Real>& x = cache_.back();
    dw_.noalias() += dy.transpose() * x;
    if (has_bias_) db_.col(0) += dy.colwise().sum().transpose();
    Mat<Real> dx = dy * w_;
    cache_.pop_back();
    return dx;
  }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Mat<Real>& weight() { return w_; }
  Mat<Real>& bias() { return b_; }

 private:
  int in_dim_, out_dim_;
  bool has_bias_;
  Mat<Real> w_, b_, dw_, db_;
  std::vector<Mat<Real>> cache_;
};

// Element-wise max(x, slope * x), cached on a stack like Linear.
template <typename Real>
class LeakyRelu {
 public:
  explicit LeakyRelu(Real slope) : slope_(slope) {}

  Mat<Real> Forward(const Mat<Real>& x, bool cache = true) {
    if (cache) cache_.push_back(x);
    return x.unaryExpr([this](Real v) { return v >= Real(0) ? v : slope_ * v; });
  }

  Mat<Real> Backward(const Mat<Real>& dy) {
    if (cache_.empty())
      throw std::logic_error("LeakyRelu::Backward called with empty cache");
    const Mat<Real>& x = cache_.back();
    Mat<Real> dx =
        dy.array() *
        x.unaryExpr([this](Real v) { return v >= Real(0) ? Real(1) : slope_; })
            .array();
    cache_.pop_back();
    return dx;
  }

 private:
  Real slope_;
  std::vector<Mat<Real>> cache_;
};

// Index-lookup embedding.  Rows of table_ are the symbol vectors; Forward
// gathers, Backward scatter-adds.
template <typename Real>
class Embedding {
 public:
  Embedding(int table_size, int dim) : table_size_(table_size), dim_(dim) {
    table_ = Mat<Real>::Zero(table_size, dim);
    dtable_ = Mat<Real>::Zero(table_size, dim);
  }

  void Init(Rng* rng) {
    Real bound = Real(1) / std::sqrt(Real(dim_));
    InitUniform(&table_, bound, rng);
  }

  void Register(ParamRegistry<Real>* reg, const std::string& prefix) {
    reg->Add(prefix + ".table", &table_, &dtable_);
  }

  Mat<Real> Forward(const std::vector<int>& indices, bool cache = true) {
    Mat<Real> out(indices.size(), dim_);
    for (size_t i = 0; i < indices.size(); ++i) {
      int idx = indices[i];
      if (idx < 0 || idx >= table_size_)
        throw std::out_of_range(StrCat("embedding index ", idx,
                                       " outside table of size ", table_size_));
      out.row(i) = table_.row(idx);
    }
    if (cache) cache_.push_back(indices);
    return out;
  }

  void Backward(const Mat<Real>& dy) {
    if (cache_.empty())
      throw std::logic_error("Embedding::Backward called with empty cache");
    const std::vector<int>& indices = cache_.back();
    for (size_t i = 0; i < indices.size(); ++i)
      dtable_.row(indices[i]) += dy.row(i);
    cache_.pop_back();
  }

  int table_size() const { return table_size_; }
  int dim() const { return dim_; }
  Mat<Real>& table() { return table_; }

 private:
  int table_size_, dim_;
  Mat<Real> table_, dtable_;
  std::vector<std::vector<int>> cache_;
};

// Batch normalization over a masked sequence batch: statistics are taken
// across every valid (row, step) position, so padded steps influence
// neither the normalization nor the running averages.  gamma/beta are
// trainable; the running mean/variance pair is registered state-only.
template <typename Real>
class BatchNormSeq {
 public:
  explicit BatchNormSeq(int dim, Real momentum = Real(0.1),
                        Real eps = Real(1e-5))
      : dim_(dim), momentum_(momentum), eps_(eps) {
    gamma_ = Mat<Real>::Ones(dim, 1);
    beta_ = Mat<Real>::Zero(dim, 1);
    dgamma_ = Mat<Real>::Zero(dim, 1);
    dbeta_ = Mat<Real>::Zero(dim, 1);
    running_mean_ = Mat<Real>::Zero(dim, 1);
    running_var_ = Mat<Real>::Ones(dim, 1);
  }

  void Register(ParamRegistry<Real>* reg, const std::string& prefix) {
    reg->Add(prefix + ".gamma", &gamma_, &dgamma_);
    reg->Add(prefix + ".beta", &beta_, &dbeta_);
    reg->AddState(prefix + ".running_mean", &running_mean_);
    reg->AddState(prefix + ".running_var", &running_var_);
  }

  SeqBatch<Real> Forward(const SeqBatch<Real>& x, ForwardMode mode) {
    int t_steps = x.num_steps();
    Vec<Real> mean(dim_), var(dim_);
    if (mode.training) {
      Real count = x.mask.sum();
      if (count <= Real(0))
        throw std::invalid_argument("batch norm over an all-padding batch");
      mean.setZero();
      for (int t = 0; t < t_steps; ++t)
        mean += (x.steps[t].array().colwise() * x.mask.col(t).array())
                    .colwise()
                    .sum()
                    .transpose()
                    .matrix();
      mean /= count;
      var.setZero();
      for (int t = 0; t < t_steps; ++t) {
        Mat<Real> centered = x.steps[t].rowwise() - mean.transpose();
        var += (centered.array().square().colwise() * x.mask.col(t).array())
                   .colwise()
                   .sum()
                   .transpose()
                   .matrix();
      }
      var /= count;
      if (mode.update_stats) {
        running_mean_.col(0) =
            (Real(1) - momentum_) * running_mean_.col(0) + momentum_ * mean;
        running_var_.col(0) =
            (Real(1) - momentum_) * running_var_.col(0) + momentum_ * var;
      }
      count_ = count;
    } else {
      mean = running_mean_.col(0);
      var = running_var_.col(0);
    }
    inv_std_ = (var.array() + eps_).rsqrt();
    SeqBatch<Real> y = x;
    xhat_.steps.assign(t_steps, Mat<Real>());
    xhat_.mask = x.mask;
    xhat_.lengths = x.lengths;
    for (int t = 0; t < t_steps; ++t) {
      Mat<Real> centered = x.steps[t].rowwise() - mean.transpose();
      xhat_.steps[t] = centered.array().rowwise() * inv_std_.transpose().array();
      y.steps[t] = (xhat_.steps[t].array().rowwise() *
                    gamma_.col(0).transpose().array())
                       .rowwise() +
                   beta_.col(0).transpose().array();
    }
    training_used_ = mode.training;
    return y;
  }

  // Gradients at padded positions are zero: the loss cannot depend on padded
  // inputs because both the statistics and every downstream consumer mask
  // them out.
  SeqBatch<Real> Backward(const SeqBatch<Real>& dy) {
    int t_steps = dy.num_steps();
    SeqBatch<Real> dx = dy.ZerosLike();
    Vec<Real> sum_dxhat = Vec<Real>::Zero(dim_);
    Vec<Real> sum_dxhat_xhat = Vec<Real>::Zero(dim_);
    std::vector<Mat<Real>> dxhat(t_steps);
    for (int t = 0; t < t_steps; ++t) {
      Mat<Real> masked_dy =
          dy.steps[t].array().colwise() * dy.mask.col(t).array();
      dgamma_.col(0) +=
          (masked_dy.array() * xhat_.steps[t].array()).colwise().sum().matrix().transpose();
      dbeta_.col(0) += masked_dy.colwise().sum().transpose();
      dxhat[t] =
          masked_dy.array().rowwise() * gamma_.col(0).transpose().array();
      sum_dxhat += dxhat[t].colwise().sum().transpose();
      sum_dxhat_xhat +=
          (dxhat[t].array() * xhat_.steps[t].array()).colwise().sum().matrix().transpose();
    }
    if (!training_used_) {
      for (int t = 0; t < t_steps; ++t)
        dx.steps[t] = (dxhat[t].array().rowwise() * inv_std_.transpose().array())
                          .colwise() *
                      dy.mask.col(t).array();
      return dx;
    }
    Real n = count_;
    for (int t = 0; t < t_steps; ++t) {
      Mat<Real> core =
          dxhat[t].array().rowwise() * (inv_std_ * n).transpose().array();
      core.array().rowwise() -= (sum_dxhat.array() * inv_std_.array()).transpose();
      core -= (xhat_.steps[t].array().rowwise() *
               (sum_dxhat_xhat.array() * inv_std_.array()).transpose())
                  .matrix();
      dx.steps[t] = (core / n).array().colwise() * dy.mask.col(t).array();
    }
    return dx;
  }

 private:
  int dim_;
  Real momentum_, eps_;
  Mat<Real> gamma_, beta_, dgamma_, dbeta_;
  Mat<Real> running_mean_, running_var_;
  // Forward cache.
  SeqBatch<Real> xhat_;
  Vec<Real> inv_std_;
  Real count_ = 0;
  bool training_used_ = false;
};

// Sequence dropout: one Bernoulli(1-p)/(1-p) mask per (row, channel),
// applied identically at every time step, so a dropped channel is dropped
// for the whole sequence.
template <typename Real>
class SeqDropout {
 public:
  explicit SeqDropout(Real p) : p_(p) {}

  SeqBatch<Real> Forward(const SeqBatch<Real>& x, ForwardMode mode, Rng* rng) {
    if (!mode.training || p_ <= Real(0)) {
      active_ = false;
      return x;
    }
    active_ = true;
    Real keep = Real(1) - p_;
    mask_ = Mat<Real>(x.batch(), x.dim());
    for (int i = 0; i < mask_.rows(); ++i)
      for (int j = 0; j < mask_.cols(); ++j)
        mask_(i, j) = rng->Uniform() < keep ? Real(1) / keep : Real(0);
    SeqBatch<Real> y = x;
    for (auto& step : y.steps) step = step.cwiseProduct(mask_);
    return y;
  }

  SeqBatch<Real> Backward(const SeqBatch<Real>& dy) {
    if (!active_) return dy;
    SeqBatch<Real> dx = dy;
    for (auto& step : dx.steps) step = step.cwiseProduct(mask_);
    return dx;
  }

 private:
  Real p_;
  Mat<Real> mask_;
  bool active_ = false;
};

// Plain inverted dropout on a single B x D matrix.
template <typename Real>
class Dropout {
 public:
  explicit Dropout(Real p) : p_(p) {}

  Mat<Real> Forward(const Mat<Real>& x, ForwardMode mode, Rng* rng) {
    if (!mode.training || p_ <= Real(0)) {
      active_ = false;
      return x;
    }
    active_ = true;
    Real keep = Real(1) - p_;
    mask_ = Mat<Real>(x.rows(), x.cols());
    for (int i = 0; i < mask_.rows(); ++i)
      for (int j = 0; j < mask_.cols(); ++j)
        mask_(i, j) = rng->Uniform() < keep ? Real(1) / keep : Real(0);
    return x.cwiseProduct(mask_);
  }

  Mat<Real> Backward(const Mat<Real>& dy) {
    if (!active_) return dy;
    return dy.cwiseProduct(mask_);
  }

 private:
  Real p_;
  Mat<Real> mask_;
  bool active_ = false;
};

// Per-example binary cross-entropy from pre-sigmoid scores.  Posteriors are
// clamped into [eps, 1-eps] before the log so saturated scores yield a large
// finite loss instead of infinity; the gradient uses the exact (p - label)
// form, which is bounded anyway.
template <typename Real>
struct BceResult {
  Vec<Real> losses;   // per example
  Vec<Real> dlogits;  // d loss_i / d logit_i (unreduced)
  Vec<Real> p;        // sigmoid of the logits, unclamped
};

template <typename Real>
BceResult<Real> SigmoidBce(const Vec<Real>& logits, const Vec<Real>& labels,
                           Real eps = Real(1e-7)) {
  BceResult<Real> out;
  int n = static_cast<int>(logits.size());
  out.losses.resize(n);
  out.dlogits.resize(n);
  out.p.resize(n);
  for (int i = 0; i < n; ++i) {
    Real p = Sigmoid(logits[i]);
    out.p[i] = p;
    Real pc = std::min(Real(1) - eps, std::max(eps, p));
    out.losses[i] =
        -(labels[i] * std::log(pc) + (Real(1) - labels[i]) * std::log(Real(1) - pc));
    out.dlogits[i] = p - labels[i];
  }
  return out;
}

// Binary cross-entropy of a posterior that is already a probability.
template <typename Real>
Real BceFromPosterior(Real label, Real p, Real eps = Real(1e-7)) {
  Real pc = std::min(Real(1) - eps, std::max(eps, p));
  return -(label * std::log(pc) + (Real(1) - label) * std::log(Real(1) - pc));
}

// Row-wise softmax cross-entropy.  Rows with valid[i] == 0 contribute zero
// loss and zero gradient; dlogits is softmax(row) - onehot(target) for valid
// rows and is NOT scaled by any reduction weight (callers own that).
template <typename Real>
struct SoftmaxCeResult {
  Vec<Real> losses;   // per row
  Mat<Real> dlogits;  // per row, unreduced
};

template <typename Real>
SoftmaxCeResult<Real> SoftmaxCrossEntropy(const Mat<Real>& logits,
                                          const std::vector<int>& targets,
                                          const std::vector<char>& valid) {
  int n = static_cast<int>(logits.rows());
  int k = static_cast<int>(logits.cols());
  SoftmaxCeResult<Real> out;
  out.losses = Vec<Real>::Zero(n);
  out.dlogits = Mat<Real>::Zero(n, k);
  for (int i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    int target = targets[i];
    if (target < 0 || target >= k)
      throw std::out_of_range(StrCat("cross-entropy target ", target,
                                     " outside alphabet of size ", k));
    Real max = logits.row(i).maxCoeff();
    Vec<Real> shifted = (logits.row(i).array() - max).exp().transpose();
    Real z = shifted.sum();
    out.losses[i] = std::log(z) - (logits(i, target) - max);
    out.dlogits.row(i) = (shifted / z).transpose();
    out.dlogits(i, target) -= Real(1);
  }
  return out;
}

// Row-wise softmax probabilities (numerically shifted by the row max).
template <typename Real>
Mat<Real> Softmax(const Mat<Real>& logits) {
  Mat<Real> out(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    Real max = logits.row(i).maxCoeff();
    Eigen::Array<Real, 1, Eigen::Dynamic> e = (logits.row(i).array() - max).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

}  // namespace nn
}  // namespace lipspot

#endif  // LIPSPOT_NN_LAYERS_H_
