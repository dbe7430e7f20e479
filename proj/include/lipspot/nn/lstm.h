// include/lipspot/nn/lstm.h

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

#ifndef LIPSPOT_NN_LSTM_H_
#define LIPSPOT_NN_LSTM_H_

#include <string>
#include <vector>

#include "lipspot/nn/layers.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace nn {

// Single-direction LSTM over a masked sequence batch.  Gates are packed
// [input; forget; cell; output] along the 4H axis.  On a padded step
// (mask 0) the cell and hidden state are carried through unchanged, so the
// final state of every row equals its state after its last valid step and
// the backward pass routes gradients straight across the padding.
//
// Callers wanting the reverse direction feed x.Reversed(); the recurrence
// itself always scans steps left to right.
template <typename Real>
class Lstm {
 public:
  Lstm(int input_dim, int hidden_dim)
      : input_dim_(input_dim), hidden_dim_(hidden_dim) {
    w_ih_ = Mat<Real>::Zero(4 * hidden_dim, input_dim);
    w_hh_ = Mat<Real>::Zero(4 * hidden_dim, hidden_dim);
    b_ = Mat<Real>::Zero(4 * hidden_dim, 1);
    dw_ih_ = Mat<Real>::Zero(4 * hidden_dim, input_dim);
    dw_hh_ = Mat<Real>::Zero(4 * hidden_dim, hidden_dim);
    db_ = Mat<Real>::Zero(4 * hidden_dim, 1);
  }

  void Init(Rng* rng) {
    Real bound = Real(1) / std::sqrt(Real(hidden_dim_));
    InitUniform(&w_ih_, bound, rng);
    InitUniform(&w_hh_, bound, rng);
    InitUniform(&b_, bound, rng);
  }

  void Register(ParamRegistry<Real>* reg, const std::string& prefix) {
    reg->Add(prefix + ".w_ih", &w_ih_, &dw_ih_);
    reg->Add(prefix + ".w_hh", &w_hh_, &dw_hh_);
    reg->Add(prefix + ".b", &b_, &db_);
  }

  // c0/h0 default to zeros.  With cache=false only the running state is
  // kept (forward-only inference); Backward then must not be called.
  SeqBatch<Real> Forward(const SeqBatch<Real>& x, const Mat<Real>* c0 = nullptr,
                         const Mat<Real>* h0 = nullptr, bool cache = true) {
    int t_steps = x.num_steps();
    int batch = x.batch();
    if (t_steps == 0)
      throw std::invalid_argument("LSTM forward over an empty sequence batch");
    c0_ = c0 != nullptr ? *c0 : Mat<Real>::Zero(batch, hidden_dim_);
    h0_ = h0 != nullptr ? *h0 : Mat<Real>::Zero(batch, hidden_dim_);
    cached_ = cache;
    if (cache) {
      xs_ = x;
      gates_.assign(t_steps, Mat<Real>());
      cand_c_.assign(t_steps, Mat<Real>());
      cells_.assign(t_steps, Mat<Real>());
    }
    SeqBatch<Real> out;
    out.mask = x.mask;
    out.lengths = x.lengths;
    out.steps.assign(t_steps, Mat<Real>());
    Mat<Real> c_prev = c0_;
    Mat<Real> h_prev = h0_;
    const int h = hidden_dim_;
    for (int t = 0; t < t_steps; ++t) {
      Mat<Real> a = x.steps[t] * w_ih_.transpose() + h_prev * w_hh_.transpose();
      a.rowwise() += b_.col(0).transpose();
      Mat<Real> gates(batch, 4 * h);
      gates.middleCols(0, h) =
          a.middleCols(0, h).unaryExpr([](Real v) { return Sigmoid(v); });
      gates.middleCols(h, h) =
          a.middleCols(h, h).unaryExpr([](Real v) { return Sigmoid(v); });
      gates.middleCols(2 * h, h) = a.middleCols(2 * h, h).array().tanh();
      gates.middleCols(3 * h, h) =
          a.middleCols(3 * h, h).unaryExpr([](Real v) { return Sigmoid(v); });
      Mat<Real> c_cand = gates.middleCols(h, h).cwiseProduct(c_prev) +
                         gates.middleCols(0, h).cwiseProduct(gates.middleCols(2 * h, h));
      Mat<Real> h_cand =
          gates.middleCols(3 * h, h).cwiseProduct(c_cand.array().tanh().matrix());
      Vec<Real> m = x.mask.col(t);
      Mat<Real> c_new = c_cand.array().colwise() * m.array();
      c_new += (c_prev.array().colwise() * (Real(1) - m.array())).matrix();
      Mat<Real> h_new = h_cand.array().colwise() * m.array();
      h_new += (h_prev.array().colwise() * (Real(1) - m.array())).matrix();
      if (cache) {
        gates_[t] = std::move(gates);
        cand_c_[t] = std::move(c_cand);
        cells_[t] = c_new;
      }
      out.steps[t] = h_new;
      c_prev = std::move(c_new);
      h_prev = std::move(h_new);
    }
    c_final_ = c_prev;
    h_final_ = h_prev;
    if (cache) hs_ = out;
    return out;
  }

  // State after the last step; with mask-hold this is each row's state at
  // its final valid step.
  const Mat<Real>& final_c() const { return c_final_; }
  const Mat<Real>& final_h() const { return h_final_; }

  // Injects external gradient w.r.t. the final (c, h) state, consumed by the
  // next Backward call.
  void AddFinalStateGrad(const Mat<Real>& dc, const Mat<Real>& dh) {
    if (!has_pending_final_) {
      pending_final_dc_ = dc;
      pending_final_dh_ = dh;
      has_pending_final_ = true;
    } else {
      pending_final_dc_ += dc;
      pending_final_dh_ += dh;
    }
  }

  // dh_out holds gradients w.r.t. the per-step outputs.  Returns gradients
  // w.r.t. the inputs; optionally fills gradients w.r.t. the initial state.
  SeqBatch<Real> Backward(const SeqBatch<Real>& dh_out, Mat<Real>* dc0 = nullptr,
                          Mat<Real>* dh0 = nullptr) {
    if (!cached_)
      throw std::logic_error("LSTM backward without a cached forward pass");
    int t_steps = static_cast<int>(gates_.size());
    int batch = static_cast<int>(c0_.rows());
    const int h = hidden_dim_;
    Mat<Real> dc_acc = Mat<Real>::Zero(batch, h);
    Mat<Real> dh_acc = Mat<Real>::Zero(batch, h);
    if (has_pending_final_) {
      dc_acc = pending_final_dc_;
      dh_acc = pending_final_dh_;
      has_pending_final_ = false;
    }
    SeqBatch<Real> dx = xs_.ZerosLike();
    for (int t = t_steps - 1; t >= 0; --t) {
      dh_acc += dh_out.steps[t];
      Vec<Real> m = xs_.mask.col(t);
      const Mat<Real>& c_prev = t > 0 ? cells_[t - 1] : c0_;
      const Mat<Real>& h_prev = t > 0 ? hs_.steps[t - 1] : h0_;
      auto gate_i = gates_[t].middleCols(0, h);
      auto gate_f = gates_[t].middleCols(h, h);
      auto gate_g = gates_[t].middleCols(2 * h, h);
      auto gate_o = gates_[t].middleCols(3 * h, h);
      Mat<Real> dh_cand = dh_acc.array().colwise() * m.array();
      Mat<Real> dc_cand = dc_acc.array().colwise() * m.array();
      Mat<Real> dh_pass = dh_acc.array().colwise() * (Real(1) - m.array());
      Mat<Real> dc_pass = dc_acc.array().colwise() * (Real(1) - m.array());
      Mat<Real> tanh_c = cand_c_[t].array().tanh();
      Mat<Real> da(batch, 4 * h);
      // Output gate.
      Mat<Real> d_o = dh_cand.cwiseProduct(tanh_c);
      dc_cand += dh_cand.cwiseProduct(gate_o)
                     .cwiseProduct((Real(1) - tanh_c.array().square()).matrix());
      // Cell path.
      Mat<Real> d_i = dc_cand.cwiseProduct(gate_g);
      Mat<Real> d_f = dc_cand.cwiseProduct(c_prev);
      Mat<Real> d_g = dc_cand.cwiseProduct(gate_i);
      Mat<Real> dc_prev_gate = dc_cand.cwiseProduct(gate_f);
      da.middleCols(0, h) =
          d_i.cwiseProduct(gate_i.cwiseProduct((Real(1) - gate_i.array()).matrix()));
      da.middleCols(h, h) =
          d_f.cwiseProduct(gate_f.cwiseProduct((Real(1) - gate_f.array()).matrix()));
      da.middleCols(2 * h, h) =
          d_g.cwiseProduct((Real(1) - gate_g.array().square()).matrix());
      da.middleCols(3 * h, h) =
          d_o.cwiseProduct(gate_o.cwiseProduct((Real(1) - gate_o.array()).matrix()));
      dw_ih_.noalias() += da.transpose() * xs_.steps[t];
      dw_hh_.noalias() += da.transpose() * h_prev;
      db_.col(0) += da.colwise().sum().transpose();
      dx.steps[t] = da * w_ih_;
      dh_acc = dh_pass + da * w_hh_;
      dc_acc = dc_pass + dc_prev_gate;
    }
    if (dc0 != nullptr) *dc0 = dc_acc;
    if (dh0 != nullptr) *dh0 = dh_acc;
    cached_ = false;
    return dx;
  }

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }

 private:
  int input_dim_, hidden_dim_;
  Mat<Real> w_ih_, w_hh_, b_;
  Mat<Real> dw_ih_, dw_hh_, db_;
  // Forward cache.
  SeqBatch<Real> xs_, hs_;
  std::vector<Mat<Real>> gates_, cand_c_, cells_;
  Mat<Real> c0_, h0_, c_final_, h_final_;
  bool cached_ = false;
  Mat<Real> pending_final_dc_, pending_final_dh_;
  bool has_pending_final_ = false;
};

// Bidirectional LSTM whose per-step [forward; backward] concatenation is
// mapped to out_dim by a shared bias-free projection.
template <typename Real>
class BilstmProj {
 public:
  BilstmProj(int input_dim, int hidden_dim, int out_dim)
      : fwd_(input_dim, hidden_dim),
        bwd_(input_dim, hidden_dim),
        proj_(2 * hidden_dim, out_dim, /*has_bias=*/false) {}

  void Init(Rng* rng) {
    fwd_.Init(rng);
    bwd_.Init(rng);
    proj_.Init(rng);
  }

  void Register(ParamRegistry<Real>* reg, const std::string& prefix) {
    fwd_.Register(reg, prefix + ".fwd");
    bwd_.Register(reg, prefix + ".bwd");
    proj_.Register(reg, prefix + ".proj");
  }

  SeqBatch<Real> Forward(const SeqBatch<Real>& x, bool cache = true) {
    int t_steps = x.num_steps();
    int h = fwd_.hidden_dim();
    SeqBatch<Real> hf = fwd_.Forward(x, nullptr, nullptr, cache);
    SeqBatch<Real> hb_rev = bwd_.Forward(x.Reversed(), nullptr, nullptr, cache);
    SeqBatch<Real> hb = hb_rev.Reversed();
    SeqBatch<Real> y;
    y.mask = x.mask;
    y.lengths = x.lengths;
    y.steps.assign(t_steps, Mat<Real>());
    for (int t = 0; t < t_steps; ++t) {
      Mat<Real> cat(x.batch(), 2 * h);
      cat.leftCols(h) = hf.steps[t];
      cat.rightCols(h) = hb.steps[t];
      y.steps[t] = proj_.Forward(cat, cache);
    }
    return y;
  }

  SeqBatch<Real> Backward(const SeqBatch<Real>& dy) {
    int t_steps = dy.num_steps();
    int h = fwd_.hidden_dim();
    SeqBatch<Real> dhf = dy.ZerosLike();
    SeqBatch<Real> dhb = dy.ZerosLike();
    // The shared projection caches one input per step; pop in reverse order.
    for (int t = t_steps - 1; t >= 0; --t) {
      Mat<Real> dcat = proj_.Backward(dy.steps[t]);
      dhf.steps[t] = dcat.leftCols(h);
      dhb.steps[t] = dcat.rightCols(h);
    }
    SeqBatch<Real> dxf = fwd_.Backward(dhf);
    SeqBatch<Real> dxb_rev = bwd_.Backward(dhb.Reversed());
    SeqBatch<Real> dxb = dxb_rev.Reversed();
    SeqBatch<Real> dx = dxf;
    for (int t = 0; t < t_steps; ++t) dx.steps[t] += dxb.steps[t];
    return dx;
  }

  int out_dim() const { return proj_.out_dim(); }

 private:
  Lstm<Real> fwd_, bwd_;
  Linear<Real> proj_;
};

}  // namespace nn
}  // namespace lipspot

#endif  // LIPSPOT_NN_LSTM_H_
