// include/lipspot/kwsnet.h

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

// The keyword-spotting network: a two-layer bidirectional recurrent stack
// whose second layer consumes each frame fused with the query embedding,
// topped by one of two interchangeable heads — a feed-forward classifier
// over the temporal sum, or a sequence classifier whose per-frame score
// track yields both the posterior (max) and a localization (argmax).  The
// video-embedding baseline collapses the clip to a single vector before
// meeting the query and serves as the non-localizing reference model.

#ifndef LIPSPOT_KWSNET_H_
#define LIPSPOT_KWSNET_H_

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/nn/layers.h"
#include "lipspot/nn/lstm.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace kws {

struct KwsNetConfig {
  int d_feat = 256;  // visual feature width entering layer 1
  int d_v = 256;     // recurrent width of both stacked layers
  int d_r = 128;     // keyword embedding width
  int d_s = 16;      // sequence-classifier recurrent width
  double dropout_p = 0.2;
  double lrelu_slope = 0.01;

  enum class Backend { kFeedForward, kSequence, kVideoEmbedding };
  Backend backend = Backend::kFeedForward;

  int fused_width() const { return d_v + d_r; }
  int ff_hidden1() const { return d_v / 2; }
  int ff_hidden2() const { return d_v / 4; }

  void Validate() const {
    if (d_feat < 1 || d_v < 4 || d_r < 1 || d_s < 1)
      throw std::invalid_argument("network widths must be positive");
    if (d_v % 4 != 0)
      throw std::invalid_argument(
          "d_v must be divisible by 4 for the classifier head widths");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
      throw std::invalid_argument("dropout_p must lie in [0, 1)");
  }
};

// One forward pass over a batch of (video, query) pairs.
template <typename Real>
struct KwsOutput {
  nn::Mat<Real> logits;      // B x 1 pre-sigmoid scores
  nn::Mat<Real> posteriors;  // B x 1
  std::vector<int> t_hat;    // 1-based frame of the track maximum (sequence)
  nn::Mat<Real> tracks;      // B x T frame scores (sequence backend only)
};

// Posterior and localization from one frame-score track: the sigmoid of the
// maximum over the first valid_length entries, ties broken toward the
// smallest index.
template <typename Real>
std::pair<Real, int> PosteriorFromTrack(const nn::Mat<Real>& track,
                                        int valid_length) {
  if (track.rows() != 1)
    throw std::invalid_argument("track must be a single row");
  if (valid_length < 1 || valid_length > track.cols())
    throw std::invalid_argument(
        StrCat("valid_length ", valid_length, " outside 1..", track.cols()));
  int best = 0;
  for (int t = 1; t < valid_length; ++t)
    if (track(0, t) > track(0, best)) best = t;
  return {nn::Sigmoid(track(0, best)), best + 1};
}

// The stacked model.  Both classifier heads are owned and registered
// regardless of which is active, so switching heads mid-training preserves
// every other parameter and both heads' optimizer state.
template <typename Real>
class KwsNet {
 public:
  explicit KwsNet(const KwsNetConfig& config)
      : config_(config),
        bn1_(config.d_feat),
        drop1_(Real(config.dropout_p)),
        layer1_(config.d_feat, config.d_v, config.d_v),
        bn2_(config.fused_width()),
        drop2_(Real(config.dropout_p)),
        layer2_(config.fused_width(), config.d_v, config.d_v),
        ff_reduce_(config.d_v, config.ff_hidden1(), /*has_bias=*/false),
        ff_relu1_(Real(config.lrelu_slope)),
        ff_drop_(Real(config.dropout_p)),
        ff_hidden_(config.ff_hidden1(), config.ff_hidden2(),
                   /*has_bias=*/true),
        ff_relu2_(Real(config.lrelu_slope)),
        ff_out_(config.ff_hidden2(), 1, /*has_bias=*/true),
        seq_reduce_(config.d_v, config.d_s, /*has_bias=*/false),
        seq_relu_(Real(config.lrelu_slope)),
        seq_fwd_(config.d_s, config.d_s),
        seq_bwd_(config.d_s, config.d_s),
        seq_out_(2 * config.d_s, 1, /*has_bias=*/true) {
    config_.Validate();
    if (config_.backend == KwsNetConfig::Backend::kVideoEmbedding)
      throw std::invalid_argument(
          "the video-embedding baseline is a separate model");
  }

  void Init(Rng* rng) {
    layer1_.Init(rng);
    layer2_.Init(rng);
    ff_reduce_.Init(rng);
    ff_hidden_.Init(rng);
    ff_out_.Init(rng);
    seq_reduce_.Init(rng);
    seq_fwd_.Init(rng);
    seq_bwd_.Init(rng);
    seq_out_.Init(rng);
  }

  void Register(nn::ParamRegistry<Real>* reg,
                const std::string& prefix = "kws") {
    bn1_.Register(reg, prefix + ".layer1.input_bn");
    layer1_.Register(reg, prefix + ".layer1");
    bn2_.Register(reg, prefix + ".layer2.input_bn");
    layer2_.Register(reg, prefix + ".layer2");
    ff_reduce_.Register(reg, prefix + ".ff.reduce");
    ff_hidden_.Register(reg, prefix + ".ff.hidden");
    ff_out_.Register(reg, prefix + ".ff.out");
    seq_reduce_.Register(reg, prefix + ".seq.reduce");
    seq_fwd_.Register(reg, prefix + ".seq.fwd");
    seq_bwd_.Register(reg, prefix + ".seq.bwd");
    seq_out_.Register(reg, prefix + ".seq.out");
  }

  typename KwsNetConfig::Backend backend() const { return config_.backend; }

  void set_backend(typename KwsNetConfig::Backend backend) {
    if (backend == KwsNetConfig::Backend::kVideoEmbedding)
      throw std::invalid_argument(
          "the video-embedding baseline is a separate model");
    config_.backend = backend;
  }

  const KwsNetConfig& config() const { return config_; }

  // features: B sequences of d_feat vectors; r: B x d_r query embeddings,
  // one per sequence.  rng drives the dropout draws and may be null in
  // evaluation mode.
  KwsOutput<Real> Forward(const nn::SeqBatch<Real>& features,
                          const nn::Mat<Real>& r, nn::ForwardMode mode,
                          Rng* rng, bool cache = true) {
    const int batch = features.batch();
    const int t_steps = features.num_steps();
    if (batch < 1 || t_steps < 1)
      throw std::invalid_argument("empty feature batch");
    if (features.dim() != config_.d_feat)
      throw std::invalid_argument(StrCat("expected ", config_.d_feat,
                                         "-wide features, got ",
                                         features.dim()));
    if (r.rows() != batch || r.cols() != config_.d_r)
      throw std::invalid_argument(
          StrCat("expected ", batch, "x", config_.d_r, " embeddings, got ",
                 r.rows(), "x", r.cols()));

    nn::SeqBatch<Real> x = drop1_.Forward(bn1_.Forward(features, mode), mode,
                                          rng);
    nn::SeqBatch<Real> y = layer1_.Forward(x, cache);

    // Frame-level fusion: every step carries its sequence's query embedding.
    nn::SeqBatch<Real> fused;
    fused.mask = features.mask;
    fused.lengths = features.lengths;
    fused.steps.resize(t_steps);
    for (int t = 0; t < t_steps; ++t) {
      fused.steps[t].resize(batch, config_.fused_width());
      fused.steps[t] << y.steps[t], r;
    }

    nn::SeqBatch<Real> f =
        drop2_.Forward(bn2_.Forward(fused, mode), mode, rng);
    nn::SeqBatch<Real> z = layer2_.Forward(f, cache);

    KwsOutput<Real> out;
    if (config_.backend == KwsNetConfig::Backend::kFeedForward) {
      out.logits = FfHead(z, mode, rng, cache);
    } else {
      out.logits = SeqHead(z, cache, &out.t_hat, &out.tracks);
    }
    out.posteriors.resize(batch, 1);
    for (int b = 0; b < batch; ++b)
      out.posteriors(b, 0) = nn::Sigmoid(out.logits(b, 0));
    if (cache) {
      cached_mask_ = features.mask;
      cached_steps_ = t_steps;
      cached_backend_ = config_.backend;
    }
    return out;
  }

  // Backpropagates d(loss)/d(logits) through the whole stack, accumulating
  // parameter gradients, and returns d(loss)/dr (B x d_r).
  nn::Mat<Real> Backward(const nn::Mat<Real>& dlogits) {
    nn::SeqBatch<Real> dz;
    dz.mask = cached_mask_;
    dz.steps.resize(cached_steps_);
    if (cached_backend_ == KwsNetConfig::Backend::kFeedForward) {
      FfHeadBackward(dlogits, &dz);
    } else {
      SeqHeadBackward(dlogits, &dz);
    }

    nn::SeqBatch<Real> df = layer2_.Backward(dz);
    nn::SeqBatch<Real> dfused = bn2_.Backward(drop2_.Backward(df));

    nn::Mat<Real> dr =
        nn::Mat<Real>::Zero(dfused.batch(), config_.d_r);
    nn::SeqBatch<Real> dy;
    dy.mask = cached_mask_;
    dy.steps.resize(cached_steps_);
    for (int t = 0; t < cached_steps_; ++t) {
      dy.steps[t] = dfused.steps[t].leftCols(config_.d_v);
      dr += dfused.steps[t].rightCols(config_.d_r);
    }

    nn::SeqBatch<Real> dx = layer1_.Backward(dy);
    bn1_.Backward(drop1_.Backward(dx));
    return dr;
  }

  // Scores one video (T x d_feat) against every query embedding
  // (Q x d_r) in evaluation mode.  The query-independent first layer runs
  // once; the fused layer runs batched over the queries.
  KwsOutput<Real> ScoreVideoQueries(const nn::Mat<Real>& features,
                                    const nn::Mat<Real>& queries) {
    const int t_steps = static_cast<int>(features.rows());
    const int n_queries = static_cast<int>(queries.rows());
    if (t_steps < 1) throw std::invalid_argument("empty video");
    if (n_queries < 1) throw std::invalid_argument("no queries");
    if (features.cols() != config_.d_feat || queries.cols() != config_.d_r)
      throw std::invalid_argument("feature or embedding width mismatch");

    nn::SeqBatch<Real> xb;
    xb.steps.resize(t_steps);
    xb.mask = nn::Mat<Real>::Ones(1, t_steps);
    xb.lengths = {t_steps};
    for (int t = 0; t < t_steps; ++t) xb.steps[t] = features.row(t);

    nn::SeqBatch<Real> x =
        drop1_.Forward(bn1_.Forward(xb, nn::kEvalMode), nn::kEvalMode,
                       nullptr);
    nn::SeqBatch<Real> y = layer1_.Forward(x, /*cache=*/false);

    nn::SeqBatch<Real> fused;
    fused.mask = nn::Mat<Real>::Ones(n_queries, t_steps);
    fused.lengths.assign(n_queries, t_steps);
    fused.steps.resize(t_steps);
    for (int t = 0; t < t_steps; ++t) {
      fused.steps[t].resize(n_queries, config_.fused_width());
      fused.steps[t] << y.steps[t].replicate(n_queries, 1), queries;
    }

    nn::SeqBatch<Real> f = drop2_.Forward(bn2_.Forward(fused, nn::kEvalMode),
                                          nn::kEvalMode, nullptr);
    nn::SeqBatch<Real> z = layer2_.Forward(f, /*cache=*/false);

    KwsOutput<Real> out;
    if (config_.backend == KwsNetConfig::Backend::kFeedForward) {
      out.logits = FfHead(z, nn::kEvalMode, nullptr, /*cache=*/false);
    } else {
      out.logits = SeqHead(z, /*cache=*/false, &out.t_hat, &out.tracks);
    }
    out.posteriors.resize(n_queries, 1);
    for (int q = 0; q < n_queries; ++q)
      out.posteriors(q, 0) = nn::Sigmoid(out.logits(q, 0));
    return out;
  }

 private:
  // v = sum_t LReLU(W z_t) over valid frames, then dropout, two affine
  // layers, and the pre-sigmoid score.
  nn::Mat<Real> FfHead(const nn::SeqBatch<Real>& z, nn::ForwardMode mode,
                       Rng* rng, bool cache) {
    const int batch = z.batch();
    nn::Mat<Real> v = nn::Mat<Real>::Zero(batch, config_.ff_hidden1());
    for (int t = 0; t < z.num_steps(); ++t) {
      nn::Mat<Real> a =
          ff_relu1_.Forward(ff_reduce_.Forward(z.steps[t], cache), cache);
      v += (a.array().colwise() * z.mask.col(t).array()).matrix();
    }
    nn::Mat<Real> vd = ff_drop_.Forward(v, mode, rng);
    nn::Mat<Real> h =
        ff_relu2_.Forward(ff_hidden_.Forward(vd, cache), cache);
    return ff_out_.Forward(h, cache);
  }

  void FfHeadBackward(const nn::Mat<Real>& dlogits, nn::SeqBatch<Real>* dz) {
    nn::Mat<Real> dh = ff_out_.Backward(dlogits);
    nn::Mat<Real> dvd = ff_hidden_.Backward(ff_relu2_.Backward(dh));
    nn::Mat<Real> dv = ff_drop_.Backward(dvd);
    // The per-step layers cached inputs in forward order; unwind backwards.
    for (int t = cached_steps_ - 1; t >= 0; --t) {
      nn::Mat<Real> da =
          (dv.array().colwise() * cached_mask_.col(t).array()).matrix();
      dz->steps[t] = ff_reduce_.Backward(ff_relu1_.Backward(da));
    }
  }

  // s_t = LReLU(W z_t); a bidirectional recurrence over S; per-frame scores
  // y_t; p = sigmoid(masked max), t-hat = its index.
  nn::Mat<Real> SeqHead(const nn::SeqBatch<Real>& z, bool cache,
                        std::vector<int>* t_hat, nn::Mat<Real>* tracks) {
    const int batch = z.batch();
    const int t_steps = z.num_steps();
    nn::SeqBatch<Real> s;
    s.mask = z.mask;
    s.lengths = z.lengths;
    s.steps.resize(t_steps);
    for (int t = 0; t < t_steps; ++t)
      s.steps[t] =
          seq_relu_.Forward(seq_reduce_.Forward(z.steps[t], cache), cache);

    nn::SeqBatch<Real> hf = seq_fwd_.Forward(s, nullptr, nullptr, cache);
    nn::SeqBatch<Real> hb =
        seq_bwd_.Forward(s.Reversed(), nullptr, nullptr, cache).Reversed();

    tracks->resize(batch, t_steps);
    for (int t = 0; t < t_steps; ++t) {
      nn::Mat<Real> cat(batch, 2 * config_.d_s);
      cat << hf.steps[t], hb.steps[t];
      tracks->col(t) = seq_out_.Forward(cat, cache);
    }

    // Masked max and argmax; ties resolve to the earliest frame.
    nn::Mat<Real> logits(batch, 1);
    t_hat->assign(batch, 1);
    if (!z.lengths.empty() && static_cast<int>(z.lengths.size()) != batch)
      throw std::invalid_argument("length list does not match the batch");
    for (int b = 0; b < batch; ++b) {
      const int len = z.lengths.empty() ? t_steps : z.lengths[b];
      if (len < 1 || len > t_steps)
        throw std::invalid_argument(
            StrCat("valid length ", len, " outside 1..", t_steps));
      int best = 0;
      for (int t = 1; t < len; ++t)
        if ((*tracks)(b, t) > (*tracks)(b, best)) best = t;
      logits(b, 0) = (*tracks)(b, best);
      (*t_hat)[b] = best + 1;
    }
    if (cache) {
      cached_t_hat_ = *t_hat;
    }
    return logits;
  }

  void SeqHeadBackward(const nn::Mat<Real>& dlogits, nn::SeqBatch<Real>* dz) {
    const int batch = static_cast<int>(dlogits.rows());
    // The max routes each pair's gradient to its winning frame only.
    nn::Mat<Real> dtrack = nn::Mat<Real>::Zero(batch, cached_steps_);
    for (int b = 0; b < batch; ++b)
      dtrack(b, cached_t_hat_[b] - 1) = dlogits(b, 0);

    nn::SeqBatch<Real> dhf, dhb;
    dhf.mask = cached_mask_;
    dhb.mask = cached_mask_;
    dhf.steps.resize(cached_steps_);
    dhb.steps.resize(cached_steps_);
    for (int t = cached_steps_ - 1; t >= 0; --t) {
      nn::Mat<Real> dcat = seq_out_.Backward(dtrack.col(t));
      dhf.steps[t] = dcat.leftCols(config_.d_s);
      dhb.steps[t] = dcat.rightCols(config_.d_s);
    }

    nn::SeqBatch<Real> dsf = seq_fwd_.Backward(dhf);
    nn::SeqBatch<Real> dsb = seq_bwd_.Backward(dhb.Reversed()).Reversed();
    for (int t = cached_steps_ - 1; t >= 0; --t) {
      nn::Mat<Real> ds = dsf.steps[t] + dsb.steps[t];
      dz->steps[t] = seq_reduce_.Backward(seq_relu_.Backward(ds));
    }
  }

  KwsNetConfig config_;

  nn::BatchNormSeq<Real> bn1_;
  nn::SeqDropout<Real> drop1_;
  nn::BilstmProj<Real> layer1_;
  nn::BatchNormSeq<Real> bn2_;
  nn::SeqDropout<Real> drop2_;
  nn::BilstmProj<Real> layer2_;

  nn::Linear<Real> ff_reduce_;
  nn::LeakyRelu<Real> ff_relu1_;
  nn::Dropout<Real> ff_drop_;
  nn::Linear<Real> ff_hidden_;
  nn::LeakyRelu<Real> ff_relu2_;
  nn::Linear<Real> ff_out_;

  nn::Linear<Real> seq_reduce_;
  nn::LeakyRelu<Real> seq_relu_;
  nn::Lstm<Real> seq_fwd_;
  nn::Lstm<Real> seq_bwd_;
  nn::Linear<Real> seq_out_;

  nn::Mat<Real> cached_mask_;
  int cached_steps_ = 0;
  typename KwsNetConfig::Backend cached_backend_ =
      KwsNetConfig::Backend::kFeedForward;
  std::vector<int> cached_t_hat_;
};

// The whole-utterance baseline: a single bidirectional recurrence whose
// final states become one video embedding, concatenated with the query and
// classified by a feed-forward head.  No localization is possible.
template <typename Real>
class VideoEmbeddingNet {
 public:
  explicit VideoEmbeddingNet(const KwsNetConfig& config)
      : config_(config),
        bn_(config.d_feat),
        drop_(Real(config.dropout_p)),
        fwd_(config.d_feat, config.d_v),
        bwd_(config.d_feat, config.d_v),
        proj_(2 * config.d_v, config.d_v, /*has_bias=*/false),
        reduce_(config.d_v + config.d_r, config.ff_hidden1(),
                /*has_bias=*/false),
        relu1_(Real(config.lrelu_slope)),
        vdrop_(Real(config.dropout_p)),
        hidden_(config.ff_hidden1(), config.ff_hidden2(), /*has_bias=*/true),
        relu2_(Real(config.lrelu_slope)),
        out_(config.ff_hidden2(), 1, /*has_bias=*/true) {
    config_.Validate();
  }

  void Init(Rng* rng) {
    fwd_.Init(rng);
    bwd_.Init(rng);
    proj_.Init(rng);
    reduce_.Init(rng);
    hidden_.Init(rng);
    out_.Init(rng);
  }

  void Register(nn::ParamRegistry<Real>* reg,
                const std::string& prefix = "kws.videoemb") {
    bn_.Register(reg, prefix + ".input_bn");
    fwd_.Register(reg, prefix + ".fwd");
    bwd_.Register(reg, prefix + ".bwd");
    proj_.Register(reg, prefix + ".proj");
    reduce_.Register(reg, prefix + ".reduce");
    hidden_.Register(reg, prefix + ".hidden");
    out_.Register(reg, prefix + ".out");
  }

  const KwsNetConfig& config() const { return config_; }

  KwsOutput<Real> Forward(const nn::SeqBatch<Real>& features,
                          const nn::Mat<Real>& r, nn::ForwardMode mode,
                          Rng* rng, bool cache = true) {
    const int batch = features.batch();
    if (batch < 1 || features.num_steps() < 1)
      throw std::invalid_argument("empty feature batch");
    if (r.rows() != batch || r.cols() != config_.d_r)
      throw std::invalid_argument("embedding shape mismatch");

    nn::SeqBatch<Real> x =
        drop_.Forward(bn_.Forward(features, mode), mode, rng);
    fwd_.Forward(x, nullptr, nullptr, cache);
    bwd_.Forward(x.Reversed(), nullptr, nullptr, cache);

    nn::Mat<Real> cat(batch, 2 * config_.d_v);
    cat << fwd_.final_h(), bwd_.final_h();
    nn::Mat<Real> venc = proj_.Forward(cat, cache);

    nn::Mat<Real> fused(batch, config_.d_v + config_.d_r);
    fused << venc, r;
    nn::Mat<Real> a = relu1_.Forward(reduce_.Forward(fused, cache), cache);
    nn::Mat<Real> ad = vdrop_.Forward(a, mode, rng);
    nn::Mat<Real> h = relu2_.Forward(hidden_.Forward(ad, cache), cache);

    KwsOutput<Real> out;
    out.logits = out_.Forward(h, cache);
    out.posteriors.resize(batch, 1);
    for (int b = 0; b < batch; ++b)
      out.posteriors(b, 0) = nn::Sigmoid(out.logits(b, 0));
    if (cache) {
      cached_mask_ = features.mask;
      cached_steps_ = features.num_steps();
    }
    return out;
  }

  nn::Mat<Real> Backward(const nn::Mat<Real>& dlogits) {
    nn::Mat<Real> dh = out_.Backward(dlogits);
    nn::Mat<Real> dad = hidden_.Backward(relu2_.Backward(dh));
    nn::Mat<Real> da = vdrop_.Backward(dad);
    nn::Mat<Real> dfused = reduce_.Backward(relu1_.Backward(da));

    nn::Mat<Real> dvenc = dfused.leftCols(config_.d_v);
    nn::Mat<Real> dr = dfused.rightCols(config_.d_r);

    nn::Mat<Real> dcat = proj_.Backward(dvenc);
    const int batch = static_cast<int>(dcat.rows());
    nn::Mat<Real> zero_state = nn::Mat<Real>::Zero(batch, config_.d_v);

    nn::SeqBatch<Real> dzero;
    dzero.mask = cached_mask_;
    dzero.steps.assign(cached_steps_,
                       nn::Mat<Real>::Zero(batch, config_.d_v));

    fwd_.AddFinalStateGrad(zero_state, dcat.leftCols(config_.d_v));
    nn::SeqBatch<Real> dxf = fwd_.Backward(dzero);

    bwd_.AddFinalStateGrad(zero_state, dcat.rightCols(config_.d_v));
    nn::SeqBatch<Real> dxb = bwd_.Backward(dzero).Reversed();

    nn::SeqBatch<Real> dx = dxf;
    for (int t = 0; t < cached_steps_; ++t) dx.steps[t] += dxb.steps[t];
    bn_.Backward(drop_.Backward(dx));
    return dr;
  }

 private:
  KwsNetConfig config_;

  nn::BatchNormSeq<Real> bn_;
  nn::SeqDropout<Real> drop_;
  nn::Lstm<Real> fwd_;
  nn::Lstm<Real> bwd_;
  nn::Linear<Real> proj_;
  nn::Linear<Real> reduce_;
  nn::LeakyRelu<Real> relu1_;
  nn::Dropout<Real> vdrop_;
  nn::Linear<Real> hidden_;
  nn::LeakyRelu<Real> relu2_;
  nn::Linear<Real> out_;

  nn::Mat<Real> cached_mask_;
  int cached_steps_ = 0;
};

}  // namespace kws
}  // namespace lipspot

#endif  // LIPSPOT_KWSNET_H_
