// include/lipspot/g2p.h

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

#ifndef LIPSPOT_G2P_H_
#define LIPSPOT_G2P_H_

#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/nn/layers.h"
#include "lipspot/nn/lstm.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/phonedict.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace g2p {

// Greedy decoding stops after this many steps if no end token appears;
// real pronunciations are far shorter.
inline constexpr int kDecodeLengthCap = 48;

struct G2PConfig {
  int hidden_size = 64;      // d_l, encoder/decoder LSTM width
  int embedding_size = 128;  // d_r, keyword embedding width (2 * d_l default)

  enum class TargetAlphabet { kPhonemes, kGraphemes };
  TargetAlphabet target_alphabet = TargetAlphabet::kPhonemes;
  bool decoder_enabled = true;

  // Alphabet geometry, filled in from the loaded dictionary.
  int grapheme_table_size = 0;   // graphemes + start/end/pad
  int target_alphabet_size = 0;  // target symbols, excluding the end token

  // Decoder token table: target symbols plus end and start.
  int decoder_end_index() const { return target_alphabet_size; }
  int decoder_start_index() const { return target_alphabet_size + 1; }
  int decoder_table_size() const { return target_alphabet_size + 2; }
  int decoder_output_size() const { return target_alphabet_size + 1; }
};

// Sequence-to-sequence grapheme-to-phoneme model.  The encoder reads the
// REVERSED grapheme sequence; its final cell and output are concatenated
// and mapped by a bias-free square projection to the keyword embedding r,
// and a second bias-free projection maps r to the decoder's initial state.
// The decoder is a conventional teacher-forced LSTM over the target
// symbols; with decoder_enabled = false only the encoder half exists.
template <typename Real>
class G2pModel {
 public:
  explicit G2pModel(const G2PConfig& cfg)
      : cfg_(cfg),
        enc_embed_(cfg.grapheme_table_size, cfg.hidden_size),
        enc_lstm_(cfg.hidden_size, cfg.hidden_size),
        proj_r_(2 * cfg.hidden_size, cfg.embedding_size, /*has_bias=*/false),
        proj_init_(cfg.embedding_size, 2 * cfg.hidden_size, /*has_bias=*/false) {
    if (cfg.grapheme_table_size <= 0)
      throw std::invalid_argument("G2PConfig.grapheme_table_size must be set");
    if (cfg.decoder_enabled) {
      if (cfg.target_alphabet_size <= 0)
        throw std::invalid_argument("G2PConfig.target_alphabet_size must be set");
      dec_embed_ = std::make_unique<nn::Embedding<Real>>(
          cfg.decoder_table_size(), cfg.hidden_size);
      dec_lstm_ =
          std::make_unique<nn::Lstm<Real>>(cfg.hidden_size, cfg.hidden_size);
      dec_out_ = std::make_unique<nn::Linear<Real>>(
          cfg.hidden_size, cfg.decoder_output_size(), /*has_bias=*/true);
    }
  }

  const G2PConfig& config() const { return cfg_; }

  void Init(Rng* rng) {
    enc_embed_.Init(rng);
    enc_lstm_.Init(rng);
    proj_r_.Init(rng);
    proj_init_.Init(rng);
    if (cfg_.decoder_enabled) {
      dec_embed_->Init(rng);
      dec_lstm_->Init(rng);
      dec_out_->Init(rng);
    }
  }

  void Register(nn::ParamRegistry<Real>* reg, const std::string& prefix) {
    enc_embed_.Register(reg, prefix + ".encoder.embed");
    enc_lstm_.Register(reg, prefix + ".encoder.lstm");
    proj_r_.Register(reg, prefix + ".proj_r");
    proj_init_.Register(reg, prefix + ".proj_init");
    if (cfg_.decoder_enabled) {
      dec_embed_->Register(reg, prefix + ".decoder.embed");
      dec_lstm_->Register(reg, prefix + ".decoder.lstm");
      dec_out_->Register(reg, prefix + ".decoder.out");
    }
  }

  // Encodes a batch of words (unreversed grapheme indices) into keyword
  // embeddings, one row per word.  With cache=true the activations are kept
  // for Backward.
  nn::Mat<Real> EncodeBatch(const std::vector<std::vector<int>>& words,
                            bool cache) {
    if (words.empty())
      throw std::invalid_argument("EncodeBatch over an empty word batch");
    int batch = static_cast<int>(words.size());
    int max_t = 0;
    for (const auto& w : words) {
      if (w.empty())
        throw std::invalid_argument("cannot encode an empty grapheme sequence");
      max_t = std::max(max_t, static_cast<int>(w.size()));
    }
    int pad = cfg_.grapheme_table_size - 1;  // GraphemeSet pad index
    nn::SeqBatch<Real> x;
    x.mask = nn::Mat<Real>::Zero(batch, max_t);
    x.lengths.resize(batch);
    x.steps.reserve(max_t);
    enc_steps_ = max_t;
    for (int t = 0; t < max_t; ++t) {
      std::vector<int> idx(batch, pad);
      for (int b = 0; b < batch; ++b) {
        int len = static_cast<int>(words[b].size());
        x.lengths[b] = len;
        if (t < len) {
          idx[b] = words[b][len - 1 - t];  // reversed input order
          x.mask(b, t) = Real(1);
        }
      }
      x.steps.push_back(enc_embed_.Forward(idx, cache));
    }
    nn::SeqBatch<Real> h = enc_lstm_.Forward(x, nullptr, nullptr, cache);
    nn::Mat<Real> state(batch, 2 * cfg_.hidden_size);
    state.leftCols(cfg_.hidden_size) = enc_lstm_.final_c();
    state.rightCols(cfg_.hidden_size) = enc_lstm_.final_h();
    r_cache_ = proj_r_.Forward(state, cache);
    return r_cache_;
  }

  // Teacher-forced auxiliary loss for the same batch as the last
  // EncodeBatch call.  The end token is appended to every target
  // internally; returns the per-word mean cross-entropy (Eq.-style average
  // over the target length including the end step).
  nn::Vec<Real> AuxiliaryLossBatch(const std::vector<std::vector<int>>& targets,
                                   bool cache) {
    RequireDecoder();
    int batch = static_cast<int>(targets.size());
    if (batch != r_cache_.rows())
      throw std::invalid_argument("target batch does not match encoded batch");
    nn::Mat<Real> init = proj_init_.Forward(r_cache_, cache);
    nn::Mat<Real> c0 = init.leftCols(cfg_.hidden_size);
    nn::Mat<Real> h0 = init.rightCols(cfg_.hidden_size);
    int max_t = 0;
    dec_lengths_.resize(batch);
    for (int b = 0; b < batch; ++b) {
      dec_lengths_[b] = static_cast<int>(targets[b].size()) + 1;  // + end
      max_t = std::max(max_t, dec_lengths_[b]);
    }
    nn::SeqBatch<Real> x;
    x.mask = nn::Mat<Real>::Zero(batch, max_t);
    x.lengths = dec_lengths_;
    x.steps.reserve(max_t);
    for (int t = 0; t < max_t; ++t) {
      std::vector<int> idx(batch, 0);
      for (int b = 0; b < batch; ++b) {
        if (t >= dec_lengths_[b]) continue;  // padded; gradient is zero there
        idx[b] = t == 0 ? cfg_.decoder_start_index() : targets[b][t - 1];
        x.mask(b, t) = Real(1);
      }
      x.steps.push_back(dec_embed_->Forward(idx, cache));
    }
    nn::SeqBatch<Real> h = dec_lstm_->Forward(x, &c0, &h0, cache);
    nn::Vec<Real> word_loss = nn::Vec<Real>::Zero(batch);
    dec_dlogits_.assign(max_t, nn::Mat<Real>());
    for (int t = 0; t < max_t; ++t) {
      nn::Mat<Real> logits = dec_out_->Forward(h.steps[t], cache);
      std::vector<int> step_targets(batch, 0);
      std::vector<char> step_valid(batch, 0);
      for (int b = 0; b < batch; ++b) {
        if (t >= dec_lengths_[b]) continue;
        step_valid[b] = 1;
        step_targets[b] = t + 1 == dec_lengths_[b] ? cfg_.decoder_end_index()
                                                   : targets[b][t];
      }
      auto ce = nn::SoftmaxCrossEntropy(logits, step_targets, step_valid);
      for (int b = 0; b < batch; ++b)
        word_loss[b] += ce.losses[b] / Real(dec_lengths_[b]);
      if (cache) dec_dlogits_[t] = std::move(ce.dlogits);
    }
    aux_cached_ = cache;
    return word_loss;
  }

  // Backpropagates through the whole model.  daux_scale scales each word's
  // auxiliary loss (pass an empty vector when AuxiliaryLossBatch was not
  // run); dr_external is the gradient arriving at r from the spotting
  // network (pass an empty matrix if none).
  void Backward(const nn::Vec<Real>& daux_scale,
                const nn::Mat<Real>& dr_external) {
    int batch = static_cast<int>(r_cache_.rows());
    nn::Mat<Real> dr = nn::Mat<Real>::Zero(batch, cfg_.embedding_size);
    if (dr_external.size() != 0) dr += dr_external;
    if (daux_scale.size() != 0) {
      if (!aux_cached_)
        throw std::logic_error("auxiliary backward without a cached forward");
      int max_t = static_cast<int>(dec_dlogits_.size());
      nn::SeqBatch<Real> dh;
      dh.steps.assign(max_t, nn::Mat<Real>());
      for (int t = max_t - 1; t >= 0; --t) {
        nn::Mat<Real> dlogits = dec_dlogits_[t];
        for (int b = 0; b < batch; ++b)
          dlogits.row(b) *= daux_scale[b] / Real(dec_lengths_[b]);
        dh.steps[t] = dec_out_->Backward(dlogits);
      }
      nn::Mat<Real> dc0, dh0;
      nn::SeqBatch<Real> dx = dec_lstm_->Backward(dh, &dc0, &dh0);
      for (int t = static_cast<int>(dx.steps.size()) - 1; t >= 0; --t)
        dec_embed_->Backward(dx.steps[t]);
      nn::Mat<Real> dinit(batch, 2 * cfg_.hidden_size);
      dinit.leftCols(cfg_.hidden_size) = dc0;
      dinit.rightCols(cfg_.hidden_size) = dh0;
      dr += proj_init_.Backward(dinit);
      aux_cached_ = false;
    }
    nn::Mat<Real> dstate = proj_r_.Backward(dr);
    enc_lstm_.AddFinalStateGrad(dstate.leftCols(cfg_.hidden_size),
                                dstate.rightCols(cfg_.hidden_size));
    nn::SeqBatch<Real> zero_dh;
    zero_dh.steps.assign(enc_steps_,
                         nn::Mat<Real>::Zero(batch, cfg_.hidden_size));
    nn::SeqBatch<Real> dx = enc_lstm_.Backward(zero_dh);
    for (int t = enc_steps_ - 1; t >= 0; --t)
      enc_embed_.Backward(dx.steps[t]);
  }

  // --- single-word operations ---

  struct EncodeResult {
    nn::Vec<Real> r;
    nn::Vec<Real> c0, h0;  // decoder initialization
  };

  EncodeResult EncodeKeyword(const std::vector<int>& graphemes) {
    nn::Mat<Real> r = EncodeBatch({graphemes}, /*cache=*/false);
    EncodeResult out;
    out.r = r.row(0).transpose();
    nn::Mat<Real> init = proj_init_.Forward(r, /*cache=*/false);
    out.c0 = init.row(0).leftCols(cfg_.hidden_size).transpose();
    out.h0 = init.row(0).rightCols(cfg_.hidden_size).transpose();
    return out;
  }

  struct DecodeResult {
    nn::Mat<Real> posteriors;  // steps x (target alphabet + end)
    std::vector<int> symbols;  // greedy decode only, end token excluded
    bool ended = false;        // greedy decode emitted the end token
  };

  // Teacher-forced when target is given (posteriors over |target| steps),
  // greedy otherwise (posteriors for every emitted step, capped at 48).
  DecodeResult DecodePronunciation(const std::vector<int>& graphemes,
                                   const std::vector<int>* target) {
    RequireDecoder();
    nn::Mat<Real> r = EncodeBatch({graphemes}, /*cache=*/false);
    nn::Mat<Real> init = proj_init_.Forward(r, /*cache=*/false);
    nn::Mat<Real> c = init.leftCols(cfg_.hidden_size);
    nn::Mat<Real> h = init.rightCols(cfg_.hidden_size);
    DecodeResult out;
    if (target != nullptr) {
      int t_steps = static_cast<int>(target->size());
      out.posteriors.resize(t_steps, cfg_.decoder_output_size());
      int prev = cfg_.decoder_start_index();
      for (int t = 0; t < t_steps; ++t) {
        nn::Mat<Real> logits = StepDecoder(prev, &c, &h);
        out.posteriors.row(t) = nn::Softmax(logits).row(0);
        prev = (*target)[t];
      }
      return out;
    }
    int prev = cfg_.decoder_start_index();
    for (int t = 0; t < kDecodeLengthCap; ++t) {
      nn::Mat<Real> logits = StepDecoder(prev, &c, &h);
      nn::Mat<Real> post = nn::Softmax(logits);
      int argmax = 0;
      post.row(0).maxCoeff(&argmax);
      out.posteriors.conservativeResize(t + 1, cfg_.decoder_output_size());
      out.posteriors.row(t) = post.row(0);
      if (argmax == cfg_.decoder_end_index()) {
        out.ended = true;
        break;
      }
      out.symbols.push_back(argmax);
      prev = argmax;
    }
    return out;
  }

 private:
  void RequireDecoder() const {
    if (!cfg_.decoder_enabled)
      throw UnsupportedOperationError(
          "the pronunciation decoder is disabled in this configuration");
  }

  // One inference step: embeds prev, advances (c, h), returns logits.
  nn::Mat<Real> StepDecoder(int prev, nn::Mat<Real>* c, nn::Mat<Real>* h) {
    nn::SeqBatch<Real> x;
    x.steps.push_back(dec_embed_->Forward({prev}, /*cache=*/false));
    x.mask = nn::Mat<Real>::Ones(1, 1);
    x.lengths = {1};
    dec_lstm_->Forward(x, c, h, /*cache=*/false);
    *c = dec_lstm_->final_c();
    *h = dec_lstm_->final_h();
    return dec_out_->Forward(*h, /*cache=*/false);
  }

  G2PConfig cfg_;
  nn::Embedding<Real> enc_embed_;
  nn::Lstm<Real> enc_lstm_;
  nn::Linear<Real> proj_r_;
  nn::Linear<Real> proj_init_;
  std::unique_ptr<nn::Embedding<Real>> dec_embed_;
  std::unique_ptr<nn::Lstm<Real>> dec_lstm_;
  std::unique_ptr<nn::Linear<Real>> dec_out_;
  // Backward caches.
  nn::Mat<Real> r_cache_;
  int enc_steps_ = 0;
  std::vector<int> dec_lengths_;
  std::vector<nn::Mat<Real>> dec_dlogits_;
  bool aux_cached_ = false;
};

// Mean per-step cross-entropy of teacher-forced posteriors against the
// target sequence they were produced over.
template <typename Real>
Real G2pLoss(const nn::Mat<Real>& posteriors, const std::vector<int>& target) {
  int t_steps = static_cast<int>(posteriors.rows());
  if (t_steps != static_cast<int>(target.size()))
    throw std::invalid_argument(
        StrCat("posterior length ", t_steps, " does not match target length ",
               target.size()));
  Real loss = 0;
  for (int t = 0; t < t_steps; ++t) {
    int symbol = target[t];
    if (symbol < 0 || symbol >= posteriors.cols())
      throw std::invalid_argument(StrCat("target symbol ", symbol,
                                         " outside posterior alphabet of size ",
                                         posteriors.cols()));
    Real p = std::max(posteriors(t, symbol), Real(1e-30));
    loss -= std::log(p);
  }
  return loss / Real(t_steps);
}

// Target index sequence for the auxiliary decoder loss: the first
// pronunciation in phonemes mode, the word's own (un-reversed) grapheme
// sequence in grapheme mode.
std::vector<int> SelectAuxiliaryTarget(const G2PConfig& cfg,
                                       const DictEntry& entry,
                                       const PhoneSet& phones,
                                       const GraphemeSet& graphemes);

// Text export: one line per word, `WORD v1 v2 ... v_dr`.
void WriteEmbeddingTable(
    std::ostream& out,
    const std::vector<std::pair<std::string, Eigen::VectorXf>>& rows);

}  // namespace g2p
}  // namespace lipspot

#endif  // LIPSPOT_G2P_H_
