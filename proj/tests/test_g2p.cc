// tests/test_g2p.cc

// Copyright 2026  The lipspot authors

// See ../COPYING for clarification regarding multiple authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "lipspot/g2p.h"
#include "lipspot/nn/adam.h"
#include "lipspot/phonedict.h"
#include "support/gradcheck.h"
#include "support/toydict.h"

using namespace lipspot;
using g2p::G2PConfig;
using g2p::G2pModel;
using nn::Mat;
using nn::Vec;

namespace {

G2PConfig SmallConfig(const PhoneticDictionary& dict, int d_l = 8) {
  G2PConfig cfg;
  cfg.hidden_size = d_l;
  cfg.embedding_size = 2 * d_l;
  cfg.grapheme_table_size = dict.grapheme_set().table_size();
  cfg.target_alphabet_size = dict.phone_set().size();
  return cfg;
}

std::vector<int> Graphemes(const PhoneticDictionary& dict,
                           const std::string& word) {
  return EncodeWord(word, dict.grapheme_set());
}

}  // namespace

TEST_CASE("encode: deterministic for fixed parameters") {
  PhoneticDictionary dict = testing::MakeToyDictionary(10, 3, 6, 5);
  G2pModel<double> model(SmallConfig(dict));
  Rng rng(1);
  model.Init(&rng);
  auto a = model.EncodeKeyword(Graphemes(dict, dict.Words()[0]));
  auto b = model.EncodeKeyword(Graphemes(dict, dict.Words()[0]));
  CHECK((a.r - b.r).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.r.size() == 16);
  CHECK(a.c0.size() == 8);
  CHECK(a.h0.size() == 8);
}

TEST_CASE("encode: all-zero parameters give the zero embedding") {
  PhoneticDictionary dict = testing::MakeToyDictionary(10, 3, 6, 5);
  G2pModel<double> model(SmallConfig(dict));  // never initialized
  auto res = model.EncodeKeyword(Graphemes(dict, dict.Words()[0]));
  CHECK(res.r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode: anagrams get distinct embeddings") {
  PhoneticDictionary dict = ParseString(
      "CAT K AH T\n"
      "TACK T AH K\n"
      "AB AH BH\n"
      "BA BH AH\n");
  G2pModel<double> model(SmallConfig(dict));
  Rng rng(17);
  model.Init(&rng);
  auto cat = model.EncodeKeyword(Graphemes(dict, "CAT"));
  auto tack = model.EncodeKeyword(Graphemes(dict, "TACK"));
  CHECK((cat.r - tack.r).norm() > 1e-6);
  // Reversal sensitivity on a two-letter pair.
  auto ab = model.EncodeKeyword(Graphemes(dict, "AB"));
  auto ba = model.EncodeKeyword(Graphemes(dict, "BA"));
  CHECK((ab.r - ba.r).norm() > 1e-6);
}

TEST_CASE("encode: empty grapheme sequence is rejected") {
  PhoneticDictionary dict = testing::MakeToyDictionary(4, 3, 5, 2);
  G2pModel<double> model(SmallConfig(dict));
  CHECK_THROWS_AS(model.EncodeKeyword({}), std::invalid_argument);
}

TEST_CASE("decode: teacher-forced posterior length equals target length") {
  PhoneticDictionary dict = testing::MakeToyDictionary(6, 3, 6, 3);
  G2pModel<double> model(SmallConfig(dict));
  Rng rng(4);
  model.Init(&rng);
  const DictEntry* e = dict.Find(dict.Words()[2]);
  std::vector<int> target = g2p::SelectAuxiliaryTarget(
      model.config(), *e, dict.phone_set(), dict.grapheme_set());
  auto res = model.DecodePronunciation(Graphemes(dict, e->word), &target);
  CHECK(res.posteriors.rows() == static_cast<int>(target.size()));
  CHECK(res.posteriors.cols() == dict.phone_set().size() + 1);
  // Every step's posterior is a distribution.
  for (int t = 0; t < res.posteriors.rows(); ++t) {
    CHECK(res.posteriors.row(t).sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.posteriors.row(t).minCoeff() >= 0.0);
  }
}

TEST_CASE("decode: length cap yields exactly 48 symbols with no end token") {
  PhoneticDictionary dict = testing::MakeToyDictionary(6, 3, 6, 3);
  G2PConfig cfg = SmallConfig(dict);
  G2pModel<double> model(cfg);
  Rng rng(4);
  model.Init(&rng);
  // Suppress the end token so greedy decoding can never stop on its own.
  nn::ParamRegistry<double> reg;
  model.Register(&reg, "g2p");
  const auto* out_bias = reg.Find("g2p.decoder.out.b");
  REQUIRE(out_bias != nullptr);
  (*out_bias->value)(cfg.decoder_end_index(), 0) = -1e9;
  auto res = model.DecodePronunciation(Graphemes(dict, dict.Words()[0]), nullptr);
  CHECK(res.symbols.size() == 48);
  CHECK(!res.ended);
  for (int s : res.symbols) CHECK(s != cfg.decoder_end_index());
}

TEST_CASE("no-decoder ablation: decoding unsupported, encoding intact") {
  PhoneticDictionary dict = testing::MakeToyDictionary(6, 3, 6, 3);
  G2PConfig cfg = SmallConfig(dict);
  cfg.decoder_enabled = false;
  G2pModel<double> model(cfg);
  Rng rng(4);
  model.Init(&rng);
  CHECK_THROWS_AS(
      model.DecodePronunciation(Graphemes(dict, dict.Words()[0]), nullptr),
      UnsupportedOperationError);
  auto res = model.EncodeKeyword(Graphemes(dict, dict.Words()[0]));
  CHECK(res.r.allFinite());
  nn::ParamRegistry<double> reg;
  model.Register(&reg, "g2p");
  for (const auto& item : reg.items())
    CHECK(item.name.find("decoder") == std::string::npos);
}

TEST_CASE("loss: certain posteriors give zero, uniform over 70 gives ln 70") {
  Mat<double> certain = Mat<double>::Zero(3, 70);
  std::vector<int> target = {5, 0, 69};
  for (int t = 0; t < 3; ++t) certain(t, target[t]) = 1.0;
  CHECK(g2p::G2pLoss(certain, target) == doctest::Approx(0.0));
  Mat<double> uniform = Mat<double>::Constant(4, 70, 1.0 / 70.0);
  std::vector<int> target4 = {1, 2, 3, 4};
  CHECK(g2p::G2pLoss(uniform, target4) ==
        doctest::Approx(std::log(70.0)).epsilon(1e-9));
  CHECK(std::log(70.0) == doctest::Approx(4.2485).epsilon(1e-4));
}

TEST_CASE("loss: length mismatch is rejected") {
  Mat<double> posteriors = Mat<double>::Constant(3, 10, 0.1);
  CHECK_THROWS_AS(g2p::G2pLoss(posteriors, std::vector<int>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("auxiliary target selection honours the alphabet mode") {
  PhoneticDictionary dict = ParseString("FINISH F IH1 N IH0 SH\n");
  const DictEntry* e = dict.Find("FINISH");
  G2PConfig cfg;
  cfg.grapheme_table_size = dict.grapheme_set().table_size();
  cfg.target_alphabet_size = dict.phone_set().size();
  std::vector<int> phones = g2p::SelectAuxiliaryTarget(
      cfg, *e, dict.phone_set(), dict.grapheme_set());
  REQUIRE(phones.size() == 5);
  CHECK(dict.phone_set().symbols[phones[0]] == "F");
  CHECK(dict.phone_set().symbols[phones[1]] == "IH1");
  CHECK(dict.phone_set().symbols[phones[3]] == "IH0");
  cfg.target_alphabet = G2PConfig::TargetAlphabet::kGraphemes;
  std::vector<int> letters = g2p::SelectAuxiliaryTarget(
      cfg, *e, dict.phone_set(), dict.grapheme_set());
  CHECK(letters == EncodeWord("FINISH", dict.grapheme_set()));
}

TEST_CASE("gradient check: full model on a 2-step, d_l = 4 instance") {
  PhoneticDictionary dict = ParseString(
      "AB AH BH\n"
      "BAA BH AH\n");
  G2PConfig cfg = SmallConfig(dict, 4);
  G2pModel<double> model(cfg);
  Rng rng(7);
  model.Init(&rng);
  nn::ParamRegistry<double> reg;
  model.Register(&reg, "g2p");
  std::vector<std::vector<int>> words = {Graphemes(dict, "AB"),
                                         Graphemes(dict, "BAA")};
  const DictEntry* e0 = dict.Find("AB");
  const DictEntry* e1 = dict.Find("BAA");
  std::vector<std::vector<int>> targets = {
      g2p::SelectAuxiliaryTarget(cfg, *e0, dict.phone_set(), dict.grapheme_set()),
      g2p::SelectAuxiliaryTarget(cfg, *e1, dict.phone_set(), dict.grapheme_set())};
  Vec<double> aux_scale(2);
  aux_scale << 0.7, 1.3;
  // Fixed readout vector so the encoder path gets gradient through r as
  // well as through the decoder initialization.
  Vec<double> u(cfg.embedding_size);
  Rng urng(99);
  for (int i = 0; i < u.size(); ++i) u[i] = urng.Normal();
  auto loss_fn = [&]() {
    Mat<double> r = model.EncodeBatch(words, /*cache=*/false);
    Vec<double> aux = model.AuxiliaryLossBatch(targets, /*cache=*/false);
    double loss = aux.dot(aux_scale);
    Vec<double> proj = r * u;
    return loss + proj.array().square().sum();
  };
  auto backward_fn = [&]() {
    reg.ZeroGrad();
    Mat<double> r = model.EncodeBatch(words, /*cache=*/true);
    model.AuxiliaryLossBatch(targets, /*cache=*/true);
    Vec<double> proj = r * u;
    Mat<double> dr = (2.0 * proj) * u.transpose();
    model.Backward(aux_scale, dr);
  };
  auto report = testing::CheckGradients(reg, loss_fn, backward_fn);
  INFO(report.worst_param, "(", report.worst_row, ",", report.worst_col,
       ") analytic=", report.analytic, " numeric=", report.numeric);
  CHECK(report.max_rel_err < 1e-4);
  // Every parameter tensor of the full model took part in the check.
  CHECK(report.entries_checked == reg.NumTrainable());
}

TEST_CASE("training: a five-word toy dictionary is decoded exactly") {
  PhoneticDictionary dict = testing::MakeToyDictionary(5, 3, 6, 11);
  G2PConfig cfg = SmallConfig(dict, 16);
  G2pModel<float> model(cfg);
  Rng rng(3);
  model.Init(&rng);
  nn::ParamRegistry<float> reg;
  model.Register(&reg, "g2p");
  nn::AdamOptimizer<float> adam;
  std::vector<std::vector<int>> words;
  std::vector<std::vector<int>> targets;
  for (const auto& w : dict.Words()) {
    const DictEntry* e = dict.Find(w);
    words.push_back(Graphemes(dict, w));
    targets.push_back(g2p::SelectAuxiliaryTarget(cfg, *e, dict.phone_set(),
                                                 dict.grapheme_set()));
  }
  Vec<float> scale = Vec<float>::Constant(5, 1.0f / 5.0f);
  float loss = 0;
  for (int step = 0; step < 500; ++step) {
    reg.ZeroGrad();
    model.EncodeBatch(words, true);
    Vec<float> aux = model.AuxiliaryLossBatch(targets, true);
    loss = aux.mean();
    if (loss < 0.01f) break;
    model.Backward(scale, Mat<float>());
    adam.Step(reg, 2e-3f);
  }
  CHECK(loss < 0.05f);
  for (size_t i = 0; i < words.size(); ++i) {
    auto res = model.DecodePronunciation(words[i], nullptr);
    CHECK(res.ended);
    CHECK(res.symbols == targets[i]);
  }
}

TEST_CASE("training: default-size model fits a 50-word toy dictionary") {
  PhoneticDictionary dict = testing::MakeToyDictionary(50, 3, 7, 29);
  G2PConfig cfg = SmallConfig(dict, 64);
  REQUIRE(cfg.embedding_size == 128);
  G2pModel<float> model(cfg);
  Rng rng(12);
  model.Init(&rng);
  nn::ParamRegistry<float> reg;
  model.Register(&reg, "g2p");
  nn::AdamOptimizer<float> adam;
  std::vector<std::vector<int>> words;
  std::vector<std::vector<int>> targets;
  for (const auto& w : dict.Words()) {
    const DictEntry* e = dict.Find(w);
    words.push_back(Graphemes(dict, w));
    targets.push_back(g2p::SelectAuxiliaryTarget(cfg, *e, dict.phone_set(),
                                                 dict.grapheme_set()));
  }
  Vec<float> scale = Vec<float>::Constant(50, 1.0f / 50.0f);
  float loss = 1e9f;
  int steps = 0;
  for (; steps < 400 && loss >= 0.05f; ++steps) {
    reg.ZeroGrad();
    model.EncodeBatch(words, true);
    loss = model.AuxiliaryLossBatch(targets, true).mean();
    model.Backward(scale, Mat<float>());
    adam.Step(reg, 2e-3f);
  }
  INFO("loss ", loss, " after ", steps, " steps");
  CHECK(loss < 0.05f);
}

TEST_CASE("embedding table export format") {
  std::ostringstream out;
  Eigen::VectorXf v(3);
  v << 1.5f, -0.25f, 0.125f;
  g2p::WriteEmbeddingTable(out, {{"CAT", v}});
  CHECK(out.str() == "CAT 1.5 -0.25 0.125\n");
}
