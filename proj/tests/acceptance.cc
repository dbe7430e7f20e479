// tests/acceptance.cc

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

// Acceptance harness.  Runs ten end-to-end checks over the library -- from
// analytic-gradient verification up to a full zero-shot spotting experiment
// on a synthetic corpus -- and prints exactly one [PASS]/[FAIL] line per
// criterion.  The exit status is the number of failed criteria.
//
//   acceptance [--workdir DIR] [N ...]
//
// With no numbers every criterion runs in order.  Criteria 4, 5, and 6
// share one corpus and one set of trained models under the work directory;
// completed trainings found there are reused when their recorded
// configuration matches, so a partial run can be picked up without
// retraining.  The default work directory lives under the system temp root.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/cli.h"
#include "lipspot/common.h"
#include "lipspot/frontend.h"
#include "lipspot/g2p.h"
#include "lipspot/kwsnet.h"
#include "lipspot/manifest.h"
#include "lipspot/metrics.h"
#include "lipspot/nn/adam.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/phonedict.h"
#include "lipspot/rng.h"
#include "lipspot/synthcorpus.h"
#include "lipspot/training.h"
#include "support/gradcheck.h"
#include "support/metrics_oracle.h"
#include "support/toydict.h"

namespace fs = std::filesystem;

namespace lipspot {
namespace {

using cli::RunConfig;
using kws::KwsNet;
using kws::KwsNetConfig;
using kws::KwsOutput;
using kws::VideoEmbeddingNet;
using metrics::DetCurve;
using metrics::ScoreRecord;
using nn::Mat;
using nn::SeqBatch;
using nn::Vec;
using train::Trainer;
using train::TrainerOptions;

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Failure channel for criterion bodies: the message becomes the [FAIL]
// reason.  Infrastructure mishaps (a command refusing to run, a missing
// file) use it too, so every failure surfaces with a cause attached.
class CriterionFailure : public std::runtime_error {
 public:
  explicit CriterionFailure(const std::string& msg)
      : std::runtime_error(msg) {}
};

void Require(bool ok, const std::string& msg) {
  if (!ok) throw CriterionFailure(msg);
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CriterionFailure("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ---------------------------------------------------------------------------
// The shared synthetic experiment behind criteria 4, 5, and 6.
//
// Layout under the work directory:
//   corpus/           synthetic corpus (features, manifest, dictionary, splits)
//   corpus.cfg        configuration the corpus was generated from
//   queries.txt       the 50 held-out evaluation keywords
//   run_<variant>/    one training run per model variant
//   scores_<variant>. scoring outputs per variant
// ---------------------------------------------------------------------------

struct Experiment {
  fs::path root;
  bool reused_runs = false;  // a completed training was picked up from disk

  fs::path CorpusDir() const { return root / "corpus"; }
  fs::path QueryFile() const { return root / "queries.txt"; }
  fs::path RunDir(const std::string& variant) const {
    return root / ("run_" + variant);
  }
  fs::path ScorePrefix(const std::string& variant) const {
    return root / ("scores_" + variant);
  }
};

Experiment* TheExperiment(const fs::path* init = nullptr) {
  static Experiment exp;
  if (init != nullptr) exp.root = *init;
  return &exp;
}

// The experiment's base configuration: the desk-scale preset with the
// corpus paths plugged in.  Variants differ from it by single overrides.
RunConfig BaseConfig(const Experiment& exp) {
  RunConfig c = cli::MakePreset("desk-scale");
  c.dictionary = (exp.CorpusDir() / "dictionary.txt").string();
  c.manifest = (exp.CorpusDir() / "manifest.tsv").string();
  c.split_prefix = (exp.CorpusDir() / "splits").string();
  return c;
}

RunConfig VariantConfig(const Experiment& exp, const std::string& variant) {
  RunConfig c = BaseConfig(exp);
  c.out_dir = exp.RunDir(variant).string();
  if (variant == "vemb") cli::ApplyOverride(&c, "model", "videoemb");
  if (variant == "nodec")
    cli::ApplyOverride(&c, "g2p.decoder_enabled", "false");
  if (variant == "g2g")
    cli::ApplyOverride(&c, "g2p.target_alphabet", "graphemes");
  return c;
}

std::string SerializeSnapshot(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& [key, value] : cli::ConfigSnapshot(config))
    out << key << ' ' << value << '\n';
  return out.str();
}

void EnsureCorpus(Experiment* exp) {
  RunConfig base = BaseConfig(*exp);
  fs::path marker = exp->root / "corpus.cfg";
  std::string want = SerializeSnapshot(base);
  bool files_present = fs::exists(base.manifest) &&
                       fs::exists(base.dictionary) &&
                       fs::exists(base.split_prefix + ".train");
  if (files_present) {
    if (fs::exists(marker) && Slurp(marker) != want)
      throw CriterionFailure(
          "work directory holds a corpus generated from a different "
          "configuration; remove " +
          exp->root.string() + " and rerun");
    // Adopt a marker-less corpus only if it has the right shape.
    cli::Manifest manifest = cli::ReadManifestFile(base.manifest);
    Require(static_cast<int>(manifest.size()) == base.synth_n_utterances,
            "existing corpus has " + std::to_string(manifest.size()) +
                " records, expected " +
                std::to_string(base.synth_n_utterances));
    if (!fs::exists(marker)) {
      std::ofstream(marker) << want;
    }
    return;
  }
  std::cout << "  [setup] generating the synthetic corpus ..." << std::endl;
  cli::SynthArgs args;
  args.config = base;
  args.out_dir = exp->CorpusDir().string();
  std::ostringstream out, err;
  int rc = cli::CmdSynth(args, out, err);
  Require(rc == 0, "corpus generation failed (exit " + std::to_string(rc) +
                       "): " + err.str());
  std::ofstream(marker) << want;
}

// The 50 evaluation keywords: distinct test-vocabulary words of at least
// six phonemes occurring in the test-subset transcripts.  None of them is
// ever eligible as a training pair keyword, so every query is zero-shot.
std::vector<std::string> EnsureQueries(Experiment* exp) {
  EnsureCorpus(exp);
  if (fs::exists(exp->QueryFile())) {
    std::istringstream in(Slurp(exp->QueryFile()));
    std::vector<std::string> queries;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) queries.push_back(line);
    Require(queries.size() == 50, "stale query file " +
                                      exp->QueryFile().string() +
                                      "; remove the work directory");
    return queries;
  }
  RunConfig base = BaseConfig(*exp);
  std::ifstream din(base.dictionary);
  PhoneticDictionary dict = ParseDictionary(din);
  VocabularySplit split = ReadSplitFiles(base.split_prefix);
  cli::Manifest manifest = cli::ReadManifestFile(base.manifest);
  std::vector<std::vector<std::string>> test_transcripts;
  for (const cli::ManifestRecord& r : manifest.records)
    if (r.subset == "test") test_transcripts.push_back(r.transcript);
  std::set<std::string> train_vocab(split.train.begin(), split.train.end());
  std::set<std::string> dev_vocab(split.validation.begin(),
                                  split.validation.end());
  std::vector<std::string> queries = metrics::BuildQueryList(
      test_transcripts, train_vocab, dev_vocab, dict, /*min_phonemes=*/6);
  Require(queries.size() >= 50,
          "only " + std::to_string(queries.size()) +
              " eligible held-out keywords; need 50");
  queries.resize(50);
  std::ofstream qf(exp->QueryFile());
  for (const std::string& q : queries) qf << q << '\n';
  return queries;
}

// True when out_dir holds a finished training of exactly this
// configuration: the best checkpoint's recorded settings match and the log
// covers every scheduled epoch.
bool CompletedRun(const RunConfig& config) {
  fs::path best = fs::path(config.out_dir) / "best.ckpt";
  fs::path log = fs::path(config.out_dir) / "train_log.csv";
  if (!fs::exists(best) || !fs::exists(log)) return false;
  std::map<std::string, std::string> meta;
  try {
    meta = train::ReadCheckpointMeta(best.string());
  } catch (const std::exception&) {
    return false;
  }
  for (const auto& [key, value] : cli::ConfigSnapshot(config)) {
    auto it = meta.find("cfg." + key);
    if (it == meta.end() || it->second != value) return false;
  }
  std::ifstream in(log);
  return static_cast<int>(train::ReadTrainingLog(in).size()) ==
         config.schedule.total_epochs;
}

fs::path EnsureTrained(Experiment* exp, const std::string& variant) {
  EnsureCorpus(exp);
  RunConfig config = VariantConfig(*exp, variant);
  fs::path best = exp->RunDir(variant) / "best.ckpt";
  if (CompletedRun(config)) {
    exp->reused_runs = true;
    return best;
  }
  std::cout << "  [setup] training variant '" << variant << "' ("
            << config.schedule.total_epochs << " epochs) ..." << std::endl;
  cli::TrainArgs args;
  args.config = config;
  std::ostringstream out, err;
  int rc = cli::CmdTrain(args, out, err);
  Require(rc == 0, "training variant '" + variant + "' failed (exit " +
                       std::to_string(rc) + "): " + err.str());
  return best;
}

fs::path EnsureScored(Experiment* exp, const std::string& variant) {
  fs::path scores = exp->ScorePrefix(variant);
  fs::path csv = scores.string() + ".scores.csv";
  if (fs::exists(csv)) return csv;
  fs::path checkpoint = EnsureTrained(exp, variant);
  EnsureQueries(exp);
  RunConfig base = BaseConfig(*exp);
  cli::ScoreArgs args;
  args.checkpoint = checkpoint.string();
  args.manifest = base.manifest;
  args.dictionary = base.dictionary;
  args.split_prefix = base.split_prefix;
  args.query_file = exp->QueryFile().string();
  args.subset = "test";
  args.out_prefix = scores.string();
  std::ostringstream out, err;
  int rc = cli::CmdScore(args, out, err);
  Require(rc == 0, "scoring variant '" + variant + "' failed (exit " +
                       std::to_string(rc) + "): " + err.str());
  return csv;
}

std::vector<ScoreRecord> ScoreRecordsFor(Experiment* exp,
                                         const std::string& variant) {
  fs::path csv = EnsureScored(exp, variant);
  std::ifstream in(csv);
  return metrics::ReadScoreRecords(in);
}

double EerOf(const std::vector<ScoreRecord>& records) {
  return metrics::ComputeEer(metrics::ComputeDet(records));
}

// The label-shuffled control: the same scores with labels reassigned by a
// seeded permutation.  Any real association between scores and labels is
// destroyed, so the equal-error rate concentrates near one half; a model
// that learned nothing is indistinguishable from it.
double ShuffledControlEer(std::vector<ScoreRecord> records, uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const ScoreRecord& r : records) labels.push_back(r.label);
  Rng rng(seed);
  for (int i = static_cast<int>(labels.size()) - 1; i > 0; --i)
    std::swap(labels[i], labels[rng.UniformInt(i + 1)]);
  for (size_t i = 0; i < records.size(); ++i)
    records[i].label = labels[i];
  return EerOf(records);
}

// Parses a localization CSV (query,video,t_hat,windows); rows without
// windows are negatives and carry no ground truth, so they are skipped.
std::vector<metrics::LocalizationRecord> ReadLocalizations(
    const fs::path& path) {
  std::istringstream in(Slurp(path));
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)) &&
              line == "query,video,t_hat,windows",
          "unexpected localization header in " + path.string());
  std::vector<metrics::LocalizationRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    Require(fields.size() == 3 || fields.size() == 4,
            "malformed localization row: " + line);
    if (fields.size() == 3 || fields[3].empty()) continue;
    metrics::LocalizationRecord rec;
    rec.t_hat = std::stoi(fields[2]);
    std::istringstream ws(fields[3]);
    std::string window;
    while (ws >> window) {
      size_t colon = window.find(':');
      Require(colon != std::string::npos, "malformed window: " + window);
      rec.windows.emplace_back(std::stoi(window.substr(0, colon)),
                               std::stoi(window.substr(colon + 1)));
    }
    records.push_back(rec);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Criterion bodies.  Each returns detail lines and throws CriterionFailure
// with the reason when its gate is not met.
// ---------------------------------------------------------------------------

// 1. Analytic gradients match central finite differences on every trainable
//    parameter of each network head and of the whole fused model, on short
//    sequences (T <= 6) with all widths <= 8, in double precision.
std::vector<std::string> Criterion1() {
  auto start = Clock::now();
  std::vector<std::string> details;
  constexpr double kTol = 1e-4;

  auto random_batch = [](const std::vector<int>& lengths, int dim,
                         uint64_t seed) {
    Rng rng(seed);
    std::vector<Mat<double>> seqs;
    for (int len : lengths) {
      Mat<double> s(len, dim);
      for (int i = 0; i < len; ++i)
        for (int j = 0; j < dim; ++j) s(i, j) = rng.Normal();
      seqs.push_back(s);
    }
    return nn::PackSequences(seqs);
  };
  auto random_mat = [](int rows, int cols, uint64_t seed) {
    Rng rng(seed);
    Mat<double> m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.Normal();
    return m;
  };
  auto mean_bce = [](const Mat<double>& logits, const Vec<double>& labels) {
    Vec<double> lv = logits.col(0);
    return nn::SigmoidBce(lv, labels).losses.sum() /
           static_cast<double>(labels.size());
  };
  auto mean_bce_grad = [](const Mat<double>& logits,
                          const Vec<double>& labels) {
    Vec<double> lv = logits.col(0);
    Mat<double> d = nn::SigmoidBce(lv, labels).dlogits /
                    static_cast<double>(labels.size());
    return d;
  };
  auto finish = [&](const std::string& name,
                    const testing::GradCheckReport& report,
                    int64_t expected_entries) {
    Require(report.max_rel_err < kTol,
            name + ": max relative error " +
                Fmt("%.3g", report.max_rel_err) + " at " +
                report.worst_param + " >= 1e-4");
    Require(report.entries_checked == expected_entries,
            name + ": " + std::to_string(report.entries_checked) +
                " entries checked, expected " +
                std::to_string(expected_entries));
    details.push_back(name + ": max rel err " +
                      Fmt("%.2g", report.max_rel_err) + " over " +
                      std::to_string(report.entries_checked) + " entries");
  };

  PhoneticDictionary dict = ParseString(
      "AB AH BH\n"
      "BAA BH AH\n"
      "ABBA AH BH BH AH\n");
  auto graphemes = [&dict](const std::string& w) {
    return EncodeWord(w, dict.grapheme_set());
  };

  // Pronunciation-decoder loss through the full encoder-decoder model,
  // with a readout on the embedding so the encoder bottleneck is covered.
  {
    g2p::G2PConfig cfg;
    cfg.hidden_size = 4;
    cfg.embedding_size = 8;
    cfg.grapheme_table_size = dict.grapheme_set().table_size();
    cfg.target_alphabet_size = dict.phone_set().size();
    g2p::G2pModel<double> model(cfg);
    Rng rng(101);
    model.Init(&rng);
    nn::ParamRegistry<double> reg;
    model.Register(&reg, "g2p");
    std::vector<std::vector<int>> words = {graphemes("AB"), graphemes("ABBA")};
    std::vector<std::vector<int>> targets;
    for (const char* w : {"AB", "ABBA"})
      targets.push_back(g2p::SelectAuxiliaryTarget(
          cfg, *dict.Find(w), dict.phone_set(), dict.grapheme_set()));
    Vec<double> scale(2);
    scale << 0.6, 1.4;
    Vec<double> u(cfg.embedding_size);
    Rng urng(102);
    for (int i = 0; i < u.size(); ++i) u[i] = urng.Normal();
    auto loss_fn = [&]() {
      Mat<double> r = model.EncodeBatch(words, false);
      Vec<double> aux = model.AuxiliaryLossBatch(targets, false);
      Vec<double> proj = r * u;
      return aux.dot(scale) + proj.array().square().sum();
    };
    auto backward_fn = [&]() {
      reg.ZeroGrad();
      Mat<double> r = model.EncodeBatch(words, true);
      model.AuxiliaryLossBatch(targets, true);
      Vec<double> proj = r * u;
      Mat<double> dr = (2.0 * proj) * u.transpose();
      model.Backward(scale, dr);
    };
    finish("decoder loss", testing::CheckGradients(reg, loss_fn, backward_fn),
           reg.NumTrainable());
  }

  // The three classifier heads over random features and embeddings.
  struct HeadCase {
    const char* name;
    KwsNetConfig::Backend backend;
    uint64_t seed;
  };
  for (const HeadCase& hc :
       {HeadCase{"feed-forward classifier", KwsNetConfig::Backend::kFeedForward,
                 211},
        HeadCase{"sequence classifier", KwsNetConfig::Backend::kSequence, 223},
        HeadCase{"video-embedding classifier",
                 KwsNetConfig::Backend::kVideoEmbedding, 227}}) {
    KwsNetConfig cfg;
    cfg.d_feat = 5;
    cfg.d_v = 8;
    cfg.d_r = 4;
    cfg.d_s = 3;
    cfg.dropout_p = 0.0;  // finite differences need deterministic forwards
    cfg.backend = hc.backend;
    nn::ParamRegistry<double> reg;
    SeqBatch<double> x = random_batch({6, 3, 4}, cfg.d_feat, hc.seed);
    Mat<double> r = random_mat(3, cfg.d_r, hc.seed + 1);
    Mat<double> dr_buf = Mat<double>::Zero(3, cfg.d_r);
    Vec<double> labels(3);
    labels << 1.0, 0.0, 1.0;
    testing::GradCheckReport report;
    if (hc.backend == KwsNetConfig::Backend::kVideoEmbedding) {
      VideoEmbeddingNet<double> net(cfg);
      Rng rng(hc.seed + 2);
      net.Init(&rng);
      net.Register(&reg);
      reg.Add("r", &r, &dr_buf);
      auto loss_fn = [&]() {
        KwsOutput<double> out =
            net.Forward(x, r, nn::kGradCheckMode, nullptr, false);
        return mean_bce(out.logits, labels);
      };
      auto backward_fn = [&]() {
        reg.ZeroGrad();
        KwsOutput<double> out =
            net.Forward(x, r, nn::kGradCheckMode, nullptr, true);
        dr_buf += net.Backward(mean_bce_grad(out.logits, labels));
      };
      report = testing::CheckGradients(reg, loss_fn, backward_fn);
    } else {
      KwsNet<double> net(cfg);
      Rng rng(hc.seed + 2);
      net.Init(&rng);
      net.Register(&reg);
      reg.Add("r", &r, &dr_buf);
      auto loss_fn = [&]() {
        KwsOutput<double> out =
            net.Forward(x, r, nn::kGradCheckMode, nullptr, false);
        return mean_bce(out.logits, labels);
      };
      auto backward_fn = [&]() {
        reg.ZeroGrad();
        KwsOutput<double> out =
            net.Forward(x, r, nn::kGradCheckMode, nullptr, true);
        dr_buf += net.Backward(mean_bce_grad(out.logits, labels));
      };
      report = testing::CheckGradients(reg, loss_fn, backward_fn);
    }
    finish(hc.name, report, reg.NumTrainable());
  }

  // The fused model: encoder embeddings feed the sequence classifier, and
  // the joint objective couples the spotting loss with the decoder loss.
  {
    g2p::G2PConfig gcfg;
    gcfg.hidden_size = 3;
    gcfg.embedding_size = 6;
    gcfg.grapheme_table_size = dict.grapheme_set().table_size();
    gcfg.target_alphabet_size = dict.phone_set().size();
    g2p::G2pModel<double> g2p_model(gcfg);
    KwsNetConfig kcfg;
    kcfg.d_feat = 5;
    kcfg.d_v = 8;
    kcfg.d_r = 6;
    kcfg.d_s = 3;
    kcfg.dropout_p = 0.0;
    kcfg.backend = KwsNetConfig::Backend::kSequence;
    KwsNet<double> kws_net(kcfg);
    Rng rng(301);
    g2p_model.Init(&rng);
    kws_net.Init(&rng);
    nn::ParamRegistry<double> reg;
    g2p_model.Register(&reg, "g2p");
    kws_net.Register(&reg);

    std::vector<std::vector<int>> words = {graphemes("AB"), graphemes("BAA"),
                                           graphemes("ABBA")};
    std::vector<std::vector<int>> targets;
    for (const char* w : {"AB", "BAA", "ABBA"})
      targets.push_back(g2p::SelectAuxiliaryTarget(
          gcfg, *dict.Find(w), dict.phone_set(), dict.grapheme_set()));
    SeqBatch<double> x = random_batch({6, 4, 5}, kcfg.d_feat, 302);
    Vec<double> labels(3);
    labels << 0.0, 1.0, 1.0;
    const double alpha_w = 0.35;
    Vec<double> aux_scale = Vec<double>::Constant(3, alpha_w / 3.0);
    auto loss_fn = [&]() {
      Mat<double> r = g2p_model.EncodeBatch(words, false);
      Vec<double> aux = g2p_model.AuxiliaryLossBatch(targets, false);
      KwsOutput<double> out =
          kws_net.Forward(x, r, nn::kGradCheckMode, nullptr, false);
      return mean_bce(out.logits, labels) + alpha_w * aux.mean();
    };
    auto backward_fn = [&]() {
      reg.ZeroGrad();
      Mat<double> r = g2p_model.EncodeBatch(words, true);
      g2p_model.AuxiliaryLossBatch(targets, true);
      KwsOutput<double> out =
          kws_net.Forward(x, r, nn::kGradCheckMode, nullptr, true);
      Mat<double> dr = kws_net.Backward(mean_bce_grad(out.logits, labels));
      g2p_model.Backward(aux_scale, dr);
    };
    finish("fused network", testing::CheckGradients(reg, loss_fn, backward_fn),
           reg.NumTrainable());
  }

  double elapsed = SecondsSince(start);
  Require(elapsed < 60.0,
          "gradient checks took " + Fmt("%.1f", elapsed) + " s >= 60 s");
  return details;
}

// 2. The detection metrics agree with independent brute-force oracles on
//    randomized score sets: curve points and Top-N rates exactly, the
//    interpolated rates to 1e-12.
std::vector<std::string> Criterion2() {
  auto start = Clock::now();
  constexpr double kTol = 1e-12;
  int64_t comparisons = 0;
  for (int instance = 0; instance < 50; ++instance) {
    Rng rng(4000 + instance);
    int n = 2 + rng.UniformInt(999);
    int n_queries = 1 + rng.UniformInt(8);
    int quant = rng.UniformInt(4);  // 0: none, else round to 10^(1-quant)
    std::vector<ScoreRecord> records(n);
    for (int i = 0; i < n; ++i) {
      records[i].query = "q" + std::to_string(rng.UniformInt(n_queries));
      records[i].video = "v" + std::to_string(i);
      double s = rng.Normal() * 3.0;
      if (quant > 0) {
        double scale = std::pow(10.0, 1 - quant);
        s = std::round(s / scale) * scale;
      }
      records[i].score = s;
      records[i].label = rng.UniformInt(2);
    }
    records[0].label = 1;  // at least one of each class
    records[1].label = 0;

    DetCurve curve = metrics::ComputeDet(records);
    std::vector<metrics::DetPoint> oracle = testing::OracleDetPoints(records);
    Require(curve.points.size() == oracle.size(),
            "instance " + std::to_string(instance) + ": curve has " +
                std::to_string(curve.points.size()) + " points, oracle " +
                std::to_string(oracle.size()));
    for (size_t i = 0; i < oracle.size(); ++i) {
      const metrics::DetPoint& a = curve.points[i];
      const metrics::DetPoint& b = oracle[i];
      bool same_threshold =
          a.threshold == b.threshold ||
          (std::isinf(a.threshold) && std::isinf(b.threshold) &&
           std::signbit(a.threshold) == std::signbit(b.threshold));
      Require(same_threshold && a.far == b.far && a.mdr == b.mdr,
              "instance " + std::to_string(instance) + ": curve point " +
                  std::to_string(i) + " mismatches the oracle");
      ++comparisons;
    }

    double eer = metrics::ComputeEer(curve);
    Require(std::abs(eer - testing::OracleEer(oracle)) <= kTol,
            "instance " + std::to_string(instance) + ": equal-error rate " +
                Fmt("%.17g", eer) + " off the oracle");
    ++comparisons;

    for (int probe = 0; probe < 3; ++probe) {
      double x = rng.Uniform();
      Require(std::abs(metrics::MdrAtFar(curve, x) -
                       testing::OracleMdrAtFar(oracle, x)) <= kTol,
              "instance " + std::to_string(instance) +
                  ": missed-detection rate at false-alarm " + Fmt("%.3f", x) +
                  " off the oracle");
      Require(std::abs(metrics::FarAtMdr(curve, x) -
                       testing::OracleFarAtMdr(oracle, x)) <= kTol,
              "instance " + std::to_string(instance) +
                  ": false-alarm rate at missed-detection " + Fmt("%.3f", x) +
                  " off the oracle");
      comparisons += 2;
    }
    // Probe one achieved plateau value exactly.
    {
      double x = oracle[rng.UniformInt(static_cast<int>(oracle.size()))].far;
      Require(std::abs(metrics::MdrAtFar(curve, x) -
                       testing::OracleMdrAtFar(oracle, x)) <= kTol,
              "instance " + std::to_string(instance) +
                  ": plateau rate at false-alarm " + Fmt("%.6f", x) +
                  " off the oracle");
      ++comparisons;
    }

    std::vector<int> n_values = {1, 2, 4, 8, 1 + rng.UniformInt(20)};
    std::map<int, double> rates = metrics::TopNRates(records, n_values);
    for (int nv : n_values) {
      Require(rates.at(nv) == testing::OracleTopN(records, nv),
              "instance " + std::to_string(instance) + ": top-" +
                  std::to_string(nv) + " rate off the oracle");
      ++comparisons;
    }
  }
  double elapsed = SecondsSince(start);
  Require(elapsed < 30.0,
          "metric oracles took " + Fmt("%.1f", elapsed) + " s >= 30 s");
  return {"50 randomized instances, " + std::to_string(comparisons) +
          " oracle comparisons, all matched"};
}

// 3. A full-width pronunciation model fits a 50-word toy dictionary: the
//    decoder loss drops below 0.05 and greedy decoding reproduces every
//    training pronunciation exactly.
std::vector<std::string> Criterion3() {
  auto start = Clock::now();
  PhoneticDictionary dict = testing::MakeToyDictionary(50, 3, 7, 67);
  g2p::G2PConfig cfg;
  cfg.grapheme_table_size = dict.grapheme_set().table_size();
  cfg.target_alphabet_size = dict.phone_set().size();
  g2p::G2pModel<float> model(cfg);
  Rng rng(68);
  model.Init(&rng);
  nn::ParamRegistry<float> reg;
  model.Register(&reg, "g2p");
  nn::AdamOptimizer<float> adam;

  std::vector<std::vector<int>> words, targets;
  for (const std::string& w : dict.Words()) {
    words.push_back(EncodeWord(w, dict.grapheme_set()));
    targets.push_back(g2p::SelectAuxiliaryTarget(
        cfg, *dict.Find(w), dict.phone_set(), dict.grapheme_set()));
  }
  Vec<float> scale = Vec<float>::Constant(50, 1.0f / 50.0f);

  auto decode_all = [&]() {
    int exact = 0;
    for (size_t i = 0; i < words.size(); ++i) {
      auto res = model.DecodePronunciation(words[i], nullptr);
      if (res.ended && res.symbols == targets[i]) ++exact;
    }
    return exact;
  };

  float loss = 1e9f;
  int steps = 0, exact = 0;
  while (SecondsSince(start) < 270.0 && steps < 3000) {
    reg.ZeroGrad();
    model.EncodeBatch(words, true);
    loss = model.AuxiliaryLossBatch(targets, true).mean();
    model.Backward(scale, Mat<float>());
    adam.Step(reg, 2e-3f);
    ++steps;
    if (loss < 0.05f && steps % 25 == 0) {
      exact = decode_all();
      if (exact == 50) break;
    }
  }
  if (exact != 50) exact = decode_all();

  Require(loss < 0.05f, "decoder loss " + Fmt("%.4f", loss) +
                            " >= 0.05 after " + std::to_string(steps) +
                            " steps");
  Require(exact == 50, "only " + std::to_string(exact) +
                           " of 50 pronunciations decode exactly (loss " +
                           Fmt("%.4f", loss) + ")");
  double elapsed = SecondsSince(start);
  Require(elapsed < 300.0,
          "fit took " + Fmt("%.1f", elapsed) + " s >= 300 s");
  return {"loss " + Fmt("%.4f", loss) + " after " + std::to_string(steps) +
          " steps, all 50 pronunciations exact"};
}

// 4. The zero-shot experiment: on a 2000-utterance synthetic corpus with a
//    300-word training vocabulary, the spotting model evaluated on 50
//    held-out keywords (six-plus phonemes, never paired in training) beats
//    20% equal-error rate, the label-shuffled control, and the
//    video-embedding baseline trained identically.
std::vector<std::string> Criterion4() {
  auto start = Clock::now();
  Experiment* exp = TheExperiment();
  std::vector<std::string> queries = EnsureQueries(exp);

  // Confirm the corpus shape the experiment promises.
  RunConfig base = BaseConfig(*exp);
  VocabularySplit split = ReadSplitFiles(base.split_prefix);
  Require(base.synth_n_utterances == 2000,
          "expected a 2000-utterance corpus");
  Require(static_cast<int>(split.train.size()) == 300,
          "expected 300 training-vocabulary words, found " +
              std::to_string(split.train.size()));
  Require(base.schedule.total_epochs <= 30,
          "schedule exceeds the 30-epoch budget");
  {
    std::ifstream din(base.dictionary);
    PhoneticDictionary dict = ParseDictionary(din);
    std::set<std::string> heldout(split.test.begin(), split.test.end());
    for (const std::string& q : queries) {
      Require(heldout.count(q) == 1,
              "query " + q + " is not a held-out test word");
      const DictEntry* e = dict.Find(q);
      Require(e != nullptr &&
                  static_cast<int>(e->pronunciations[0].size()) >= 6,
              "query " + q + " has fewer than 6 phonemes");
    }
  }

  std::vector<ScoreRecord> main_records = ScoreRecordsFor(exp, "main");
  double main_eer = EerOf(main_records);
  double shuffled_eer = ShuffledControlEer(main_records, 73);
  double vemb_eer = EerOf(ScoreRecordsFor(exp, "vemb"));

  std::vector<std::string> details;
  details.push_back(
      "50 held-out queries, " + std::to_string(main_records.size()) +
      " scored pairs; equal-error rates: model " + Fmt("%.4f", main_eer) +
      ", shuffled control " + Fmt("%.4f", shuffled_eer) +
      ", video-embedding baseline " + Fmt("%.4f", vemb_eer));
  if (exp->reused_runs)
    details.push_back(
        "completed trainings were reused from the work directory");

  Require(main_eer < 0.20, "equal-error rate " + Fmt("%.4f", main_eer) +
                               " >= 0.20 on held-out keywords");
  Require(main_eer < shuffled_eer,
          "equal-error rate " + Fmt("%.4f", main_eer) +
              " does not beat the label-shuffled control " +
              Fmt("%.4f", shuffled_eer));
  Require(main_eer < vemb_eer,
          "equal-error rate " + Fmt("%.4f", main_eer) +
              " does not beat the video-embedding baseline " +
              Fmt("%.4f", vemb_eer));
  double elapsed = SecondsSince(start);
  Require(elapsed < 2700.0,
          "experiment took " + Fmt("%.1f", elapsed) + " s >= 2700 s");
  return details;
}

// 5. On the same run, at least 80% of the positive pairs' peak-score frames
//    fall inside a planted occurrence of the keyword widened by two frames.
std::vector<std::string> Criterion5() {
  Experiment* exp = TheExperiment();
  EnsureScored(exp, "main");
  fs::path loc = exp->ScorePrefix("main").string() + ".loc.csv";
  Require(fs::exists(loc), "no localization output at " + loc.string());
  std::vector<metrics::LocalizationRecord> records = ReadLocalizations(loc);
  Require(!records.empty(), "no positive pairs to localize");
  double accuracy = metrics::LocalizationAccuracy(records, /*tolerance=*/2);
  std::vector<std::string> details = {
      Fmt("%.4f", accuracy) + " of " + std::to_string(records.size()) +
      " positive pairs localized within +-2 frames"};
  Require(accuracy >= 0.80,
          "localization accuracy " + Fmt("%.4f", accuracy) + " < 0.80");
  return details;
}

// 6. Ablation ordering: training with the auxiliary pronunciation decoder
//    must evaluate at least as well as training without it.  The
//    grapheme-target variant is reported alongside without a gate.
std::vector<std::string> Criterion6() {
  Experiment* exp = TheExperiment();
  double main_eer = EerOf(ScoreRecordsFor(exp, "main"));
  double nodec_eer = EerOf(ScoreRecordsFor(exp, "nodec"));
  double g2g_eer = EerOf(ScoreRecordsFor(exp, "g2g"));
  std::vector<std::string> details = {
      "equal-error rates: with decoder " + Fmt("%.4f", main_eer) +
      ", without decoder " + Fmt("%.4f", nodec_eer) +
      ", grapheme targets " + Fmt("%.4f", g2g_eer) + " (reported, not gated)"};
  Require(main_eer <= nodec_eer,
          "decoder-assisted equal-error rate " + Fmt("%.4f", main_eer) +
              " is worse than the no-decoder variant " +
              Fmt("%.4f", nodec_eer));
  return details;
}

// 7. Pairing balance, vocabulary isolation, the learning-rate staircase,
//    and the phase-boundary freeze.
std::vector<std::string> Criterion7(const fs::path& workdir) {
  std::vector<std::string> details;

  // (a) 1000 randomized minibatches: per-video balance, keyword
  //     eligibility, label correctness.
  PhoneticDictionary dict = synth::MakeSyntheticDictionary(80, 4, 9, 701);
  VocabularySplit split = SplitVocabulary(dict, {0.7, 0.1, 0.2}, 702);
  std::set<std::string> train_vocab(split.train.begin(), split.train.end());
  std::set<std::string> forbidden(split.validation.begin(),
                                  split.validation.end());
  forbidden.insert(split.test.begin(), split.test.end());
  std::vector<std::string> all_words = dict.Words();
  g2p::G2PConfig gcfg;
  gcfg.hidden_size = 4;
  gcfg.embedding_size = 8;
  Rng rng(703);
  int64_t pairs_seen = 0;
  for (int batch = 0; batch < 1000; ++batch) {
    int n_videos = 2 + rng.UniformInt(9);
    std::vector<cli::ManifestRecord> storage(n_videos);
    std::vector<const cli::ManifestRecord*> videos;
    for (int v = 0; v < n_videos; ++v) {
      storage[v].video_id = "b" + std::to_string(batch) + "v" +
                            std::to_string(v);
      int n_words = 1 + rng.UniformInt(6);
      for (int w = 0; w < n_words; ++w)
        storage[v].transcript.push_back(
            all_words[rng.UniformInt(static_cast<int>(all_words.size()))]);
      videos.push_back(&storage[v]);
    }
    int min_phonemes = (batch % 2 == 0) ? 4 : 6;
    train::PairSet ps = train::BuildPairs(videos, train_vocab, dict, gcfg,
                                          min_phonemes, &rng);
    std::map<std::string, std::pair<int, int>> balance;
    for (const train::PairExample& p : ps.pairs) {
      Require(train_vocab.count(p.keyword) == 1,
              "pair keyword " + p.keyword +
                  " is outside the training vocabulary");
      Require(forbidden.count(p.keyword) == 0,
              "held-out word " + p.keyword + " used as a training keyword");
      const DictEntry* e = dict.Find(p.keyword);
      Require(e != nullptr && static_cast<int>(
                                  e->pronunciations[0].size()) >= min_phonemes,
              "pair keyword " + p.keyword + " under the length floor");
      const cli::ManifestRecord* rec = nullptr;
      for (const cli::ManifestRecord& s : storage)
        if (s.video_id == p.video_id) rec = &s;
      Require(rec != nullptr, "pair names an unknown video");
      bool occurs = std::find(rec->transcript.begin(), rec->transcript.end(),
                              p.keyword) != rec->transcript.end();
      Require((p.label == 1) == occurs,
              "pair label disagrees with the transcript for " + p.keyword);
      auto& [pos, neg] = balance[p.video_id];
      (p.label == 1 ? pos : neg) += 1;
      ++pairs_seen;
    }
    for (const auto& [video, counts] : balance)
      Require(counts.first == counts.second,
              "video " + video + " has " + std::to_string(counts.first) +
                  " positives but " + std::to_string(counts.second) +
                  " negatives");
  }
  details.push_back("1000 minibatches, " + std::to_string(pairs_seen) +
                    " pairs: balanced, eligible, correctly labeled");

  // (b) The stepped learning-rate schedule matches its closed form at
  //     every epoch, for the published schedule and a reduced one.
  for (const auto& [initial, interval, total] :
       {std::tuple<double, int, int>{2e-3, 20, 100},
        std::tuple<double, int, int>{2e-3, 10, 24}}) {
    train::OptimizerSchedule sched;
    sched.initial_lr = initial;
    sched.decay_interval = interval;
    sched.total_epochs = total;
    for (int epoch = 1; epoch <= total; ++epoch) {
      double expected = std::ldexp(initial, -((epoch - 1) / interval));
      Require(sched.LearningRate(epoch) == expected,
              "learning rate at epoch " + std::to_string(epoch) +
                  " deviates from the closed form");
    }
  }
  details.push_back("learning-rate staircase exact at every epoch");

  // (c) The standard curriculum switches phases at epoch 21, and the
  //     phase-boundary freeze holds every listed parameter (and its
  //     optimizer moments) bit-still for exactly one epoch.
  {
    std::vector<train::CurriculumPhase> published =
        train::MakeCurriculum(20, 100);
    Require(published.size() == 2 && published[1].first_epoch == 21,
            "standard curriculum does not switch phases at epoch 21");
    Require(!published[1].freeze_first_epoch.empty(),
            "standard curriculum freezes nothing at the boundary");

    PhoneticDictionary tdict = synth::MakeSyntheticDictionary(36, 6, 9, 711);
    VocabularySplit tsplit = SplitVocabulary(tdict, {0.7, 0.1, 0.2}, 712);
    synth::SynthConfig scfg;
    scfg.d_feat = 8;
    scfg.frames_per_phoneme = 2;
    scfg.noise_sigma = 0.05;
    scfg.min_words = 2;
    scfg.max_words = 4;
    scfg.planted_per_utterance = 1;
    fs::path dir = workdir / "freeze_probe";
    fs::remove_all(dir);
    cli::Manifest manifest =
        synth::GenerateCorpus(tdict, tsplit, 18, scfg, 713, dir.string());
    kws::KwsNetConfig kcfg;
    kcfg.d_feat = 8;
    kcfg.d_v = 8;
    kcfg.d_r = 8;
    kcfg.d_s = 4;
    g2p::G2PConfig gc;
    gc.hidden_size = 6;
    gc.embedding_size = 8;
    TrainerOptions opt;
    opt.schedule.total_epochs = 3;
    opt.schedule.videos_per_minibatch = 6;
    opt.curriculum = train::MakeCurriculum(1, 3);
    opt.master_seed = 714;
    opt.validation_min_phonemes = 6;
    Trainer trainer(manifest, dir.string(), tdict, tsplit, kcfg, gc, opt);
    trainer.TrainEpoch();

    const std::vector<std::string>& prefixes =
        opt.curriculum[1].freeze_first_epoch;
    auto snapshot = [&](const std::vector<std::string>& pfx) {
      std::map<std::string, Mat<float>> snap;
      for (const auto& item : trainer.registry().items())
        for (const std::string& p : pfx)
          if (item.name.rfind(p, 0) == 0) {
            snap[item.name] = *item.value;
            break;
          }
      return snap;
    };
    std::map<std::string, Mat<float>> before = snapshot(prefixes);
    std::map<std::string, Mat<float>> moments_before;
    for (const auto& [name, mom] : trainer.optimizer().slots())
      for (const std::string& p : prefixes)
        if (name.rfind(p, 0) == 0) {
          moments_before[name] = mom.m;
          break;
        }
    Require(!before.empty() && !moments_before.empty(),
            "freeze probe found no frozen parameters");

    trainer.TrainEpoch();  // the boundary epoch: frozen parameters hold
    Require(trainer.kws_model().backend() ==
                kws::KwsNetConfig::Backend::kSequence,
            "the boundary epoch did not switch the classifier backend");
    for (const auto& [name, value] : before)
      Require((*trainer.registry().Find(name)->value - value)
                      .cwiseAbs()
                      .maxCoeff() == 0.0f,
              "frozen parameter " + name + " moved during the boundary epoch");
    for (const auto& [name, m] : moments_before)
      Require((trainer.optimizer().slots().at(name).m - m)
                      .cwiseAbs()
                      .maxCoeff() == 0.0f,
              "optimizer moment of frozen " + name + " moved");

    trainer.TrainEpoch();  // the freeze lifts afterwards
    double thawed = 0.0;
    for (const auto& [name, value] : before)
      thawed = std::max(thawed, static_cast<double>(
                                    (*trainer.registry().Find(name)->value -
                                     value)
                                        .cwiseAbs()
                                        .maxCoeff()));
    Require(thawed > 0.0, "frozen parameters never thawed after the boundary");
    fs::remove_all(dir);
    details.push_back("boundary freeze bit-exact over " +
                      std::to_string(before.size()) + " tensors, then thawed");
  }
  return details;
}

// 8. The visual frontend maps T x 112 x 112 clips to T x 256 features at
//    several lengths, and a single-frame perturbation reaches exactly the
//    rows within two steps of it.
std::vector<std::string> Criterion8() {
  std::vector<std::string> details;
  auto noise_clip = [](int frames, uint64_t seed) {
    Rng rng(seed);
    frontend::FrameSequence seq;
    for (int t = 0; t < frames; ++t) {
      Mat<float> frame(112, 112);
      for (int y = 0; y < 112; ++y)
        for (int x = 0; x < 112; ++x)
          frame(y, x) = static_cast<float>(rng.Uniform());
      seq.frames.push_back(frame);
    }
    return seq;
  };

  frontend::ResNetConfig config;  // full width: 256-dimensional features
  frontend::SpatioTemporalResNet net(config);
  Rng rng(801);
  net.InitRandom(&rng);
  for (int t : {5, 15, 145}) {
    frontend::FeatureSequence out = net.ExtractFeatures(noise_clip(t, 810 + t));
    Require(out.features.rows() == t && out.features.cols() == 256,
            "clip of " + std::to_string(t) + " frames mapped to " +
                std::to_string(out.features.rows()) + " x " +
                std::to_string(out.features.cols()));
    Require(out.features.allFinite(),
            "non-finite features at length " + std::to_string(t));
  }
  details.push_back("5-, 15-, and 145-frame clips all map to T x 256");

  frontend::FrameSequence clip = noise_clip(9, 802);
  frontend::FeatureSequence base = net.ExtractFeatures(clip);
  const int perturbed = 4;
  frontend::FrameSequence poked = clip;
  poked.frames[perturbed].array() += 0.25f;
  frontend::FeatureSequence moved = net.ExtractFeatures(poked);
  for (int t = 0; t < 9; ++t) {
    float delta =
        (moved.features.row(t) - base.features.row(t)).cwiseAbs().maxCoeff();
    if (std::abs(t - perturbed) > 2)
      Require(delta == 0.0f, "frame " + std::to_string(perturbed) +
                                 " leaked into row " + std::to_string(t) +
                                 ", three or more steps away");
    else
      Require(delta > 0.0f, "row " + std::to_string(t) +
                                " ignored a perturbation within its field");
  }
  details.push_back(
      "perturbing one frame moves exactly the rows within two steps");
  return details;
}

// 9. Fixed seeds make training bit-reproducible; checkpoints round-trip
//    bit-exactly; a resumed run continues the original one exactly.
std::vector<std::string> Criterion9(const fs::path& workdir) {
  std::vector<std::string> details;
  PhoneticDictionary dict = synth::MakeSyntheticDictionary(36, 6, 9, 901);
  VocabularySplit split = SplitVocabulary(dict, {0.7, 0.1, 0.2}, 902);
  synth::SynthConfig scfg;
  scfg.d_feat = 8;
  scfg.frames_per_phoneme = 2;
  scfg.noise_sigma = 0.05;
  scfg.min_words = 2;
  scfg.max_words = 4;
  scfg.planted_per_utterance = 1;
  fs::path dir = workdir / "determinism_probe";
  fs::remove_all(dir);
  cli::Manifest manifest =
      synth::GenerateCorpus(dict, split, 16, scfg, 903, dir.string());
  kws::KwsNetConfig kcfg;
  kcfg.d_feat = 8;
  kcfg.d_v = 8;
  kcfg.d_r = 8;
  kcfg.d_s = 4;
  g2p::G2PConfig gcfg;
  gcfg.hidden_size = 6;
  gcfg.embedding_size = 8;
  TrainerOptions opt;
  opt.schedule.total_epochs = 3;
  opt.schedule.videos_per_minibatch = 6;
  opt.curriculum = train::MakeCurriculum(1, 3);
  opt.master_seed = 904;
  opt.validation_min_phonemes = 6;

  auto make_trainer = [&]() {
    return std::make_unique<Trainer>(manifest, dir.string(), dict, split,
                                     kcfg, gcfg, opt);
  };
  auto same_record = [](const train::EpochRecord& a,
                        const train::EpochRecord& b) {
    return a.epoch == b.epoch && a.phase == b.phase && a.lr == b.lr &&
           a.mean_primary_loss == b.mean_primary_loss &&
           a.mean_auxiliary_loss == b.mean_auxiliary_loss &&
           a.validation_eer == b.validation_eer;
  };
  auto registries_equal = [](const Trainer& a, const Trainer& b) {
    for (const auto& item : a.registry().items()) {
      const auto* other = b.registry().Find(item.name);
      if (other == nullptr) return false;
      if ((*item.value - *other->value).cwiseAbs().maxCoeff() != 0.0f)
        return false;
    }
    return true;
  };

  // (a) Two identically seeded two-epoch runs agree bit for bit.
  auto a = make_trainer();
  auto b = make_trainer();
  train::EpochRecord a1 = a->TrainEpoch(), b1 = b->TrainEpoch();
  train::EpochRecord a2 = a->TrainEpoch(), b2 = b->TrainEpoch();
  Require(same_record(a1, b1) && same_record(a2, b2),
          "identically seeded runs diverged in their loss sequences");
  Require(registries_equal(*a, *b),
          "identically seeded runs diverged in their parameters");
  details.push_back("two seeded runs: loss sequences and parameters"
                    " bit-identical over 2 epochs");

  // (b) Checkpoint round trip: load, compare, re-save byte-identically.
  fs::path ck1 = dir / "state_a.ckpt";
  fs::path ck2 = dir / "state_c.ckpt";
  a->SaveState(ck1.string());
  auto c = make_trainer();
  c->LoadState(ck1.string());
  Require(registries_equal(*a, *c), "loaded state differs from the saved one");
  for (const auto& [name, mom] : a->optimizer().slots()) {
    const auto& other = c->optimizer().slots().at(name);
    Require((mom.m - other.m).cwiseAbs().maxCoeff() == 0.0f &&
                (mom.v - other.v).cwiseAbs().maxCoeff() == 0.0f,
            "optimizer moments of " + name + " did not round-trip");
  }
  c->SaveState(ck2.string());
  Require(Slurp(ck1) == Slurp(ck2),
          "re-saved checkpoint is not byte-identical");
  details.push_back("checkpoint round trip byte-identical (" +
                    std::to_string(fs::file_size(ck1)) + " bytes)");

  // (c) Resuming reproduces the third epoch of the uninterrupted run.
  train::EpochRecord a3 = a->TrainEpoch();
  train::EpochRecord c3 = c->TrainEpoch();
  Require(same_record(a3, c3),
          "the resumed third epoch differs from the uninterrupted one");
  Require(registries_equal(*a, *c),
          "parameters diverged after the resumed epoch");
  details.push_back("resumed run matches the uninterrupted one bit for bit");
  fs::remove_all(dir);
  return details;
}

// 10. The hypothesis-list posterior: closed-form cases to 1e-12, agreement
//     with a direct oracle, and invariance to shifting every score.
std::vector<std::string> Criterion10() {
  constexpr double kTol = 1e-12;
  using metrics::AsrKeywordPosterior;
  using metrics::Hypothesis;
  using metrics::HypothesisList;

  HypothesisList all;
  all.hypotheses = {{1.0, "the cat sat"}, {0.5, "a cat stood"},
                    {-2.0, "cat"}};
  Require(std::abs(AsrKeywordPosterior(all, "cat") - 1.0) <= kTol,
          "keyword in every hypothesis must score 1");

  HypothesisList even;
  even.hypotheses = {{0.0, "yes word"}, {0.0, "no other"}};
  Require(std::abs(AsrKeywordPosterior(even, "word") - 0.5) <= kTol,
          "symmetric two-way case must score 1/2");

  HypothesisList skew;
  skew.fudge = 5.0;
  skew.hypotheses = {{5.0, "target here"}, {0.0, "something else"}};
  double expected = std::exp(1.0) / (std::exp(1.0) + 1.0);
  Require(std::abs(AsrKeywordPosterior(skew, "target") - expected) <= kTol,
          "five-to-zero case must score e/(e+1)");

  Require(std::abs(AsrKeywordPosterior(skew, "TARGET") -
                   AsrKeywordPosterior(skew, "target")) <= kTol,
          "keyword matching must fold case");
  Require(std::abs(AsrKeywordPosterior(skew, "targe")) <= kTol,
          "partial tokens must not match");

  bool threw = false;
  try {
    HypothesisList bad = skew;
    bad.fudge = 0.0;
    AsrKeywordPosterior(bad, "target");
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  Require(threw, "a non-positive temperature must be rejected");
  threw = false;
  try {
    AsrKeywordPosterior(HypothesisList{}, "target");
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  Require(threw, "an empty hypothesis list must be rejected");

  // Randomized agreement with the direct oracle, then shift invariance
  // at offsets that would overflow a naive softmax.
  const std::vector<std::string> vocabulary = {"alpha", "beta",  "gamma",
                                               "delta", "omega", "kappa"};
  Rng rng(1001);
  for (int instance = 0; instance < 40; ++instance) {
    HypothesisList hyps;
    hyps.fudge = (instance % 3 == 0) ? 1.0 : 5.0;
    int n = 1 + rng.UniformInt(8);
    for (int h = 0; h < n; ++h) {
      Hypothesis hyp;
      hyp.score = rng.Normal() * 10.0;
      int words = 1 + rng.UniformInt(5);
      for (int w = 0; w < words; ++w) {
        if (w > 0) hyp.text += ' ';
        hyp.text += vocabulary[rng.UniformInt(
            static_cast<int>(vocabulary.size()))];
      }
      hyps.hypotheses.push_back(hyp);
    }
    const std::string& keyword =
        vocabulary[rng.UniformInt(static_cast<int>(vocabulary.size()))];
    double p = AsrKeywordPosterior(hyps, keyword);
    Require(std::abs(p - testing::OracleAsrPosterior(hyps, keyword)) <= kTol,
            "instance " + std::to_string(instance) + " off the oracle");
    for (double shift : {1000.0, -1000.0, 17.25}) {
      HypothesisList shifted = hyps;
      for (Hypothesis& h : shifted.hypotheses) h.score += shift;
      Require(std::abs(AsrKeywordPosterior(shifted, keyword) - p) <= kTol,
              "shifting all scores by " + Fmt("%.2f", shift) +
                  " changed the posterior");
    }
  }
  return {"closed forms, 40 oracle instances, and +-1000 score shifts"
          " all within 1e-12"};
}

}  // namespace
}  // namespace lipspot

int main(int argc, char** argv) {
  using namespace lipspot;
  fs::path workdir = fs::temp_directory_path() / "lipspot_acceptance";
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (!arg.empty() &&
               arg.find_first_not_of("0123456789") == std::string::npos) {
      selected.push_back(std::stoi(arg));
    } else {
      std::cerr << "usage: acceptance [--workdir DIR] [N ...]" << std::endl;
      return 2;
    }
  }
  fs::create_directories(workdir);
  TheExperiment(&workdir);

  struct Entry {
    int id;
    const char* name;
    std::function<std::vector<std::string>()> body;
  };
  const std::vector<Entry> criteria = {
      {1, "analytic gradients match central differences",
       [] { return Criterion1(); }},
      {2, "evaluation metrics match brute-force oracles",
       [] { return Criterion2(); }},
      {3, "pronunciation model fits a 50-word dictionary",
       [] { return Criterion3(); }},
      {4, "zero-shot spotting on the synthetic corpus",
       [] { return Criterion4(); }},
      {5, "keyword localization on the synthetic run",
       [] { return Criterion5(); }},
      {6, "auxiliary-decoder ablation ordering",
       [] { return Criterion6(); }},
      {7, "pairing balance and curriculum invariants",
       [&workdir] { return Criterion7(workdir); }},
      {8, "frontend shapes and temporal locality",
       [] { return Criterion8(); }},
      {9, "determinism and checkpoint persistence",
       [&workdir] { return Criterion9(workdir); }},
      {10, "hypothesis-list posterior closed forms",
       [] { return Criterion10(); }},
  };

  int failures = 0;
  for (const Entry& entry : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), entry.id) ==
            selected.end())
      continue;
    auto start = Clock::now();
    bool pass = false;
    std::string reason;
    std::vector<std::string> details;
    try {
      details = entry.body();
      pass = true;
    } catch (const std::exception& e) {
      reason = e.what();
    }
    double elapsed = SecondsSince(start);
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << entry.id
              << ": " << entry.name;
    if (!pass) std::cout << " -- " << reason;
    std::cout << " (" << Fmt("%.1f", elapsed) << " s)" << std::endl;
    for (const std::string& d : details)
      std::cout << "         " << d << std::endl;
    if (!pass) ++failures;
  }
  return failures;
}
