// src/training.cc

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

#include "lipspot/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "lipspot/frontend.h"

namespace lipspot {
namespace train {

namespace {

// Seed stream reserved for parameter initialization; epoch streams are the
// 1-based epoch numbers themselves.
constexpr uint64_t kInitStream = 0;

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Exact round-trip formatting for values that must survive a resume.
std::string FormatExact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteU32Le(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

uint32_t ReadU32Le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("truncated checkpoint payload");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void WriteTensor(std::ostream& out, const std::string& name,
                 const nn::Mat<float>& m) {
  if (name.find_first_of(" \n\r\t") != std::string::npos)
    throw std::invalid_argument(StrCat("unserializable tensor name: ", name));
  out << name << " " << m.rows() << " " << m.cols() << "\n";
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      uint32_t bits;
      float v = m(i, j);
      std::memcpy(&bits, &v, 4);
      WriteU32Le(out, bits);
    }
}

nn::Mat<float> ReadTensorPayload(std::istream& in, int rows, int cols) {
  nn::Mat<float> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      uint32_t bits = ReadU32Le(in);
      float v;
      std::memcpy(&v, &bits, 4);
      m(i, j) = v;
    }
  return m;
}

bool IsTrainingSubset(const std::string& s) {
  return s == "train" || s == "pretrain";
}

// Words of a transcript that qualify as training keywords.
bool EligibleKeyword(const std::string& word,
                     const std::set<std::string>& train_vocab,
                     const PhoneticDictionary& dict, int min_phonemes) {
  if (train_vocab.count(word) == 0) return false;
  const DictEntry* entry = dict.Find(word);
  return entry != nullptr && entry->phoneme_count() >= min_phonemes;
}

}  // namespace

PairSet BuildPairs(const std::vector<const cli::ManifestRecord*>& videos,
                   const std::set<std::string>& train_vocab,
                   const PhoneticDictionary& dict,
                   const g2p::G2PConfig& g2p_config, int min_phonemes,
                   Rng* rng) {
  if (min_phonemes < 1)
    throw std::invalid_argument("min_phonemes must be at least 1");
  if (rng == nullptr)
    throw std::invalid_argument("pair construction needs a random stream");

  PairSet out;
  // The minibatch keyword pool: every eligible word across all transcripts.
  std::set<std::string> pool_set;
  std::vector<std::set<std::string>> own_eligible(videos.size());
  std::vector<std::set<std::string>> own_words(videos.size());
  for (size_t v = 0; v < videos.size(); ++v) {
    if (videos[v] == nullptr)
      throw std::invalid_argument("null video record in minibatch");
    for (const std::string& word : videos[v]->transcript) {
      own_words[v].insert(word);
      if (EligibleKeyword(word, train_vocab, dict, min_phonemes)) {
        own_eligible[v].insert(word);
        pool_set.insert(word);
      }
    }
  }
  std::vector<std::string> pool(pool_set.begin(), pool_set.end());

  auto target_of = [&](const std::string& word) {
    const DictEntry* entry = dict.Find(word);
    return g2p::SelectAuxiliaryTarget(g2p_config, *entry, dict.phone_set(),
                                      dict.grapheme_set());
  };

  std::set<std::string> paired_words;
  for (size_t v = 0; v < videos.size(); ++v) {
    if (own_eligible[v].empty()) continue;
    std::vector<std::string> candidates;
    for (const std::string& word : pool)
      if (own_words[v].count(word) == 0) candidates.push_back(word);
    int need = static_cast<int>(own_eligible[v].size());
    if (candidates.empty()) {
      // No legal negatives exist; keep the balance invariant by dropping
      // the video's positives too.
      ++out.dropped_videos;
      continue;
    }
    std::vector<std::string> negatives;
    if (static_cast<int>(candidates.size()) >= need) {
      rng->Shuffle(&candidates);
      negatives.assign(candidates.begin(), candidates.begin() + need);
    } else {
      out.used_replacement = true;
      for (int i = 0; i < need; ++i)
        negatives.push_back(
            candidates[rng->UniformInt(static_cast<int>(candidates.size()))]);
    }
    for (const std::string& word : own_eligible[v]) {
      out.pairs.push_back(
          {videos[v]->video_id, word, 1, target_of(word)});
      paired_words.insert(word);
    }
    for (const std::string& word : negatives) {
      out.pairs.push_back(
          {videos[v]->video_id, word, 0, target_of(word)});
      paired_words.insert(word);
    }
  }
  out.keywords.assign(paired_words.begin(), paired_words.end());
  return out;
}

double JointLoss(int label, double posterior,
                 const nn::Mat<double>& decoder_posteriors,
                 const std::vector<int>& phoneme_target, double alpha_w,
                 double eps) {
  if (label != 0 && label != 1)
    throw std::invalid_argument(StrCat("label must be 0 or 1, got ", label));
  if (!std::isfinite(posterior))
    throw std::invalid_argument("posterior must be finite");
  if (alpha_w < 0.0)
    throw std::invalid_argument("auxiliary weight must be non-negative");
  if (eps <= 0.0 || eps >= 0.5)
    throw std::invalid_argument("eps must lie in (0, 0.5)");
  double pc = std::min(1.0 - eps, std::max(eps, posterior));
  double primary =
      -(label * std::log(pc) + (1 - label) * std::log(1.0 - pc));
  if (alpha_w == 0.0) return primary;
  return primary + alpha_w * g2p::G2pLoss(decoder_posteriors, phoneme_target);
}

double OptimizerSchedule::LearningRate(int epoch) const {
  if (epoch < 1 || epoch > total_epochs)
    throw std::invalid_argument(
        StrCat("epoch ", epoch, " outside 1..", total_epochs));
  int halvings = (epoch - 1) / decay_interval;
  return std::ldexp(initial_lr, -halvings);
}

void OptimizerSchedule::Validate() const {
  if (initial_lr <= 0.0)
    throw std::invalid_argument("initial_lr must be positive");
  if (decay_interval < 1)
    throw std::invalid_argument("decay_interval must be at least 1");
  if (total_epochs < 1)
    throw std::invalid_argument("total_epochs must be at least 1");
  if (videos_per_minibatch < 1)
    throw std::invalid_argument("videos_per_minibatch must be at least 1");
}

std::vector<CurriculumPhase> MakeCurriculum(int phase1_last_epoch,
                                            int total_epochs) {
  if (phase1_last_epoch < 1 || phase1_last_epoch >= total_epochs)
    throw std::invalid_argument(
        StrCat("phase boundary ", phase1_last_epoch,
               " must fall inside 1..", total_epochs - 1));
  CurriculumPhase warmup;
  warmup.first_epoch = 1;
  warmup.last_epoch = phase1_last_epoch;
  warmup.subsets = {"train"};
  warmup.min_phonemes = 4;
  warmup.alpha_w = 1.0;
  warmup.backend = kws::KwsNetConfig::Backend::kFeedForward;

  CurriculumPhase sequence;
  sequence.first_epoch = phase1_last_epoch + 1;
  sequence.last_epoch = total_epochs;
  sequence.subsets = {"train", "pretrain"};
  sequence.min_phonemes = 6;
  sequence.alpha_w = 0.1;
  sequence.backend = kws::KwsNetConfig::Backend::kSequence;
  // Everything but the freshly activated sequence head holds still for the
  // phase's first epoch.
  sequence.freeze_first_epoch = {"g2p.", "kws.layer1", "kws.layer2",
                                 "kws.ff."};
  return {warmup, sequence};
}

void ValidateCurriculum(const std::vector<CurriculumPhase>& phases,
                        int total_epochs) {
  if (phases.empty()) throw std::invalid_argument("empty curriculum");
  int expected_first = 1;
  for (const auto& phase : phases) {
    if (phase.first_epoch != expected_first)
      throw std::invalid_argument(
          StrCat("phase starting at epoch ", phase.first_epoch,
                 " leaves a gap; expected ", expected_first));
    if (phase.last_epoch < phase.first_epoch)
      throw std::invalid_argument("phase ends before it starts");
    if (phase.alpha_w < 0.0)
      throw std::invalid_argument("auxiliary weight must be non-negative");
    if (phase.min_phonemes < 1)
      throw std::invalid_argument("min_phonemes must be at least 1");
    if (phase.subsets.empty())
      throw std::invalid_argument("phase has no data subsets");
    for (const auto& s : phase.subsets)
      if (!IsTrainingSubset(s))
        throw std::invalid_argument(
            StrCat("subset '", s, "' cannot be trained on"));
    if (phase.backend == kws::KwsNetConfig::Backend::kVideoEmbedding)
      throw std::invalid_argument(
          "curriculum phases describe the stacked model's backends");
    expected_first = phase.last_epoch + 1;
  }
  if (expected_first != total_epochs + 1)
    throw std::invalid_argument(
        StrCat("curriculum covers 1..", expected_first - 1,
               " but the schedule runs ", total_epochs, " epochs"));
}

const CurriculumPhase& PhaseForEpoch(
    const std::vector<CurriculumPhase>& phases, int epoch) {
  for (const auto& phase : phases)
    if (epoch >= phase.first_epoch && epoch <= phase.last_epoch) return phase;
  throw std::invalid_argument(
      StrCat("epoch ", epoch, " is outside every curriculum phase"));
}

void WriteTrainingLog(std::ostream& out,
                      const std::vector<EpochRecord>& records) {
  out << "epoch,phase,lr,mean_primary_loss,mean_auxiliary_loss,"
         "validation_eer\n";
  for (const auto& r : records)
    out << r.epoch << "," << r.phase << "," << FormatDouble(r.lr) << ","
        << FormatDouble(r.mean_primary_loss) << ","
        << FormatDouble(r.mean_auxiliary_loss) << ","
        << FormatDouble(r.validation_eer) << "\n";
}

std::vector<EpochRecord> ReadTrainingLog(std::istream& in) {
  std::string line;
  int line_number = 0;
  if (!std::getline(in, line))
    throw ParseError(1, "empty training log");
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line !=
      "epoch,phase,lr,mean_primary_loss,mean_auxiliary_loss,validation_eer")
    throw ParseError(line_number, StrCat("unexpected header: ", line));
  std::vector<EpochRecord> records;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw ParseError(line_number,
                       StrCat("expected 6 fields, got ", fields.size()));
    try {
      EpochRecord r;
      r.epoch = std::stoi(fields[0]);
      r.phase = std::stoi(fields[1]);
      r.lr = std::stod(fields[2]);
      r.mean_primary_loss = std::stod(fields[3]);
      r.mean_auxiliary_loss = std::stod(fields[4]);
      r.validation_eer = std::stod(fields[5]);
      records.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(line_number, StrCat("unparsable record: ", line));
    }
  }
  return records;
}

void SaveCheckpoint(const std::string& path,
                    const nn::ParamRegistry<float>& reg,
                    const nn::AdamOptimizer<float>* adam,
                    const std::map<std::string, std::string>& meta) {
  std::map<std::string, std::string> full_meta = meta;
  if (adam != nullptr)
    full_meta["adam_step"] = StrCat(adam->step());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(StrCat("cannot write checkpoint: ", path));
  out << "LIPSPOT_CKPT v1\n";
  out << "meta " << full_meta.size() << "\n";
  for (const auto& [key, value] : full_meta) {
    if (key.empty() || key.find_first_of(" \n\r\t") != std::string::npos)
      throw std::invalid_argument(StrCat("bad metadata key: '", key, "'"));
    if (value.find_first_of("\n\r") != std::string::npos)
      throw std::invalid_argument(
          StrCat("metadata value for ", key, " contains a newline"));
    out << key << " " << value << "\n";
  }
  size_t n_tensors = reg.items().size();
  if (adam != nullptr) n_tensors += 2 * adam->slots().size();
  out << "tensors " << n_tensors << "\n";
  for (const auto& item : reg.items()) WriteTensor(out, item.name, *item.value);
  if (adam != nullptr) {
    for (const auto& [name, mom] : adam->slots()) {
      WriteTensor(out, "adam.m/" + name, mom.m);
      WriteTensor(out, "adam.v/" + name, mom.v);
    }
  }
  if (!out) throw IoError(StrCat("short write to checkpoint: ", path));
}

namespace {

// Parses the textual header up to and including the tensor count, leaving
// the stream at the first tensor record.
std::map<std::string, std::string> ParseCheckpointHeader(std::istream& in,
                                                         const std::string& path,
                                                         int* n_tensors) {
  std::string line;
  if (!std::getline(in, line) || line != "LIPSPOT_CKPT v1")
    throw DataError(StrCat("not a checkpoint file: ", path));
  if (!std::getline(in, line) || line.rfind("meta ", 0) != 0)
    throw DataError("checkpoint is missing its metadata block");
  int n_meta = 0;
  try {
    n_meta = std::stoi(line.substr(5));
  } catch (const std::logic_error&) {
    throw DataError(StrCat("bad metadata count: ", line));
  }
  std::map<std::string, std::string> meta;
  for (int i = 0; i < n_meta; ++i) {
    if (!std::getline(in, line))
      throw DataError("truncated metadata block");
    auto space = line.find(' ');
    std::string key = space == std::string::npos ? line : line.substr(0, space);
    std::string value =
        space == std::string::npos ? "" : line.substr(space + 1);
    if (key.empty() || meta.count(key))
      throw DataError(StrCat("bad or duplicate metadata key: '", key, "'"));
    meta[key] = value;
  }
  if (!std::getline(in, line) || line.rfind("tensors ", 0) != 0)
    throw DataError("checkpoint is missing its tensor block");
  try {
    *n_tensors = std::stoi(line.substr(8));
  } catch (const std::logic_error&) {
    throw DataError(StrCat("bad tensor count: ", line));
  }
  return meta;
}

}  // namespace

std::map<std::string, std::string> ReadCheckpointMeta(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(StrCat("cannot open checkpoint: ", path));
  int n_tensors = 0;
  return ParseCheckpointHeader(in, path, &n_tensors);
}

std::map<std::string, std::string> LoadCheckpoint(
    const std::string& path, const nn::ParamRegistry<float>& reg,
    nn::AdamOptimizer<float>* adam) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(StrCat("cannot open checkpoint: ", path));
  int n_tensors = 0;
  std::map<std::string, std::string> meta =
      ParseCheckpointHeader(in, path, &n_tensors);
  std::string line;

  std::map<std::string, nn::Mat<float>> adam_m, adam_v;
  std::set<std::string> filled;
  for (int i = 0; i < n_tensors; ++i) {
    if (!std::getline(in, line))
      throw DataError("truncated tensor block");
    std::istringstream hs(line);
    std::string name;
    long rows = -1, cols = -1;
    hs >> name >> rows >> cols;
    if (name.empty() || rows < 0 || cols < 0 || !hs || !(hs >> std::ws).eof())
      throw DataError(StrCat("bad tensor header: ", line));
    nn::Mat<float> payload =
        ReadTensorPayload(in, static_cast<int>(rows), static_cast<int>(cols));
    if (name.rfind("adam.m/", 0) == 0) {
      if (adam != nullptr) adam_m[name.substr(7)] = std::move(payload);
      continue;
    }
    if (name.rfind("adam.v/", 0) == 0) {
      if (adam != nullptr) adam_v[name.substr(7)] = std::move(payload);
      continue;
    }
    const auto* item = reg.Find(name);
    if (item == nullptr)
      throw DataError(StrCat("checkpoint tensor ", name,
                             " has no place in this model"));
    if (item->value->rows() != rows || item->value->cols() != cols)
      throw DataError(StrCat("shape mismatch for ", name, ": checkpoint has ",
                             rows, "x", cols, ", model wants ",
                             item->value->rows(), "x", item->value->cols()));
    if (!filled.insert(name).second)
      throw DataError(StrCat("duplicate tensor in checkpoint: ", name));
    *item->value = std::move(payload);
  }
  for (const auto& item : reg.items())
    if (filled.count(item.name) == 0)
      throw DataError(
          StrCat("checkpoint is missing tensor ", item.name));

  if (adam != nullptr) {
    if (adam_m.size() != adam_v.size())
      throw DataError("unpaired optimizer moments in checkpoint");
    adam->slots().clear();
    for (auto& [name, m] : adam_m) {
      auto v_it = adam_v.find(name);
      if (v_it == adam_v.end())
        throw DataError(StrCat("first moment without second for ", name));
      auto& slot = adam->slots()[name];
      slot.m = std::move(m);
      slot.v = std::move(v_it->second);
    }
    auto step_it = meta.find("adam_step");
    adam->set_step(step_it == meta.end() ? 0
                                         : std::stoll(step_it->second));
  }
  return meta;
}

Trainer::Trainer(const cli::Manifest& manifest,
                 const std::string& features_root,
                 const PhoneticDictionary& dict, const VocabularySplit& split,
                 const kws::KwsNetConfig& kws_config,
                 const g2p::G2PConfig& g2p_config,
                 const TrainerOptions& options)
    : manifest_(manifest),
      features_root_(features_root),
      dict_(&dict),
      split_(split),
      options_(options),
      kws_config_(kws_config) {
  cli::ValidateManifest(manifest_);
  options_.schedule.Validate();
  ValidateCurriculum(options_.curriculum, options_.schedule.total_epochs);
  train_vocab_.insert(split_.train.begin(), split_.train.end());

  g2p::G2PConfig g2p_cfg = g2p_config;
  if (g2p_cfg.grapheme_table_size == 0)
    g2p_cfg.grapheme_table_size = dict.grapheme_set().table_size();
  if (g2p_cfg.target_alphabet_size == 0)
    g2p_cfg.target_alphabet_size =
        g2p_cfg.target_alphabet == g2p::G2PConfig::TargetAlphabet::kPhonemes
            ? dict.phone_set().size()
            : dict.grapheme_set().alphabet_size();
  if (g2p_cfg.embedding_size != kws_config_.d_r)
    throw std::invalid_argument(
        StrCat("keyword embedding width ", g2p_cfg.embedding_size,
               " does not match the spotting network's ", kws_config_.d_r));

  g2p_ = std::make_unique<g2p::G2pModel<float>>(g2p_cfg);
  g2p_->Register(&registry_, "g2p");
  if (options_.model == ModelKind::kStacked) {
    kws_config_.backend = options_.curriculum.front().backend;
    stacked_ = std::make_unique<kws::KwsNet<float>>(kws_config_);
    stacked_->Register(&registry_, "kws");
  } else {
    kws_config_.backend = kws::KwsNetConfig::Backend::kVideoEmbedding;
    baseline_ = std::make_unique<kws::VideoEmbeddingNet<float>>(kws_config_);
    baseline_->Register(&registry_, "kws.videoemb");
  }

  Rng init_rng(Rng::DeriveSeed(options_.master_seed, kInitStream));
  g2p_->Init(&init_rng);
  if (stacked_) stacked_->Init(&init_rng);
  if (baseline_) baseline_->Init(&init_rng);
}

Trainer::~Trainer() = default;

kws::KwsNet<float>& Trainer::kws_model() {
  if (!stacked_)
    throw std::logic_error("this trainer drives the baseline model");
  return *stacked_;
}

kws::VideoEmbeddingNet<float>& Trainer::baseline_model() {
  if (!baseline_)
    throw std::logic_error("this trainer drives the stacked model");
  return *baseline_;
}

const nn::Mat<float>& Trainer::Features(const std::string& video_id) {
  auto it = feature_cache_.find(video_id);
  if (it != feature_cache_.end()) return it->second;
  const cli::ManifestRecord* rec = manifest_.Find(video_id);
  if (rec == nullptr)
    throw DataError(StrCat("video ", video_id, " is not in the manifest"));
  std::string path = features_root_.empty()
                         ? rec->feature_path
                         : features_root_ + "/" + rec->feature_path;
  nn::Mat<float> features =
      frontend::LoadPrecomputed(path, rec->num_frames, kws_config_.d_feat);
  return feature_cache_.emplace(video_id, std::move(features)).first->second;
}

std::vector<const cli::ManifestRecord*> Trainer::SubsetRecords(
    const std::vector<std::string>& subsets) const {
  std::vector<const cli::ManifestRecord*> out;
  for (const auto& rec : manifest_.records)
    for (const auto& s : subsets)
      if (rec.subset == s) {
        out.push_back(&rec);
        break;
      }
  return out;
}

nn::Mat<float> Trainer::EncodeQueries(
    const std::vector<std::string>& queries) {
  if (queries.empty())
    throw std::invalid_argument("cannot encode an empty query list");
  std::vector<std::vector<int>> graphemes;
  graphemes.reserve(queries.size());
  for (const auto& q : queries)
    graphemes.push_back(EncodeWord(q, dict_->grapheme_set()));
  return g2p_->EncodeBatch(graphemes, /*cache=*/false);
}

nn::Mat<float> Trainer::ScoreOneVideo(const nn::Mat<float>& features,
                                      const nn::Mat<float>& r_queries,
                                      std::vector<int>* t_hat) {
  if (t_hat != nullptr) t_hat->clear();
  if (stacked_) {
    kws::KwsOutput<float> out =
        stacked_->ScoreVideoQueries(features, r_queries);
    if (t_hat != nullptr &&
        stacked_->backend() == kws::KwsNetConfig::Backend::kSequence)
      *t_hat = out.t_hat;
    return out.logits;
  }
  const int n_queries = static_cast<int>(r_queries.rows());
  const int t_steps = static_cast<int>(features.rows());
  nn::SeqBatch<float> x;
  x.mask = nn::Mat<float>::Ones(n_queries, t_steps);
  x.lengths.assign(n_queries, t_steps);
  x.steps.resize(t_steps);
  for (int t = 0; t < t_steps; ++t)
    x.steps[t] = features.row(t).replicate(n_queries, 1);
  kws::KwsOutput<float> out =
      baseline_->Forward(x, r_queries, nn::kEvalMode, nullptr,
                         /*cache=*/false);
  return out.logits;
}

double Trainer::EvaluateValidationEer() {
  std::vector<const cli::ManifestRecord*> videos =
      SubsetRecords({"validation"});
  if (videos.empty()) return 0.5;
  std::vector<std::vector<std::string>> transcripts;
  transcripts.reserve(videos.size());
  for (const auto* v : videos) transcripts.push_back(v->transcript);
  std::vector<std::string> queries = metrics::BuildQueryList(
      transcripts, train_vocab_, {}, *dict_,
      options_.validation_min_phonemes);
  if (queries.empty()) return 0.5;

  nn::Mat<float> r_queries = EncodeQueries(queries);
  std::vector<metrics::ScoreRecord> records;
  bool saw_positive = false, saw_negative = false;
  for (const auto* video : videos) {
    std::set<std::string> words(video->transcript.begin(),
                                video->transcript.end());
    nn::Mat<float> scores =
        ScoreOneVideo(Features(video->video_id), r_queries, nullptr);
    for (size_t q = 0; q < queries.size(); ++q) {
      int label = words.count(queries[q]) ? 1 : 0;
      (label ? saw_positive : saw_negative) = true;
      records.push_back({queries[q], video->video_id,
                         static_cast<double>(scores(q, 0)), label});
    }
  }
  if (!saw_positive || !saw_negative) return 0.5;
  return metrics::ComputeEer(metrics::ComputeDet(records));
}

SubsetScores Trainer::ScoreSubsetQueries(
    const std::string& subset, const std::vector<std::string>& queries) {
  std::vector<const cli::ManifestRecord*> videos = SubsetRecords({subset});
  if (videos.empty())
    throw std::invalid_argument(
        StrCat("no videos in subset '", subset, "'"));
  nn::Mat<float> r_queries = EncodeQueries(queries);
  SubsetScores out;
  std::vector<int> t_hat;
  for (const auto* video : videos) {
    std::set<std::string> words(video->transcript.begin(),
                                video->transcript.end());
    nn::Mat<float> scores =
        ScoreOneVideo(Features(video->video_id), r_queries, &t_hat);
    for (size_t q = 0; q < queries.size(); ++q) {
      int label = words.count(queries[q]) ? 1 : 0;
      out.records.push_back({queries[q], video->video_id,
                             static_cast<double>(scores(q, 0)), label});
      if (!t_hat.empty()) out.frame_estimates.push_back(t_hat[q] - 1);
      if (label == 1 && !t_hat.empty() && video->has_boundaries()) {
        metrics::LocalizationRecord loc;
        loc.t_hat = t_hat[q] - 1;  // model reports 1-based frames
        for (size_t i = 0; i < video->transcript.size(); ++i)
          if (video->transcript[i] == queries[q])
            loc.windows.push_back(video->boundaries[i]);
        out.localizations.push_back(std::move(loc));
      }
    }
  }
  return out;
}

void Trainer::SnapshotBest() {
  best_snapshot_.clear();
  for (const auto& item : registry_.items())
    best_snapshot_[item.name] = *item.value;
}

void Trainer::RestoreBestParameters() {
  if (best_snapshot_.empty())
    throw std::logic_error("no best-validation snapshot recorded yet");
  for (const auto& item : registry_.items())
    *item.value = best_snapshot_.at(item.name);
}

EpochRecord Trainer::TrainEpoch() {
  const int epoch = next_epoch_;
  if (epoch > options_.schedule.total_epochs)
    throw std::logic_error("the schedule's epochs are already exhausted");
  const auto& phases = options_.curriculum;
  const CurriculumPhase& phase = PhaseForEpoch(phases, epoch);
  int phase_index = 1;
  for (const auto& p : phases) {
    if (&p == &phase) break;
    ++phase_index;
  }
  if (stacked_) stacked_->set_backend(phase.backend);
  const double lr = options_.schedule.LearningRate(epoch);
  const bool frozen_epoch =
      epoch == phase.first_epoch && !phase.freeze_first_epoch.empty();
  const std::vector<std::string> frozen =
      frozen_epoch ? phase.freeze_first_epoch : std::vector<std::string>{};
  // Batch-norm running statistics hold still together with the frozen
  // parameters.
  const nn::ForwardMode mode{true, !frozen_epoch};

  Rng rng(Rng::DeriveSeed(options_.master_seed,
                          static_cast<uint64_t>(epoch)));
  std::vector<const cli::ManifestRecord*> videos =
      SubsetRecords(phase.subsets);
  rng.Shuffle(&videos);

  double sum_primary = 0.0, sum_auxiliary = 0.0;
  int64_t total_pairs = 0;
  const int mb_size = options_.schedule.videos_per_minibatch;
  int minibatch_index = 0;
  for (size_t start = 0; start < videos.size();
       start += mb_size, ++minibatch_index) {
    size_t stop = std::min(videos.size(), start + mb_size);
    std::vector<const cli::ManifestRecord*> slice(videos.begin() + start,
                                                  videos.begin() + stop);
    PairSet ps = BuildPairs(slice, train_vocab_, *dict_,
                            g2p_->config(), phase.min_phonemes, &rng);
    if (options_.log != nullptr && ps.used_replacement)
      *options_.log << "epoch " << epoch << " minibatch " << minibatch_index
                    << ": negative pool exhausted, sampled with replacement\n";
    if (ps.pairs.empty()) continue;
    const int n_pairs = static_cast<int>(ps.pairs.size());
    const int n_words = static_cast<int>(ps.keywords.size());

    std::map<std::string, int> word_index;
    for (int k = 0; k < n_words; ++k) word_index[ps.keywords[k]] = k;
    std::vector<std::vector<int>> graphemes(n_words);
    std::vector<std::vector<int>> targets(n_words);
    for (int k = 0; k < n_words; ++k)
      graphemes[k] = EncodeWord(ps.keywords[k], dict_->grapheme_set());
    std::vector<int> pair_word(n_pairs);
    std::vector<int> word_count(n_words, 0);
    for (int p = 0; p < n_pairs; ++p) {
      int k = word_index.at(ps.pairs[p].keyword);
      pair_word[p] = k;
      ++word_count[k];
      targets[k] = ps.pairs[p].phoneme_target;
    }

    nn::Mat<float> r_words = g2p_->EncodeBatch(graphemes, /*cache=*/true);
    nn::Vec<float> aux_losses;
    if (phase.alpha_w > 0.0)
      aux_losses = g2p_->AuxiliaryLossBatch(targets, /*cache=*/true);

    std::vector<nn::Mat<float>> seqs;
    seqs.reserve(n_pairs);
    for (const auto& pair : ps.pairs) seqs.push_back(Features(pair.video_id));
    nn::SeqBatch<float> features = nn::PackSequences(seqs);
    nn::Mat<float> r_pairs(n_pairs, kws_config_.d_r);
    nn::Vec<float> labels(n_pairs);
    for (int p = 0; p < n_pairs; ++p) {
      r_pairs.row(p) = r_words.row(pair_word[p]);
      labels[p] = static_cast<float>(ps.pairs[p].label);
    }

    kws::KwsOutput<float> out =
        stacked_ ? stacked_->Forward(features, r_pairs, mode, &rng, true)
                 : baseline_->Forward(features, r_pairs, mode, &rng, true);
    nn::Vec<float> logits = out.logits.col(0);
    auto bce = nn::SigmoidBce(logits, labels);
    double primary = bce.losses.sum() / n_pairs;
    double auxiliary = 0.0;
    if (phase.alpha_w > 0.0) {
      for (int p = 0; p < n_pairs; ++p)
        auxiliary += aux_losses[pair_word[p]];
      auxiliary /= n_pairs;
    }
    double batch_loss = primary + phase.alpha_w * auxiliary;
    if (!std::isfinite(batch_loss))
      throw DivergenceError(StrCat(
          "non-finite loss at epoch ", epoch, ", minibatch ",
          minibatch_index, " (", n_pairs, " pairs, first video ",
          ps.pairs.front().video_id, ")"));

    registry_.ZeroGrad();
    nn::Mat<float> dlogits = bce.dlogits / static_cast<float>(n_pairs);
    nn::Mat<float> dr_pairs = stacked_ ? stacked_->Backward(dlogits)
                                       : baseline_->Backward(dlogits);
    nn::Mat<float> dr_words = nn::Mat<float>::Zero(n_words, kws_config_.d_r);
    for (int p = 0; p < n_pairs; ++p)
      dr_words.row(pair_word[p]) += dr_pairs.row(p);
    nn::Vec<float> daux_scale;
    if (phase.alpha_w > 0.0) {
      daux_scale.resize(n_words);
      for (int k = 0; k < n_words; ++k)
        daux_scale[k] = static_cast<float>(phase.alpha_w) * word_count[k] /
                        static_cast<float>(n_pairs);
    }
    g2p_->Backward(daux_scale, dr_words);
    adam_.Step(registry_, static_cast<float>(lr), frozen);

    sum_primary += primary * n_pairs;
    sum_auxiliary += auxiliary * n_pairs;
    total_pairs += n_pairs;
  }

  EpochRecord record;
  record.epoch = epoch;
  record.phase = phase_index;
  record.lr = lr;
  record.mean_primary_loss =
      total_pairs > 0 ? sum_primary / total_pairs : 0.0;
  record.mean_auxiliary_loss =
      total_pairs > 0 ? sum_auxiliary / total_pairs : 0.0;
  record.validation_eer = EvaluateValidationEer();
  records_.push_back(record);

  if (best_epoch_ == 0 || record.validation_eer < best_validation_eer_) {
    best_epoch_ = epoch;
    best_validation_eer_ = record.validation_eer;
    SnapshotBest();
    if (!options_.checkpoint_dir.empty())
      SaveState(options_.checkpoint_dir + "/best.ckpt");
  }
  next_epoch_ = epoch + 1;
  if (!options_.checkpoint_dir.empty())
    SaveState(options_.checkpoint_dir + "/last.ckpt");
  if (options_.log != nullptr)
    *options_.log << "epoch " << epoch << " phase " << phase_index << " lr "
                  << FormatDouble(lr) << " loss "
                  << FormatDouble(record.mean_primary_loss) << " aux "
                  << FormatDouble(record.mean_auxiliary_loss) << " val_eer "
                  << FormatDouble(record.validation_eer) << "\n";
  return record;
}

std::vector<EpochRecord> Trainer::Train() {
  std::vector<EpochRecord> run;
  while (next_epoch_ <= options_.schedule.total_epochs)
    run.push_back(TrainEpoch());
  return run;
}

void Trainer::SaveState(const std::string& path) const {
  std::map<std::string, std::string> meta = options_.extra_checkpoint_meta;
  meta["model"] =
      options_.model == ModelKind::kStacked ? "stacked" : "videoemb";
  meta["next_epoch"] = StrCat(next_epoch_);
  meta["best_epoch"] = StrCat(best_epoch_);
  meta["best_validation_eer"] = FormatExact(best_validation_eer_);
  meta["master_seed"] = StrCat(options_.master_seed);
  SaveCheckpoint(path, registry_, &adam_, meta);
}

void Trainer::LoadState(const std::string& path) {
  std::map<std::string, std::string> meta =
      LoadCheckpoint(path, registry_, &adam_);
  auto require = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end())
      throw DataError(StrCat("checkpoint lacks the ", key, " field"));
    return it->second;
  };
  const std::string expected_model =
      options_.model == ModelKind::kStacked ? "stacked" : "videoemb";
  if (require("model") != expected_model)
    throw DataError(StrCat("checkpoint was written by a ",
                           require("model"), " trainer"));
  try {
    next_epoch_ = std::stoi(require("next_epoch"));
    best_epoch_ = std::stoi(require("best_epoch"));
    best_validation_eer_ = std::stod(require("best_validation_eer"));
  } catch (const std::logic_error&) {
    throw DataError("unparsable epoch bookkeeping in checkpoint");
  }
  if (next_epoch_ < 1) throw DataError("corrupt epoch cursor in checkpoint");
  // The parameters belong to the last completed epoch; align the backend
  // with its phase so evaluation before the next TrainEpoch sees the right
  // classifier.
  if (stacked_) {
    int reference = std::max(1, next_epoch_ - 1);
    reference = std::min(reference, options_.schedule.total_epochs);
    stacked_->set_backend(
        PhaseForEpoch(options_.curriculum, reference).backend);
  }
}

}  // namespace train
}  // namespace lipspot
