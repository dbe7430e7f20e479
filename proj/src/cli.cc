// src/cli.cc

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

#include "lipspot/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lipspot/common.h"
#include "lipspot/metrics.h"
#include "lipspot/phonedict.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace cli {

namespace fs = std::filesystem;

namespace {

// Seed streams for the synth command's three independent draws.
constexpr uint64_t kSynthDictStream = 11;
constexpr uint64_t kSynthSplitStream = 12;
constexpr uint64_t kSynthCorpusStream = 13;

// --- strict value parsing; errors always name the offending key ---

long long ParseWholeNumber(const std::string& key, const std::string& value) {
  size_t pos = 0;
  long long parsed = 0;
  bool ok = true;
  try {
    parsed = std::stoll(value, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != value.size())
    throw std::invalid_argument(
        StrCat("value '", value, "' for ", key, " is not an integer"));
  return parsed;
}

int ParseIntValue(const std::string& key, const std::string& value) {
  return static_cast<int>(ParseWholeNumber(key, value));
}

uint64_t ParseU64Value(const std::string& key, const std::string& value) {
  size_t pos = 0;
  uint64_t parsed = 0;
  bool ok = true;
  try {
    parsed = std::stoull(value, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != value.size() || value.front() == '-')
    throw std::invalid_argument(StrCat("value '", value, "' for ", key,
                                       " is not an unsigned integer"));
  return parsed;
}

double ParseDoubleValue(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double parsed = 0;
  bool ok = true;
  try {
    parsed = std::stod(value, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != value.size())
    throw std::invalid_argument(
        StrCat("value '", value, "' for ", key, " is not a number"));
  return parsed;
}

bool ParseBoolValue(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument(
      StrCat("value '", value, "' for ", key, " is not a boolean"));
}

// Shortest decimal form that reads back to the same double.
std::string FormatDoubleValue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatMetric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// One override key: serialize from and assign into a RunConfig.
struct KeyHandler {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig*, const std::string&, const std::string&)> set;
};

std::map<std::string, KeyHandler> BuildKeyTable() {
  std::map<std::string, KeyHandler> table;
  // The accessor returns a mutable reference into the config; get() only
  // ever reads through it.
  auto add_int = [&table](const std::string& key,
                          int& (*field)(RunConfig&)) {
    table[key] = {
        [field](const RunConfig& c) {
          return std::to_string(field(const_cast<RunConfig&>(c)));
        },
        [field](RunConfig* c, const std::string& k, const std::string& v) {
          field(*c) = ParseIntValue(k, v);
        }};
  };
  auto add_double = [&table](const std::string& key,
                             double& (*field)(RunConfig&)) {
    table[key] = {
        [field](const RunConfig& c) {
          return FormatDoubleValue(field(const_cast<RunConfig&>(c)));
        },
        [field](RunConfig* c, const std::string& k, const std::string& v) {
          field(*c) = ParseDoubleValue(k, v);
        }};
  };

  table["master_seed"] = {
      [](const RunConfig& c) { return std::to_string(c.master_seed); },
      [](RunConfig* c, const std::string& k, const std::string& v) {
        c->master_seed = ParseU64Value(k, v);
      }};
  table["model"] = {
      [](const RunConfig& c) { return c.model; },
      [](RunConfig* c, const std::string& k, const std::string& v) {
        if (v != "stacked" && v != "videoemb")
          throw std::invalid_argument(StrCat(
              "value '", v, "' for ", k, " must be stacked or videoemb"));
        c->model = v;
      }};
  add_int("validation_min_phonemes",
          +[](RunConfig& c) -> int& { return c.validation_min_phonemes; });
  add_int("curriculum.phase1_last_epoch",
          +[](RunConfig& c) -> int& { return c.phase1_last_epoch; });

  // kws.d_feat also drives the synthetic feature width, so the two can
  // never drift apart.
  table["kws.d_feat"] = {
      [](const RunConfig& c) { return std::to_string(c.kws.d_feat); },
      [](RunConfig* c, const std::string& k, const std::string& v) {
        c->kws.d_feat = ParseIntValue(k, v);
        c->synth.d_feat = c->kws.d_feat;
      }};
  add_int("kws.d_v", +[](RunConfig& c) -> int& { return c.kws.d_v; });
  add_int("kws.d_r", +[](RunConfig& c) -> int& { return c.kws.d_r; });
  add_int("kws.d_s", +[](RunConfig& c) -> int& { return c.kws.d_s; });
  add_double("kws.dropout_p",
             +[](RunConfig& c) -> double& { return c.kws.dropout_p; });
  add_double("kws.lrelu_slope",
             +[](RunConfig& c) -> double& { return c.kws.lrelu_slope; });

  add_int("g2p.hidden_size",
          +[](RunConfig& c) -> int& { return c.g2p.hidden_size; });
  add_int("g2p.embedding_size",
          +[](RunConfig& c) -> int& { return c.g2p.embedding_size; });
  table["g2p.target_alphabet"] = {
      [](const RunConfig& c) {
        return c.g2p.target_alphabet ==
                       g2p::G2PConfig::TargetAlphabet::kPhonemes
                   ? std::string("phonemes")
                   : std::string("graphemes");
      },
      [](RunConfig* c, const std::string& k, const std::string& v) {
        if (v == "phonemes")
          c->g2p.target_alphabet = g2p::G2PConfig::TargetAlphabet::kPhonemes;
        else if (v == "graphemes")
          c->g2p.target_alphabet = g2p::G2PConfig::TargetAlphabet::kGraphemes;
        else
          throw std::invalid_argument(StrCat(
              "value '", v, "' for ", k, " must be phonemes or graphemes"));
      }};
  table["g2p.decoder_enabled"] = {
      [](const RunConfig& c) {
        return std::string(c.g2p.decoder_enabled ? "true" : "false");
      },
      [](RunConfig* c, const std::string& k, const std::string& v) {
        c->g2p.decoder_enabled = ParseBoolValue(k, v);
      }};

  add_double("schedule.initial_lr",
             +[](RunConfig& c) -> double& { return c.schedule.initial_lr; });
  add_int("schedule.decay_interval",
          +[](RunConfig& c) -> int& { return c.schedule.decay_interval; });
  add_int("schedule.total_epochs",
          +[](RunConfig& c) -> int& { return c.schedule.total_epochs; });
  add_int("schedule.videos_per_minibatch", +[](RunConfig& c) -> int& {
    return c.schedule.videos_per_minibatch;
  });

  add_int("synth.n_words",
          +[](RunConfig& c) -> int& { return c.synth_n_words; });
  add_int("synth.min_word_length",
          +[](RunConfig& c) -> int& { return c.synth_min_word_length; });
  add_int("synth.max_word_length",
          +[](RunConfig& c) -> int& { return c.synth_max_word_length; });
  add_int("synth.n_utterances",
          +[](RunConfig& c) -> int& { return c.synth_n_utterances; });
  add_int("synth.frames_per_phoneme",
          +[](RunConfig& c) -> int& { return c.synth.frames_per_phoneme; });
  add_double("synth.noise_sigma",
             +[](RunConfig& c) -> double& { return c.synth.noise_sigma; });
  add_int("synth.min_words",
          +[](RunConfig& c) -> int& { return c.synth.min_words; });
  add_int("synth.max_words",
          +[](RunConfig& c) -> int& { return c.synth.max_words; });
  add_double("synth.validation_fraction", +[](RunConfig& c) -> double& {
    return c.synth.validation_fraction;
  });
  add_double("synth.test_fraction",
             +[](RunConfig& c) -> double& { return c.synth.test_fraction; });
  add_int("synth.planted_per_utterance", +[](RunConfig& c) -> int& {
    return c.synth.planted_per_utterance;
  });

  add_double("split.train_fraction",
             +[](RunConfig& c) -> double& { return c.split_ratios[0]; });
  add_double("split.validation_fraction",
             +[](RunConfig& c) -> double& { return c.split_ratios[1]; });
  add_double("split.test_fraction",
             +[](RunConfig& c) -> double& { return c.split_ratios[2]; });
  return table;
}

const std::map<std::string, KeyHandler>& KeyTable() {
  static const std::map<std::string, KeyHandler>* table =
      new std::map<std::string, KeyHandler>(BuildKeyTable());
  return *table;
}

// --- shared command plumbing ---

// Runs a command body and maps the exception taxonomy onto exit codes:
// bad inputs (unreadable, unparsable, inconsistent) are 2, anything else
// unexpected is 1.  Collisions (3) and config mismatches (4) return
// directly from the body.
int GuardedRun(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const train::DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

PhoneticDictionary LoadDictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(StrCat("cannot open dictionary file ", path));
  return ParseDictionary(in);
}

std::string FeaturesRootOf(const std::string& manifest_path) {
  return fs::path(manifest_path).parent_path().string();
}

train::ModelKind ModelKindFromName(const std::string& name) {
  if (name == "stacked") return train::ModelKind::kStacked;
  if (name == "videoemb") return train::ModelKind::kVideoEmbedding;
  throw std::invalid_argument(
      StrCat("unknown model '", name, "' (expected stacked or videoemb)"));
}

// The cfg.* metadata block a trained checkpoint carries, rebuilt into a
// full RunConfig.
RunConfig ConfigFromCheckpointMeta(
    const std::map<std::string, std::string>& meta) {
  std::map<std::string, std::string> snapshot;
  for (const auto& [key, value] : meta)
    if (key.rfind("cfg.", 0) == 0) snapshot[key.substr(4)] = value;
  if (snapshot.empty())
    throw DataError(
        "checkpoint carries no configuration metadata; only checkpoints "
        "written by the train command are self-describing");
  return RunConfigFromSnapshot(snapshot);
}

std::string CheckpointModelName(const std::map<std::string, std::string>& meta,
                                const RunConfig& cfg) {
  auto it = meta.find("model");
  return it != meta.end() ? it->second : cfg.model;
}

// Grapheme/phoneme alphabet geometry for a model built outside a trainer.
g2p::G2PConfig FilledG2pConfig(const RunConfig& cfg,
                               const PhoneticDictionary& dict) {
  g2p::G2PConfig g2p_cfg = cfg.g2p;
  if (g2p_cfg.grapheme_table_size == 0)
    g2p_cfg.grapheme_table_size = dict.grapheme_set().table_size();
  if (g2p_cfg.target_alphabet_size == 0)
    g2p_cfg.target_alphabet_size =
        g2p_cfg.target_alphabet == g2p::G2PConfig::TargetAlphabet::kPhonemes
            ? dict.phone_set().size()
            : dict.grapheme_set().alphabet_size();
  return g2p_cfg;
}

// Canonicalizes, dedupes, and partitions raw query words into the ones the
// grapheme table can encode and the ones it cannot.
void PartitionQueries(const std::vector<std::string>& raw,
                      const GraphemeSet& graphemes,
                      std::vector<std::string>* usable,
                      std::vector<std::string>* skipped) {
  std::set<std::string> seen;
  for (const std::string& r : raw) {
    std::string word = CanonicalWord(r);
    if (word.empty() || !seen.insert(word).second) continue;
    try {
      EncodeWord(word, graphemes);
      usable->push_back(word);
    } catch (const DataError&) {
      skipped->push_back(word);
    }
  }
}

std::vector<metrics::LocalizationRecord> ReadLocalizationFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(StrCat("cannot open localization file ", path));
  std::vector<metrics::LocalizationRecord> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1) {
      if (line != "query,video,t_hat,windows")
        throw ParseError(line_number, "unexpected localization header");
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    size_t start = 0;
    for (int f = 0; f < 3; ++f) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos)
        throw ParseError(line_number, "expected four comma-separated fields");
      fields[f] = line.substr(start, comma - start);
      start = comma + 1;
    }
    fields[3] = line.substr(start);
    metrics::LocalizationRecord rec;
    try {
      rec.t_hat = ParseIntValue("t_hat", fields[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_number, e.what());
    }
    if (fields[3].empty()) continue;  // negative pair; nothing to localize
    std::istringstream windows(fields[3]);
    std::string token;
    while (windows >> token) {
      size_t colon = token.find(':');
      if (colon == std::string::npos)
        throw ParseError(line_number,
                         StrCat("window '", token, "' is not start:end"));
      try {
        rec.windows.emplace_back(
            ParseIntValue("window start", token.substr(0, colon)),
            ParseIntValue("window end", token.substr(colon + 1)));
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_number, e.what());
      }
    }
    if (rec.windows.empty())
      throw ParseError(line_number, "windows field holds no start:end pairs");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

RunConfig MakePreset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "paper-faithful") {
    c.master_seed = 1;
    c.validation_min_phonemes = 6;
    c.phase1_last_epoch = 20;
    c.kws.d_feat = 256;
    c.kws.d_v = 256;
    c.kws.d_r = 128;
    c.kws.d_s = 16;
    c.kws.dropout_p = 0.2;
    c.kws.lrelu_slope = 0.01;
    c.g2p.hidden_size = 64;
    c.g2p.embedding_size = 128;
    c.g2p.target_alphabet = g2p::G2PConfig::TargetAlphabet::kPhonemes;
    c.g2p.decoder_enabled = true;
    c.schedule.initial_lr = 2e-3;
    c.schedule.decay_interval = 20;
    c.schedule.total_epochs = 100;
    c.schedule.videos_per_minibatch = 40;
    c.synth_n_words = 400;
    c.synth_min_word_length = 4;
    c.synth_max_word_length = 12;
    c.synth_n_utterances = 2000;
    c.synth.frames_per_phoneme = 3;
    c.synth.noise_sigma = 0.1;
    c.synth.min_words = 3;
    c.synth.max_words = 8;
    c.synth.validation_fraction = 0.05;
    c.synth.test_fraction = 0.20;
    c.synth.planted_per_utterance = 2;
    c.split_ratios = {0.75, 0.05, 0.20};
  } else if (name == "desk-scale") {
    c.master_seed = 1;
    c.validation_min_phonemes = 6;
    c.phase1_last_epoch = 12;
    c.kws.d_feat = 32;
    c.kws.d_v = 32;
    c.kws.d_r = 32;
    c.kws.d_s = 8;
    c.kws.dropout_p = 0.2;
    c.kws.lrelu_slope = 0.01;
    c.g2p.hidden_size = 16;
    c.g2p.embedding_size = 32;
    c.g2p.target_alphabet = g2p::G2PConfig::TargetAlphabet::kPhonemes;
    c.g2p.decoder_enabled = true;
    c.schedule.initial_lr = 2e-3;
    c.schedule.decay_interval = 10;
    c.schedule.total_epochs = 24;
    c.schedule.videos_per_minibatch = 20;
    c.synth_n_words = 400;
    c.synth_min_word_length = 4;
    c.synth_max_word_length = 10;
    c.synth_n_utterances = 2000;
    c.synth.frames_per_phoneme = 3;
    c.synth.noise_sigma = 0.1;
    c.synth.min_words = 3;
    c.synth.max_words = 6;
    c.synth.validation_fraction = 0.05;
    c.synth.test_fraction = 0.20;
    c.synth.planted_per_utterance = 2;
    c.split_ratios = {0.75, 0.05, 0.20};
  } else {
    throw std::invalid_argument(StrCat("unknown preset '", name,
                                       "' (expected paper-faithful or "
                                       "desk-scale)"));
  }
  c.synth.d_feat = c.kws.d_feat;
  return c;
}

std::vector<std::string> OverrideKeys() {
  std::vector<std::string> keys;
  keys.reserve(KeyTable().size());
  for (const auto& [key, handler] : KeyTable()) keys.push_back(key);
  return keys;
}

void ApplyOverride(RunConfig* config, const std::string& key,
                   const std::string& value) {
  if (config == nullptr)
    throw std::invalid_argument("config must not be null");
  auto it = KeyTable().find(key);
  if (it == KeyTable().end())
    throw std::invalid_argument(
        StrCat("unknown configuration key '", key, "'"));
  it->second.set(config, key, value);
}

void ApplyOverrides(RunConfig* config,
                    const std::vector<std::string>& assignments) {
  for (const std::string& a : assignments) {
    size_t eq = a.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument(
          StrCat("override '", a, "' is not of the form key=value"));
    ApplyOverride(config, a.substr(0, eq), a.substr(eq + 1));
  }
}

std::map<std::string, std::string> ConfigSnapshot(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, handler] : KeyTable()) out[key] = handler.get(config);
  return out;
}

RunConfig RunConfigFromSnapshot(
    const std::map<std::string, std::string>& snapshot) {
  RunConfig config = MakePreset("desk-scale");
  config.preset.clear();  // reconstructed, not a named preset
  for (const auto& [key, value] : snapshot)
    ApplyOverride(&config, key, value);
  return config;
}

int CmdPrepare(const PrepareArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    if (args.out_prefix.empty())
      throw std::invalid_argument("an output prefix is required");
    if (args.min_phonemes < 1)
      throw std::invalid_argument("min_phonemes must be at least 1");
    PhoneticDictionary dict = LoadDictionary(args.dictionary);
    PhoneticDictionary usable = FilterByMinPhonemes(dict, args.min_phonemes);
    if (usable.entries().empty())
      throw DataError(StrCat("no dictionary word has ", args.min_phonemes,
                             " phonemes"));
    VocabularySplit split = SplitVocabulary(usable, args.ratios, args.seed);
    if (!args.corpus_manifest.empty()) {
      Manifest manifest = ReadManifestFile(args.corpus_manifest);
      std::set<std::string> corpus_words;
      for (const ManifestRecord& rec : manifest.records)
        corpus_words.insert(rec.transcript.begin(), rec.transcript.end());
      split = ReassignUnusedWords(split, corpus_words);
    }
    fs::path parent = fs::path(args.out_prefix).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    WriteSplitFiles(split, args.out_prefix);
    out << "usable words: " << usable.entries().size() << " of "
        << dict.entries().size() << "\n";
    out << "train words: " << split.train.size() << "\n";
    out << "validation words: " << split.validation.size() << "\n";
    out << "test words: " << split.test.size() << "\n";
    out << "wrote " << args.out_prefix << ".{train,valid,test}\n";
    return kExitOk;
  });
}

int CmdSynth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    if (args.out_dir.empty())
      throw std::invalid_argument("an output directory is required");
    std::error_code ec;
    if (fs::exists(args.out_dir, ec)) {
      if (!fs::is_directory(args.out_dir, ec)) {
        err << "error: " << args.out_dir << " exists and is not a directory\n";
        return kExitOutputCollision;
      }
      if (!fs::is_empty(args.out_dir, ec) && !args.force) {
        err << "error: " << args.out_dir
            << " is not empty; pass force to overwrite\n";
        return kExitOutputCollision;
      }
    }
    RunConfig cfg = args.config;
    cfg.synth.d_feat = cfg.kws.d_feat;
    PhoneticDictionary dict = synth::MakeSyntheticDictionary(
        cfg.synth_n_words, cfg.synth_min_word_length, cfg.synth_max_word_length,
        Rng::DeriveSeed(cfg.master_seed, kSynthDictStream));
    VocabularySplit split =
        SplitVocabulary(dict, cfg.split_ratios,
                        Rng::DeriveSeed(cfg.master_seed, kSynthSplitStream));
    Manifest manifest = synth::GenerateCorpus(
        dict, split, cfg.synth_n_utterances, cfg.synth,
        Rng::DeriveSeed(cfg.master_seed, kSynthCorpusStream), args.out_dir);
    std::set<std::string> corpus_words;
    for (const ManifestRecord& rec : manifest.records)
      corpus_words.insert(rec.transcript.begin(), rec.transcript.end());
    split = ReassignUnusedWords(split, corpus_words);
    WriteSplitFiles(split, args.out_dir + "/splits");
    WriteDictionaryFile(args.out_dir + "/dictionary.txt", dict);
    std::map<std::string, int> subset_counts;
    for (const ManifestRecord& rec : manifest.records)
      ++subset_counts[rec.subset];
    out << "utterances: " << manifest.records.size() << "\n";
    for (const auto& [subset, n] : subset_counts)
      out << "  " << subset << ": " << n << "\n";
    out << "vocabulary: train " << split.train.size() << ", validation "
        << split.validation.size() << ", test " << split.test.size() << "\n";
    out << "wrote " << args.out_dir << "/manifest.tsv\n";
    out << "wrote " << args.out_dir << "/dictionary.txt\n";
    out << "wrote " << args.out_dir << "/splits.{train,valid,test}\n";
    return kExitOk;
  });
}

int CmdTrain(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    RunConfig cfg = args.config;
    if (cfg.out_dir.empty())
      throw std::invalid_argument("an output directory is required");
    cfg.synth.d_feat = cfg.kws.d_feat;
    PhoneticDictionary dict = LoadDictionary(cfg.dictionary);
    VocabularySplit split = ReadSplitFiles(cfg.split_prefix);
    Manifest manifest = ReadManifestFile(cfg.manifest);

    train::TrainerOptions options;
    options.schedule = cfg.schedule;
    options.curriculum =
        train::MakeCurriculum(cfg.phase1_last_epoch, cfg.schedule.total_epochs);
    options.model = ModelKindFromName(cfg.model);
    options.master_seed = cfg.master_seed;
    options.checkpoint_dir = cfg.out_dir;
    options.validation_min_phonemes = cfg.validation_min_phonemes;
    options.log = &out;
    for (const auto& [key, value] : ConfigSnapshot(cfg))
      options.extra_checkpoint_meta["cfg." + key] = value;

    fs::create_directories(cfg.out_dir);
    train::Trainer trainer(manifest, FeaturesRootOf(cfg.manifest), dict, split,
                           cfg.kws, cfg.g2p, options);

    std::vector<train::EpochRecord> old_records;
    if (!args.resume.empty()) {
      std::map<std::string, std::string> meta =
          train::ReadCheckpointMeta(args.resume);
      for (const auto& [key, value] : ConfigSnapshot(cfg)) {
        auto it = meta.find("cfg." + key);
        if (it == meta.end()) {
          err << "error: checkpoint carries no value for cfg." << key
              << "; cannot verify the configuration matches\n";
          return kExitConfigMismatch;
        }
        if (it->second != value) {
          err << "error: configuration mismatch on cfg." << key
              << ": checkpoint has " << it->second << ", this run has "
              << value << "\n";
          return kExitConfigMismatch;
        }
      }
      trainer.LoadState(args.resume);
      out << "resumed at epoch " << trainer.next_epoch() << "\n";
      std::ifstream log_in(cfg.out_dir + "/train_log.csv");
      if (log_in) {
        for (const train::EpochRecord& rec : train::ReadTrainingLog(log_in))
          if (rec.epoch < trainer.next_epoch()) old_records.push_back(rec);
      }
    }

    int exit_code = kExitOk;
    try {
      trainer.Train();
    } catch (const train::DivergenceError& e) {
      err << "error: " << e.what() << "\n";
      exit_code = kExitFailure;
    }

    std::vector<train::EpochRecord> all_records = old_records;
    all_records.insert(all_records.end(), trainer.records().begin(),
                       trainer.records().end());
    std::string log_path = cfg.out_dir + "/train_log.csv";
    std::ofstream log_out(log_path, std::ios::trunc);
    if (!log_out) throw IoError(StrCat("cannot write ", log_path));
    train::WriteTrainingLog(log_out, all_records);

    if (exit_code == kExitOk) {
      out << "trained through epoch " << trainer.next_epoch() - 1 << " of "
          << cfg.schedule.total_epochs << "\n";
      if (trainer.best_epoch() > 0)
        out << "best validation eer "
            << FormatMetric(trainer.best_validation_eer()) << " at epoch "
            << trainer.best_epoch() << "\n";
      out << "wrote " << log_path << "\n";
      out << "checkpoints in " << cfg.out_dir << "\n";
    }
    return exit_code;
  });
}

int CmdScore(const ScoreArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    if (args.out_prefix.empty())
      throw std::invalid_argument("an output prefix is required");
    static const std::set<std::string> kSubsets = {"pretrain", "train",
                                                   "validation", "test"};
    if (!kSubsets.count(args.subset))
      throw std::invalid_argument(
          StrCat("unknown subset '", args.subset, "'"));

    std::map<std::string, std::string> meta =
        train::ReadCheckpointMeta(args.checkpoint);
    RunConfig cfg = ConfigFromCheckpointMeta(meta);
    std::string model_name = CheckpointModelName(meta, cfg);

    PhoneticDictionary dict = LoadDictionary(args.dictionary);
    Manifest manifest = ReadManifestFile(args.manifest);
    std::string features_root = FeaturesRootOf(args.manifest);
    if (!args.view.empty()) {
      Manifest filtered;
      for (const ManifestRecord& rec : manifest.records)
        if (rec.view == args.view) filtered.records.push_back(rec);
      if (filtered.records.empty())
        throw DataError(
            StrCat("no manifest records carry view '", args.view, "'"));
      manifest = std::move(filtered);
    }

    VocabularySplit split;
    if (!args.split_prefix.empty()) split = ReadSplitFiles(args.split_prefix);

    std::vector<std::string> raw_queries;
    if (!args.query_file.empty()) {
      raw_queries = ReadWordList(args.query_file);
    } else if (args.auto_queries_min_phonemes > 0) {
      if (args.split_prefix.empty())
        throw std::invalid_argument(
            "automatic query selection needs the vocabulary split files");
      std::vector<std::vector<std::string>> transcripts;
      for (const ManifestRecord& rec : manifest.records)
        if (rec.subset == args.subset) transcripts.push_back(rec.transcript);
      raw_queries = metrics::BuildQueryList(
          transcripts,
          std::set<std::string>(split.train.begin(), split.train.end()),
          std::set<std::string>(split.validation.begin(),
                                split.validation.end()),
          dict, args.auto_queries_min_phonemes);
    } else {
      throw std::invalid_argument(
          "either a query file or automatic query selection is required");
    }

    std::vector<std::string> queries, skipped;
    PartitionQueries(raw_queries, dict.grapheme_set(), &queries, &skipped);
    if (!skipped.empty()) {
      std::string skipped_path = args.out_prefix + ".skipped.txt";
      std::ofstream s(skipped_path, std::ios::trunc);
      if (!s) throw IoError(StrCat("cannot write ", skipped_path));
      for (const std::string& w : skipped) s << w << "\n";
      err << "skipped " << skipped.size()
          << " queries outside the grapheme alphabet (see " << skipped_path
          << ")\n";
    }
    if (queries.empty()) {
      err << "error: none of the requested queries can be encoded\n";
      return kExitInputError;
    }

    train::TrainerOptions options;
    options.schedule = cfg.schedule;
    options.curriculum =
        train::MakeCurriculum(cfg.phase1_last_epoch, cfg.schedule.total_epochs);
    options.model = ModelKindFromName(model_name);
    options.master_seed = cfg.master_seed;
    options.validation_min_phonemes = cfg.validation_min_phonemes;
    train::Trainer trainer(manifest, features_root, dict, split, cfg.kws,
                           cfg.g2p, options);
    trainer.LoadState(args.checkpoint);
    if (options.model == train::ModelKind::kStacked)
      trainer.kws_model().set_backend(kws::KwsNetConfig::Backend::kSequence);

    train::SubsetScores scores =
        trainer.ScoreSubsetQueries(args.subset, queries);

    std::vector<size_t> order(scores.records.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const metrics::ScoreRecord& ra = scores.records[a];
      const metrics::ScoreRecord& rb = scores.records[b];
      return std::tie(ra.query, ra.video) < std::tie(rb.query, rb.video);
    });
    std::vector<metrics::ScoreRecord> records;
    std::vector<int> frames;
    records.reserve(order.size());
    for (size_t i : order) {
      records.push_back(scores.records[i]);
      if (!scores.frame_estimates.empty())
        frames.push_back(scores.frame_estimates[i]);
    }

    std::string scores_path = args.out_prefix + ".scores.csv";
    {
      std::ofstream s(scores_path, std::ios::trunc);
      if (!s) throw IoError(StrCat("cannot write ", scores_path));
      metrics::WriteScoreRecords(s, records);
    }
    out << "scored " << queries.size() << " queries over "
        << records.size() / queries.size() << " videos\n";
    out << "wrote " << scores_path << "\n";

    if (!frames.empty()) {
      std::string loc_path = args.out_prefix + ".loc.csv";
      std::ofstream loc(loc_path, std::ios::trunc);
      if (!loc) throw IoError(StrCat("cannot write ", loc_path));
      loc << "query,video,t_hat,windows\n";
      for (size_t i = 0; i < records.size(); ++i) {
        loc << records[i].query << "," << records[i].video << "," << frames[i]
            << ",";
        if (records[i].label == 1) {
          const ManifestRecord* rec = manifest.Find(records[i].video);
          if (rec != nullptr && rec->has_boundaries()) {
            bool first = true;
            for (size_t w = 0; w < rec->transcript.size(); ++w) {
              if (rec->transcript[w] != records[i].query) continue;
              if (!first) loc << " ";
              loc << rec->boundaries[w].first << ":"
                  << rec->boundaries[w].second;
              first = false;
            }
          }
        }
        loc << "\n";
      }
      out << "wrote " << loc_path << "\n";
    }
    return kExitOk;
  });
}

int CmdEval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    std::ifstream in(args.score_file);
    if (!in) throw IoError(StrCat("cannot open score file ", args.score_file));
    std::vector<metrics::ScoreRecord> records = metrics::ReadScoreRecords(in);
    if (records.empty()) throw DataError("score file holds no records");

    metrics::DetCurve curve = metrics::ComputeDet(records);
    std::set<std::string> queries;
    int positives = 0;
    for (const metrics::ScoreRecord& r : records) {
      queries.insert(r.query);
      positives += r.label;
    }
    out << "records " << records.size() << "\n";
    out << "queries " << queries.size() << "\n";
    out << "positives " << positives << "\n";
    out << "eer " << FormatMetric(metrics::ComputeEer(curve)) << "\n";
    out << "mdr_at_far5 " << FormatMetric(metrics::MdrAtFar(curve, 0.05))
        << "\n";
    out << "mdr_at_far1 " << FormatMetric(metrics::MdrAtFar(curve, 0.01))
        << "\n";
    out << "far_at_mdr5 " << FormatMetric(metrics::FarAtMdr(curve, 0.05))
        << "\n";
    out << "far_at_mdr1 " << FormatMetric(metrics::FarAtMdr(curve, 0.01))
        << "\n";
    for (const auto& [n, rate] : metrics::TopNRates(records, args.n_values))
      out << "top" << n << " " << FormatMetric(rate) << "\n";

    if (!args.localization_file.empty()) {
      std::vector<metrics::LocalizationRecord> locs =
          ReadLocalizationFile(args.localization_file);
      if (!locs.empty())
        out << "localization_accuracy "
            << FormatMetric(metrics::LocalizationAccuracy(
                   locs, args.localization_tolerance))
            << " over " << locs.size() << " occurrences\n";
      else
        out << "localization_accuracy n/a (no localized positives)\n";
    }

    std::string det_path =
        args.det_file.empty() ? args.score_file + ".det.csv" : args.det_file;
    std::ofstream det(det_path, std::ios::trunc);
    if (!det) throw IoError(StrCat("cannot write ", det_path));
    metrics::WriteDetCurve(det, curve);
    out << "wrote " << det_path << "\n";
    return kExitOk;
  });
}

namespace {

// The g2p model plus whichever spotting network the checkpoint holds,
// registered under the trainer's tensor names so the checkpoint loads
// completely.  `kws`/`baseline` keep the spotting tensors alive.
struct LoadedModels {
  g2p::G2PConfig g2p_config;
  std::unique_ptr<g2p::G2pModel<float>> g2p;
  std::unique_ptr<kws::KwsNet<float>> kws;
  std::unique_ptr<kws::VideoEmbeddingNet<float>> baseline;
  nn::ParamRegistry<float> registry;
};

LoadedModels LoadModelsFromCheckpoint(const std::string& checkpoint,
                                      const PhoneticDictionary& dict) {
  std::map<std::string, std::string> meta =
      train::ReadCheckpointMeta(checkpoint);
  RunConfig cfg = ConfigFromCheckpointMeta(meta);
  std::string model_name = CheckpointModelName(meta, cfg);
  LoadedModels models;
  models.g2p_config = FilledG2pConfig(cfg, dict);
  models.g2p = std::make_unique<g2p::G2pModel<float>>(models.g2p_config);
  models.g2p->Register(&models.registry, "g2p");
  if (ModelKindFromName(model_name) == train::ModelKind::kStacked) {
    models.kws = std::make_unique<kws::KwsNet<float>>(cfg.kws);
    models.kws->Register(&models.registry, "kws");
  } else {
    kws::KwsNetConfig baseline_cfg = cfg.kws;
    baseline_cfg.backend = kws::KwsNetConfig::Backend::kVideoEmbedding;
    models.baseline =
        std::make_unique<kws::VideoEmbeddingNet<float>>(baseline_cfg);
    models.baseline->Register(&models.registry, "kws.videoemb");
  }
  train::LoadCheckpoint(checkpoint, models.registry, nullptr);
  return models;
}

}  // namespace

int CmdEmbed(const EmbedArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    PhoneticDictionary dict = LoadDictionary(args.dictionary);
    LoadedModels models = LoadModelsFromCheckpoint(args.checkpoint, dict);
    std::vector<std::string> words = ReadWordList(args.word_file);

    std::vector<std::pair<std::string, Eigen::VectorXf>> rows;
    std::set<std::string> seen;
    for (const std::string& raw : words) {
      std::string word = CanonicalWord(raw);
      if (word.empty() || !seen.insert(word).second) continue;
      try {
        std::vector<int> graphemes = EncodeWord(word, dict.grapheme_set());
        rows.emplace_back(word, models.g2p->EncodeKeyword(graphemes).r);
      } catch (const DataError& e) {
        err << "skipped " << word << ": " << e.what() << "\n";
      }
    }
    if (rows.empty()) {
      err << "error: none of the requested words can be encoded\n";
      return kExitInputError;
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (!args.out_file.empty()) {
      file.open(args.out_file, std::ios::trunc);
      if (!file) throw IoError(StrCat("cannot write ", args.out_file));
      sink = &file;
    }
    *sink << "d_r " << models.g2p_config.embedding_size << "\n";
    g2p::WriteEmbeddingTable(*sink, rows);
    if (!args.out_file.empty())
      out << "wrote " << rows.size() << " embeddings to " << args.out_file
          << "\n";
    return kExitOk;
  });
}

int CmdG2p(const G2pArgs& args, std::ostream& out, std::ostream& err) {
  return GuardedRun(err, [&]() -> int {
    PhoneticDictionary dict = LoadDictionary(args.dictionary);
    LoadedModels models = LoadModelsFromCheckpoint(args.checkpoint, dict);
    if (!models.g2p_config.decoder_enabled)
      throw DataError(
          "the checkpoint's model has no pronunciation decoder");
    std::vector<std::string> words = ReadWordList(args.word_file);

    bool phoneme_targets =
        models.g2p_config.target_alphabet ==
        g2p::G2PConfig::TargetAlphabet::kPhonemes;
    int emitted = 0;
    std::set<std::string> seen;
    for (const std::string& raw : words) {
      std::string word = CanonicalWord(raw);
      if (word.empty() || !seen.insert(word).second) continue;
      try {
        std::vector<int> graphemes = EncodeWord(word, dict.grapheme_set());
        g2p::G2pModel<float>::DecodeResult res =
            models.g2p->DecodePronunciation(graphemes, nullptr);
        out << word;
        if (phoneme_targets) {
          for (int idx : res.symbols)
            out << " " << dict.phone_set().symbols[idx];
        } else {
          out << " " << DecodeWord(res.symbols, dict.grapheme_set());
        }
        out << "\n";
        ++emitted;
      } catch (const DataError& e) {
        err << "skipped " << word << ": " << e.what() << "\n";
      }
    }
    if (emitted == 0) {
      err << "error: none of the requested words can be encoded\n";
      return kExitInputError;
    }
    return kExitOk;
  });
}

int ParseThreadsValue(const std::string& value) {
  if (value.empty()) return 0;
  long long n = ParseWholeNumber("LIPSPOT_THREADS", value);
  if (n < 0)
    throw std::invalid_argument(
        StrCat("LIPSPOT_THREADS must be non-negative, got ", value));
  return static_cast<int>(n);
}

}  // namespace cli
}  // namespace lipspot
