// include/lipspot/cli.h

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

// Command entry points and run configuration.  Every command is an ordinary
// function over a typed argument struct, returning a process exit code and
// writing through the streams it is handed; the lipspot binary is a thin
// flag-parsing shell around these.  Exit codes: 0 success, 2 input error,
// 3 output collision, 4 configuration mismatch, 1 other failure.

#ifndef LIPSPOT_CLI_H_
#define LIPSPOT_CLI_H_

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "lipspot/g2p.h"
#include "lipspot/kwsnet.h"
#include "lipspot/manifest.h"
#include "lipspot/synthcorpus.h"
#include "lipspot/training.h"

namespace lipspot {
namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitOutputCollision = 3;
inline constexpr int kExitConfigMismatch = 4;

// Every tunable of a run in one place.  Paths identify the inputs and
// outputs; everything else is covered by the presets and addressable
// through flat dotted override keys (see OverrideKeys).
struct RunConfig {
  // Paths; never part of the configuration snapshot.
  std::string dictionary;    // pronunciation dictionary file
  std::string manifest;      // corpus manifest
  std::string split_prefix;  // vocabulary split files (.train/.valid/.test)
  std::string out_dir;       // where checkpoints and logs land

  std::string preset;  // the preset this config started from
  std::string model = "stacked";  // "stacked" | "videoemb"
  uint64_t master_seed = 1;
  int validation_min_phonemes = 6;
  int phase1_last_epoch = 20;

  kws::KwsNetConfig kws;
  g2p::G2PConfig g2p;
  train::OptimizerSchedule schedule;

  // Synthetic-corpus generation; feature width follows kws.d_feat.
  int synth_n_words = 400;
  int synth_min_word_length = 4;
  int synth_max_word_length = 10;
  int synth_n_utterances = 2000;
  synth::SynthConfig synth;

  // Vocabulary split fractions (train, validation, test).
  std::array<double, 3> split_ratios = {0.75, 0.05, 0.20};
};

// The two supported presets: "paper-faithful" carries the published model
// sizes and schedule; "desk-scale" is a reduced geometry that trains on a
// synthetic corpus in CPU minutes.  Throws std::invalid_argument on any
// other name.
RunConfig MakePreset(const std::string& name);

// All recognized override keys, sorted.
std::vector<std::string> OverrideKeys();

// Applies `key=value`-style settings.  Unknown keys and unparsable values
// throw std::invalid_argument.
void ApplyOverride(RunConfig* config, const std::string& key,
                   const std::string& value);
void ApplyOverrides(RunConfig* config,
                    const std::vector<std::string>& assignments);

// The full tunable surface as a flat string map, one entry per override
// key.  Reconstructing through RunConfigFromSnapshot is exact.
std::map<std::string, std::string> ConfigSnapshot(const RunConfig& config);
RunConfig RunConfigFromSnapshot(
    const std::map<std::string, std::string>& snapshot);

// --- commands ---

struct PrepareArgs {
  std::string dictionary;
  std::string out_prefix;
  std::array<double, 3> ratios = {0.75, 0.05, 0.20};
  uint64_t seed = 1;
  int min_phonemes = 4;
  // Optional: a manifest whose transcripts decide which unused train and
  // validation words are moved to the test vocabulary.
  std::string corpus_manifest;
};
int CmdPrepare(const PrepareArgs& args, std::ostream& out, std::ostream& err);

struct SynthArgs {
  RunConfig config;
  std::string out_dir;
  bool force = false;
};
int CmdSynth(const SynthArgs& args, std::ostream& out, std::ostream& err);

struct TrainArgs {
  RunConfig config;
  std::string resume;  // checkpoint path; "" trains from scratch
};
int CmdTrain(const TrainArgs& args, std::ostream& out, std::ostream& err);

struct ScoreArgs {
  std::string checkpoint;
  std::string manifest;
  std::string dictionary;
  std::string split_prefix;  // needed for --auto-queries
  std::string query_file;    // one word per line; "" with auto_queries
  int auto_queries_min_phonemes = 0;  // > 0 builds the query list itself
  std::string subset = "test";
  std::string view;  // "" scores every view
  std::string out_prefix;
};
int CmdScore(const ScoreArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
  std::string score_file;
  std::string localization_file;  // "" skips localization accuracy
  std::string det_file;           // "" appends .det.csv to the score file
  std::vector<int> n_values = {1, 2, 4, 8};
  int localization_tolerance = 2;
};
int CmdEval(const EvalArgs& args, std::ostream& out, std::ostream& err);

struct EmbedArgs {
  std::string checkpoint;
  std::string dictionary;
  std::string word_file;
  std::string out_file;  // "" writes the table to stdout
};
int CmdEmbed(const EmbedArgs& args, std::ostream& out, std::ostream& err);

struct G2pArgs {
  std::string checkpoint;
  std::string dictionary;
  std::string word_file;
};
int CmdG2p(const G2pArgs& args, std::ostream& out, std::ostream& err);

// Parses the LIPSPOT_THREADS environment value.  Returns the worker cap
// (0 and 1 both mean fully deterministic single-threaded mode, and every
// command currently runs that way regardless).  Throws
// std::invalid_argument on a non-numeric or negative value.
int ParseThreadsValue(const std::string& value);

}  // namespace cli
}  // namespace lipspot

#endif  // LIPSPOT_CLI_H_
