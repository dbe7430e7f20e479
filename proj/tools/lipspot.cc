// tools/lipspot.cc

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

// Command-line front end: flag parsing only.  All behavior lives in the
// library (lipspot/cli.h) where it is unit-tested.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lipspot/cli.h"

namespace cli = lipspot::cli;

namespace {

// Flags shared by every command that takes a full run configuration.
struct ConfigFlags {
  std::string preset = "desk-scale";
  std::vector<std::string> sets;
  uint64_t seed = 0;
  bool seed_given = false;
};

void AddConfigFlags(CLI::App* sub, ConfigFlags* flags) {
  sub->add_option("--preset", flags->preset,
                  "configuration preset: paper-faithful or desk-scale")
      ->capture_default_str();
  sub->add_option("--set", flags->sets,
                  "override one configuration key, as key=value "
                  "(repeatable; `lipspot keys` lists them)");
  sub->add_option("--seed", flags->seed,
                  "master random seed (wins over --set master_seed=...)");
}

cli::RunConfig BuildConfig(const CLI::App* sub, const ConfigFlags& flags) {
  cli::RunConfig cfg = cli::MakePreset(flags.preset);
  cli::ApplyOverrides(&cfg, flags.sets);
  if (sub->count("--seed") > 0) cfg.master_seed = flags.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  // The worker cap is accepted for compatibility with wrapper scripts, but
  // execution stays single-threaded so runs reproduce bit for bit.
  const char* threads_env = std::getenv("LIPSPOT_THREADS");
  try {
    cli::ParseThreadsValue(threads_env == nullptr ? "" : threads_env);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInputError;
  }

  CLI::App app{"zero-shot keyword spotting in silent video"};
  app.require_subcommand(1);
  int exit_code = cli::kExitOk;

  // keys
  CLI::App* keys = app.add_subcommand(
      "keys", "list the configuration keys --set understands");
  keys->callback([&]() {
    for (const std::string& key : cli::OverrideKeys())
      std::cout << key << "\n";
  });

  // prepare
  auto prepare_args = std::make_shared<cli::PrepareArgs>();
  auto prepare_ratios = std::make_shared<std::vector<double>>();
  CLI::App* prepare = app.add_subcommand(
      "prepare", "split a pronunciation dictionary into train/valid/test "
                 "vocabulary files");
  prepare->add_option("--dict", prepare_args->dictionary,
                      "pronunciation dictionary")
      ->required();
  prepare->add_option("--out", prepare_args->out_prefix,
                      "output prefix for the .train/.valid/.test files")
      ->required();
  prepare->add_option("--ratios", *prepare_ratios,
                      "train validation test fractions (three numbers)")
      ->expected(3);
  prepare->add_option("--seed", prepare_args->seed, "shuffling seed")
      ->capture_default_str();
  prepare->add_option("--min-phonemes", prepare_args->min_phonemes,
                      "drop words with fewer phonemes than this")
      ->capture_default_str();
  prepare->add_option("--manifest", prepare_args->corpus_manifest,
                      "corpus manifest; unused train/valid words move to the "
                      "test vocabulary");
  prepare->callback([&, prepare_args, prepare_ratios]() {
    if (prepare_ratios->size() == 3)
      prepare_args->ratios = {(*prepare_ratios)[0], (*prepare_ratios)[1],
                              (*prepare_ratios)[2]};
    exit_code = cli::CmdPrepare(*prepare_args, std::cout, std::cerr);
  });

  // synth
  auto synth_args = std::make_shared<cli::SynthArgs>();
  auto synth_flags = std::make_shared<ConfigFlags>();
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic feature corpus with dictionary and "
               "vocabulary splits");
  synth->add_option("--out", synth_args->out_dir, "output directory")
      ->required();
  synth->add_flag("--force", synth_args->force,
                  "write into a non-empty directory");
  AddConfigFlags(synth, synth_flags.get());
  synth->callback([&, synth_args, synth_flags]() {
    try {
      synth_args->config = BuildConfig(synth, *synth_flags);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = cli::kExitInputError;
      return;
    }
    exit_code = cli::CmdSynth(*synth_args, std::cout, std::cerr);
  });

  // train
  auto train_args = std::make_shared<cli::TrainArgs>();
  auto train_flags = std::make_shared<ConfigFlags>();
  auto train_paths = std::make_shared<std::vector<std::string>>(4);
  CLI::App* train = app.add_subcommand(
      "train", "train a spotting model over a feature corpus");
  train->add_option("--dict", (*train_paths)[0], "pronunciation dictionary")
      ->required();
  train->add_option("--splits", (*train_paths)[1],
                    "vocabulary split prefix (.train/.valid/.test)")
      ->required();
  train->add_option("--manifest", (*train_paths)[2], "corpus manifest")
      ->required();
  train->add_option("--out", (*train_paths)[3],
                    "directory for checkpoints and the training log")
      ->required();
  train->add_option("--resume", train_args->resume,
                    "continue from this checkpoint");
  AddConfigFlags(train, train_flags.get());
  train->callback([&, train_args, train_flags, train_paths]() {
    try {
      train_args->config = BuildConfig(train, *train_flags);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = cli::kExitInputError;
      return;
    }
    train_args->config.dictionary = (*train_paths)[0];
    train_args->config.split_prefix = (*train_paths)[1];
    train_args->config.manifest = (*train_paths)[2];
    train_args->config.out_dir = (*train_paths)[3];
    exit_code = cli::CmdTrain(*train_args, std::cout, std::cerr);
  });

  // score
  auto score_args = std::make_shared<cli::ScoreArgs>();
  CLI::App* score = app.add_subcommand(
      "score", "score a subset's videos against a query list");
  score->add_option("--checkpoint", score_args->checkpoint,
                    "trained model checkpoint")
      ->required();
  score->add_option("--manifest", score_args->manifest, "corpus manifest")
      ->required();
  score->add_option("--dict", score_args->dictionary,
                    "pronunciation dictionary")
      ->required();
  score->add_option("--splits", score_args->split_prefix,
                    "vocabulary split prefix; required with --auto-queries");
  score->add_option("--queries", score_args->query_file,
                    "query words, one per line");
  score->add_option("--auto-queries", score_args->auto_queries_min_phonemes,
                    "build the query list from unseen subset words with at "
                    "least this many phonemes");
  score->add_option("--subset", score_args->subset,
                    "manifest subset to score")
      ->capture_default_str();
  score->add_option("--view", score_args->view,
                    "restrict to records with this camera view");
  score->add_option("--out", score_args->out_prefix,
                    "output prefix for .scores.csv and .loc.csv")
      ->required();
  score->callback([&, score_args]() {
    exit_code = cli::CmdScore(*score_args, std::cout, std::cerr);
  });

  // eval
  auto eval_args = std::make_shared<cli::EvalArgs>();
  CLI::App* eval = app.add_subcommand(
      "eval", "detection and localization metrics over a score file");
  eval->add_option("--scores", eval_args->score_file, "score CSV to evaluate")
      ->required();
  eval->add_option("--loc", eval_args->localization_file,
                   "localization CSV for localization accuracy");
  eval->add_option("--det", eval_args->det_file,
                   "where to write the DET curve (default: scores + "
                   ".det.csv)");
  eval->add_option("--top-n", eval_args->n_values,
                   "ranking depths for the per-video hit rates");
  eval->add_option("--tolerance", eval_args->localization_tolerance,
                   "frames of slack around each keyword window")
      ->capture_default_str();
  eval->callback([&, eval_args]() {
    exit_code = cli::CmdEval(*eval_args, std::cout, std::cerr);
  });

  // embed
  auto embed_args = std::make_shared<cli::EmbedArgs>();
  CLI::App* embed = app.add_subcommand(
      "embed", "write keyword embeddings for a word list");
  embed->add_option("--checkpoint", embed_args->checkpoint,
                    "trained model checkpoint")
      ->required();
  embed->add_option("--dict", embed_args->dictionary,
                    "pronunciation dictionary")
      ->required();
  embed->add_option("--words", embed_args->word_file,
                    "words to embed, one per line")
      ->required();
  embed->add_option("--out", embed_args->out_file,
                    "output file (default: stdout)");
  embed->callback([&, embed_args]() {
    exit_code = cli::CmdEmbed(*embed_args, std::cout, std::cerr);
  });

  // g2p
  auto g2p_args = std::make_shared<cli::G2pArgs>();
  CLI::App* g2p = app.add_subcommand(
      "g2p", "greedy-decode pronunciations for a word list");
  g2p->add_option("--checkpoint", g2p_args->checkpoint,
                  "trained model checkpoint")
      ->required();
  g2p->add_option("--dict", g2p_args->dictionary, "pronunciation dictionary")
      ->required();
  g2p->add_option("--words", g2p_args->word_file,
                  "words to decode, one per line")
      ->required();
  g2p->callback([&, g2p_args]() {
    exit_code = cli::CmdG2p(*g2p_args, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitInputError;
  }
  return exit_code;
}
