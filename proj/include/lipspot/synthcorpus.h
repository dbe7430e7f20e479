// include/lipspot/synthcorpus.h

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

#ifndef LIPSPOT_SYNTHCORPUS_H_
#define LIPSPOT_SYNTHCORPUS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/frontend.h"
#include "lipspot/manifest.h"
#include "lipspot/nn/types.h"
#include "lipspot/phonedict.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace synth {

// One seeded unit-norm Gaussian direction per phoneme.
struct PhonemeCodebook {
  std::map<std::string, nn::Mat<float>> vectors;  // d_feat x 1 each
  int d_feat = 0;
  uint64_t seed = 0;
};

struct SynthConfig {
  int frames_per_phoneme = 3;
  double noise_sigma = 0.1;
  int min_words = 3;  // words per utterance, inclusive range
  int max_words = 8;
  int d_feat = 256;  // width of the emitted feature rows
  // Shares of the utterance budget planted with held-out vocabulary; the
  // remainder is the training subset.
  double validation_fraction = 0.1;
  double test_fraction = 0.2;
  // Held-out words planted into each evaluation utterance, cycled through
  // the held-out vocabulary so every word gets coverage.
  int planted_per_utterance = 2;
};

// A synthetic video: features plus the transcript that generated them, with
// inclusive per-word frame boundaries covering [0, T-1] contiguously.
struct SynthVideo {
  frontend::FeatureSequence features;
  std::vector<std::string> transcript;
  std::vector<std::pair<int, int>> boundaries;
};

PhonemeCodebook BuildCodebook(const PhoneSet& phones, int d_feat,
                              uint64_t seed);

// Emits frames_per_phoneme noisy copies of each phoneme's codebook vector,
// word by word.  Every word must be in the dictionary.
SynthVideo SynthesizeUtterance(const std::vector<std::string>& words,
                               const PhoneticDictionary& dict,
                               const PhonemeCodebook& codebook,
                               const SynthConfig& config, Rng* rng);

// Writes feature files under <out_dir>/features/ and returns the manifest
// (also written to <out_dir>/manifest.tsv).  Training utterances draw words
// only from split.train; validation and test utterances mix train-vocabulary
// words with held-out words planted from their own split.  Utterance i is
// generated from the child seed derived for index i, so corpora are
// reproducible record by record.
cli::Manifest GenerateCorpus(const PhoneticDictionary& dict,
                             const VocabularySplit& split, int n_utterances,
                             const SynthConfig& config, uint64_t seed,
                             const std::string& out_dir);

// A pronunciation dictionary of unique random words whose phonemes are the
// letter-indexed symbols A1..Z1, one per letter; phoneme count thus equals
// word length.  Useful wherever a corpus needs a self-contained dictionary.
PhoneticDictionary MakeSyntheticDictionary(int n_words, int min_length,
                                           int max_length, uint64_t seed);

}  // namespace synth
}  // namespace lipspot

#endif  // LIPSPOT_SYNTHCORPUS_H_
