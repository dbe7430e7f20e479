// src/synthcorpus.cc

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

#include "lipspot/synthcorpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>

namespace lipspot {
namespace synth {

namespace {

// Seed stream for the corpus-wide codebook, distinct from any utterance index.
constexpr uint64_t kCodebookStream = 0xC0DEB00Cull;

void CheckConfig(const SynthConfig& config) {
  if (config.frames_per_phoneme < 1)
    throw std::invalid_argument("frames_per_phoneme must be >= 1");
  if (config.noise_sigma < 0.0)
    throw std::invalid_argument("noise_sigma must be >= 0");
  if (config.min_words < 1 || config.max_words < config.min_words)
    throw std::invalid_argument("words_per_utterance range is empty");
  if (config.d_feat < 2) throw std::invalid_argument("d_feat must be >= 2");
  if (config.validation_fraction < 0.0 || config.test_fraction < 0.0 ||
      config.validation_fraction + config.test_fraction >= 1.0)
    throw std::invalid_argument("held-out fractions must leave training data");
  if (config.planted_per_utterance < 1)
    throw std::invalid_argument("planted_per_utterance must be >= 1");
}

// m distinct entries of pool, order randomized.
std::vector<std::string> SampleDistinct(const std::vector<std::string>& pool,
                                        int m, Rng* rng) {
  std::vector<size_t> indices(pool.size());
  for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  rng->Shuffle(&indices);
  const int take = std::min<int>(m, static_cast<int>(pool.size()));
  std::vector<std::string> out;
  out.reserve(take);
  for (int i = 0; i < take; ++i) out.push_back(pool[indices[i]]);
  return out;
}

}  // namespace

PhonemeCodebook BuildCodebook(const PhoneSet& phones, int d_feat,
                              uint64_t seed) {
  if (d_feat < 2) throw std::invalid_argument("d_feat must be >= 2");
  PhonemeCodebook codebook;
  codebook.d_feat = d_feat;
  codebook.seed = seed;
  Rng rng(seed);
  for (const std::string& phone : phones.symbols) {
    nn::Mat<float> v(d_feat, 1);
    for (int d = 0; d < d_feat; ++d)
      v(d, 0) = static_cast<float>(rng.Normal());
    const float norm = v.norm();
    if (norm == 0.0f) {
      v.setZero();
      v(0, 0) = 1.0f;  // measure-zero fallback keeps norms exact
    } else {
      v /= norm;
    }
    codebook.vectors.emplace(phone, std::move(v));
  }
  return codebook;
}

SynthVideo SynthesizeUtterance(const std::vector<std::string>& words,
                               const PhoneticDictionary& dict,
                               const PhonemeCodebook& codebook,
                               const SynthConfig& config, Rng* rng) {
  CheckConfig(config);
  if (words.empty())
    throw std::invalid_argument("utterance needs at least one word");
  if (config.noise_sigma > 0.0 && rng == nullptr)
    throw std::invalid_argument("noisy synthesis needs a generator");

  const int k = config.frames_per_phoneme;
  std::vector<const DictEntry*> entries;
  int total_frames = 0;
  for (const std::string& word : words) {
    const DictEntry* entry = dict.Find(word);
    if (entry == nullptr)
      throw std::invalid_argument(
          StrCat("word '", word, "' is not in the dictionary"));
    entries.push_back(entry);
    total_frames += k * entry->phoneme_count();
  }

  SynthVideo video;
  video.transcript = words;
  video.features.features.resize(total_frames, codebook.d_feat);
  int t = 0;
  for (const DictEntry* entry : entries) {
    const std::vector<std::string>& phones = entry->pronunciations.front();
    const int start = t;
    for (const std::string& phone : phones) {
      auto it = codebook.vectors.find(phone);
      if (it == codebook.vectors.end())
        throw DataError(StrCat("phoneme '", phone, "' of word '", entry->word,
                               "' is missing from the codebook"));
      const nn::Mat<float>& v = it->second;
      for (int rep = 0; rep < k; ++rep, ++t) {
        for (int d = 0; d < codebook.d_feat; ++d) {
          float noise =
              config.noise_sigma > 0.0
                  ? static_cast<float>(config.noise_sigma * rng->Normal())
                  : 0.0f;
          video.features.features(t, d) = v(d, 0) + noise;
        }
      }
    }
    video.boundaries.emplace_back(start, t - 1);
  }
  return video;
}

cli::Manifest GenerateCorpus(const PhoneticDictionary& dict,
                             const VocabularySplit& split, int n_utterances,
                             const SynthConfig& config, uint64_t seed,
                             const std::string& out_dir) {
  CheckConfig(config);
  if (n_utterances < 1)
    throw std::invalid_argument("n_utterances must be >= 1");
  if (split.train.empty())
    throw std::invalid_argument("training vocabulary is empty");

  const int n_test =
      static_cast<int>(n_utterances * config.test_fraction + 0.5);
  const int n_val =
      static_cast<int>(n_utterances * config.validation_fraction + 0.5);
  const int n_train = n_utterances - n_test - n_val;
  if (n_train < 1)
    throw std::invalid_argument("held-out fractions leave no training rows");

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "features");

  PhonemeCodebook codebook = BuildCodebook(
      dict.phone_set(), config.d_feat, Rng::DeriveSeed(seed, kCodebookStream));

  cli::Manifest manifest;
  size_t val_cursor = 0, test_cursor = 0;
  for (int i = 0; i < n_utterances; ++i) {
    Rng rng(Rng::DeriveSeed(seed, static_cast<uint64_t>(i)));
    const int m =
        config.min_words +
        static_cast<int>(rng.UniformInt(config.max_words - config.min_words + 1));

    std::string subset;
    const std::vector<std::string>* heldout = nullptr;
    size_t* cursor = nullptr;
    if (i < n_train) {
      subset = "train";
    } else if (i < n_train + n_val) {
      subset = "validation";
      heldout = &split.validation;
      cursor = &val_cursor;
    } else {
      subset = "test";
      heldout = &split.test;
      cursor = &test_cursor;
    }

    std::vector<std::string> words;
    if (heldout == nullptr || heldout->empty()) {
      words = SampleDistinct(split.train, m, &rng);
    } else {
      // Cycle the held-out vocabulary so every word is planted somewhere.
      int plants = std::min(config.planted_per_utterance, m - 1);
      plants = std::min<int>(plants, static_cast<int>(heldout->size()));
      words = SampleDistinct(split.train, m - plants, &rng);
      for (int p = 0; p < plants; ++p) {
        words.push_back((*heldout)[*cursor % heldout->size()]);
        ++*cursor;
      }
      rng.Shuffle(&words);
    }

    SynthVideo video =
        SynthesizeUtterance(words, dict, codebook, config, &rng);

    char id[32];
    std::snprintf(id, sizeof(id), "synth%05d", i);
    video.features.source_id = id;
    const std::string relative = StrCat("features/", id, ".lspf");
    frontend::WriteFeatureFile((fs::path(out_dir) / relative).string(),
                               video.features.features);

    cli::ManifestRecord record;
    record.video_id = id;
    record.feature_path = relative;
    record.num_frames = static_cast<int>(video.features.features.rows());
    record.subset = subset;
    record.transcript = video.transcript;
    record.boundaries = video.boundaries;
    manifest.records.push_back(std::move(record));
  }

  cli::WriteManifestFile((fs::path(out_dir) / "manifest.tsv").string(),
                         manifest);
  return manifest;
}

PhoneticDictionary MakeSyntheticDictionary(int n_words, int min_length,
                                           int max_length, uint64_t seed) {
  if (n_words < 1) throw std::invalid_argument("n_words must be >= 1");
  if (min_length < 1 || max_length < min_length)
    throw std::invalid_argument("word length range is empty");
  Rng rng(seed);
  std::set<std::string> seen;
  PhoneticDictionary dict;
  long attempts = 0;
  const long max_attempts = 1000L * n_words + 1000L;
  while (static_cast<int>(seen.size()) < n_words) {
    if (++attempts > max_attempts)
      throw std::invalid_argument(
          "word length range cannot supply enough unique words");
    const int len =
        min_length +
        static_cast<int>(rng.UniformInt(max_length - min_length + 1));
    std::string word;
    for (int i = 0; i < len; ++i)
      word.push_back(static_cast<char>('A' + rng.UniformInt(26)));
    if (!seen.insert(word).second) continue;
    std::vector<std::string> phones;
    for (char c : word) phones.push_back(StrCat(c, "1"));
    dict.AddPronunciation(word, phones);
  }
  dict.RebuildAlphabets();
  return dict;
}

}  // namespace synth
}  // namespace lipspot
