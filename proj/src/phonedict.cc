// src/phonedict.cc

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

#include "lipspot/phonedict.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lipspot/common.h"
#include "lipspot/rng.h"

namespace lipspot {

namespace {

std::string ToUpper(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool ValidPhoneShape(const std::string& sym) {
  if (sym.empty()) return false;
  size_t i = 0;
  while (i < sym.size() && sym[i] >= 'A' && sym[i] <= 'Z') ++i;
  if (i == 0) return false;
  if (i == sym.size()) return true;
  return i == sym.size() - 1 && sym[i] >= '0' && sym[i] <= '2';
}

}  // namespace

std::string CanonicalWord(const std::string& raw) {
  std::string word = ToUpper(raw);
  size_t open = word.rfind('(');
  if (open != std::string::npos && word.back() == ')' &&
      open + 1 < word.size() - 1) {
    bool digits = true;
    for (size_t i = open + 1; i + 1 < word.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(word[i]))) digits = false;
    if (digits) word = word.substr(0, open);
  }
  return word;
}

int PhoneSet::Index(const std::string& sym) const {
  auto it = std::lower_bound(symbols.begin(), symbols.end(), sym);
  if (it == symbols.end() || *it != sym) return -1;
  return static_cast<int>(it - symbols.begin());
}

int GraphemeSet::Index(char c) const {
  auto it = std::lower_bound(symbols.begin(), symbols.end(), c);
  if (it == symbols.end() || *it != c) return -1;
  return static_cast<int>(it - symbols.begin());
}

bool PhoneticDictionary::Contains(const std::string& word) const {
  return index_.count(word) > 0;
}

const DictEntry* PhoneticDictionary::Find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return nullptr;
  return &entries_[it->second];
}

std::vector<std::string> PhoneticDictionary::Words() const {
  std::vector<std::string> words;
  words.reserve(entries_.size());
  for (const DictEntry& e : entries_) words.push_back(e.word);
  return words;
}

void PhoneticDictionary::AddPronunciation(
    const std::string& word, const std::vector<std::string>& phones) {
  auto it = index_.find(word);
  if (it == index_.end()) {
    index_[word] = entries_.size();
    entries_.push_back(DictEntry{word, {phones}});
  } else {
    entries_[it->second].pronunciations.push_back(phones);
  }
}

void PhoneticDictionary::RebuildAlphabets() {
  std::set<std::string> phones;
  std::set<char> chars;
  for (const DictEntry& e : entries_) {
    for (char c : e.word) chars.insert(c);
    for (const auto& pron : e.pronunciations)
      for (const std::string& p : pron) phones.insert(p);
  }
  phones_.symbols.assign(phones.begin(), phones.end());
  graphemes_.symbols.assign(chars.begin(), chars.end());
}

PhoneticDictionary ParseDictionary(std::istream& in) {
  PhoneticDictionary dict;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.rfind(";;;", 0) == 0) continue;
    std::istringstream fields(line);
    std::string raw_word;
    if (!(fields >> raw_word)) continue;  // blank or whitespace-only line
    std::vector<std::string> phones;
    std::string sym;
    while (fields >> sym) {
      if (!ValidPhoneShape(sym))
        throw ParseError(line_number, StrCat("bad phoneme symbol '", sym, "'"));
      phones.push_back(sym);
    }
    if (phones.empty())
      throw ParseError(line_number,
                       StrCat("expected `WORD PH1 ...`, got '", line, "'"));
    dict.AddPronunciation(CanonicalWord(raw_word), phones);
  }
  dict.RebuildAlphabets();
  return dict;
}

void WriteDictionary(std::ostream& out, const PhoneticDictionary& dict) {
  for (const DictEntry& e : dict.entries()) {
    for (size_t k = 0; k < e.pronunciations.size(); ++k) {
      out << e.word;
      if (k > 0) out << "(" << k + 1 << ")";
      for (const std::string& p : e.pronunciations[k]) out << " " << p;
      out << "\n";
    }
  }
}

void WriteDictionaryFile(const std::string& path,
                         const PhoneticDictionary& dict) {
  std::ofstream out(path);
  if (!out) throw IoError(StrCat("cannot write dictionary: ", path));
  WriteDictionary(out, dict);
  if (!out) throw IoError(StrCat("short write to dictionary: ", path));
}

PhoneticDictionary FilterByMinPhonemes(const PhoneticDictionary& dict,
                                       int n_p) {
  if (n_p < 1) throw std::invalid_argument("n_p must be >= 1");
  PhoneticDictionary out;
  for (const DictEntry& e : dict.entries()) {
    if (e.phoneme_count() < n_p) continue;
    for (const auto& pron : e.pronunciations) out.AddPronunciation(e.word, pron);
  }
  out.RebuildAlphabets();
  return out;
}

VocabularySplit SplitVocabulary(const PhoneticDictionary& dict,
                                const std::array<double, 3>& ratios,
                                uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(
        StrCat("split ratios must sum to 1, got ", sum));
  if (dict.empty())
    throw std::invalid_argument("cannot split an empty dictionary");

  std::vector<std::string> words = dict.Words();
  Rng rng(seed);
  rng.Shuffle(&words);

  size_t n = words.size();
  size_t n_valid = static_cast<size_t>(std::lround(n * ratios[1]));
  size_t n_test = static_cast<size_t>(std::lround(n * ratios[2]));
  if (n_valid + n_test > n) n_test = n - n_valid;
  size_t n_train = n - n_valid - n_test;

  VocabularySplit split;
  split.ratios = ratios;
  split.seed = seed;
  split.train.assign(words.begin(), words.begin() + n_train);
  split.validation.assign(words.begin() + n_train,
                          words.begin() + n_train + n_valid);
  split.test.assign(words.begin() + n_train + n_valid, words.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

VocabularySplit ReassignUnusedWords(const VocabularySplit& split,
                                    const std::set<std::string>& corpus_words) {
  VocabularySplit out;
  out.ratios = split.ratios;
  out.seed = split.seed;
  out.test = split.test;
  for (const std::string& w : split.train) {
    if (corpus_words.count(w))
      out.train.push_back(w);
    else
      out.test.push_back(w);
  }
  for (const std::string& w : split.validation) {
    if (corpus_words.count(w))
      out.validation.push_back(w);
    else
      out.test.push_back(w);
  }
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<int> EncodeWord(const std::string& word, const GraphemeSet& gset) {
  std::vector<int> indices;
  indices.reserve(word.size());
  for (char c : word) {
    char folded =
        static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    int idx = gset.Index(folded);
    if (idx < 0)
      throw DataError(StrCat("cannot encode character '", std::string(1, c),
                             "' of word '", word, "'"));
    indices.push_back(idx);
  }
  return indices;
}

std::string DecodeWord(const std::vector<int>& indices,
                       const GraphemeSet& gset) {
  std::string word;
  word.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= gset.alphabet_size())
      throw DataError(StrCat("grapheme index ", idx, " out of range"));
    word.push_back(gset.symbols[idx]);
  }
  return word;
}

namespace {

void WriteWordFile(const std::vector<std::string>& words,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(StrCat("cannot write ", path));
  for (const std::string& w : words) out << w << "\n";
}

}  // namespace

void WriteSplitFiles(const VocabularySplit& split, const std::string& prefix) {
  WriteWordFile(split.train, prefix + ".train");
  WriteWordFile(split.validation, prefix + ".valid");
  WriteWordFile(split.test, prefix + ".test");
}

std::vector<std::string> ReadWordList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(StrCat("cannot read ", path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string w;
    if (fields >> w) words.push_back(ToUpper(w));
  }
  return words;
}

VocabularySplit ReadSplitFiles(const std::string& prefix) {
  VocabularySplit split;
  split.train = ReadWordList(prefix + ".train");
  split.validation = ReadWordList(prefix + ".valid");
  split.test = ReadWordList(prefix + ".test");
  return split;
}

}  // namespace lipspot
