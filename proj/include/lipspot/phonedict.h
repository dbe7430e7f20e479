// include/lipspot/phonedict.h

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

#ifndef LIPSPOT_PHONEDICT_H_
#define LIPSPOT_PHONEDICT_H_

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lipspot/common.h"

namespace lipspot {

// The phoneme alphabet of a loaded dictionary.  Stress-marked vowels are
// distinct symbols; for the full CMU dictionary the size is 69.
struct PhoneSet {
  std::vector<std::string> symbols;  // sorted, unique

  int size() const { return static_cast<int>(symbols.size()); }
  // Index of a symbol, or -1 if absent.
  int Index(const std::string& sym) const;
};

// The grapheme alphabet of the dictionary headwords, plus the three special
// tokens used for sequence modeling.  Special indices follow the alphabet.
struct GraphemeSet {
  std::vector<char> symbols;  // sorted, unique characters

  int alphabet_size() const { return static_cast<int>(symbols.size()); }
  int start_index() const { return alphabet_size(); }
  int end_index() const { return alphabet_size() + 1; }
  int pad_index() const { return alphabet_size() + 2; }
  int table_size() const { return alphabet_size() + 3; }
  // Index of a character, or -1 if absent.
  int Index(char c) const;
};

struct DictEntry {
  std::string word;  // canonical upper-cased form
  std::vector<std::vector<std::string>> pronunciations;  // file order

  // Length of the first pronunciation, the canonical decoder target.
  int phoneme_count() const {
    return static_cast<int>(pronunciations.front().size());
  }
};

class PhoneticDictionary {
 public:
  const std::vector<DictEntry>& entries() const { return entries_; }
  const PhoneSet& phone_set() const { return phones_; }
  const GraphemeSet& grapheme_set() const { return graphemes_; }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool Contains(const std::string& word) const;
  // Entry for a canonical word, or nullptr.
  const DictEntry* Find(const std::string& word) const;
  // Headwords in entry order.
  std::vector<std::string> Words() const;

  // Adds a pronunciation under the canonical word, creating the entry on
  // first sight.  Used by the parser and the corpus fixtures.
  void AddPronunciation(const std::string& word,
                        const std::vector<std::string>& phones);
  // Recomputes the phone and grapheme alphabets from the current entries.
  void RebuildAlphabets();

 private:
  std::vector<DictEntry> entries_;
  std::map<std::string, size_t> index_;
  PhoneSet phones_;
  GraphemeSet graphemes_;
};

// Disjoint train/validation/test vocabulary partition.  Each set is sorted.
struct VocabularySplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::array<double, 3> ratios{0.75, 0.05, 0.20};
  uint64_t seed = 0;
};

// Upper-cases a word and strips a trailing "(k)" alternate-pronunciation
// marker; the form every dictionary and transcript word is stored under.
std::string CanonicalWord(const std::string& raw);

// Parses the CMU dictionary line format `WORD  PH1 PH2 ...`.  Alternate
// pronunciations are marked `WORD(2)`, `WORD(3)` and merge under the base
// word; comment lines begin with ";;;".  Throws ParseError on a line with
// fewer than two fields or a symbol outside the [A-Z]+[0-2]? shape.
PhoneticDictionary ParseDictionary(std::istream& in);

// Writes the same line format ParseDictionary reads, alternates included.
void WriteDictionary(std::ostream& out, const PhoneticDictionary& dict);
void WriteDictionaryFile(const std::string& path,
                         const PhoneticDictionary& dict);

// Retains entries whose first pronunciation has at least n_p phonemes.
PhoneticDictionary FilterByMinPhonemes(const PhoneticDictionary& dict, int n_p);

// Deterministic partition of the headwords.  Validation and test sizes are
// round(n * ratio); the remainder goes to train.
VocabularySplit SplitVocabulary(const PhoneticDictionary& dict,
                                const std::array<double, 3>& ratios,
                                uint64_t seed);

// Moves train/validation words that never occur in corpus_words into the
// test set, so unused vocabulary still gets evaluated zero-shot.
VocabularySplit ReassignUnusedWords(const VocabularySplit& split,
                                    const std::set<std::string>& corpus_words);

// Grapheme indices of a word in word order, without special tokens.
// Lower-case characters fold to upper case.  Throws DataError on a
// character absent from the set.
std::vector<int> EncodeWord(const std::string& word, const GraphemeSet& gset);
std::string DecodeWord(const std::vector<int>& indices,
                       const GraphemeSet& gset);

// Split files: one word per line, `<prefix>.train`, `.valid`, `.test`.
void WriteSplitFiles(const VocabularySplit& split, const std::string& prefix);
VocabularySplit ReadSplitFiles(const std::string& prefix);
std::vector<std::string> ReadWordList(const std::string& path);

}  // namespace lipspot

#endif  // LIPSPOT_PHONEDICT_H_
