// tests/support/toydict.h

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

#ifndef LIPSPOT_TESTS_SUPPORT_TOYDICT_H_
#define LIPSPOT_TESTS_SUPPORT_TOYDICT_H_

#include <set>
#include <sstream>
#include <string>

#include "lipspot/phonedict.h"
#include "lipspot/rng.h"

namespace lipspot {

inline PhoneticDictionary ParseString(const std::string& text) {
  std::istringstream in(text);
  return ParseDictionary(in);
}

namespace testing {

// Phoneme symbol assigned to a letter: 'A' -> "AH", 'B' -> "BH", ...  The
// mapping is a bijection, so every toy word's pronunciation is a consistent
// letter-by-letter transduction and its phoneme count equals its length.
inline std::string PhoneForLetter(char c) { return std::string(1, c) + "H"; }

// Random dictionary of n unique words with lengths in [min_len, max_len].
inline PhoneticDictionary MakeToyDictionary(int n, int min_len, int max_len,
                                            uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> words;
  while (static_cast<int>(words.size()) < n) {
    int len = min_len + rng.UniformInt(max_len - min_len + 1);
    std::string w;
    for (int i = 0; i < len; ++i)
      w.push_back(static_cast<char>('A' + rng.UniformInt(26)));
    words.insert(w);
  }
  std::ostringstream text;
  for (const auto& w : words) {
    text << w;
    for (char c : w) text << ' ' << PhoneForLetter(c);
    text << '\n';
  }
  return ParseString(text.str());
}

}  // namespace testing
}  // namespace lipspot

#endif  // LIPSPOT_TESTS_SUPPORT_TOYDICT_H_
