// src/g2p.cc

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

#include "lipspot/g2p.h"

#include <cstdio>

namespace lipspot {
namespace g2p {

std::vector<int> SelectAuxiliaryTarget(const G2PConfig& cfg,
                                       const DictEntry& entry,
                                       const PhoneSet& phones,
                                       const GraphemeSet& graphemes) {
  std::vector<int> target;
  if (cfg.target_alphabet == G2PConfig::TargetAlphabet::kPhonemes) {
    if (entry.pronunciations.empty())
      throw DataError(StrCat("word '", entry.word, "' has no pronunciation"));
    for (const auto& phone : entry.pronunciations[0]) {
      int idx = phones.Index(phone);
      if (idx < 0)
        throw DataError(StrCat("phoneme '", phone, "' not in the phone set"));
      target.push_back(idx);
    }
    return target;
  }
  return EncodeWord(entry.word, graphemes);
}

void WriteEmbeddingTable(
    std::ostream& out,
    const std::vector<std::pair<std::string, Eigen::VectorXf>>& rows) {
  char buf[32];
  for (const auto& [word, vec] : rows) {
    out << word;
    for (int i = 0; i < vec.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(vec[i]));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

}  // namespace g2p
}  // namespace lipspot
