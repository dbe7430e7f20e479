// src/manifest.cc

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

#include "lipspot/manifest.h"

#include <fstream>
#include <set>
#include <sstream>

namespace lipspot {
namespace cli {

namespace {

bool ValidSubset(const std::string& s) {
  return s == "pretrain" || s == "train" || s == "validation" || s == "test";
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

int ParseIntField(const std::string& s, int line_number, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_number,
                     StrCat("expected an integer ", what, ", got '", s, "'"));
  }
}

}  // namespace

const ManifestRecord* Manifest::Find(const std::string& video_id) const {
  for (const ManifestRecord& r : records)
    if (r.video_id == video_id) return &r;
  return nullptr;
}

void ValidateManifest(const Manifest& manifest) {
  std::set<std::string> seen;
  for (const ManifestRecord& r : manifest.records) {
    if (r.video_id.empty()) throw DataError("manifest record with empty id");
    if (!seen.insert(r.video_id).second)
      throw DataError(StrCat("duplicate video id '", r.video_id, "'"));
    if (!ValidSubset(r.subset))
      throw DataError(StrCat("video '", r.video_id, "' has unknown subset '",
                             r.subset, "'"));
    if (!r.view.empty() && r.view != "NF" && r.view != "MV")
      throw DataError(StrCat("video '", r.video_id, "' has unknown view '",
                             r.view, "'"));
    if (r.num_frames < 1)
      throw DataError(
          StrCat("video '", r.video_id, "' declares ", r.num_frames,
                 " frames"));
    if (r.has_boundaries()) {
      if (r.boundaries.size() != r.transcript.size())
        throw DataError(StrCat("video '", r.video_id, "' has ",
                               r.boundaries.size(), " boundary pairs for ",
                               r.transcript.size(), " words"));
      for (const std::pair<int, int>& b : r.boundaries) {
        if (b.first < 0 || b.second < b.first || b.second >= r.num_frames)
          throw DataError(StrCat("video '", r.video_id, "' has boundary ",
                                 b.first, ":", b.second,
                                 " outside its ", r.num_frames, " frames"));
      }
    }
  }
}

void WriteManifest(std::ostream& out, const Manifest& manifest) {
  ValidateManifest(manifest);
  for (const ManifestRecord& r : manifest.records) {
    out << r.video_id << '\t' << r.feature_path << '\t' << r.num_frames
        << '\t' << r.subset << '\t';
    for (size_t i = 0; i < r.transcript.size(); ++i) {
      if (i > 0) out << ' ';
      out << r.transcript[i];
    }
    out << '\t';
    if (r.has_boundaries()) {
      for (size_t i = 0; i < r.boundaries.size(); ++i) {
        if (i > 0) out << ' ';
        out << r.boundaries[i].first << ':' << r.boundaries[i].second;
      }
    } else {
      out << '-';
    }
    if (!r.view.empty()) out << '\t' << r.view;
    out << '\n';
  }
}

Manifest ReadManifest(std::istream& in) {
  Manifest manifest;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = SplitOn(line, '\t');
    if (fields.size() != 6 && fields.size() != 7)
      throw ParseError(line_number, StrCat("expected 6 or 7 tab-separated "
                                           "fields, got ", fields.size()));
    ManifestRecord r;
    r.video_id = fields[0];
    r.feature_path = fields[1];
    r.num_frames = ParseIntField(fields[2], line_number, "frame count");
    r.subset = fields[3];
    {
      std::istringstream words(fields[4]);
      std::string w;
      while (words >> w) r.transcript.push_back(w);
    }
    if (fields[5] != "-") {
      std::istringstream pairs(fields[5]);
      std::string pair;
      while (pairs >> pair) {
        std::vector<std::string> ends = SplitOn(pair, ':');
        if (ends.size() != 2)
          throw ParseError(line_number,
                           StrCat("malformed boundary '", pair, "'"));
        r.boundaries.emplace_back(
            ParseIntField(ends[0], line_number, "boundary start"),
            ParseIntField(ends[1], line_number, "boundary end"));
      }
    }
    if (fields.size() == 7) r.view = fields[6];
    manifest.records.push_back(std::move(r));
  }
  try {
    ValidateManifest(manifest);
  } catch (const DataError& e) {
    throw DataError(StrCat("invalid manifest: ", e.what()));
  }
  return manifest;
}

void WriteManifestFile(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError(StrCat("cannot open '", path, "' for writing"));
  WriteManifest(out, manifest);
  if (!out) throw IoError(StrCat("short write to '", path, "'"));
}

Manifest ReadManifestFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(StrCat("cannot open '", path, "'"));
  return ReadManifest(in);
}

}  // namespace cli
}  // namespace lipspot
