// include/lipspot/manifest.h

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

#ifndef LIPSPOT_MANIFEST_H_
#define LIPSPOT_MANIFEST_H_

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/common.h"

namespace lipspot {
namespace cli {

// One video: a feature file plus its transcription.  Tab-separated on disk as
//   video_id  feature_path  num_frames  subset  transcript  boundaries  [view]
// with the transcript space-separated, boundaries either `-` or space-
// separated inclusive `start:end` pairs aligned with the transcript, and the
// optional view tag one of NF or MV.
struct ManifestRecord {
  std::string video_id;
  std::string feature_path;  // relative to the manifest's directory
  int num_frames = 0;
  std::string subset;  // pretrain | train | validation | test
  std::vector<std::string> transcript;
  std::vector<std::pair<int, int>> boundaries;  // empty when unknown
  std::string view;  // "", "NF", or "MV"

  bool has_boundaries() const { return !boundaries.empty(); }
};

struct Manifest {
  std::vector<ManifestRecord> records;

  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  // The record with this id, or null.
  const ManifestRecord* Find(const std::string& video_id) const;
};

// Checks id uniqueness, subset/view vocabulary, boundary alignment with the
// transcript, and boundary containment in [0, num_frames).  Throws DataError.
void ValidateManifest(const Manifest& manifest);

void WriteManifest(std::ostream& out, const Manifest& manifest);
Manifest ReadManifest(std::istream& in);  // validates; ParseError on bad rows

void WriteManifestFile(const std::string& path, const Manifest& manifest);
Manifest ReadManifestFile(const std::string& path);  // IoError if unreadable

}  // namespace cli
}  // namespace lipspot

#endif  // LIPSPOT_MANIFEST_H_
