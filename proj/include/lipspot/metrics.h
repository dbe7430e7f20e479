// include/lipspot/metrics.h

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

#ifndef LIPSPOT_METRICS_H_
#define LIPSPOT_METRICS_H_

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lipspot/phonedict.h"

namespace lipspot {
namespace metrics {

// One scored query/video pair; label 1 iff the query occurs in the video's
// transcript.
struct ScoreRecord {
  std::string query;
  std::string video;
  double score = 0.0;
  int label = 0;
};

struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;  // false alarms: negatives with score > threshold
  double mdr = 0.0;  // missed detections: positives with score <= threshold
};

// Threshold-ascending detection curve; FAR is non-increasing and MDR
// non-decreasing along the points.
struct DetCurve {
  std::vector<DetPoint> points;
};

struct LocalizationRecord {
  int t_hat = 0;  // estimated frame, same indexing as the boundaries
  // Inclusive (start, end) boundaries of every occurrence of the keyword;
  // the estimate is correct if it lands in ANY expanded window.
  std::vector<std::pair<int, int>> windows;
};

struct Hypothesis {
  double score = 0.0;
  std::string text;
};

struct HypothesisList {
  std::vector<Hypothesis> hypotheses;
  double fudge = 5.0;  // softmax temperature c of the posterior
};

// Distinct test-transcript words with at least min_phonemes phonemes that
// appear in the dictionary and in neither excluded vocabulary; sorted.
std::vector<std::string> BuildQueryList(
    const std::vector<std::vector<std::string>>& test_transcripts,
    const std::set<std::string>& train_vocab,
    const std::set<std::string>& dev_vocab, const PhoneticDictionary& dict,
    int min_phonemes = 6);

// Sweeps the decision threshold over every distinct score, plus -inf/+inf
// endpoints.  A false alarm is a negative with score STRICTLY greater than
// the threshold; a missed detection is a positive with score <= threshold.
// Requires at least one positive and one negative record.
DetCurve ComputeDet(const std::vector<ScoreRecord>& records);

// Equal-error rate: linear interpolation between the adjacent curve points
// where FAR - MDR changes sign.
double ComputeEer(const DetCurve& curve);

// The complementary rate at a fixed FAR or MDR of x, linearly interpolated
// between the bracketing curve points.  On a plateau containing x exactly,
// the smaller complementary rate is returned.
double MdrAtFar(const DetCurve& curve, double x);
double FarAtMdr(const DetCurve& curve, double x);

// Fraction of positives whose score is beaten by fewer than N same-query
// negatives (strict >; score ties do not count against the positive).
std::map<int, double> TopNRates(const std::vector<ScoreRecord>& records,
                                const std::vector<int>& n_values);

// Fraction of records whose estimate lies within [start - tol, end + tol]
// of any occurrence.  Throws on an empty list (the rate is undefined).
double LocalizationAccuracy(const std::vector<LocalizationRecord>& records,
                            int tolerance = 2);

// Posterior that the keyword occurs, from an N-best list: the softmax of
// score/fudge summed over hypotheses containing the keyword as a whole
// case-folded token.  Computed with max-subtraction.
double AsrKeywordPosterior(const HypothesisList& hyps,
                           const std::string& keyword);

// --- text formats ---

// Comma-separated score records with a `query,video,score,label` header.
void WriteScoreRecords(std::ostream& out,
                       const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> ReadScoreRecords(std::istream& in);

// Comma-separated `threshold,far,mdr` rows with a header.
void WriteDetCurve(std::ostream& out, const DetCurve& curve);

// N-best blocks: a bare line naming the video id, then one
// `score<TAB>text` line per hypothesis until the next bare line.
std::map<std::string, HypothesisList> ReadHypothesisFile(std::istream& in,
                                                         double fudge = 5.0);

}  // namespace metrics
}  // namespace lipspot

#endif  // LIPSPOT_METRICS_H_
