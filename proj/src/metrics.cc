// src/metrics.cc

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

#include "lipspot/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lipspot/common.h"

namespace lipspot {
namespace metrics {

namespace {

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string AsciiLower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> WhitespaceTokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream iss(text);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double ParseDoubleField(const std::string& s, int line_number) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_number, StrCat("expected a number, got '", s, "'"));
  }
  if (pos != s.size())
    throw ParseError(line_number,
                     StrCat("trailing characters in number '", s, "'"));
  return v;
}

// Splits the scores of a record list by label; both outputs sorted ascending.
void SortedScoresByLabel(const std::vector<ScoreRecord>& records,
                         std::vector<double>* negatives,
                         std::vector<double>* positives) {
  for (const ScoreRecord& r : records) {
    if (r.label != 0 && r.label != 1)
      throw std::invalid_argument(
          StrCat("score record label must be 0 or 1, got ", r.label));
    (r.label == 1 ? positives : negatives)->push_back(r.score);
  }
  std::sort(negatives->begin(), negatives->end());
  std::sort(positives->begin(), positives->end());
}

}  // namespace

std::vector<std::string> BuildQueryList(
    const std::vector<std::vector<std::string>>& test_transcripts,
    const std::set<std::string>& train_vocab,
    const std::set<std::string>& dev_vocab, const PhoneticDictionary& dict,
    int min_phonemes) {
  std::set<std::string> queries;
  for (const std::vector<std::string>& transcript : test_transcripts) {
    for (const std::string& word : transcript) {
      if (train_vocab.count(word) > 0 || dev_vocab.count(word) > 0) continue;
      const DictEntry* entry = dict.Find(word);
      if (entry == nullptr) continue;
      if (entry->phoneme_count() < min_phonemes) continue;
      queries.insert(word);
    }
  }
  return std::vector<std::string>(queries.begin(), queries.end());
}

DetCurve ComputeDet(const std::vector<ScoreRecord>& records) {
  std::vector<double> negatives, positives;
  SortedScoresByLabel(records, &negatives, &positives);
  if (positives.empty() || negatives.empty())
    throw std::invalid_argument(
        "detection curve needs at least one positive and one negative record");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds;
  thresholds.push_back(-inf);
  {
    std::vector<double> all(negatives);
    all.insert(all.end(), positives.begin(), positives.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    thresholds.insert(thresholds.end(), all.begin(), all.end());
  }
  thresholds.push_back(inf);

  DetCurve curve;
  curve.points.reserve(thresholds.size());
  const double n_neg = static_cast<double>(negatives.size());
  const double n_pos = static_cast<double>(positives.size());
  for (double theta : thresholds) {
    DetPoint p;
    p.threshold = theta;
    // False alarm: a negative scoring strictly above the threshold.
    auto first_above =
        std::upper_bound(negatives.begin(), negatives.end(), theta);
    p.far = static_cast<double>(negatives.end() - first_above) / n_neg;
    auto first_above_pos =
        std::upper_bound(positives.begin(), positives.end(), theta);
    p.mdr = static_cast<double>(first_above_pos - positives.begin()) / n_pos;
    curve.points.push_back(p);
  }
  return curve;
}

double ComputeEer(const DetCurve& curve) {
  const std::vector<DetPoint>& pts = curve.points;
  if (pts.size() < 2)
    throw std::invalid_argument("detection curve has fewer than two points");
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double d0 = pts[i].far - pts[i].mdr;
    double d1 = pts[i + 1].far - pts[i + 1].mdr;
    if (d0 >= 0.0 && d1 <= 0.0) {
      double t = (d0 == d1) ? 0.0 : d0 / (d0 - d1);
      return pts[i].far + t * (pts[i + 1].far - pts[i].far);
    }
  }
  throw std::invalid_argument(
      "detection curve has no FAR/MDR crossing; is it sorted by threshold?");
}

double MdrAtFar(const DetCurve& curve, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument(StrCat("rate must be in [0, 1], got ", x));
  const std::vector<DetPoint>& pts = curve.points;
  if (pts.empty()) throw std::invalid_argument("empty detection curve");
  // First point at or below the requested FAR; on an exact plateau this is
  // the one with the smallest MDR.
  for (size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].far > x) continue;
    if (pts[i].far == x || i == 0) return pts[i].mdr;
    double t = (pts[i - 1].far - x) / (pts[i - 1].far - pts[i].far);
    return pts[i - 1].mdr + t * (pts[i].mdr - pts[i - 1].mdr);
  }
  throw std::invalid_argument("detection curve does not reach the given FAR");
}

double FarAtMdr(const DetCurve& curve, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument(StrCat("rate must be in [0, 1], got ", x));
  const std::vector<DetPoint>& pts = curve.points;
  if (pts.empty()) throw std::invalid_argument("empty detection curve");
  // Last point at or below the requested MDR; on an exact plateau this is
  // the one with the smallest FAR.
  for (size_t i = pts.size(); i-- > 0;) {
    if (pts[i].mdr > x) continue;
    if (pts[i].mdr == x || i + 1 == pts.size()) return pts[i].far;
    double t = (x - pts[i].mdr) / (pts[i + 1].mdr - pts[i].mdr);
    return pts[i].far + t * (pts[i + 1].far - pts[i].far);
  }
  throw std::invalid_argument("detection curve does not reach the given MDR");
}

std::map<int, double> TopNRates(const std::vector<ScoreRecord>& records,
                                const std::vector<int>& n_values) {
  for (int n : n_values)
    if (n < 1)
      throw std::invalid_argument(StrCat("top-N rank must be >= 1, got ", n));
  std::map<std::string, std::vector<double>> negatives_by_query;
  std::vector<const ScoreRecord*> positives;
  for (const ScoreRecord& r : records) {
    if (r.label == 1)
      positives.push_back(&r);
    else
      negatives_by_query[r.query].push_back(r.score);
  }
  if (positives.empty())
    throw std::invalid_argument("top-N rates need at least one positive");
  for (auto& kv : negatives_by_query) std::sort(kv.second.begin(), kv.second.end());

  std::map<int, double> rates;
  for (int n : n_values) rates[n] = 0.0;
  for (const ScoreRecord* pos : positives) {
    size_t beaten = 0;
    auto it = negatives_by_query.find(pos->query);
    if (it != negatives_by_query.end()) {
      const std::vector<double>& negs = it->second;
      // Only a STRICTLY higher-scoring negative outranks the positive.
      beaten = negs.end() - std::upper_bound(negs.begin(), negs.end(), pos->score);
    }
    for (int n : n_values)
      if (beaten < static_cast<size_t>(n)) rates[n] += 1.0;
  }
  for (auto& kv : rates) kv.second /= static_cast<double>(positives.size());
  return rates;
}

double LocalizationAccuracy(const std::vector<LocalizationRecord>& records,
                            int tolerance) {
  if (records.empty())
    throw std::invalid_argument("localization accuracy of an empty list");
  if (tolerance < 0)
    throw std::invalid_argument(StrCat("tolerance must be >= 0, got ", tolerance));
  int hits = 0;
  for (const LocalizationRecord& r : records) {
    for (const std::pair<int, int>& w : r.windows) {
      if (r.t_hat >= w.first - tolerance && r.t_hat <= w.second + tolerance) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double AsrKeywordPosterior(const HypothesisList& hyps,
                           const std::string& keyword) {
  if (hyps.fudge <= 0.0)
    throw std::invalid_argument(
        StrCat("posterior temperature must be > 0, got ", hyps.fudge));
  if (hyps.hypotheses.empty())
    throw std::invalid_argument("posterior of an empty hypothesis list");
  const std::string needle = AsciiLower(keyword);

  double max_logit = -std::numeric_limits<double>::infinity();
  std::vector<double> logits;
  logits.reserve(hyps.hypotheses.size());
  for (const Hypothesis& h : hyps.hypotheses) {
    double l = h.score / hyps.fudge;
    logits.push_back(l);
    max_logit = std::max(max_logit, l);
  }
  double denom = 0.0, numer = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    double w = std::exp(logits[i] - max_logit);
    denom += w;
    std::vector<std::string> tokens =
        WhitespaceTokens(AsciiLower(hyps.hypotheses[i].text));
    if (std::find(tokens.begin(), tokens.end(), needle) != tokens.end())
      numer += w;
  }
  return numer / denom;
}

void WriteScoreRecords(std::ostream& out,
                       const std::vector<ScoreRecord>& records) {
  out << "query,video,score,label\n";
  for (const ScoreRecord& r : records) {
    out << r.query << ',' << r.video << ',' << FormatDouble(r.score) << ','
        << r.label << '\n';
  }
}

std::vector<ScoreRecord> ReadScoreRecords(std::istream& in) {
  std::vector<ScoreRecord> records;
  std::string line;
  int line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "query,video,score,label")
        throw ParseError(line_number,
                         StrCat("expected score header, got '", line, "'"));
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != 4)
      throw ParseError(line_number,
                       StrCat("expected 4 comma-separated fields, got ",
                              fields.size()));
    ScoreRecord r;
    r.query = fields[0];
    r.video = fields[1];
    r.score = ParseDoubleField(fields[2], line_number);
    if (fields[3] == "0")
      r.label = 0;
    else if (fields[3] == "1")
      r.label = 1;
    else
      throw ParseError(line_number,
                       StrCat("label must be 0 or 1, got '", fields[3], "'"));
    records.push_back(std::move(r));
  }
  if (!saw_header) throw ParseError(1, "missing score header");
  return records;
}

void WriteDetCurve(std::ostream& out, const DetCurve& curve) {
  out << "threshold,far,mdr\n";
  for (const DetPoint& p : curve.points) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.far) << ','
        << FormatDouble(p.mdr) << '\n';
  }
}

std::map<std::string, HypothesisList> ReadHypothesisFile(std::istream& in,
                                                         double fudge) {
  std::map<std::string, HypothesisList> lists;
  std::string line, current;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      current = line;
      if (lists.count(current) > 0)
        throw ParseError(line_number,
                         StrCat("duplicate video id '", current, "'"));
      lists[current].fudge = fudge;
      continue;
    }
    if (current.empty())
      throw ParseError(line_number, "hypothesis line before any video id");
    Hypothesis h;
    h.score = ParseDoubleField(line.substr(0, tab), line_number);
    h.text = line.substr(tab + 1);
    lists[current].hypotheses.push_back(std::move(h));
  }
  return lists;
}

}  // namespace metrics
}  // namespace lipspot
