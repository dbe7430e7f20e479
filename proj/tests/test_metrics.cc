// tests/test_metrics.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "lipspot/metrics.h"
#include "lipspot/rng.h"
#include "support/metrics_oracle.h"
#include "support/toydict.h"

namespace lipspot {
namespace {

using metrics::DetCurve;
using metrics::DetPoint;
using metrics::Hypothesis;
using metrics::HypothesisList;
using metrics::LocalizationRecord;
using metrics::ScoreRecord;

ScoreRecord Rec(const std::string& query, double score, int label) {
  ScoreRecord r;
  r.query = query;
  r.video = "vid";
  r.score = score;
  r.label = label;
  return r;
}

// Two positives {0.1, 0.9} against three negatives {0.15, 0.5, 0.6}; the
// interpolated equal-error point sits exactly at 0.5.
std::vector<ScoreRecord> HandCurveRecords() {
  return {Rec("q", 0.1, 1),  Rec("q", 0.9, 1),  Rec("q", 0.15, 0),
          Rec("q", 0.5, 0),  Rec("q", 0.6, 0)};
}

std::vector<ScoreRecord> RandomRecords(int n, uint64_t seed,
                                       bool quantize_ties) {
  Rng rng(seed);
  std::vector<ScoreRecord> records;
  int positives = 0, negatives = 0;
  for (int i = 0; i < n; ++i) {
    double s = rng.Uniform() * 4.0 - 2.0;
    if (quantize_ties) s = std::floor(s / 0.05) * 0.05;
    int label = rng.UniformInt(2);
    std::string query = StrCat("q", rng.UniformInt(7));
    records.push_back(Rec(query, s, label));
    (label == 1 ? positives : negatives) += 1;
  }
  // Guarantee both labels are present.
  if (positives == 0) records[0].label = 1;
  if (negatives == 0) records[0].label = 0;
  return records;
}

TEST_CASE("det curve endpoints and monotonicity") {
  DetCurve curve = metrics::ComputeDet(HandCurveRecords());
  REQUIRE(curve.points.size() == 7);  // 5 distinct scores + two endpoints
  const DetPoint& first = curve.points.front();
  const DetPoint& last = curve.points.back();
  CHECK(std::isinf(first.threshold));
  CHECK(first.threshold < 0);
  CHECK(first.far == 1.0);
  CHECK(first.mdr == 0.0);
  CHECK(std::isinf(last.threshold));
  CHECK(last.threshold > 0);
  CHECK(last.far == 0.0);
  CHECK(last.mdr == 1.0);
  for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
    CHECK(curve.points[i].threshold < curve.points[i + 1].threshold);
    CHECK(curve.points[i].far >= curve.points[i + 1].far);
    CHECK(curve.points[i].mdr <= curve.points[i + 1].mdr);
  }
}

TEST_CASE("det curve rejects single-label input") {
  std::vector<ScoreRecord> only_pos = {Rec("q", 0.4, 1), Rec("q", 0.6, 1)};
  CHECK_THROWS_AS(metrics::ComputeDet(only_pos), std::invalid_argument);
  std::vector<ScoreRecord> only_neg = {Rec("q", 0.4, 0)};
  CHECK_THROWS_AS(metrics::ComputeDet(only_neg), std::invalid_argument);
  CHECK_THROWS_AS(metrics::ComputeDet({}), std::invalid_argument);
}

TEST_CASE("all-equal scores give the degenerate three-point curve") {
  std::vector<ScoreRecord> records = {Rec("q", 0.5, 1), Rec("q", 0.5, 1),
                                      Rec("q", 0.5, 0), Rec("q", 0.5, 0)};
  DetCurve curve = metrics::ComputeDet(records);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].far == 1.0);
  CHECK(curve.points[0].mdr == 0.0);
  CHECK(curve.points[1].far == 0.0);  // no negative is strictly above 0.5
  CHECK(curve.points[1].mdr == 1.0);
  CHECK(metrics::ComputeEer(curve) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("perfect and inverted detectors hit the EER extremes") {
  std::vector<ScoreRecord> perfect = {Rec("q", 0.9, 1), Rec("q", 0.8, 1),
                                      Rec("q", 0.2, 0), Rec("q", 0.1, 0)};
  CHECK(metrics::ComputeEer(metrics::ComputeDet(perfect)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  for (ScoreRecord& r : perfect) r.score = -r.score;
  CHECK(metrics::ComputeEer(metrics::ComputeDet(perfect)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-checked interpolated EER") {
  DetCurve curve = metrics::ComputeDet(HandCurveRecords());
  CHECK(metrics::ComputeEer(curve) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("random scores give chance-level EER") {
  std::vector<ScoreRecord> records;
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    records.push_back(Rec("q", rng.Uniform(), 1));
    records.push_back(Rec("q", rng.Uniform(), 0));
  }
  double eer = metrics::ComputeEer(metrics::ComputeDet(records));
  CHECK(eer > 0.48);
  CHECK(eer < 0.52);
}

TEST_CASE("rates at fixed operating points") {
  DetCurve curve = metrics::ComputeDet(HandCurveRecords());
  // FAR plateau at 1 spans two points; the smaller MDR wins.
  CHECK(metrics::MdrAtFar(curve, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(metrics::MdrAtFar(curve, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(metrics::MdrAtFar(curve, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(metrics::FarAtMdr(curve, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(metrics::FarAtMdr(curve, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(metrics::MdrAtFar(curve, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(metrics::FarAtMdr(curve, -0.1), std::invalid_argument);
}

TEST_CASE("top-N uses strictly greater negatives only") {
  std::vector<ScoreRecord> records = {
      Rec("q", 0.5, 1),
      Rec("q", 0.5, 0), Rec("q", 0.5, 0),  // ties do not outrank
      Rec("q", 0.7, 0),                    // the only negative that does
  };
  std::map<int, double> rates = metrics::TopNRates(records, {1, 2});
  CHECK(rates.at(1) == 0.0);
  CHECK(rates.at(2) == 1.0);
}

TEST_CASE("top-N negatives are scoped to their query") {
  std::vector<ScoreRecord> records = {
      Rec("a", 0.5, 1),
      Rec("b", 0.9, 0), Rec("b", 0.8, 0),  // other query, irrelevant
  };
  std::map<int, double> rates = metrics::TopNRates(records, {1});
  CHECK(rates.at(1) == 1.0);
  CHECK_THROWS_AS(metrics::TopNRates({Rec("a", 0.5, 0)}, {1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(metrics::TopNRates(records, {0}), std::invalid_argument);
}

TEST_CASE("localization accuracy with tolerance and multiple occurrences") {
  auto rec = [](int t_hat, std::vector<std::pair<int, int>> windows) {
    LocalizationRecord r;
    r.t_hat = t_hat;
    r.windows = std::move(windows);
    return r;
  };
  std::vector<LocalizationRecord> records = {
      rec(11, {{10, 12}}),            // inside
      rec(8, {{10, 12}}),             // start - 2, still counted
      rec(14, {{10, 12}}),            // end + 2, still counted
      rec(31, {{10, 12}, {30, 32}}),  // second occurrence rescues it
      rec(5, {{5, 5}}),               // exact single-frame window
      rec(3, {{5, 5}}),               // start - 2 of a single frame
      rec(0, {{0, 4}}),
      rec(7, {{10, 12}}),             // start - 3, a miss
      rec(15, {{10, 12}}),            // end + 3, a miss
      rec(50, {{10, 12}, {30, 32}}),  // far from both
  };
  CHECK(metrics::LocalizationAccuracy(records, 2) ==
        doctest::Approx(0.7).epsilon(1e-12));
  // Tolerance 0 keeps only the in-window estimates.
  CHECK(metrics::LocalizationAccuracy(records, 0) ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(metrics::LocalizationAccuracy(records, 2) ==
        testing::OracleLocalization(records, 2));
  CHECK_THROWS_AS(metrics::LocalizationAccuracy({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(metrics::LocalizationAccuracy(records, -1),
                  std::invalid_argument);
}

TEST_CASE("posterior closed forms") {
  HypothesisList hyps;
  hyps.fudge = 5.0;
  hyps.hypotheses = {{3.0, "THE CAT SAT"}};
  CHECK(metrics::AsrKeywordPosterior(hyps, "CAT") == 1.0);
  CHECK(metrics::AsrKeywordPosterior(hyps, "DOG") == 0.0);

  hyps.hypotheses = {{2.0, "THE CAT SAT"}, {2.0, "THE MAT SAT"}};
  CHECK(metrics::AsrKeywordPosterior(hyps, "cat") ==
        doctest::Approx(0.5).epsilon(1e-12));

  // Scores one temperature unit apart: e / (e + 1).
  hyps.hypotheses = {{5.0, "the cat sat"}, {0.0, "the mat sat"}};
  double expected = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(metrics::AsrKeywordPosterior(hyps, "CAT") ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.7310585786).epsilon(1e-9));
}

TEST_CASE("posterior is shift invariant and token exact") {
  HypothesisList hyps;
  hyps.fudge = 5.0;
  hyps.hypotheses = {{12.0, "a catalog of cats"},
                     {7.5, "the cat"},
                     {-3.0, "concatenate"}};
  double base = metrics::AsrKeywordPosterior(hyps, "cat");
  // Only the whole token matches; "catalog"/"cats"/"concatenate" do not.
  double w1 = std::exp(12.0 / 5.0), w2 = std::exp(7.5 / 5.0),
         w3 = std::exp(-3.0 / 5.0);
  CHECK(base == doctest::Approx(w2 / (w1 + w2 + w3)).epsilon(1e-12));

  HypothesisList shifted = hyps;
  for (Hypothesis& h : shifted.hypotheses) h.score += 1234.5;
  CHECK(metrics::AsrKeywordPosterior(shifted, "cat") ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(metrics::AsrKeywordPosterior(hyps, "cat") ==
        doctest::Approx(testing::OracleAsrPosterior(hyps, "cat"))
            .epsilon(1e-12));
}

TEST_CASE("posterior input validation") {
  HypothesisList hyps;
  hyps.fudge = 0.0;
  hyps.hypotheses = {{1.0, "a"}};
  CHECK_THROWS_AS(metrics::AsrKeywordPosterior(hyps, "a"),
                  std::invalid_argument);
  hyps.fudge = -2.0;
  CHECK_THROWS_AS(metrics::AsrKeywordPosterior(hyps, "a"),
                  std::invalid_argument);
  hyps.fudge = 5.0;
  hyps.hypotheses.clear();
  CHECK_THROWS_AS(metrics::AsrKeywordPosterior(hyps, "a"),
                  std::invalid_argument);
}

TEST_CASE("EER and top-N are invariant to positive affine score maps") {
  std::vector<ScoreRecord> records = RandomRecords(400, 31, true);
  double eer = metrics::ComputeEer(metrics::ComputeDet(records));
  std::map<int, double> rates = metrics::TopNRates(records, {1, 5, 10});
  std::vector<ScoreRecord> mapped = records;
  for (ScoreRecord& r : mapped) r.score = 2.7 * r.score + 3.1;
  CHECK(metrics::ComputeEer(metrics::ComputeDet(mapped)) ==
        doctest::Approx(eer).epsilon(1e-12));
  std::map<int, double> mapped_rates = metrics::TopNRates(mapped, {1, 5, 10});
  for (const auto& kv : rates) CHECK(mapped_rates.at(kv.first) == kv.second);
}

TEST_CASE("randomized agreement with the brute-force oracles") {
  Rng rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 10 + static_cast<int>(rng.UniformInt(991));
    bool quantize = (trial % 2 == 0);
    std::vector<ScoreRecord> records =
        RandomRecords(n, rng.Raw(), quantize);

    DetCurve curve = metrics::ComputeDet(records);
    std::vector<DetPoint> oracle = testing::OracleDetPoints(records);
    REQUIRE(curve.points.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
      CHECK(curve.points[i].threshold == oracle[i].threshold);
      CHECK(curve.points[i].far ==
            doctest::Approx(oracle[i].far).epsilon(1e-12));
      CHECK(curve.points[i].mdr ==
            doctest::Approx(oracle[i].mdr).epsilon(1e-12));
    }
    CHECK(metrics::ComputeEer(curve) ==
          doctest::Approx(testing::OracleEer(oracle)).epsilon(1e-9));

    for (int k = 0; k < 4; ++k) {
      double x = rng.Uniform();
      CHECK(metrics::MdrAtFar(curve, x) ==
            doctest::Approx(testing::OracleMdrAtFar(oracle, x)).epsilon(1e-9));
      CHECK(metrics::FarAtMdr(curve, x) ==
            doctest::Approx(testing::OracleFarAtMdr(oracle, x)).epsilon(1e-9));
    }

    std::map<int, double> rates = metrics::TopNRates(records, {1, 5, 10});
    for (int n_rank : {1, 5, 10})
      CHECK(rates.at(n_rank) ==
            doctest::Approx(testing::OracleTopN(records, n_rank))
                .epsilon(1e-12));
  }
}

TEST_CASE("query list keeps unseen long dictionary words") {
  PhoneticDictionary dict = ParseString(
      "ABIDING AH B AY D IH NG\n"       // 6 phonemes
      "BECAUSE B IH K AH Z\n"           // 5 phonemes, too short
      "CATHEDRAL K AH TH IY D R AH L\n"  // 8 phonemes
      "DOG D AO G\n"
      "ELSEWHERE EH L S W EH R\n");      // 7 phonemes
  std::vector<std::vector<std::string>> transcripts = {
      {"ABIDING", "DOG", "BECAUSE"},
      {"CATHEDRAL", "ELSEWHERE", "UNLISTED"},
      {"CATHEDRAL"},
  };
  std::set<std::string> train = {"ELSEWHERE"};
  std::set<std::string> dev = {"DOG"};
  std::vector<std::string> queries =
      metrics::BuildQueryList(transcripts, train, dev, dict, 6);
  REQUIRE(queries.size() == 2);
  CHECK(queries[0] == "ABIDING");    // sorted, deduplicated
  CHECK(queries[1] == "CATHEDRAL");  // UNLISTED is not in the dictionary
}

TEST_CASE("score records survive a write/read round trip") {
  std::vector<ScoreRecord> records = {Rec("ABOUT", -0.125, 1),
                                      Rec("WITHIN", 17.5, 0)};
  records[1].video = "vid2";
  std::ostringstream out;
  metrics::WriteScoreRecords(out, records);
  CHECK(out.str() ==
        "query,video,score,label\n"
        "ABOUT,vid,-0.125,1\n"
        "WITHIN,vid2,17.5,0\n");
  std::istringstream in(out.str());
  std::vector<ScoreRecord> parsed = metrics::ReadScoreRecords(in);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].query == "ABOUT");
  CHECK(parsed[0].video == "vid");
  CHECK(parsed[0].score == -0.125);
  CHECK(parsed[0].label == 1);
  CHECK(parsed[1].score == 17.5);
  CHECK(parsed[1].label == 0);
}

TEST_CASE("score reader reports the offending line") {
  std::istringstream bad_label(
      "query,video,score,label\n"
      "A,v,0.5,1\n"
      "B,v,0.25,2\n");
  try {
    metrics::ReadScoreRecords(bad_label);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line_number() == 3);
  }
  std::istringstream bad_header("nope\nA,v,0.5,1\n");
  CHECK_THROWS_AS(metrics::ReadScoreRecords(bad_header), ParseError);
  std::istringstream bad_score(
      "query,video,score,label\n"
      "A,v,zero,1\n");
  CHECK_THROWS_AS(metrics::ReadScoreRecords(bad_score), ParseError);
  std::istringstream short_row(
      "query,video,score,label\n"
      "A,v,0.5\n");
  CHECK_THROWS_AS(metrics::ReadScoreRecords(short_row), ParseError);
}

TEST_CASE("detection curve file names the infinite endpoints") {
  DetCurve curve = metrics::ComputeDet(HandCurveRecords());
  std::ostringstream out;
  metrics::WriteDetCurve(out, curve);
  std::string text = out.str();
  CHECK(text.rfind("threshold,far,mdr\n", 0) == 0);
  CHECK(text.find("-inf,1,0\n") != std::string::npos);
  CHECK(text.find("inf,0,1\n") != std::string::npos);
}

TEST_CASE("hypothesis blocks parse into per-video lists") {
  std::istringstream in(
      "vid1\n"
      "12.5\tTHE CAT SAT\n"
      "11.25\tA CAT SAT\n"
      "\n"
      "vid2\n"
      "3.5\tNO MATCH HERE\n");
  std::map<std::string, HypothesisList> lists =
      metrics::ReadHypothesisFile(in, 5.0);
  REQUIRE(lists.size() == 2);
  REQUIRE(lists.at("vid1").hypotheses.size() == 2);
  CHECK(lists.at("vid1").hypotheses[0].score == 12.5);
  CHECK(lists.at("vid1").hypotheses[0].text == "THE CAT SAT");
  CHECK(lists.at("vid1").fudge == 5.0);
  CHECK(lists.at("vid2").hypotheses.size() == 1);
  CHECK(metrics::AsrKeywordPosterior(lists.at("vid2"), "cat") == 0.0);

  std::istringstream orphan("4.5\tNO VIDEO YET\n");
  CHECK_THROWS_AS(metrics::ReadHypothesisFile(orphan, 5.0), ParseError);
  std::istringstream dup("vid1\n1\ta\nvid1\n2\tb\n");
  CHECK_THROWS_AS(metrics::ReadHypothesisFile(dup, 5.0), ParseError);
}

}  // namespace
}  // namespace lipspot
