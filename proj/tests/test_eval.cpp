//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "moluq/eval.hpp"
#include "moluq/rng.hpp"

namespace {

using namespace moluq;
namespace fs = std::filesystem;

ParsedAnswer answer(ParsedAnswer::Kind kind, const std::string &canonical = "") {
  ParsedAnswer a;
  a.kind = kind;
  a.canonical = canonical;
  return a;
}

const ParsedAnswer kYes = answer(ParsedAnswer::Kind::Yes);
const ParsedAnswer kNo = answer(ParsedAnswer::Kind::No);
const ParsedAnswer kInvalid = answer(ParsedAnswer::Kind::Invalid);

// Direct definition: over every (incorrect, correct) pair, count a win when
// the incorrect record scores strictly higher and half a win on a tie.
double pairwise_auc(const std::vector<double> &scores,
                    const std::vector<bool> &correct) {
  double total = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (correct[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!correct[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        total += 1.0;
      else if (scores[i] == scores[j])
        total += 0.5;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("majority vote takes the plurality label") {
  CHECK(majority_vote({kYes, kYes, kNo}) == "Yes");
  CHECK(majority_vote({kNo, kYes, kNo, kNo, kYes}) == "No");
  CHECK(majority_vote({kYes}) == "Yes");
  CHECK(majority_vote({answer(ParsedAnswer::Kind::Smiles, "CCO"),
                       answer(ParsedAnswer::Kind::Smiles, "CCO"),
                       answer(ParsedAnswer::Kind::Smiles, "CCN")})
        == "CCO");
}

TEST_CASE("vote ties and empty slates are invalid") {
  CHECK(majority_vote({kYes, kNo}) == "invalid");
  CHECK(majority_vote({kYes, kYes, kNo, kNo}) == "invalid");
  CHECK(majority_vote({}) == "invalid");
  // The invalid class can itself win the vote.
  CHECK(majority_vote({kInvalid, kInvalid, kYes}) == "invalid");
}

TEST_CASE("classification metrics match hand counts") {
  std::vector<std::string> preds {"Yes", "Yes", "No", "No", "Yes"};
  std::vector<std::string> golds {"Yes", "No", "No", "Yes", "Yes"};
  // hits 3/5; tp=2 fp=1 fn=1; precision 2/3, recall 2/3, f1 2/3
  ClassificationMetrics m = classification_metrics(preds, golds);
  CHECK_THAT(m.accuracy, Catch::Matchers::WithinAbs(0.6, 1e-12));
  CHECK_THAT(m.f1, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("an invalid prediction hurts accuracy and recall") {
  std::vector<std::string> preds {"invalid", "Yes"};
  std::vector<std::string> golds {"Yes", "Yes"};
  ClassificationMetrics m = classification_metrics(preds, golds);
  CHECK_THAT(m.accuracy, Catch::Matchers::WithinAbs(0.5, 1e-12));
  // precision 1.0, recall 0.5 -> f1 = 2/3
  CHECK_THAT(m.f1, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("degenerate metric inputs behave predictably") {
  ClassificationMetrics never_pos =
      classification_metrics({"No", "No"}, {"No", "No"});
  CHECK(never_pos.accuracy == 1.0);
  CHECK(never_pos.f1 == 0.0);  // no positive mass anywhere

  CHECK_THROWS_AS(classification_metrics({"Yes"}, {"Yes", "No"}),
                  LengthMismatch);
  CHECK_THROWS_AS(classification_metrics({}, {}), LengthMismatch);
}

TEST_CASE("exact match compares structures in canonical mode") {
  CHECK(exact_match("CCO", "CCO", MatchMode::Raw));
  CHECK_FALSE(exact_match("OCC", "CCO", MatchMode::Raw));
  CHECK(exact_match("OCC", "CCO", MatchMode::Canonical));
  CHECK(exact_match("c1ccccc1", "c1ccccc1", MatchMode::Canonical));
  CHECK_FALSE(exact_match("CCO", "CCN", MatchMode::Canonical));
  CHECK_FALSE(exact_match("not smiles", "CCO", MatchMode::Canonical));
  CHECK_FALSE(exact_match("CCO", "not smiles", MatchMode::Canonical));
}

TEST_CASE("auc rewards separation and ignores scale") {
  // Perfectly separated: every incorrect record scores higher.
  CHECK(roc_auc({0.9, 0.8, 0.1, 0.2}, {false, false, true, true}) == 1.0);
  // Inverted: uncertainty anti-predicts errors.
  CHECK(roc_auc({0.1, 0.2, 0.9, 0.8}, {false, false, true, true}) == 0.0);
  // All scores equal: no information.
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {false, true, false, true}) == 0.5);
}

TEST_CASE("tied scores contribute half wins") {
  std::vector<double> scores {0.1, 0.9, 0.5, 0.5};
  std::vector<bool> correct {true, false, true, false};
  // Pairs (wrong, right): (0.9,0.1)=1, (0.9,0.5)=1, (0.5,0.1)=1,
  // (0.5,0.5)=0.5 -> 3.5/4
  CHECK_THAT(roc_auc(scores, correct),
             Catch::Matchers::WithinAbs(0.875, 1e-12));
  CHECK_THAT(pairwise_auc(scores, correct),
             Catch::Matchers::WithinAbs(0.875, 1e-12));
}

TEST_CASE("rank computation agrees with the pairwise definition") {
  rng::Engine eng = rng::seeded(404);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng::uniform_index(eng, 49);
    std::vector<double> scores;
    std::vector<bool> correct;
    bool any_right = false, any_wrong = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so ties are common.
      scores.push_back(
          static_cast<double>(rng::uniform_index(eng, 9)) / 8.0);
      bool c = rng::uniform01(eng) < 0.5;
      correct.push_back(c);
      (c ? any_right : any_wrong) = true;
    }
    if (!any_right || !any_wrong) continue;
    CHECK_THAT(roc_auc(scores, correct),
               Catch::Matchers::WithinAbs(pairwise_auc(scores, correct),
                                          1e-12));
  }
}

TEST_CASE("auc is invariant under monotone score transforms") {
  std::vector<double> scores {0.0, 0.125, 0.25, 0.25, 0.5, 0.75, 1.0};
  std::vector<bool> correct {true, true, false, true, false, true, false};
  double base = roc_auc(scores, correct);
  std::vector<double> squared;
  for (double s: scores) squared.push_back(s * s + 1.0);
  CHECK(roc_auc(squared, correct) == base);
}

TEST_CASE("auc needs both outcomes") {
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {true, true}), DegenerateLabels);
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {false, false}), DegenerateLabels);
  CHECK_THROWS_AS(roc_auc({0.1}, {true, false}), LengthMismatch);
}

TEST_CASE("roc curve runs from the origin to (1,1)") {
  std::vector<double> scores {0.9, 0.1, 0.5, 0.3, 0.5};
  std::vector<bool> correct {false, true, true, true, false};
  RocCurve curve = roc_curve(scores, correct);
  CHECK(curve.auc == roc_auc(scores, correct));
  REQUIRE(curve.points.size() >= 2);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
    CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
  }
}

TEST_CASE("response digests are order and content sensitive") {
  std::string d = responses_digest({"Yes", "No"});
  CHECK(d.size() == 64);
  for (char c: d)
    CHECK(std::isxdigit(static_cast<unsigned char>(c)));
  CHECK(d == responses_digest({"Yes", "No"}));
  CHECK(d != responses_digest({"No", "Yes"}));
  CHECK(d != responses_digest({"Yes", "No!"}));
  // Length prefixes keep boundaries apart.
  CHECK(responses_digest({"ab", "c"}) != responses_digest({"a", "bc"}));
}

TEST_CASE("ledger rows serialize to stable json lines") {
  LedgerRow row;
  row.item = "CCO";
  row.arm = "original";
  row.m = 3;
  row.responses_digest = "abc123";
  row.parsed_answers = {"Yes", "Yes", "No"};
  row.cluster_sizes = {2, 1};
  row.U = 0.5;
  row.correct = true;

  CHECK(ledger_lines({row})
        == "{\"U\":0.5,\"arm\":\"original\",\"cluster_sizes\":[2,1],"
           "\"correct\":true,\"item\":\"CCO\",\"m\":3,"
           "\"parsed_answers\":[\"Yes\",\"Yes\",\"No\"],"
           "\"responses_digest\":\"abc123\"}\n");

  row.failed = true;
  nlohmann::json j = row.to_json();
  CHECK(j["failed"] == true);
  row.failed = false;
  CHECK_FALSE(row.to_json().contains("failed"));
}

TEST_CASE("csv report matches the fixed column layout") {
  RunReport orig;
  orig.dataset = "clintox";
  orig.task = "property";
  orig.model = "GPT-4";
  orig.arm = "original";
  orig.m_max = 20;
  orig.accuracy = 0.25;
  orig.f1 = 0.4;
  orig.mean_entropy = 0.52;
  orig.auc_by_m = {{3, 0.864}, {10, 0.919}, {15, 0.915}, {20, 0.927}};

  RunReport reformed = orig;
  reformed.arm = "reformed";
  reformed.accuracy = 0.2;
  reformed.f1.reset();
  reformed.auc_by_m[15] = std::nullopt;

  std::string csv = detail::render_csv({orig, reformed});
  CHECK(csv
        == "dataset,method,accuracy,f1,mean_entropy,auc_3,auc_10,auc_15,"
           "auc_20\n"
           "clintox,GPT-4 + Orig.,0.250,0.400,0.520,0.864,0.919,0.915,0.927\n"
           "clintox,GPT-4 + Reform.,0.200,,0.520,0.864,0.919,,0.927\n");
}

TEST_CASE("an empty report list renders the header row only") {
  CHECK(detail::render_csv({})
        == "dataset,method,accuracy,f1,mean_entropy,auc_3,auc_10,auc_15,"
           "auc_20\n");
}

TEST_CASE("json reports round-trip through the loader") {
  RunReport report;
  report.dataset = "demo";
  report.task = "property";
  report.model = "mock-model";
  report.arm = "original";
  report.m_max = 5;
  report.accuracy = 0.8;
  report.f1 = 0.75;
  report.mean_entropy = 0.31;
  report.invalid_only_items = 1;
  report.auc_by_m = {{5, 0.9}, {3, std::nullopt}};
  LedgerRow row;
  row.item = "CCO";
  row.arm = "original";
  row.m = 5;
  row.responses_digest = "d";
  row.parsed_answers = {"Yes"};
  row.cluster_sizes = {1};
  row.U = 0.0;
  row.correct = true;
  report.ledger = {row};
  report.metadata = {{"seed", 4}};

  fs::path dir = fs::temp_directory_path() / "moluq_tests" / "eval";
  fs::create_directories(dir);
  write_report({report}, ReportFormat::Json, dir);

  std::vector<RunReport> loaded = load_reports_json(dir / "report.json");
  REQUIRE(loaded.size() == 1);
  const RunReport &r = loaded.front();
  CHECK(r.dataset == "demo");
  CHECK(r.model == "mock-model");
  CHECK(r.m_max == 5);
  CHECK(r.accuracy == 0.8);
  REQUIRE(r.f1.has_value());
  CHECK(*r.f1 == 0.75);
  CHECK(r.invalid_only_items == 1);
  REQUIRE(r.auc_by_m.count(5));
  CHECK(*r.auc_by_m.at(5) == 0.9);
  REQUIRE(r.auc_by_m.count(3));
  CHECK_FALSE(r.auc_by_m.at(3).has_value());
  REQUIRE(r.ledger.size() == 1);
  CHECK(r.ledger[0].item == "CCO");
  CHECK(r.ledger[0].correct);
  CHECK_FALSE(r.ledger[0].failed);
  CHECK(r.metadata["seed"] == 4);

  CHECK_THROWS_AS(load_reports_json(dir / "absent.json"), EvalError);
}

TEST_CASE("svg plots the roc polyline deterministically") {
  RunReport report;
  report.dataset = "demo";
  report.arm = "original";
  report.m_max = 3;
  auto add = [&](double u, bool correct, bool failed = false) {
    LedgerRow row;
    row.item = "x" + std::to_string(report.ledger.size());
    row.arm = "original";
    row.m = 3;
    row.U = u;
    row.correct = correct;
    row.failed = failed;
    report.ledger.push_back(row);
  };
  add(0.9, false);
  add(0.1, true);
  add(0.5, true);
  add(0.7, false);
  add(0.99, false, true);  // failed rows stay out of the plot

  std::string svg = detail::render_svg(report);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("stroke-dasharray=\"4 4\"") != std::string::npos);
  CHECK(svg.find("AUC 1.000") != std::string::npos);
  CHECK(svg == detail::render_svg(report));

  auto files = render_report({report}, ReportFormat::SvgRoc);
  REQUIRE(files.size() == 1);
  CHECK(files.begin()->first == "roc_demo_original.svg");

  RunReport degenerate;
  degenerate.dataset = "demo";
  degenerate.arm = "original";
  degenerate.m_max = 3;
  std::string empty_svg = detail::render_svg(degenerate);
  CHECK(empty_svg.find("AUC n/a") != std::string::npos);
  CHECK(empty_svg.find("<polyline") == std::string::npos);
}
