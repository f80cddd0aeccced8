//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_EVAL_HPP_
#define MOLUQ_EVAL_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moluq/hash.hpp"
#include "moluq/molgraph.hpp"
#include "moluq/prompts.hpp"

namespace moluq {

class EvalError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LengthMismatch: public EvalError {
  using EvalError::EvalError;
};

class DegenerateLabels: public EvalError {
  using EvalError::EvalError;
};

// Plurality label over the parsed answers; a tie for the top count (or an
// empty slate) yields "invalid", which never matches a gold label.
inline std::string majority_vote(const std::vector<ParsedAnswer> &answers) {
  if (answers.empty()) return "invalid";
  std::map<std::string, int> counts;
  std::vector<std::string> order;
  for (const ParsedAnswer &a: answers) {
    std::string label = a.label();
    if (counts[label]++ == 0) order.push_back(label);
  }
  int best = 0;
  for (const auto &[label, count]: counts) best = std::max(best, count);
  std::string winner;
  int winners = 0;
  for (const std::string &label: order) {
    if (counts[label] == best) {
      winner = label;
      ++winners;
    }
  }
  return winners == 1 ? winner : "invalid";
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

// Accuracy plus F1 with "Yes" as the positive class. Predictions that match
// neither label (e.g. "invalid") count against accuracy and recall.
inline ClassificationMetrics classification_metrics(
    const std::vector<std::string> &predictions,
    const std::vector<std::string> &golds) {
  if (predictions.size() != golds.size())
    throw LengthMismatch("predictions and golds differ in length");
  if (predictions.empty()) throw LengthMismatch("no predictions to score");

  int hits = 0, tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == golds[i]) ++hits;
    bool pred_pos = predictions[i] == "Yes";
    bool gold_pos = golds[i] == "Yes";
    if (pred_pos && gold_pos) ++tp;
    if (pred_pos && !gold_pos) ++fp;
    if (!pred_pos && gold_pos) ++fn;
  }
  ClassificationMetrics out;
  out.accuracy = static_cast<double>(hits) / predictions.size();
  double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  out.f1 = precision + recall > 0.0
               ? 2.0 * precision * recall / (precision + recall)
               : 0.0;
  return out;
}

enum class MatchMode { Raw, Canonical };

// Raw mode compares the strings as given; canonical mode compares the
// structures they denote, so any valid rewriting of the same molecule
// matches. An unparseable side never matches in canonical mode.
inline bool exact_match(const std::string &prediction,
                        const std::string &reference, MatchMode mode) {
  if (mode == MatchMode::Raw) return prediction == reference;
  try {
    return canonical_smiles(parse_smiles(prediction))
           == canonical_smiles(parse_smiles(reference));
  } catch (const SmilesError &) {
    return false;
  }
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  double auc = 0.0;
  std::vector<RocPoint> points;
};

// AUC of the uncertainty score as a predictor of incorrectness:
// P(U_incorrect > U_correct) + half the tie mass, computed through
// tie-averaged ranks.
inline double roc_auc(const std::vector<double> &scores,
                      const std::vector<bool> &correct) {
  if (scores.size() != correct.size())
    throw LengthMismatch("scores and labels differ in length");
  std::size_t n = scores.size();
  std::size_t n_wrong = 0;
  for (bool c: correct)
    if (!c) ++n_wrong;
  std::size_t n_right = n - n_wrong;
  if (n_wrong == 0 || n_right == 0)
    throw DegenerateLabels("need at least one correct and one incorrect "
                           "record");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double rank_sum_wrong = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j))
                       / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (!correct[order[k]]) rank_sum_wrong += mean_rank;
    i = j;
  }
  double u = rank_sum_wrong
             - static_cast<double>(n_wrong) * (n_wrong + 1) / 2.0;
  return u / (static_cast<double>(n_wrong) * static_cast<double>(n_right));
}

inline RocCurve roc_curve(const std::vector<double> &scores,
                          const std::vector<bool> &correct) {
  RocCurve curve;
  curve.auc = roc_auc(scores, correct);

  std::size_t n_wrong = 0;
  for (bool c: correct)
    if (!c) ++n_wrong;
  std::size_t n_right = scores.size() - n_wrong;

  std::set<double, std::greater<double>> thresholds(scores.begin(),
                                                    scores.end());
  curve.points.push_back({0.0, 0.0});
  for (double t: thresholds) {
    std::size_t flagged_wrong = 0, flagged_right = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (scores[k] < t) continue;
      if (correct[k])
        ++flagged_right;
      else
        ++flagged_wrong;
    }
    curve.points.push_back(
        {static_cast<double>(flagged_right) / n_right,
         static_cast<double>(flagged_wrong) / n_wrong});
  }
  return curve;
}

inline std::string responses_digest(const std::vector<std::string> &responses) {
  ByteWriter w;
  for (const std::string &r: responses) w.str(r);
  return sha256_hex(w.bytes());
}

// One evaluated (item, arm, m) cell; serialized as one JSON line. A row
// whose endpoint traffic failed carries failed=true and empty analysis
// fields; such rows are excluded from every aggregate.
struct LedgerRow {
  std::string item;
  std::string arm;
  int m = 0;
  std::string responses_digest;
  std::vector<std::string> parsed_answers;
  std::vector<int> cluster_sizes;  // descending
  double U = 0.0;
  bool correct = false;
  bool failed = false;

  nlohmann::json to_json() const {
    nlohmann::json out = {
        {"item", item},
        {"arm", arm},
        {"m", m},
        {"responses_digest", responses_digest},
        {"parsed_answers", parsed_answers},
        {"cluster_sizes", cluster_sizes},
        {"U", U},
        {"correct", correct},
    };
    if (failed) out["failed"] = true;
    return out;
  }
};

inline std::string ledger_lines(const std::vector<LedgerRow> &rows) {
  std::string out;
  for (const LedgerRow &row: rows) {
    out += row.to_json().dump();
    out += '\n';
  }
  return out;
}

struct RunReport {
  std::string dataset;
  std::string task;
  std::string model;
  std::string arm;  // "original" or "reformed"
  int m_max = 0;
  double accuracy = 0.0;
  std::optional<double> f1;
  double mean_entropy = 0.0;
  int invalid_only_items = 0;
  std::map<int, std::optional<double>> auc_by_m;  // nullopt: not applicable
  std::vector<LedgerRow> ledger;
  nlohmann::json metadata;
};

enum class ReportFormat { Json, Csv, SvgRoc };

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string arm_label(std::string_view arm) {
  if (arm == "original") return "Orig.";
  if (arm == "reformed") return "Reform.";
  return std::string(arm);
}

inline std::string safe_name(std::string_view text) {
  std::string out;
  for (char c: text)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

inline nlohmann::json report_to_json(const RunReport &report) {
  nlohmann::json auc = nlohmann::json::object();
  for (const auto &[m, value]: report.auc_by_m) {
    if (value)
      auc[std::to_string(m)] = *value;
    else
      auc[std::to_string(m)] = nullptr;
  }
  nlohmann::json ledger = nlohmann::json::array();
  for (const LedgerRow &row: report.ledger) ledger.push_back(row.to_json());
  nlohmann::json out = {
      {"dataset", report.dataset},
      {"task", report.task},
      {"model", report.model},
      {"arm", report.arm},
      {"m_max", report.m_max},
      {"accuracy", report.accuracy},
      {"mean_entropy", report.mean_entropy},
      {"invalid_only_items", report.invalid_only_items},
      {"auc_by_m", auc},
      {"ledger", ledger},
      {"metadata", report.metadata},
  };
  if (report.f1)
    out["f1"] = *report.f1;
  else
    out["f1"] = nullptr;
  return out;
}

inline std::string render_csv(const std::vector<RunReport> &reports) {
  std::set<int> m_values;
  for (const RunReport &r: reports)
    for (const auto &[m, value]: r.auc_by_m) m_values.insert(m);
  if (m_values.empty()) m_values = {3, 10, 15, 20};

  std::string out = "dataset,method,accuracy,f1,mean_entropy";
  for (int m: m_values) out += ",auc_" + std::to_string(m);
  out += '\n';

  for (const RunReport &r: reports) {
    out += r.dataset;
    out += ',' + r.model + " + " + arm_label(r.arm);
    out += ',' + fixed3(r.accuracy);
    out += ',';
    if (r.f1) out += fixed3(*r.f1);
    out += ',' + fixed3(r.mean_entropy);
    for (int m: m_values) {
      out += ',';
      auto it = r.auc_by_m.find(m);
      if (it != r.auc_by_m.end() && it->second) out += fixed3(*it->second);
    }
    out += '\n';
  }
  return out;
}

inline std::string render_svg(const RunReport &report) {
  std::vector<double> scores;
  std::vector<bool> correct;
  for (const LedgerRow &row: report.ledger) {
    if (row.m != report.m_max || row.arm != report.arm || row.failed)
      continue;
    scores.push_back(row.U);
    correct.push_back(row.correct);
  }

  constexpr double kSize = 360.0, kMargin = 48.0;
  constexpr double kPlot = kSize - 2 * kMargin;
  auto px = [&](double fpr) { return kMargin + fpr * kPlot; };
  auto py = [&](double tpr) { return kSize - kMargin - tpr * kPlot; };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"360\" "
         "height=\"360\" viewBox=\"0 0 360 360\">\n";
  svg += "<rect width=\"360\" height=\"360\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + coord(kMargin) + "\" y=\"" + coord(kMargin)
         + "\" width=\"" + coord(kPlot) + "\" height=\"" + coord(kPlot)
         + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<line x1=\"" + coord(px(0)) + "\" y1=\"" + coord(py(0)) + "\" x2=\""
         + coord(px(1)) + "\" y2=\"" + coord(py(1))
         + "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";

  std::string title = report.dataset + " / " + arm_label(report.arm);
  try {
    RocCurve curve = roc_curve(scores, correct);
    std::string pts;
    for (const RocPoint &p: curve.points) {
      if (!pts.empty()) pts += ' ';
      pts += coord(px(p.fpr)) + ',' + coord(py(p.tpr));
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" "
           "points=\""
           + pts + "\"/>\n";
    title += " (AUC " + fixed3(curve.auc) + ")";
  } catch (const DegenerateLabels &) {
    title += " (AUC n/a)";
  } catch (const LengthMismatch &) {
    title += " (AUC n/a)";
  }
  svg += "<text x=\"" + coord(kSize / 2) + "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"14\" text-anchor=\"middle\">"
         + title + "</text>\n";
  svg += "<text x=\"" + coord(kSize / 2) + "\" y=\"" + coord(kSize - 12)
         + "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">false positive rate</text>\n";
  svg += "<text x=\"16\" y=\"" + coord(kSize / 2)
         + "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 16 "
         + coord(kSize / 2) + ")\">true positive rate</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace detail

// Renders the requested format to (file name, file bytes) pairs. Output is a
// pure function of the reports so repeated runs produce identical bytes.
inline std::map<std::string, std::string> render_report(
    const std::vector<RunReport> &reports, ReportFormat format) {
  std::map<std::string, std::string> files;
  switch (format) {
  case ReportFormat::Json: {
    nlohmann::json body = nlohmann::json::array();
    for (const RunReport &r: reports) body.push_back(detail::report_to_json(r));
    files["report.json"] = nlohmann::json {{"reports", body}}.dump(2) + "\n";
    break;
  }
  case ReportFormat::Csv:
    files["report.csv"] = detail::render_csv(reports);
    break;
  case ReportFormat::SvgRoc:
    for (const RunReport &r: reports)
      files["roc_" + detail::safe_name(r.dataset) + "_"
            + detail::safe_name(r.arm) + ".svg"] = detail::render_svg(r);
    break;
  }
  return files;
}

inline std::vector<std::filesystem::path> write_report(
    const std::vector<RunReport> &reports, ReportFormat format,
    const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto &[name, bytes]: render_report(reports, format)) {
    std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EvalError("cannot write " + path.string());
    out << bytes;
    written.push_back(path);
  }
  return written;
}

inline RunReport report_from_json(const nlohmann::json &j) {
  RunReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.arm = j.at("arm").get<std::string>();
  r.m_max = j.at("m_max").get<int>();
  r.accuracy = j.at("accuracy").get<double>();
  if (j.contains("f1") && !j["f1"].is_null()) r.f1 = j["f1"].get<double>();
  r.mean_entropy = j.at("mean_entropy").get<double>();
  r.invalid_only_items = j.value("invalid_only_items", 0);
  for (const auto &[key, value]: j.at("auc_by_m").items()) {
    int m = std::stoi(key);
    r.auc_by_m[m] = value.is_null() ? std::optional<double> {}
                                    : std::optional<double>(value.get<double>());
  }
  for (const auto &row_json: j.at("ledger")) {
    LedgerRow row;
    row.item = row_json.at("item").get<std::string>();
    row.arm = row_json.at("arm").get<std::string>();
    row.m = row_json.at("m").get<int>();
    row.responses_digest = row_json.at("responses_digest").get<std::string>();
    row.parsed_answers =
        row_json.at("parsed_answers").get<std::vector<std::string>>();
    row.cluster_sizes =
        row_json.at("cluster_sizes").get<std::vector<int>>();
    row.U = row_json.at("U").get<double>();
    row.correct = row_json.at("correct").get<bool>();
    row.failed = row_json.value("failed", false);
    r.ledger.push_back(std::move(row));
  }
  r.metadata = j.value("metadata", nlohmann::json::object());
  return r;
}

inline std::vector<RunReport> load_reports_json(
    const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open report: " + path.string());
  nlohmann::json body = nlohmann::json::parse(in, nullptr, false);
  if (body.is_discarded() || !body.contains("reports"))
    throw EvalError("not a report file: " + path.string());
  std::vector<RunReport> reports;
  for (const auto &entry: body["reports"])
    reports.push_back(report_from_json(entry));
  return reports;
}

}  // namespace moluq

#endif  // MOLUQ_EVAL_HPP_
