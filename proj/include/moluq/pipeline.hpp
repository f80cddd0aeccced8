//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_PIPELINE_HPP_
#define MOLUQ_PIPELINE_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "moluq/cluster.hpp"
#include "moluq/config.hpp"
#include "moluq/datasets.hpp"
#include "moluq/eval.hpp"
#include "moluq/fingerprint.hpp"
#include "moluq/llmclient.hpp"
#include "moluq/molgraph.hpp"
#include "moluq/prompts.hpp"
#include "moluq/uq.hpp"

namespace moluq {

struct RunOutcome {
  std::vector<RunReport> reports;
  std::optional<InputUncertaintyReport> input_uncertainty;
  std::vector<std::string> failed_items;  // "item/arm"
  int requests_issued = 0;
  std::vector<std::filesystem::path> files_written;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) {
  ByteWriter w;
  w.u64(base).str(salt);
  return w.fnv();
}

// One test question, task-agnostic: display goes into the prompt, the
// unique id keys the ledger and mock lookups, gold is the label (Yes/No) or
// the canonical product.
struct WorkItem {
  std::string id;
  std::string display;
  std::string canonical;
  std::string gold;
};

struct CellStats {
  double entropy = 0.0;
  std::vector<int> cluster_sizes;
  std::string majority;
  bool correct = false;
  bool all_invalid = false;
};

inline std::vector<int> descending_counts(const std::map<std::string, int> &counts) {
  std::vector<int> sizes;
  for (const auto &[label, count]: counts) sizes.push_back(count);
  std::sort(sizes.begin(), sizes.end(), std::greater<int>());
  return sizes;
}

inline CellStats evaluate_prefix(const RunConfig &cfg, const WorkItem &item,
                                 const SampleSet &set, int m) {
  CellStats out;
  std::vector<ParsedAnswer> prefix(set.parsed.begin(),
                                   set.parsed.begin() + m);
  out.all_invalid = std::all_of(prefix.begin(), prefix.end(),
                                [](const ParsedAnswer &a) {
                                  return !a.valid();
                                });
  if (cfg.task == "property") {
    std::vector<std::string> labels;
    std::map<std::string, int> counts;
    for (const ParsedAnswer &a: prefix) {
      labels.push_back(a.label());
      ++counts[labels.back()];
    }
    out.entropy = class_entropy(labels);
    out.cluster_sizes = descending_counts(counts);
  } else {
    std::vector<std::string> texts;
    for (int i = 0; i < m; ++i)
      texts.push_back(set.parsed[i].valid() ? set.parsed[i].smiles
                                            : set.responses[i]);
    DistanceMatrix d =
        response_distance_matrix(texts, cfg.fp_radius, cfg.fp_width);
    ClusterAssignment assignment =
        agglomerate(d, linkage_from_string(cfg.linkage),
                    cfg.cluster_threshold);
    out.entropy = cluster_entropy(assignment);
    std::map<std::string, int> counts;
    for (int label: assignment.labels) ++counts[std::to_string(label)];
    out.cluster_sizes = descending_counts(counts);
  }
  out.majority = majority_vote(prefix);
  out.correct = out.majority == item.gold;
  return out;
}

inline nlohmann::json input_uncertainty_to_json(
    const InputUncertaintyReport &report) {
  nlohmann::json items = nlohmann::json::array();
  for (const InputUncertaintyItem &item: report.items) {
    items.push_back({
        {"item", item.item},
        {"u_original", item.u_original},
        {"u_reformed", item.u_reformed},
        {"delta_u", item.delta_u},
        {"correct_original", item.correct_original},
        {"correct_reformed", item.correct_reformed},
    });
  }
  return nlohmann::json {
      {"accuracy",
       {{"original", report.accuracy_original},
        {"reformed", report.accuracy_reformed},
        {"delta", report.accuracy_delta},
        {"direction", direction_name(report.accuracy_direction)}}},
      {"mean_entropy",
       {{"original", report.mean_entropy_original},
        {"reformed", report.mean_entropy_reformed},
        {"delta", report.entropy_delta},
        {"direction", direction_name(report.entropy_direction)}}},
      {"items", items},
      {"note",
       "aggregate directions are the primary comparison; the per-item delta "
       "list is an extension of it"},
  };
}

}  // namespace detail

// Runs the full loop: load, split, prompt, sample, score, report. Every
// completion goes through the cache, so re-running an unchanged config
// replays from disk and issues no requests. Pass an endpoint to replace the
// one the config would build (tests inject scripted mocks this way).
inline RunOutcome run_pipeline(const RunConfig &cfg,
                               std::shared_ptr<Endpoint> endpoint = nullptr) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.output_dir);

  // Load records and derive prompt-pool candidates plus test work items.
  std::vector<detail::WorkItem> items;
  std::vector<IclCandidate> pool;
  std::vector<std::pair<std::string, std::string>> pool_pairs;
  if (cfg.task == "property") {
    auto [records, stats] = load_classification_csv(
        cfg.dataset, cfg.smiles_column, cfg.label_column);
    auto split = split_test(records, cfg.test_size, cfg.seeds.split);
    for (const ClassificationRecord &rec: split.pool) {
      pool.push_back({rec.canonical, rec.smiles, rec.label,
                      circular_fingerprint(parse_smiles(rec.smiles),
                                           cfg.fp_radius, cfg.fp_width)});
      pool_pairs.emplace_back(rec.smiles, rec.label);
    }
    for (const ClassificationRecord &rec: split.test)
      items.push_back({rec.canonical, rec.smiles, rec.canonical, rec.label});
  } else {
    auto [records, stats] = load_reactions(cfg.dataset);
    auto split = split_test(records, cfg.test_size, cfg.seeds.split);
    for (const ReactionRecord &rec: split.pool) {
      std::string canonical = canonical_smiles(parse_smiles(rec.reactants));
      pool.push_back({canonical, rec.reactants, "",
                      circular_fingerprint(parse_smiles(rec.reactants),
                                           cfg.fp_radius, cfg.fp_width)});
      pool_pairs.emplace_back(rec.reactants, rec.product);
    }
    for (const ReactionRecord &rec: split.test) {
      std::string canonical = canonical_smiles(parse_smiles(rec.reactants));
      items.push_back({canonical, rec.reactants, canonical,
                       rec.canonical_product});
    }
  }

  // Deterministic processing order, with duplicate structures disambiguated
  // so ledger keys stay unique.
  std::stable_sort(items.begin(), items.end(),
                   [](const detail::WorkItem &a, const detail::WorkItem &b) {
                     return a.canonical < b.canonical;
                   });
  std::map<std::string, int> seen_ids;
  for (detail::WorkItem &item: items) {
    int n = ++seen_ids[item.id];
    if (n > 1) item.id += "#" + std::to_string(n);
  }

  std::vector<std::string> arms;
  if (cfg.arm == "original" || cfg.arm == "both") arms.push_back("original");
  if (cfg.arm == "reformed" || cfg.arm == "both") arms.push_back("reformed");

  if (!endpoint) {
    if (cfg.endpoint_kind == "http") {
      endpoint = std::make_shared<HttpEndpoint>(cfg.endpoint);
    } else {
      MockBehavior behavior;
      std::string kind = cfg.mock.kind;
      if (kind.empty())
        kind = cfg.task == "property" ? "noisy_classifier" : "template_reactor";
      if (kind == "fixed_answers")
        behavior.kind = MockBehavior::Kind::FixedAnswers;
      else if (kind == "noisy_classifier")
        behavior.kind = MockBehavior::Kind::NoisyClassifier;
      else
        behavior.kind = MockBehavior::Kind::TemplateReactor;
      behavior.fixed = cfg.mock.fixed;
      behavior.default_p_err = cfg.mock.p_err;
      for (const detail::WorkItem &item: items)
        behavior.items[item.id] = {item.gold, cfg.mock.p_err};
      if (cfg.mock.p_err_original >= 0.0)
        behavior.p_err_by_arm["original"] = cfg.mock.p_err_original;
      if (cfg.mock.p_err_reformed >= 0.0)
        behavior.p_err_by_arm["reformed"] = cfg.mock.p_err_reformed;
      if (cfg.mock.rank_policy == "reverse")
        behavior.rank_policy = MockBehavior::RankPolicy::Reverse;
      else if (cfg.mock.rank_policy == "shortest_first")
        behavior.rank_policy = MockBehavior::RankPolicy::ShortestFirst;
      endpoint = mock_oracle(std::move(behavior), cfg.seeds.mock);
    }
  }

  PromptTemplates templates = cfg.template_dir.empty()
                                  ? PromptTemplates::defaults()
                                  : PromptTemplates::load_dir(cfg.template_dir);
  ResponseCache cache(cfg.resolved_cache_path());
  LlmClient client(endpoint, cfg.endpoint, &cache);

  std::vector<int> m_values = cfg.m_values;
  std::sort(m_values.begin(), m_values.end());
  m_values.erase(std::unique(m_values.begin(), m_values.end()),
                 m_values.end());
  int m_max = m_values.back();

  struct Cell {
    detail::CellStats stats;
    bool failed = false;
  };
  std::vector<LedgerRow> all_rows;
  std::map<std::string, std::map<std::string, std::map<int, Cell>>> cells;
  std::map<std::string, std::vector<std::string>> fallbacks;  // arm -> items
  RunOutcome outcome;

  for (const detail::WorkItem &item: items) {
    std::vector<int> icl_indices =
        select_icl(pool, cfg.k_icl, detail::derive_seed(cfg.seeds.icl, item.id),
                   icl_strategy_from_string(cfg.icl_strategy), item.canonical);
    std::vector<std::pair<std::string, std::string>> icl;
    for (int idx: icl_indices) icl.push_back(pool_pairs[idx]);

    for (const std::string &arm: arms) {
      try {
        std::string target = item.display;
        if (arm == "reformed") {
          VariantList variants = enumerate_variants(
              parse_smiles(item.display), cfg.n_variants,
              detail::derive_seed(cfg.seeds.enumeration, item.id));
          if (variants.variants.size() < 2) {
            fallbacks[arm].push_back(item.id);
          } else {
            RankResult ranked = client.rank_variants(variants, templates);
            target = ranked.best;
            if (ranked.used_fallback) fallbacks[arm].push_back(item.id);
          }
        }
        Prompt prompt =
            cfg.task == "property"
                ? render_property_prompt(target, cfg.property_name, icl,
                                         templates)
                : render_reaction_prompt(target, icl, templates);
        SampleSet set = client.sample(prompt, m_max, cfg.task, item.id, arm);
        for (int m: m_values) {
          Cell cell;
          cell.stats = detail::evaluate_prefix(cfg, item, set, m);
          LedgerRow row;
          row.item = item.id;
          row.arm = arm;
          row.m = m;
          row.responses_digest = responses_digest(
              {set.responses.begin(), set.responses.begin() + m});
          for (int i = 0; i < m; ++i)
            row.parsed_answers.push_back(set.parsed[i].label());
          row.cluster_sizes = cell.stats.cluster_sizes;
          row.U = cell.stats.entropy;
          row.correct = cell.stats.correct;
          all_rows.push_back(std::move(row));
          cells[arm][item.id][m] = std::move(cell);
        }
      } catch (const ClientError &) {
        outcome.failed_items.push_back(item.id + "/" + arm);
        for (int m: m_values) {
          LedgerRow row;
          row.item = item.id;
          row.arm = arm;
          row.m = m;
          row.failed = true;
          all_rows.push_back(std::move(row));
          cells[arm][item.id][m] = Cell {{}, true};
        }
      }
    }
  }

  // Aggregate one report per arm.
  std::string entropy_kind =
      cfg.task == "property" ? "class_entropy" : "cluster_entropy";
  std::map<std::string, std::vector<UncertaintyRecord>> arm_records;
  for (const std::string &arm: arms) {
    RunReport report;
    report.dataset = cfg.dataset_name.empty() ? cfg.dataset.stem().string()
                                              : cfg.dataset_name;
    report.task = cfg.task;
    report.model = cfg.endpoint.model_name;
    report.arm = arm;
    report.m_max = m_max;

    std::vector<std::string> majorities, golds;
    double entropy_sum = 0.0;
    int scored = 0;
    for (const detail::WorkItem &item: items) {
      const Cell &cell = cells[arm][item.id][m_max];
      if (cell.failed) continue;
      ++scored;
      majorities.push_back(cell.stats.majority);
      golds.push_back(item.gold);
      entropy_sum += cell.stats.entropy;
      if (cell.stats.all_invalid) ++report.invalid_only_items;
      arm_records[arm].push_back({item.id, cell.stats.entropy, entropy_kind,
                                  cell.stats.correct, m_max});
    }
    if (scored > 0) {
      ClassificationMetrics metrics =
          classification_metrics(majorities, golds);
      report.accuracy = metrics.accuracy;
      if (cfg.task == "property") report.f1 = metrics.f1;
      report.mean_entropy = entropy_sum / scored;
    }
    for (int m: m_values) {
      std::vector<double> scores;
      std::vector<bool> correct;
      for (const detail::WorkItem &item: items) {
        const Cell &cell = cells[arm][item.id][m];
        if (cell.failed) continue;
        scores.push_back(cell.stats.entropy);
        correct.push_back(cell.stats.correct);
      }
      try {
        report.auc_by_m[m] = roc_auc(scores, correct);
      } catch (const EvalError &) {
        report.auc_by_m[m] = std::nullopt;
      }
    }
    for (const LedgerRow &row: all_rows)
      if (row.arm == arm) report.ledger.push_back(row);

    report.metadata = {
        {"model", cfg.endpoint.model_name},
        {"temperature", cfg.endpoint.temperature},
        {"entropy_log_base", "e"},
        {"auc_orientation", "higher uncertainty predicts an incorrect answer"},
        {"seeds",
         {{"split", cfg.seeds.split},
          {"icl", cfg.seeds.icl},
          {"enumeration", cfg.seeds.enumeration},
          {"mock", cfg.seeds.mock}}},
        {"linkage", cfg.linkage},
        {"cluster_threshold", cfg.cluster_threshold},
        {"fp_radius", cfg.fp_radius},
        {"fp_width", cfg.fp_width},
        {"k_icl", cfg.k_icl},
        {"n_variants", cfg.n_variants},
        {"icl_strategy", cfg.icl_strategy},
        {"endpoint_kind", cfg.endpoint_kind},
        {"dataset_path", cfg.dataset.string()},
        {"test_size", cfg.test_size},
        {"m", m_values},
        {"reform_fallbacks", fallbacks[arm]},
        {"failed_items", outcome.failed_items},
    };
    outcome.reports.push_back(std::move(report));
  }

  if (arms.size() == 2) {
    // Items that failed in either arm drop out of the pairing.
    std::set<std::string> failed;
    for (const std::string &entry: outcome.failed_items)
      failed.insert(entry.substr(0, entry.rfind('/')));
    std::vector<UncertaintyRecord> original, reformed;
    for (const UncertaintyRecord &r: arm_records["original"])
      if (!failed.count(r.item)) original.push_back(r);
    for (const UncertaintyRecord &r: arm_records["reformed"])
      if (!failed.count(r.item)) reformed.push_back(r);
    if (!original.empty())
      outcome.input_uncertainty = input_uncertainty_report(original, reformed);
  }

  // Persist: ledger, reports in all three formats, the paired-arm file.
  auto write_file = [&](const std::filesystem::path &path,
                        const std::string &bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EvalError("cannot write " + path.string());
    out << bytes;
    outcome.files_written.push_back(path);
  };
  write_file(cfg.output_dir / "ledger.jsonl", ledger_lines(all_rows));
  for (ReportFormat format:
       {ReportFormat::Json, ReportFormat::Csv, ReportFormat::SvgRoc}) {
    auto written = write_report(outcome.reports, format, cfg.output_dir);
    outcome.files_written.insert(outcome.files_written.end(), written.begin(),
                                 written.end());
  }
  if (outcome.input_uncertainty)
    write_file(cfg.output_dir / "input_uncertainty.json",
               detail::input_uncertainty_to_json(*outcome.input_uncertainty)
                       .dump(2)
                   + "\n");
  outcome.requests_issued = client.requests_issued();
  return outcome;
}

}  // namespace moluq

#endif  // MOLUQ_PIPELINE_HPP_
