//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moluq/config.hpp"
#include "moluq/datasets.hpp"
#include "moluq/eval.hpp"
#include "moluq/fingerprint.hpp"
#include "moluq/molgraph.hpp"
#include "moluq/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

const char *bond_name(moluq::BondOrder order) {
  switch (order) {
  case moluq::BondOrder::Single:
    return "single";
  case moluq::BondOrder::Double:
    return "double";
  case moluq::BondOrder::Triple:
    return "triple";
  case moluq::BondOrder::Aromatic:
    return "aromatic";
  }
  return "?";
}

int cmd_parse(const std::string &smiles) {
  moluq::MolGraph mol = moluq::parse_smiles(smiles);
  std::cout << "atoms: " << mol.atoms().size() << "\n";
  for (std::size_t i = 0; i < mol.atoms().size(); ++i) {
    const moluq::Atom &a = mol.atoms()[i];
    std::cout << "  " << i << " " << a.element;
    if (a.isotope > 0) std::cout << " isotope=" << a.isotope;
    if (a.charge != 0) std::cout << " charge=" << a.charge;
    if (a.aromatic) std::cout << " aromatic";
    std::cout << " h=" << mol.hydrogen_count(static_cast<int>(i)) << "\n";
  }
  std::cout << "bonds: " << mol.bonds().size() << "\n";
  for (const moluq::Bond &b: mol.bonds())
    std::cout << "  " << b.a << "-" << b.b << " " << bond_name(b.order)
              << "\n";
  std::cout << "components: " << mol.n_components() << "\n";
  for (const std::string &w: mol.warnings())
    std::cout << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_canon(const std::string &smiles) {
  std::cout << moluq::canonical_smiles(moluq::parse_smiles(smiles)) << "\n";
  return kExitOk;
}

int cmd_enum(const std::string &smiles, int n, std::uint64_t seed) {
  moluq::VariantList variants =
      moluq::enumerate_variants(moluq::parse_smiles(smiles), n, seed);
  for (const std::string &v: variants.variants) std::cout << v << "\n";
  if (variants.variants.empty())
    std::cerr << "no distinct rewritings found\n";
  return kExitOk;
}

int cmd_fp_sim(const std::string &a, const std::string &b, int radius,
               int width) {
  moluq::Fingerprint fa =
      moluq::circular_fingerprint(moluq::parse_smiles(a), radius, width);
  moluq::Fingerprint fb =
      moluq::circular_fingerprint(moluq::parse_smiles(b), radius, width);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", moluq::tanimoto(fa, fb));
  std::cout << buf << "\n";
  return kExitOk;
}

int cmd_describe(const std::string &task, const std::string &path,
                 const std::string &smiles_column,
                 const std::string &label_column) {
  if (task == "property") {
    auto [records, stats] =
        moluq::load_classification_csv(path, smiles_column, label_column);
    int yes = 0;
    for (const moluq::ClassificationRecord &r: records)
      if (r.label == "Yes") ++yes;
    std::cout << "rows read: " << stats.rows_read << "\n"
              << "kept: " << stats.kept << "\n"
              << "skipped (bad smiles): " << stats.skipped_smiles << "\n"
              << "skipped (bad label): " << stats.skipped_label << "\n"
              << "duplicate structures: " << stats.duplicate_canonical << "\n"
              << "labels: Yes " << yes << ", No " << records.size() - yes
              << "\n";
  } else {
    auto [records, stats] = moluq::load_reactions(path);
    std::cout << "rows read: " << stats.rows_read << "\n"
              << "kept: " << stats.kept << "\n"
              << "skipped: " << stats.skipped_smiles << "\n";
  }
  return kExitOk;
}

int cmd_uq_run(const moluq::RunConfig &cfg) {
  moluq::RunOutcome outcome = moluq::run_pipeline(cfg);
  for (const moluq::RunReport &report: outcome.reports) {
    std::cout << report.dataset << " / " << report.arm << ": accuracy "
              << moluq::detail::fixed3(report.accuracy);
    if (report.f1) std::cout << ", f1 " << moluq::detail::fixed3(*report.f1);
    std::cout << ", mean entropy "
              << moluq::detail::fixed3(report.mean_entropy);
    for (const auto &[m, auc]: report.auc_by_m) {
      std::cout << ", auc@" << m << " ";
      std::cout << (auc ? moluq::detail::fixed3(*auc) : std::string("n/a"));
    }
    std::cout << "\n";
  }
  if (outcome.input_uncertainty) {
    const moluq::InputUncertaintyReport &iu = *outcome.input_uncertainty;
    std::cout << "reformed vs original: accuracy "
              << moluq::direction_name(iu.accuracy_direction)
              << ", mean entropy "
              << moluq::direction_name(iu.entropy_direction) << "\n";
  }
  std::cout << "requests issued: " << outcome.requests_issued << "\n";
  for (const auto &path: outcome.files_written)
    std::cout << "wrote " << path.string() << "\n";
  if (!outcome.failed_items.empty()) {
    std::cerr << outcome.failed_items.size() << " item(s) failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_uq_report(const std::string &run_dir, const std::string &format) {
  std::filesystem::path dir(run_dir);
  std::vector<moluq::RunReport> reports =
      moluq::load_reports_json(dir / "report.json");
  moluq::ReportFormat fmt = moluq::ReportFormat::Csv;
  if (format == "json")
    fmt = moluq::ReportFormat::Json;
  else if (format == "svg")
    fmt = moluq::ReportFormat::SvgRoc;
  else if (format != "csv")
    throw moluq::ConfigError("format must be json, csv or svg");
  for (const auto &[name, bytes]: moluq::render_report(reports, fmt)) {
    if (fmt == moluq::ReportFormat::Csv) {
      std::cout << bytes;
    } else {
      auto written = moluq::write_report(reports, fmt, dir);
      for (const auto &path: written)
        std::cout << "wrote " << path.string() << "\n";
      break;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app {"molecule LLM uncertainty toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  // smiles parse | canon | enum
  CLI::App *smiles = app.add_subcommand("smiles", "SMILES utilities");
  smiles->require_subcommand(1);
  static std::string smiles_in;
  CLI::App *parse =
      smiles->add_subcommand("parse", "parse and describe a SMILES string");
  parse->add_option("smiles", smiles_in, "input SMILES")->required();
  parse->callback([&] { action = [] { return cmd_parse(smiles_in); }; });

  CLI::App *canon =
      smiles->add_subcommand("canon", "print the canonical form");
  canon->add_option("smiles", smiles_in, "input SMILES")->required();
  canon->callback([&] { action = [] { return cmd_canon(smiles_in); }; });

  static int enum_n = 5;
  static std::uint64_t enum_seed = 0;
  CLI::App *enumerate =
      smiles->add_subcommand("enum", "print seeded equivalent rewritings");
  enumerate->add_option("smiles", smiles_in, "input SMILES")->required();
  enumerate->add_option("-n,--count", enum_n, "rewritings to request");
  enumerate->add_option("--seed", enum_seed, "random seed");
  enumerate->callback(
      [&] { action = [] { return cmd_enum(smiles_in, enum_n, enum_seed); }; });

  // fp sim
  CLI::App *fp = app.add_subcommand("fp", "fingerprint utilities");
  fp->require_subcommand(1);
  static std::string fp_a, fp_b;
  static int fp_radius = moluq::kDefaultFpRadius;
  static int fp_width = moluq::kDefaultFpWidth;
  CLI::App *sim =
      fp->add_subcommand("sim", "Tanimoto similarity of two molecules");
  sim->add_option("a", fp_a, "first SMILES")->required();
  sim->add_option("b", fp_b, "second SMILES")->required();
  sim->add_option("--radius", fp_radius, "circular radius");
  sim->add_option("--width", fp_width, "bit width (power of two)");
  sim->callback([&] {
    action = [] { return cmd_fp_sim(fp_a, fp_b, fp_radius, fp_width); };
  });

  // datasets describe
  CLI::App *datasets = app.add_subcommand("datasets", "dataset utilities");
  datasets->require_subcommand(1);
  static std::string ds_task = "property";
  static std::string ds_path, ds_smiles_col = "smiles", ds_label_col = "label";
  CLI::App *describe =
      datasets->add_subcommand("describe", "load a dataset and print counts");
  describe->add_option("dataset", ds_path, "dataset file")->required();
  describe->add_option("--task", ds_task, "property or reaction");
  describe->add_option("--smiles-column", ds_smiles_col, "SMILES column");
  describe->add_option("--label-column", ds_label_col, "label column");
  describe->callback([&] {
    action = [] {
      return cmd_describe(ds_task, ds_path, ds_smiles_col, ds_label_col);
    };
  });

  // uq run | report
  CLI::App *uq = app.add_subcommand("uq", "uncertainty pipeline");
  uq->require_subcommand(1);
  static std::string config_path;
  static std::optional<std::string> ov_dataset, ov_arm, ov_output, ov_model,
      ov_endpoint_kind, ov_linkage, ov_template_dir, ov_cache;
  static std::optional<int> ov_test_size, ov_k, ov_n;
  static std::optional<double> ov_threshold;
  static std::optional<std::uint64_t> ov_seed_split, ov_seed_icl,
      ov_seed_enum, ov_seed_mock;
  static std::vector<int> ov_m;
  CLI::App *run = uq->add_subcommand("run", "execute a configured run");
  run->add_option("--config", config_path, "run config file")->required();
  run->add_option("--dataset", ov_dataset, "override dataset path");
  run->add_option("--arm", ov_arm, "original, reformed or both");
  run->add_option("--output-dir", ov_output, "override output directory");
  run->add_option("--model", ov_model, "override model name");
  run->add_option("--endpoint-kind", ov_endpoint_kind, "mock or http");
  run->add_option("--linkage", ov_linkage, "single, average or complete");
  run->add_option("--template-dir", ov_template_dir, "prompt template dir");
  run->add_option("--cache", ov_cache, "override cache path");
  run->add_option("--test-size", ov_test_size, "override test set size");
  run->add_option("--k-icl", ov_k, "override demonstration count");
  run->add_option("--n-variants", ov_n, "override rewriting count");
  run->add_option("--threshold", ov_threshold, "override cluster threshold");
  run->add_option("--m", ov_m, "override sample counts")->delimiter(',');
  run->add_option("--seed-split", ov_seed_split, "override split seed");
  run->add_option("--seed-icl", ov_seed_icl, "override ICL seed");
  run->add_option("--seed-enum", ov_seed_enum, "override rewriting seed");
  run->add_option("--seed-mock", ov_seed_mock, "override mock seed");
  run->callback([&] {
    action = [] {
      moluq::RunConfig cfg = moluq::load_run_config(config_path);
      if (ov_dataset) cfg.dataset = *ov_dataset;
      if (ov_arm) cfg.arm = *ov_arm;
      if (ov_output) cfg.output_dir = *ov_output;
      if (ov_model) cfg.endpoint.model_name = *ov_model;
      if (ov_endpoint_kind) cfg.endpoint_kind = *ov_endpoint_kind;
      if (ov_linkage) cfg.linkage = *ov_linkage;
      if (ov_template_dir) cfg.template_dir = *ov_template_dir;
      if (ov_cache) cfg.cache_path = *ov_cache;
      if (ov_test_size) cfg.test_size = *ov_test_size;
      if (ov_k) cfg.k_icl = *ov_k;
      if (ov_n) cfg.n_variants = *ov_n;
      if (ov_threshold) cfg.cluster_threshold = *ov_threshold;
      if (!ov_m.empty()) cfg.m_values = ov_m;
      if (ov_seed_split) cfg.seeds.split = *ov_seed_split;
      if (ov_seed_icl) cfg.seeds.icl = *ov_seed_icl;
      if (ov_seed_enum) cfg.seeds.enumeration = *ov_seed_enum;
      if (ov_seed_mock) cfg.seeds.mock = *ov_seed_mock;
      if (cfg.dataset_name.empty() && !cfg.dataset.empty())
        cfg.dataset_name = cfg.dataset.stem().string();
      return cmd_uq_run(cfg);
    };
  });

  static std::string report_dir, report_format = "csv";
  CLI::App *report =
      uq->add_subcommand("report", "re-render reports from a finished run");
  report->add_option("--run", report_dir, "run output directory")->required();
  report->add_option("--format", report_format, "csv, json or svg");
  report->callback([&] {
    action = [] { return cmd_uq_report(report_dir, report_format); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const moluq::SmilesError &e) {
    std::cerr << "smiles error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
