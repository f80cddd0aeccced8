//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_DATASETS_HPP_
#define MOLUQ_DATASETS_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "moluq/molgraph.hpp"
#include "moluq/rng.hpp"

namespace moluq {

class DatasetError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FileError: public DatasetError {
  using DatasetError::DatasetError;
};

class MissingColumn: public DatasetError {
  using DatasetError::DatasetError;
};

class TooFewRecords: public DatasetError {
  using DatasetError::DatasetError;
};

struct ClassificationRecord {
  std::string smiles;
  std::string label;  // "Yes" or "No"
  std::string canonical;
};

struct ReactionRecord {
  std::string reactants;
  std::string product;
  std::string canonical_product;
};

struct LoadStats {
  int rows_read = 0;
  int kept = 0;
  int skipped_smiles = 0;
  int skipped_label = 0;
  int duplicate_canonical = 0;
  std::vector<std::string> warnings;
};

namespace detail {

// Minimal CSV: quoted fields, doubled quotes, embedded commas and newlines.
inline std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
    case '"':
      quoted = true;
      any = true;
      break;
    case ',':
      row.push_back(std::move(field));
      field.clear();
      any = true;
      break;
    case '\r':
      break;
    case '\n':
      if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
      }
      break;
    default:
      field += c;
      any = true;
      break;
    }
  }
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

inline std::string lower(std::string s) {
  for (char &c: s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// Normalizes a raw label cell to "Yes"/"No"; empty result means unusable.
inline std::string normalize_label(std::string_view raw) {
  std::string s = detail::lower(detail::strip(raw));
  if (s == "1" || s == "1.0" || s == "yes" || s == "true") return "Yes";
  if (s == "0" || s == "0.0" || s == "no" || s == "false") return "No";
  return "";
}

inline std::pair<std::vector<ClassificationRecord>, LoadStats>
load_classification_csv(const std::filesystem::path &path,
                        const std::string &smiles_column,
                        const std::string &label_column) {
  auto rows = detail::read_csv(path);
  if (rows.empty()) throw FileError("empty file: " + path.string());

  const auto &header = rows.front();
  int smiles_idx = -1;
  int label_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = detail::strip(header[i]);
    if (name == smiles_column) smiles_idx = static_cast<int>(i);
    if (name == label_column) label_idx = static_cast<int>(i);
  }
  if (smiles_idx < 0)
    throw MissingColumn("column not found: " + smiles_column);
  if (label_idx < 0) throw MissingColumn("column not found: " + label_column);

  std::vector<ClassificationRecord> records;
  LoadStats stats;
  std::map<std::string, int> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    ++stats.rows_read;
    auto cell = [&](int idx) -> std::string {
      return idx < static_cast<int>(row.size()) ? row[idx] : std::string();
    };
    std::string label = normalize_label(cell(label_idx));
    if (label.empty()) {
      ++stats.skipped_label;
      continue;
    }
    std::string smiles = detail::strip(cell(smiles_idx));
    if (smiles.empty()) {
      ++stats.skipped_smiles;
      continue;
    }
    std::string canonical;
    try {
      canonical = canonical_smiles(parse_smiles(smiles));
    } catch (const SmilesError &) {
      ++stats.skipped_smiles;
      continue;
    }
    // Duplicate structures are kept (labels may disagree) but reported.
    if (int &count = seen[canonical]; count++ > 0) {
      ++stats.duplicate_canonical;
      if (stats.duplicate_canonical <= 5)
        stats.warnings.push_back("duplicate structure: " + canonical);
    }
    records.push_back({std::move(smiles), std::move(label),
                       std::move(canonical)});
    ++stats.kept;
  }
  return {std::move(records), std::move(stats)};
}

// Lines of "reactants>>product" or "reactants>reagents>product"; reagents
// fold into the reactant side. The product must be a single component.
inline std::pair<std::vector<ReactionRecord>, LoadStats> load_reactions(
    const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());

  std::vector<ReactionRecord> records;
  LoadStats stats;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = detail::strip(line);
    if (text.empty() || text.front() == '#') continue;
    ++stats.rows_read;

    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      std::size_t gt = text.find('>', pos);
      if (gt == std::string::npos) {
        parts.push_back(text.substr(pos));
        break;
      }
      parts.push_back(text.substr(pos, gt - pos));
      pos = gt + 1;
    }
    if (parts.size() != 2 && parts.size() != 3) {
      ++stats.skipped_smiles;
      continue;
    }
    std::string reactants = detail::strip(parts.front());
    std::string product = detail::strip(parts.back());
    if (parts.size() == 3) {
      std::string reagents = detail::strip(parts[1]);
      if (!reagents.empty())
        reactants = reactants.empty() ? reagents : reactants + "." + reagents;
    }
    if (reactants.empty() || product.empty()) {
      ++stats.skipped_smiles;
      continue;
    }
    std::string canonical_product;
    try {
      MolGraph prod = parse_smiles(product);
      if (prod.n_components() != 1) {
        ++stats.skipped_smiles;
        continue;
      }
      canonical_product = canonical_smiles(prod);
      parse_smiles(reactants);
    } catch (const SmilesError &) {
      ++stats.skipped_smiles;
      continue;
    }
    records.push_back({std::move(reactants), std::move(product),
                       std::move(canonical_product)});
    ++stats.kept;
  }
  return {std::move(records), std::move(stats)};
}

template <typename Record>
struct SplitResult {
  std::vector<Record> test;
  std::vector<Record> pool;
  int pool_dropped = 0;  // pool entries removed for matching a test structure
};

namespace detail {

inline const std::string &record_canonical(const ClassificationRecord &r) {
  return r.canonical;
}

inline const std::string &record_canonical(const ReactionRecord &r) {
  return r.canonical_product;
}

}  // namespace detail

// Seeded sample without replacement; everything not sampled becomes the
// demonstration pool, minus entries whose structure appears in the test set.
template <typename Record>
SplitResult<Record> split_test(const std::vector<Record> &records,
                               int test_size, std::uint64_t seed) {
  if (test_size < 1) throw std::invalid_argument("test_size must be >= 1");
  if (static_cast<std::size_t>(test_size) > records.size())
    throw TooFewRecords("need " + std::to_string(test_size)
                        + " records, have " + std::to_string(records.size()));

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng::Engine eng = rng::seeded(seed);
  rng::shuffle(order, eng);

  SplitResult<Record> result;
  std::set<std::string> test_structures;
  for (int i = 0; i < test_size; ++i) {
    const Record &rec = records[order[i]];
    test_structures.insert(detail::record_canonical(rec));
    result.test.push_back(rec);
  }
  for (std::size_t i = test_size; i < order.size(); ++i) {
    const Record &rec = records[order[i]];
    if (test_structures.count(detail::record_canonical(rec))) {
      ++result.pool_dropped;
      continue;
    }
    result.pool.push_back(rec);
  }
  return result;
}

}  // namespace moluq

#endif  // MOLUQ_DATASETS_HPP_
