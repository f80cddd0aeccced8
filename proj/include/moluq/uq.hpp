//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_UQ_HPP_
#define MOLUQ_UQ_HPP_

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "moluq/cluster.hpp"
#include "moluq/prompts.hpp"

namespace moluq {

class ItemMismatch: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The m sampled responses for one prompt.
struct SampleSet {
  std::string task;
  std::string item;            // canonical SMILES of the question subject
  std::string prompt_variant;  // "original" or "reformed"
  std::vector<std::string> responses;
  std::vector<ParsedAnswer> parsed;
};

struct UncertaintyRecord {
  std::string item;
  double score = 0.0;  // entropy in nats
  std::string kind;    // "class_entropy" or "cluster_entropy"
  bool correct = false;
  int m = 0;
};

namespace detail {

inline double entropy_of_counts(const std::vector<int> &counts, int total) {
  double h = 0.0;
  for (int c: counts) {
    if (c == 0) continue;  // 0 * ln 0 := 0
    double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  // Rounding can leave a tiny negative zero for one-class inputs.
  return h < 0.0 ? 0.0 : h;
}

}  // namespace detail

// Shannon entropy of the empirical label distribution, natural log.
// Unparseable answers are expected to arrive as the label "invalid" and
// count as a class of their own.
inline double class_entropy(const std::vector<std::string> &labels) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::map<std::string, int> freq;
  for (const std::string &label: labels) ++freq[label];
  std::vector<int> counts;
  counts.reserve(freq.size());
  for (const auto &[label, count]: freq) counts.push_back(count);
  return detail::entropy_of_counts(counts, static_cast<int>(labels.size()));
}

// Shannon entropy of cluster occupancy, natural log.
inline double cluster_entropy(const ClusterAssignment &assignment) {
  if (assignment.labels.empty()) throw std::invalid_argument("no labels");
  std::vector<int> sizes(assignment.g, 0);
  for (int label: assignment.labels) ++sizes[label];
  return detail::entropy_of_counts(sizes,
                                   static_cast<int>(assignment.labels.size()));
}

enum class Direction { Up, Down, Flat };

inline const char *direction_name(Direction d) {
  switch (d) {
  case Direction::Up:
    return "up";
  case Direction::Down:
    return "down";
  case Direction::Flat:
    return "flat";
  }
  return "flat";
}

struct InputUncertaintyItem {
  std::string item;
  double u_original = 0.0;
  double u_reformed = 0.0;
  double delta_u = 0.0;
  bool correct_original = false;
  bool correct_reformed = false;
};

struct InputUncertaintyReport {
  std::vector<InputUncertaintyItem> items;  // sorted by item
  double accuracy_original = 0.0;
  double accuracy_reformed = 0.0;
  double accuracy_delta = 0.0;
  Direction accuracy_direction = Direction::Flat;
  double mean_entropy_original = 0.0;
  double mean_entropy_reformed = 0.0;
  double entropy_delta = 0.0;
  Direction entropy_direction = Direction::Flat;
};

// Pairs the two arms item-by-item (canonical SMILES key) and aggregates the
// accuracy and mean-entropy movement of the reformed arm.
inline InputUncertaintyReport input_uncertainty_report(
    const std::vector<UncertaintyRecord> &original,
    const std::vector<UncertaintyRecord> &reformed) {
  std::map<std::string, const UncertaintyRecord *> by_item;
  for (const UncertaintyRecord &r: reformed) by_item[r.item] = &r;
  if (by_item.size() != reformed.size())
    throw ItemMismatch("duplicate item in reformed arm");

  InputUncertaintyReport out;
  std::map<std::string, const UncertaintyRecord *> seen;
  for (const UncertaintyRecord &r: original) {
    if (!seen.emplace(r.item, &r).second)
      throw ItemMismatch("duplicate item in original arm");
    auto it = by_item.find(r.item);
    if (it == by_item.end())
      throw ItemMismatch("item missing from reformed arm: " + r.item);
  }
  if (by_item.size() != seen.size()) {
    for (const auto &[item, r]: by_item)
      if (!seen.count(item))
        throw ItemMismatch("item missing from original arm: " + item);
  }

  for (const auto &[item, orig]: seen) {
    const UncertaintyRecord *ref = by_item.at(item);
    InputUncertaintyItem row;
    row.item = item;
    row.u_original = orig->score;
    row.u_reformed = ref->score;
    row.delta_u = ref->score - orig->score;
    row.correct_original = orig->correct;
    row.correct_reformed = ref->correct;
    out.items.push_back(std::move(row));
  }

  if (out.items.empty()) return out;
  double n = static_cast<double>(out.items.size());
  for (const InputUncertaintyItem &row: out.items) {
    out.accuracy_original += row.correct_original ? 1.0 : 0.0;
    out.accuracy_reformed += row.correct_reformed ? 1.0 : 0.0;
    out.mean_entropy_original += row.u_original;
    out.mean_entropy_reformed += row.u_reformed;
  }
  out.accuracy_original /= n;
  out.accuracy_reformed /= n;
  out.mean_entropy_original /= n;
  out.mean_entropy_reformed /= n;
  out.accuracy_delta = out.accuracy_reformed - out.accuracy_original;
  out.entropy_delta = out.mean_entropy_reformed - out.mean_entropy_original;
  auto direction = [](double delta) {
    if (delta > 0.0) return Direction::Up;
    if (delta < 0.0) return Direction::Down;
    return Direction::Flat;
  };
  out.accuracy_direction = direction(out.accuracy_delta);
  out.entropy_direction = direction(out.entropy_delta);
  return out;
}

}  // namespace moluq

#endif  // MOLUQ_UQ_HPP_
