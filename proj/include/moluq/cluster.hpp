//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_CLUSTER_HPP_
#define MOLUQ_CLUSTER_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "moluq/fingerprint.hpp"
#include "moluq/molgraph.hpp"

namespace moluq {

enum class Linkage { Single, Average, Complete };

inline Linkage linkage_from_string(std::string_view name) {
  if (name == "single") return Linkage::Single;
  if (name == "average") return Linkage::Average;
  if (name == "complete") return Linkage::Complete;
  throw std::invalid_argument("unknown linkage: " + std::string(name));
}

constexpr double kDefaultClusterThreshold = 0.2;

// Pairwise 1 - Tanimoto over the responses that parse; the positions of
// responses that do not parse are kept aside in invalid_indices.
struct DistanceMatrix {
  int size = 0;
  std::vector<double> entries;      // row-major size*size
  std::vector<int> invalid_indices;  // positions in the original list
  std::vector<int> valid_positions;  // original position of each matrix row

  double at(int i, int j) const { return entries[i * size + j]; }
  double &at(int i, int j) { return entries[i * size + j]; }

  int total_positions() const {
    return size + static_cast<int>(invalid_indices.size());
  }
};

struct ClusterAssignment {
  std::vector<int> labels;  // one per response position, ids 0..g-1
  int g = 0;
};

inline DistanceMatrix response_distance_matrix(
    const std::vector<std::string> &smiles_list,
    int radius = kDefaultFpRadius, int width = kDefaultFpWidth) {
  if (smiles_list.empty())
    throw std::invalid_argument("response list is empty");
  DistanceMatrix d;
  std::vector<Fingerprint> fps;
  for (std::size_t i = 0; i < smiles_list.size(); ++i) {
    try {
      MolGraph mol = parse_smiles(smiles_list[i]);
      fps.push_back(circular_fingerprint(mol, radius, width));
      d.valid_positions.push_back(static_cast<int>(i));
    } catch (const SmilesError &) {
      d.invalid_indices.push_back(static_cast<int>(i));
    }
  }
  d.size = static_cast<int>(fps.size());
  d.entries.assign(static_cast<std::size_t>(d.size) * d.size, 0.0);
  for (int i = 0; i < d.size; ++i)
    for (int j = i + 1; j < d.size; ++j) {
      double dist = 1.0 - tanimoto(fps[i], fps[j]);
      d.at(i, j) = dist;
      d.at(j, i) = dist;
    }
  return d;
}

namespace detail {

// Linkage distance recomputed from the original matrix each time, summing
// members in ascending index order so results are bit-stable.
inline double linkage_distance(const DistanceMatrix &d,
                               const std::vector<int> &ca,
                               const std::vector<int> &cb, Linkage linkage) {
  double best = linkage == Linkage::Complete
                    ? 0.0
                    : std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int i: ca)
    for (int j: cb) {
      double dist = d.at(i, j);
      switch (linkage) {
      case Linkage::Single:
        best = std::min(best, dist);
        break;
      case Linkage::Complete:
        best = std::max(best, dist);
        break;
      case Linkage::Average:
        sum += dist;
        break;
      }
    }
  if (linkage == Linkage::Average)
    return sum / (static_cast<double>(ca.size()) * cb.size());
  return best;
}

}  // namespace detail

// Bottom-up merging over the valid responses until the smallest linkage
// distance exceeds the threshold. Clusters are identified by their smallest
// member row; ties pick the lexicographically smallest id pair, which makes
// the outcome independent of the platform's sort internals.
inline ClusterAssignment agglomerate(const DistanceMatrix &d, Linkage linkage,
                                     double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("threshold must be in [0, 1]");

  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < d.size; ++i) clusters.push_back({i});

  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double dist =
            detail::linkage_distance(d, clusters[i], clusters[j], linkage);
        if (dist < best) {
          best = dist;
          bi = i;
          bj = j;
        }
        // Equal distances fall through: the scan order (ascending by
        // smallest member, since clusters stay sorted) already visits the
        // lexicographically smallest id pair first.
      }
    if (best > threshold) break;
    std::vector<int> merged;
    std::merge(clusters[bi].begin(), clusters[bi].end(), clusters[bj].begin(),
               clusters[bj].end(), std::back_inserter(merged));
    clusters[bi] = std::move(merged);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }

  ClusterAssignment out;
  out.labels.assign(d.total_positions(), -1);
  int next_label = 0;
  for (const auto &members: clusters) {
    for (int row: members) out.labels[d.valid_positions[row]] = next_label;
    ++next_label;
  }
  for (int pos: d.invalid_indices) out.labels[pos] = next_label++;
  out.g = next_label;
  return out;
}

}  // namespace moluq

#endif  // MOLUQ_CLUSTER_HPP_
