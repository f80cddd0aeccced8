//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_PROMPTS_HPP_
#define MOLUQ_PROMPTS_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moluq/fingerprint.hpp"
#include "moluq/molgraph.hpp"
#include "moluq/rng.hpp"

namespace moluq {

class EmptyPool: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class AnswerFormat { YesNo, Smiles };

struct Prompt {
  std::string role_preamble;
  std::string task_instruction;
  std::vector<std::pair<std::string, std::string>> icl_block;
  std::string question_block;
  AnswerFormat answer_format = AnswerFormat::YesNo;
  std::string full_text;  // assembled once at render time; the cache key input

  const std::string &text() const noexcept { return full_text; }
};

// Prompt skeletons. {{role}} is the expert preamble, {{icl}} the block of
// worked examples, {{target}} the question subject, {{property}} the
// property name used in the classification wording.
struct PromptTemplates {
  std::string property;
  std::string reaction;
  std::string rank;

  static PromptTemplates defaults() {
    PromptTemplates t;
    t.property =
        "{{role}}\n"
        "\n"
        "Given the SMILES of a molecule, use your expertise to predict its "
        "molecular properties based on its structure.\n"
        "\n"
        "For the following SMILES, determine if each molecule contains a "
        "{{property}} compound, answering only with \"Yes\" or \"No\". A few "
        "samples are provided:\n"
        "{{icl}}\n"
        "\n"
        "SMILES: {{target}}\n"
        "Contain {{property}} compound: [Provide an answer based on "
        "analysis]\n"
        "Please strictly answer with \"Yes\" or \"No\".";
    t.reaction =
        "{{role}}\n"
        "\n"
        "Given the SMILES of the reactants, use your expertise to predict "
        "the product of the reaction.\n"
        "\n"
        "For the following reactants, provide the SMILES of the major "
        "product. A few sample reactions are provided:\n"
        "{{icl}}\n"
        "\n"
        "Reactants: {{target}}\n"
        "Product: [Provide the product SMILES based on analysis]\n"
        "Please answer with only the SMILES string of the product.";
    t.rank =
        "{{role}}\n"
        "\n"
        "Can you rank your confidence score in the following smiles for "
        "interpreting its structures? [please output the exact smile "
        "string]:\n"
        "{{target}}";
    return t;
  }

  // Reads property.txt / reaction.txt / rank.txt from a directory; missing
  // files keep their built-in default.
  static PromptTemplates load_dir(const std::filesystem::path &dir) {
    PromptTemplates t = defaults();
    auto read = [&](const char *name, std::string &out) {
      std::filesystem::path file = dir / name;
      std::ifstream in(file);
      if (!in) return;
      std::ostringstream buf;
      buf << in.rdbuf();
      out = buf.str();
      while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
        out.pop_back();
    };
    read("property.txt", t.property);
    read("reaction.txt", t.reaction);
    read("rank.txt", t.rank);
    return t;
  }
};

inline constexpr std::string_view kPropertyRole =
    "You are an expert chemist specializing in chemical property prediction.";
inline constexpr std::string_view kReactionRole =
    "You are an expert chemist specializing in organic reaction prediction.";
inline constexpr std::string_view kRankRole =
    "As an expert in chemistry with a thorough understanding of SMILES "
    "notation.";

namespace detail {

inline std::string substitute(std::string text, std::string_view key,
                              std::string_view value) {
  std::string needle = "{{" + std::string(key) + "}}";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace detail

// One pool entry offered to ICL selection. `label` is the class answer for
// classification or the product SMILES for reactions.
struct IclCandidate {
  std::string canonical;
  std::string display;  // text placed into the prompt (original writing)
  std::string label;
  Fingerprint fingerprint;
};

enum class IclStrategy { Diverse, Random };

inline IclStrategy icl_strategy_from_string(std::string_view name) {
  if (name == "diverse") return IclStrategy::Diverse;
  if (name == "random") return IclStrategy::Random;
  throw std::invalid_argument("unknown icl strategy: " + std::string(name));
}

// Label-stratified pick of k pool indices. Within each stratum the diverse
// strategy starts from a seeded random member and then greedily maximizes
// the minimum Tanimoto distance to everything already chosen.
inline std::vector<int> select_icl(const std::vector<IclCandidate> &pool,
                                   int k, std::uint64_t seed,
                                   IclStrategy strategy = IclStrategy::Diverse,
                                   std::string_view exclude_canonical = {}) {
  std::vector<int> usable;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool[i].canonical != exclude_canonical)
      usable.push_back(static_cast<int>(i));
  if (usable.empty()) throw EmptyPool("icl pool is empty");
  if (k > static_cast<int>(usable.size()))
    throw EmptyPool("icl pool smaller than k");

  // Strata in first-appearance order of their labels.
  std::vector<std::string> labels;
  std::vector<std::vector<int>> strata;
  for (int idx: usable) {
    auto it = std::find(labels.begin(), labels.end(), pool[idx].label);
    if (it == labels.end()) {
      labels.push_back(pool[idx].label);
      strata.push_back({idx});
    } else {
      strata[static_cast<std::size_t>(it - labels.begin())].push_back(idx);
    }
  }

  // As balanced as the labels allow: round-robin one slot at a time over
  // strata ordered by size descending (stable on label order), skipping
  // exhausted strata.
  std::vector<std::size_t> stratum_order(strata.size());
  for (std::size_t i = 0; i < strata.size(); ++i) stratum_order[i] = i;
  std::stable_sort(stratum_order.begin(), stratum_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return strata[a].size() > strata[b].size();
                   });
  std::vector<int> quota(strata.size(), 0);
  int assigned = 0;
  while (assigned < k) {
    bool progressed = false;
    for (std::size_t s: stratum_order) {
      if (assigned >= k) break;
      if (quota[s] < static_cast<int>(strata[s].size())) {
        ++quota[s];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }

  rng::Engine eng = rng::seeded(seed);
  std::vector<int> chosen;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const std::vector<int> &members = strata[s];
    int want = quota[s];
    if (want == 0) continue;
    if (strategy == IclStrategy::Random) {
      std::vector<int> copy = members;
      rng::shuffle(copy, eng);
      chosen.insert(chosen.end(), copy.begin(), copy.begin() + want);
      continue;
    }
    std::vector<int> picked;
    std::vector<bool> used(members.size(), false);
    std::size_t first = rng::uniform_index(eng, members.size());
    picked.push_back(members[first]);
    used[first] = true;
    while (static_cast<int>(picked.size()) < want) {
      double best_score = -1.0;
      std::size_t best_pos = 0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (used[m]) continue;
        double min_dist = 2.0;
        for (int p: picked) {
          double dist = 1.0
                        - tanimoto(pool[members[m]].fingerprint,
                                   pool[p].fingerprint);
          min_dist = std::min(min_dist, dist);
        }
        if (min_dist > best_score) {
          best_score = min_dist;
          best_pos = m;
        }
      }
      picked.push_back(members[best_pos]);
      used[best_pos] = true;
    }
    chosen.insert(chosen.end(), picked.begin(), picked.end());
  }
  return chosen;
}

inline Prompt render_property_prompt(
    std::string_view target, std::string_view property_name,
    const std::vector<std::pair<std::string, std::string>> &icl,
    const PromptTemplates &templates = PromptTemplates::defaults()) {
  if (icl.empty()) throw EmptyPool("property prompt needs ICL examples");
  Prompt p;
  p.role_preamble = std::string(kPropertyRole);
  p.task_instruction =
      "Given the SMILES of a molecule, use your expertise to predict its "
      "molecular properties based on its structure.";
  p.icl_block = icl;
  p.answer_format = AnswerFormat::YesNo;

  std::string icl_text;
  for (std::size_t i = 0; i < icl.size(); ++i) {
    if (i > 0) icl_text += '\n';
    icl_text += "SMILES: " + icl[i].first + "\nContain "
                + std::string(property_name) + " compound: " + icl[i].second;
  }
  p.question_block = "SMILES: " + std::string(target) + "\nContain "
                     + std::string(property_name)
                     + " compound: [Provide an answer based on analysis]";

  std::string text = templates.property;
  text = detail::substitute(std::move(text), "role", p.role_preamble);
  text = detail::substitute(std::move(text), "icl", icl_text);
  text = detail::substitute(std::move(text), "target", target);
  text = detail::substitute(std::move(text), "property", property_name);
  p.full_text = std::move(text);
  return p;
}

inline Prompt render_reaction_prompt(
    std::string_view reactants,
    const std::vector<std::pair<std::string, std::string>> &icl,
    const PromptTemplates &templates = PromptTemplates::defaults()) {
  if (icl.empty()) throw EmptyPool("reaction prompt needs ICL examples");
  Prompt p;
  p.role_preamble = std::string(kReactionRole);
  p.task_instruction =
      "Given the SMILES of the reactants, use your expertise to predict the "
      "product of the reaction.";
  p.icl_block = icl;
  p.answer_format = AnswerFormat::Smiles;

  std::string icl_text;
  for (std::size_t i = 0; i < icl.size(); ++i) {
    if (i > 0) icl_text += '\n';
    icl_text +=
        "Reactants: " + icl[i].first + "\nProduct: " + icl[i].second;
  }
  p.question_block = "Reactants: " + std::string(reactants)
                     + "\nProduct: [Provide the product SMILES based on "
                       "analysis]";

  std::string text = templates.reaction;
  text = detail::substitute(std::move(text), "role", p.role_preamble);
  text = detail::substitute(std::move(text), "icl", icl_text);
  text = detail::substitute(std::move(text), "target", reactants);
  p.full_text = std::move(text);
  return p;
}

inline Prompt render_rank_prompt(
    const VariantList &variants,
    const PromptTemplates &templates = PromptTemplates::defaults()) {
  if (variants.variants.size() < 2)
    throw std::invalid_argument("ranking needs at least two variants");
  Prompt p;
  p.role_preamble = std::string(kRankRole);
  p.task_instruction =
      "Can you rank your confidence score in the following smiles for "
      "interpreting its structures? [please output the exact smile string]:";
  p.answer_format = AnswerFormat::Smiles;

  std::string lines;
  for (std::size_t i = 0; i < variants.variants.size(); ++i) {
    if (i > 0) lines += '\n';
    lines += variants.variants[i];
  }
  p.question_block = lines;

  std::string text = templates.rank;
  text = detail::substitute(std::move(text), "role", p.role_preamble);
  text = detail::substitute(std::move(text), "target", lines);
  p.full_text = std::move(text);
  return p;
}

struct ParsedAnswer {
  enum class Kind { Yes, No, Smiles, Invalid };

  Kind kind = Kind::Invalid;
  std::string smiles;     // raw extracted token when kind == Smiles
  std::string canonical;  // its canonical form

  // Class label used by entropy, majority voting and the ledger. Generated
  // molecules are grouped by canonical form, not by spelling.
  std::string label() const {
    switch (kind) {
    case Kind::Yes:
      return "Yes";
    case Kind::No:
      return "No";
    case Kind::Smiles:
      return canonical;
    case Kind::Invalid:
      break;
    }
    return "invalid";
  }

  bool valid() const noexcept { return kind != Kind::Invalid; }
};

inline ParsedAnswer parse_answer(std::string_view text, AnswerFormat format) {
  ParsedAnswer out;
  if (format == AnswerFormat::YesNo) {
    // Standalone yes/no tokens only; the final occurrence wins because
    // responses that reason first state their verdict last.
    auto boundary = [](char c) { return !std::isalnum(static_cast<unsigned char>(c)); };
    std::optional<ParsedAnswer::Kind> found;
    auto low = [](char c) {
      return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    };
    for (std::size_t i = 0; i + 2 <= text.size(); ++i) {
      bool left_ok = i == 0 || boundary(text[i - 1]);
      if (!left_ok) continue;
      char a = low(text[i]);
      char b = low(text[i + 1]);
      if (a == 'y' && b == 'e' && i + 3 <= text.size()
          && low(text[i + 2]) == 's'
          && (i + 3 == text.size() || boundary(text[i + 3])))
        found = ParsedAnswer::Kind::Yes;
      else if (a == 'n' && b == 'o'
               && (i + 2 == text.size() || boundary(text[i + 2])))
        found = ParsedAnswer::Kind::No;
    }
    if (found) out.kind = *found;
    return out;
  }

  // SMILES mode: the longest whitespace-delimited token that parses wins;
  // earlier token wins a length tie.
  std::string_view best;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size()
           && !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i == start) break;
    std::string_view token = text.substr(start, i - start);
    if (token.size() <= best.size()) continue;
    try {
      parse_smiles(token);
      best = token;
    } catch (const SmilesError &) {
    }
  }
  if (!best.empty()) {
    out.kind = ParsedAnswer::Kind::Smiles;
    out.smiles = std::string(best);
    out.canonical = canonical_smiles(parse_smiles(best));
  }
  return out;
}

}  // namespace moluq

#endif  // MOLUQ_PROMPTS_HPP_
