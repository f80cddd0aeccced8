//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_MOLGRAPH_HPP_
#define MOLUQ_MOLGRAPH_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "moluq/rng.hpp"

namespace moluq {

class SmilesError: public std::runtime_error {
public:
  SmilesError(const std::string &what, std::size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position)
                           + ")"),
        position_(position) { }

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

class SyntaxError: public SmilesError {
  using SmilesError::SmilesError;
};

class RingClosureError: public SmilesError {
  using SmilesError::SmilesError;
};

class ValenceError: public SmilesError {
  using SmilesError::SmilesError;
};

enum class BondOrder : std::uint8_t {
  Single = 1,
  Double = 2,
  Triple = 3,
  Aromatic = 4,
};

struct Atom {
  std::string element;
  int charge = 0;
  bool aromatic = false;
  // Present iff the atom was written in brackets; brackets fix the hydrogen
  // count explicitly and suspend the organic-subset valence rules.
  std::optional<int> explicit_h;
  int isotope = 0;  // 0 = unspecified
  int implicit_h = 0;
  int component = 0;
};

struct Bond {
  int a;
  int b;
  BondOrder order;

  int other(int atom) const noexcept { return atom == a ? b : a; }
};

namespace detail {

inline const std::unordered_map<std::string_view, int> &element_table() {
  static const std::unordered_map<std::string_view, int> table = {
      {"H", 1},    {"He", 2},   {"Li", 3},   {"Be", 4},   {"B", 5},
      {"C", 6},    {"N", 7},    {"O", 8},    {"F", 9},    {"Ne", 10},
      {"Na", 11},  {"Mg", 12},  {"Al", 13},  {"Si", 14},  {"P", 15},
      {"S", 16},   {"Cl", 17},  {"Ar", 18},  {"K", 19},   {"Ca", 20},
      {"Sc", 21},  {"Ti", 22},  {"V", 23},   {"Cr", 24},  {"Mn", 25},
      {"Fe", 26},  {"Co", 27},  {"Ni", 28},  {"Cu", 29},  {"Zn", 30},
      {"Ga", 31},  {"Ge", 32},  {"As", 33},  {"Se", 34},  {"Br", 35},
      {"Kr", 36},  {"Rb", 37},  {"Sr", 38},  {"Y", 39},   {"Zr", 40},
      {"Nb", 41},  {"Mo", 42},  {"Tc", 43},  {"Ru", 44},  {"Rh", 45},
      {"Pd", 46},  {"Ag", 47},  {"Cd", 48},  {"In", 49},  {"Sn", 50},
      {"Sb", 51},  {"Te", 52},  {"I", 53},   {"Xe", 54},  {"Cs", 55},
      {"Ba", 56},  {"La", 57},  {"Ce", 58},  {"Pr", 59},  {"Nd", 60},
      {"Pm", 61},  {"Sm", 62},  {"Eu", 63},  {"Gd", 64},  {"Tb", 65},
      {"Dy", 66},  {"Ho", 67},  {"Er", 68},  {"Tm", 69},  {"Yb", 70},
      {"Lu", 71},  {"Hf", 72},  {"Ta", 73},  {"W", 74},   {"Re", 75},
      {"Os", 76},  {"Ir", 77},  {"Pt", 78},  {"Au", 79},  {"Hg", 80},
      {"Tl", 81},  {"Pb", 82},  {"Bi", 83},  {"Po", 84},  {"At", 85},
      {"Rn", 86},  {"Fr", 87},  {"Ra", 88},  {"Ac", 89},  {"Th", 90},
      {"Pa", 91},  {"U", 92},   {"Np", 93},  {"Pu", 94},  {"Am", 95},
      {"Cm", 96},  {"Bk", 97},  {"Cf", 98},  {"Es", 99},  {"Fm", 100},
      {"Md", 101}, {"No", 102}, {"Lr", 103}, {"Rf", 104}, {"Db", 105},
      {"Sg", 106}, {"Bh", 107}, {"Hs", 108}, {"Mt", 109}, {"Ds", 110},
      {"Rg", 111}, {"Cn", 112}, {"Nh", 113}, {"Fl", 114}, {"Mc", 115},
      {"Lv", 116}, {"Ts", 117}, {"Og", 118},
  };
  return table;
}

inline int atomic_number(std::string_view symbol) {
  auto it = element_table().find(symbol);
  return it == element_table().end() ? 0 : it->second;
}

inline std::optional<int> organic_valence(std::string_view element) {
  if (element == "B") return 3;
  if (element == "C") return 4;
  if (element == "N") return 3;
  if (element == "O") return 2;
  if (element == "P") return 3;
  if (element == "S") return 2;
  if (element == "F" || element == "Cl" || element == "Br" || element == "I")
    return 1;
  return std::nullopt;
}

inline bool aromatic_element(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O"
         || element == "P" || element == "S";
}

inline int bond_order_sum(BondOrder order) {
  switch (order) {
  case BondOrder::Double:
    return 2;
  case BondOrder::Triple:
    return 3;
  default:
    // Aromatic bonds count one unit here; the delocalized contribution is
    // handled by the per-atom reservation in compute_implicit_h().
    return 1;
  }
}

}  // namespace detail

class MolGraph {
public:
  MolGraph() = default;

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  const std::vector<Bond> &bonds() const noexcept { return bonds_; }
  const std::string &source_text() const noexcept { return source_text_; }
  const std::vector<std::string> &warnings() const noexcept {
    return warnings_;
  }
  int n_components() const noexcept { return n_components_; }

  int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }

  // Bond indices incident to `atom`, in source order.
  const std::vector<int> &incident(int atom) const { return adj_[atom]; }

  bool has_warning(std::string_view flag) const {
    return std::find(warnings_.begin(), warnings_.end(), flag)
           != warnings_.end();
  }

  int hydrogen_count(int atom) const {
    const Atom &a = atoms_[atom];
    return a.explicit_h ? *a.explicit_h : a.implicit_h;
  }

private:
  friend MolGraph parse_smiles(std::string_view);
  friend class SmilesParser;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::string> warnings_;
  std::string source_text_;
  int n_components_ = 0;
};

struct VariantList {
  std::vector<std::string> variants;
  std::uint64_t seed = 0;
  std::string parent_canonical;
};

namespace detail {

struct PendingRing {
  int atom;
  int order;  // -1 = no explicit bond symbol
  std::size_t position;
};

}  // namespace detail

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text) : text_(text) { }

  MolGraph run() {
    if (text_.empty()) throw SyntaxError("empty SMILES", 0);
    while (pos_ < text_.size()) step();
    finish();
    return std::move(mol_);
  }

private:
  void step() {
    char c = text_[pos_];
    switch (c) {
    case '(':
      if (prev_ < 0) throw SyntaxError("branch before any atom", pos_);
      if (pending_ >= 0) throw SyntaxError("bond symbol before branch", pos_);
      stack_.push_back({prev_, pos_});
      ++pos_;
      break;
    case ')':
      if (stack_.empty()) throw SyntaxError("unmatched ')'", pos_);
      if (pending_ >= 0) throw SyntaxError("dangling bond before ')'", pos_);
      prev_ = stack_.back().first;
      stack_.pop_back();
      ++pos_;
      break;
    case '.':
      if (pending_ >= 0) throw SyntaxError("bond symbol before '.'", pos_);
      if (!stack_.empty()) throw SyntaxError("'.' inside a branch", pos_);
      if (component_atoms_ == 0) throw SyntaxError("empty component", pos_);
      prev_ = -1;
      component_atoms_ = 0;
      ++component_;
      ++pos_;
      break;
    case '-':
      set_pending(BondOrder::Single);
      break;
    case '=':
      set_pending(BondOrder::Double);
      break;
    case '#':
      set_pending(BondOrder::Triple);
      break;
    case ':':
      set_pending(BondOrder::Aromatic);
      break;
    case '/':
    case '\\':
      // Directional bonds carry cis/trans information we do not model.
      warn("stereo-stripped");
      set_pending(BondOrder::Single);
      break;
    case '%': {
      if (pos_ + 2 >= text_.size() || !std::isdigit(text_[pos_ + 1])
          || !std::isdigit(text_[pos_ + 2]))
        throw SyntaxError("'%' needs two digits", pos_);
      int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      ring_closure(num);
      pos_ += 3;
      break;
    }
    case '[':
      bracket_atom();
      break;
    default:
      if (std::isdigit(c)) {
        ring_closure(c - '0');
        ++pos_;
      } else {
        organic_atom();
      }
      break;
    }
  }

  void set_pending(BondOrder order) {
    if (pending_ >= 0) throw SyntaxError("two consecutive bond symbols", pos_);
    if (prev_ < 0) throw SyntaxError("bond symbol before any atom", pos_);
    pending_ = static_cast<int>(order);
    ++pos_;
  }

  void warn(std::string_view flag) {
    if (!mol_.has_warning(flag)) mol_.warnings_.emplace_back(flag);
  }

  int take_pending() {
    int p = pending_;
    pending_ = -1;
    return p;
  }

  void add_atom(Atom atom, std::size_t position) {
    atom.component = component_;
    int idx = static_cast<int>(mol_.atoms_.size());
    mol_.atoms_.push_back(std::move(atom));
    positions_.push_back(position);
    ++component_atoms_;
    if (prev_ >= 0) add_bond(prev_, idx, take_pending(), position);
    prev_ = idx;
  }

  void add_bond(int a, int b, int explicit_order, std::size_t position) {
    BondOrder order;
    if (explicit_order >= 0) {
      order = static_cast<BondOrder>(explicit_order);
    } else {
      bool both_aromatic =
          mol_.atoms_[a].aromatic && mol_.atoms_[b].aromatic;
      order = both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
    }
    auto key = std::minmax(a, b);
    if (!bond_pairs_.insert(key).second)
      throw RingClosureError("duplicate bond between atoms", position);
    mol_.bonds_.push_back(Bond {a, b, order});
  }

  void ring_closure(int number) {
    if (prev_ < 0) throw SyntaxError("ring digit before any atom", pos_);
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = detail::PendingRing {prev_, take_pending(), pos_};
      return;
    }
    detail::PendingRing open = it->second;
    rings_.erase(it);
    if (open.atom == prev_)
      throw RingClosureError("ring digit reused on the same atom", pos_);
    int close_order = take_pending();
    int order = -1;
    if (open.order >= 0 && close_order >= 0 && open.order != close_order)
      throw SyntaxError("conflicting ring-closure bond orders", pos_);
    order = open.order >= 0 ? open.order : close_order;
    add_bond(open.atom, prev_, order, pos_);
  }

  void organic_atom() {
    std::size_t start = pos_;
    Atom atom;
    // Two-letter symbols first so "Cl" is not read as carbon.
    if (text_.compare(pos_, 2, "Cl") == 0) {
      atom.element = "Cl";
      pos_ += 2;
    } else if (text_.compare(pos_, 2, "Br") == 0) {
      atom.element = "Br";
      pos_ += 2;
    } else {
      char c = text_[pos_];
      static constexpr std::string_view kUpper = "BCNOPSFI";
      static constexpr std::string_view kLower = "bcnops";
      if (kUpper.find(c) != std::string_view::npos) {
        atom.element = std::string(1, c);
      } else if (kLower.find(c) != std::string_view::npos) {
        atom.element = std::string(1, static_cast<char>(std::toupper(c)));
        atom.aromatic = true;
      } else {
        throw SyntaxError(std::string("unknown token '") + c + "'", pos_);
      }
      ++pos_;
    }
    add_atom(std::move(atom), start);
  }

  void bracket_atom() {
    std::size_t start = pos_;
    ++pos_;  // '['
    Atom atom;
    atom.explicit_h = 0;

    std::size_t digits = 0;
    while (pos_ + digits < text_.size() && std::isdigit(text_[pos_ + digits]))
      ++digits;
    if (digits > 0) {
      atom.isotope = std::stoi(std::string(text_.substr(pos_, digits)));
      if (atom.isotope <= 0)
        throw SyntaxError("isotope must be positive", pos_);
      pos_ += digits;
    }

    if (pos_ >= text_.size()) throw SyntaxError("unterminated bracket", start);
    char c = text_[pos_];
    if (std::islower(c)) {
      static constexpr std::string_view kLower = "bcnops";
      if (kLower.find(c) == std::string_view::npos)
        throw SyntaxError(std::string("unknown aromatic symbol '") + c + "'",
                          pos_);
      atom.element = std::string(1, static_cast<char>(std::toupper(c)));
      atom.aromatic = true;
      ++pos_;
    } else if (std::isupper(c)) {
      std::string symbol(1, c);
      if (pos_ + 1 < text_.size() && std::islower(text_[pos_ + 1])) {
        std::string two = symbol + text_[pos_ + 1];
        // Prefer the two-letter reading when it names an element, except
        // that a trailing 'H' is always the hydrogen-count field (there is
        // no bracket element "CH"; [NH4+]-style tokens dominate).
        if (text_[pos_ + 1] != 'H' && detail::atomic_number(two) != 0) {
          symbol = two;
          ++pos_;
        }
      }
      if (detail::atomic_number(symbol) == 0)
        throw SyntaxError("unknown element '" + symbol + "'", pos_);
      atom.element = symbol;
      ++pos_;
    } else {
      throw SyntaxError("expected element symbol in bracket", pos_);
    }

    if (pos_ < text_.size() && text_[pos_] == '@') {
      warn("stereo-stripped");
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') ++pos_;
    }

    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      int h = 1;
      if (pos_ < text_.size() && std::isdigit(text_[pos_])) {
        h = text_[pos_] - '0';
        ++pos_;
      }
      atom.explicit_h = h;
    }

    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      char sign_char = text_[pos_];
      int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (pos_ < text_.size() && std::isdigit(text_[pos_])) {
        magnitude = text_[pos_] - '0';
        ++pos_;
      } else {
        while (pos_ < text_.size() && text_[pos_] == sign_char) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign * magnitude;
    }

    if (pos_ < text_.size() && text_[pos_] == ':') {
      // Atom-map classes (common in reaction datasets) carry no structural
      // information; drop them like stereo.
      ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(text_[pos_]))
        throw SyntaxError("':' needs a map number", pos_);
      while (pos_ < text_.size() && std::isdigit(text_[pos_])) ++pos_;
      warn("atom-map-stripped");
    }

    if (pos_ >= text_.size() || text_[pos_] != ']')
      throw SyntaxError("unterminated bracket", start);
    ++pos_;
    add_atom(std::move(atom), start);
  }

  void finish() {
    if (pending_ >= 0)
      throw SyntaxError("dangling bond at end of input", text_.size());
    if (!stack_.empty())
      throw SyntaxError("unclosed '('", stack_.back().second);
    if (!rings_.empty())
      throw RingClosureError("unclosed ring digit "
                                 + std::to_string(rings_.begin()->first),
                             rings_.begin()->second.position);
    if (component_atoms_ == 0)
      throw SyntaxError("empty component", text_.size());

    mol_.source_text_ = std::string(text_);
    mol_.n_components_ = component_ + 1;
    mol_.adj_.assign(mol_.atoms_.size(), {});
    for (std::size_t b = 0; b < mol_.bonds_.size(); ++b) {
      mol_.adj_[mol_.bonds_[b].a].push_back(static_cast<int>(b));
      mol_.adj_[mol_.bonds_[b].b].push_back(static_cast<int>(b));
    }
    compute_implicit_h();
  }

  void compute_implicit_h() {
    for (std::size_t i = 0; i < mol_.atoms_.size(); ++i) {
      Atom &atom = mol_.atoms_[i];
      int base = 0;
      for (int b: mol_.adj_[i])
        base += detail::bond_order_sum(mol_.bonds_[b].order);
      if (atom.explicit_h) continue;  // bracket atom: hydrogens are fixed
      auto valence = detail::organic_valence(atom.element);
      if (!valence)
        throw SyntaxError("element '" + atom.element
                              + "' requires brackets",
                          positions_[i]);
      if (base > *valence)
        throw ValenceError("atom '" + atom.element + "' has bond order sum "
                               + std::to_string(base) + " > valence "
                               + std::to_string(*valence),
                           positions_[i]);
      // An aromatic atom reserves one valence unit for the delocalized
      // system; the floor at zero covers two-valent heteroatoms (o, s)
      // whose ring contribution is a lone pair rather than a hydrogen.
      atom.implicit_h =
          atom.aromatic ? std::max(0, *valence - base - 1) : *valence - base;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph mol_;
  std::vector<std::size_t> positions_;
  std::vector<std::pair<int, std::size_t>> stack_;
  std::map<int, detail::PendingRing> rings_;
  std::set<std::pair<int, int>> bond_pairs_;
  int prev_ = -1;
  int pending_ = -1;
  int component_ = 0;
  int component_atoms_ = 0;
};

inline MolGraph parse_smiles(std::string_view text) {
  return SmilesParser(text).run();
}

// Traversal choices for write_smiles. Missing entries fall back to the
// lowest-index atom (start) and source adjacency order (neighbors).
struct WriteOrder {
  std::vector<int> start_atoms;                 // one per component
  std::vector<std::vector<int>> neighbor_order;  // slot permutation per atom
};

namespace detail {

inline std::string atom_token(const Atom &a) {
  bool bare = !a.explicit_h && a.charge == 0 && a.isotope == 0
              && organic_valence(a.element).has_value()
              && (!a.aromatic || aromatic_element(a.element));
  std::string symbol = a.element;
  if (a.aromatic)
    for (char &c: symbol) c = static_cast<char>(std::tolower(c));
  if (bare) return symbol;

  std::string out = "[";
  if (a.isotope > 0) out += std::to_string(a.isotope);
  out += symbol;
  int h = a.explicit_h ? *a.explicit_h : a.implicit_h;
  if (h == 1)
    out += 'H';
  else if (h > 1)
    out += 'H' + std::to_string(h);
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (int mag = std::abs(a.charge); mag > 1) out += std::to_string(mag);
  }
  out += ']';
  return out;
}

inline std::string bond_token(const MolGraph &mol, const Bond &bond) {
  bool both_aromatic =
      mol.atoms()[bond.a].aromatic && mol.atoms()[bond.b].aromatic;
  switch (bond.order) {
  case BondOrder::Single:
    return both_aromatic ? "-" : "";
  case BondOrder::Double:
    return "=";
  case BondOrder::Triple:
    return "#";
  case BondOrder::Aromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

class SmilesWriter {
public:
  SmilesWriter(const MolGraph &mol, const WriteOrder &order)
      : mol_(mol), order_(order) { }

  // One SMILES string per dot-separated component, in component order.
  std::vector<std::string> components() {
    int n = static_cast<int>(mol_.atoms().size());
    visited_.assign(n, false);
    classified_.assign(mol_.bonds().size(), false);
    ring_at_.assign(n, {});
    tree_children_.assign(n, {});
    ring_digit_.assign(mol_.bonds().size(), -1);

    std::vector<std::string> out;
    for (int comp = 0; comp < mol_.n_components(); ++comp) {
      int start = start_atom(comp);
      classify(start, -1);
      std::string text;
      emit(start, text);
      out.push_back(std::move(text));
    }
    return out;
  }

private:
  int start_atom(int comp) const {
    if (comp < static_cast<int>(order_.start_atoms.size())) {
      int s = order_.start_atoms[comp];
      if (s >= 0 && s < static_cast<int>(mol_.atoms().size())
          && mol_.atoms()[s].component == comp)
        return s;
    }
    for (std::size_t i = 0; i < mol_.atoms().size(); ++i)
      if (mol_.atoms()[i].component == comp) return static_cast<int>(i);
    throw std::logic_error("component without atoms");
  }

  std::vector<int> slots(int atom) const {
    const auto &incident = mol_.incident(atom);
    std::vector<int> order(incident.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    if (atom < static_cast<int>(order_.neighbor_order.size())
        && order_.neighbor_order[atom].size() == order.size())
      order = order_.neighbor_order[atom];
    std::vector<int> bonds;
    bonds.reserve(order.size());
    for (int slot: order) bonds.push_back(incident[slot]);
    return bonds;
  }

  // DFS edge classification. A neighbor that is already visited when its
  // slot comes up closes a ring; this covers fused rings where a sibling
  // subtree reaches the neighbor first.
  void classify(int atom, int via) {
    visited_[atom] = true;
    for (int b: slots(atom)) {
      if (b == via) continue;
      const Bond &bond = mol_.bonds()[b];
      int next = bond.other(atom);
      if (visited_[next]) {
        if (!classified_[b]) {
          classified_[b] = true;
          ring_at_[next].push_back(b);
          ring_at_[atom].push_back(b);
        }
      } else {
        classified_[b] = true;
        tree_children_[atom].push_back(b);
        classify(next, b);
      }
    }
  }

  int allocate_digit() {
    for (int d = 1; d < 100; ++d)
      if (!digits_in_use_.count(d)) {
        digits_in_use_.insert(d);
        return d;
      }
    throw std::logic_error("more than 99 open ring closures");
  }

  static std::string digit_token(int d) {
    return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  }

  void emit(int atom, std::string &out) {
    out += atom_token(mol_.atoms()[atom]);
    // First emission of a ring bond opens its digit, the second closes it
    // and carries the bond symbol, matching how the parser resolves order.
    for (int b: ring_at_[atom]) {
      if (ring_digit_[b] < 0) {
        ring_digit_[b] = allocate_digit();
        out += digit_token(ring_digit_[b]);
      } else {
        out += bond_token(mol_, mol_.bonds()[b]);
        out += digit_token(ring_digit_[b]);
        digits_in_use_.erase(ring_digit_[b]);
      }
    }
    const auto &children = tree_children_[atom];
    for (std::size_t i = 0; i < children.size(); ++i) {
      int b = children[i];
      bool last = i + 1 == children.size();
      const Bond &bond = mol_.bonds()[b];
      if (!last) out += '(';
      out += bond_token(mol_, bond);
      emit(bond.other(atom), out);
      if (!last) out += ')';
    }
  }

  const MolGraph &mol_;
  const WriteOrder &order_;
  std::vector<bool> visited_;
  std::vector<bool> classified_;
  std::vector<std::vector<int>> ring_at_;
  std::vector<std::vector<int>> tree_children_;
  std::vector<int> ring_digit_;
  std::set<int> digits_in_use_;
};

inline std::vector<std::string> write_components(const MolGraph &mol,
                                                 const WriteOrder &order) {
  return SmilesWriter(mol, order).components();
}

}  // namespace detail

inline std::string write_smiles(const MolGraph &mol,
                                const WriteOrder &order = {}) {
  auto parts = detail::write_components(mol, order);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '.';
    out += parts[i];
  }
  return out;
}

namespace detail {

// Iterative neighborhood refinement. Returns a rank per atom; ranks are
// total (all distinct) after artificial tie-breaking.
inline std::vector<int> canonical_ranks(const MolGraph &mol) {
  int n = static_cast<int>(mol.atoms().size());
  std::vector<int> rank(n, 0);

  auto densify = [&](auto key_of) {
    using Key = decltype(key_of(0));
    std::vector<std::pair<Key, int>> keyed(n);
    for (int i = 0; i < n; ++i) keyed[i] = {key_of(i), i};
    std::sort(keyed.begin(), keyed.end());
    int next = -1;
    for (int i = 0; i < n; ++i) {
      if (i == 0 || keyed[i].first != keyed[i - 1].first) ++next;
      rank[keyed[i].second] = next;
    }
    return next + 1;
  };

  auto initial_key = [&](int i) {
    const Atom &a = mol.atoms()[i];
    return std::tuple(atomic_number(a.element), a.charge, mol.degree(i),
                      mol.hydrogen_count(i), a.aromatic, a.isotope,
                      a.explicit_h.has_value());
  };
  int classes = densify(initial_key);

  auto refine = [&](int classes_in) {
    int classes_now = classes_in;
    for (;;) {
      auto key = [&](int i) {
        std::vector<std::pair<int, int>> nbrs;
        nbrs.reserve(mol.incident(i).size());
        for (int b: mol.incident(i)) {
          const Bond &bond = mol.bonds()[b];
          nbrs.emplace_back(static_cast<int>(bond.order),
                            rank[bond.other(i)]);
        }
        std::sort(nbrs.begin(), nbrs.end());
        return std::pair(rank[i], std::move(nbrs));
      };
      int next = densify(key);
      // Refinement only ever splits classes, so a stable count means a
      // stable partition.
      if (next == classes_now) return classes_now;
      classes_now = next;
    }
  };
  classes = refine(classes);

  while (classes < n) {
    // Promote one atom of the lowest-ranked tied class, then re-refine.
    std::vector<int> count(classes, 0);
    for (int i = 0; i < n; ++i) ++count[rank[i]];
    int target = 0;
    while (count[target] < 2) ++target;
    int chosen = -1;
    for (int i = 0; i < n && chosen < 0; ++i)
      if (rank[i] == target) chosen = i;
    auto key = [&](int i) {
      return rank[i] * 2 + (i == chosen ? 0 : 1);
    };
    classes = densify(key);
    classes = refine(classes);
  }
  return rank;
}

}  // namespace detail

// Deterministic canonical form: refinement-ranked DFS write-out, components
// sorted lexicographically. Stereo never survives parsing, so the canonical
// string is stereo-free by construction.
inline std::string canonical_smiles(const MolGraph &mol) {
  std::vector<int> rank = detail::canonical_ranks(mol);
  int n = static_cast<int>(mol.atoms().size());

  WriteOrder order;
  order.start_atoms.assign(mol.n_components(), -1);
  for (int i = 0; i < n; ++i) {
    int comp = mol.atoms()[i].component;
    int &start = order.start_atoms[comp];
    if (start < 0 || rank[i] < rank[start]) start = i;
  }
  order.neighbor_order.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto &incident = mol.incident(i);
    std::vector<int> slots(incident.size());
    for (std::size_t s = 0; s < slots.size(); ++s)
      slots[s] = static_cast<int>(s);
    std::sort(slots.begin(), slots.end(), [&](int x, int y) {
      int rx = rank[mol.bonds()[incident[x]].other(i)];
      int ry = rank[mol.bonds()[incident[y]].other(i)];
      return rx != ry ? rx < ry : x < y;
    });
    order.neighbor_order[i] = std::move(slots);
  }

  auto parts = detail::write_components(mol, order);
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '.';
    out += parts[i];
  }
  return out;
}

// Randomized equivalent writings of `mol`. Duplicates and the canonical
// string are filtered; gives up after 10*n attempts so small molecules
// return fewer (possibly zero) variants.
inline VariantList enumerate_variants(const MolGraph &mol, int n,
                                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("variant count must be >= 1");
  VariantList out;
  out.seed = seed;
  out.parent_canonical = canonical_smiles(mol);

  rng::Engine eng = rng::seeded(seed);
  int n_atoms = static_cast<int>(mol.atoms().size());
  std::vector<std::vector<int>> by_component(mol.n_components());
  for (int i = 0; i < n_atoms; ++i)
    by_component[mol.atoms()[i].component].push_back(i);

  std::set<std::string> seen;
  for (int attempt = 0;
       attempt < 10 * n && static_cast<int>(out.variants.size()) < n;
       ++attempt) {
    WriteOrder order;
    for (const auto &members: by_component)
      order.start_atoms.push_back(
          members[rng::uniform_index(eng, members.size())]);
    order.neighbor_order.resize(n_atoms);
    for (int i = 0; i < n_atoms; ++i) {
      std::vector<int> slots(mol.incident(i).size());
      for (std::size_t s = 0; s < slots.size(); ++s)
        slots[s] = static_cast<int>(s);
      rng::shuffle(slots, eng);
      order.neighbor_order[i] = std::move(slots);
    }
    std::string text = write_smiles(mol, order);
    if (text == out.parent_canonical || !seen.insert(text).second) continue;
    out.variants.push_back(std::move(text));
  }
  return out;
}

}  // namespace moluq

#endif  // MOLUQ_MOLGRAPH_HPP_
