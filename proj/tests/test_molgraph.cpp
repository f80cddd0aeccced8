//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "corpus.hpp"
#include "moluq/molgraph.hpp"

namespace {

using namespace moluq;

// Element counts including implicit and explicit hydrogens; checked against
// textbook molecular formulas, which the parser cannot fake.
std::map<std::string, int> formula(const MolGraph &mol) {
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < mol.atoms().size(); ++i) {
    ++counts[mol.atoms()[i].element];
    counts["H"] += mol.hydrogen_count(static_cast<int>(i));
  }
  if (counts["H"] == 0) counts.erase("H");
  return counts;
}

std::map<std::string, int> formula(const std::string &smiles) {
  return formula(parse_smiles(smiles));
}

}  // namespace

TEST_CASE("linear and branched molecules parse to correct formulas") {
  CHECK(formula("C") == std::map<std::string, int> {{"C", 1}, {"H", 4}});
  CHECK(formula("CCO")
        == std::map<std::string, int> {{"C", 2}, {"H", 6}, {"O", 1}});
  CHECK(formula("CC(C)C")
        == std::map<std::string, int> {{"C", 4}, {"H", 10}});
  CHECK(formula("CC(=O)O")
        == std::map<std::string, int> {{"C", 2}, {"H", 4}, {"O", 2}});
  CHECK(formula("C#N") == std::map<std::string, int> {{"C", 1}, {"H", 1}, {"N", 1}});
  CHECK(formula("O=C=O") == std::map<std::string, int> {{"C", 1}, {"O", 2}});
  CHECK(formula("N") == std::map<std::string, int> {{"H", 3}, {"N", 1}});
  CHECK(formula("OP(O)O")
        == std::map<std::string, int> {{"H", 3}, {"O", 3}, {"P", 1}});
  CHECK(formula("OB(O)O")
        == std::map<std::string, int> {{"B", 1}, {"H", 3}, {"O", 3}});
}

TEST_CASE("aromatic rings produce textbook hydrogen counts") {
  CHECK(formula("c1ccccc1")
        == std::map<std::string, int> {{"C", 6}, {"H", 6}});
  CHECK(formula("c1ccncc1")
        == std::map<std::string, int> {{"C", 5}, {"H", 5}, {"N", 1}});
  CHECK(formula("c1cc[nH]c1")
        == std::map<std::string, int> {{"C", 4}, {"H", 5}, {"N", 1}});
  CHECK(formula("c1ccoc1")
        == std::map<std::string, int> {{"C", 4}, {"H", 4}, {"O", 1}});
  CHECK(formula("c1ccsc1")
        == std::map<std::string, int> {{"C", 4}, {"H", 4}, {"S", 1}});
  CHECK(formula("c1ccc2ccccc2c1")
        == std::map<std::string, int> {{"C", 10}, {"H", 8}});
  // Caffeine C8H10N4O2, aspirin C9H8O4, ibuprofen C13H18O2.
  CHECK(formula("Cn1cnc2c1c(=O)n(C)c(=O)n2C")
        == std::map<std::string, int> {{"C", 8}, {"H", 10}, {"N", 4}, {"O", 2}});
  CHECK(formula("CC(=O)Oc1ccccc1C(=O)O")
        == std::map<std::string, int> {{"C", 9}, {"H", 8}, {"O", 4}});
  CHECK(formula("CC(C)Cc1ccc(cc1)C(C)C(=O)O")
        == std::map<std::string, int> {{"C", 13}, {"H", 18}, {"O", 2}});
}

TEST_CASE("bracket atoms carry isotope, charge, explicit hydrogens") {
  MolGraph methane = parse_smiles("[13CH4]");
  REQUIRE(methane.atoms().size() == 1);
  CHECK(methane.atoms()[0].isotope == 13);
  CHECK(methane.hydrogen_count(0) == 4);

  MolGraph ammonium = parse_smiles("[NH4+]");
  CHECK(ammonium.atoms()[0].charge == 1);
  CHECK(ammonium.hydrogen_count(0) == 4);

  MolGraph ferric = parse_smiles("[Fe+3]");
  CHECK(ferric.atoms()[0].element == "Fe");
  CHECK(ferric.atoms()[0].charge == 3);
  CHECK(ferric.hydrogen_count(0) == 0);

  MolGraph anion = parse_smiles("[O-]");
  CHECK(anion.atoms()[0].charge == -1);

  MolGraph doubled = parse_smiles("[O-2]");
  CHECK(doubled.atoms()[0].charge == -2);

  MolGraph heavy_water = parse_smiles("[2H]O[2H]");
  CHECK(heavy_water.atoms().size() == 3);
  CHECK(heavy_water.atoms()[0].isotope == 2);
  CHECK(heavy_water.atoms()[0].element == "H");
}

TEST_CASE("ring closures support two-digit references and dots split components") {
  MolGraph cyclopropane = parse_smiles("C%12CC%12");
  CHECK(cyclopropane.bonds().size() == 3);
  CHECK(cyclopropane.n_components() == 1);

  MolGraph salt = parse_smiles("[Na+].[Cl-]");
  CHECK(salt.atoms().size() == 2);
  CHECK(salt.bonds().empty());
  CHECK(salt.n_components() == 2);

  MolGraph spiro = parse_smiles("C1CCC2(CC1)CCCC2");
  CHECK(spiro.n_components() == 1);
  CHECK(spiro.bonds().size() == spiro.atoms().size() + 1);
}

TEST_CASE("stereo and atom-map annotations are dropped with a warning") {
  MolGraph alkene = parse_smiles("F/C=C/F");
  CHECK(alkene.has_warning("stereo-stripped"));
  CHECK(formula(alkene)
        == std::map<std::string, int> {{"C", 2}, {"F", 2}, {"H", 2}});

  MolGraph chiral = parse_smiles("C[C@@H](N)C(=O)O");
  CHECK(chiral.has_warning("stereo-stripped"));
  CHECK(formula(chiral)
        == std::map<std::string, int> {{"C", 3}, {"H", 7}, {"N", 1}, {"O", 2}});

  MolGraph mapped = parse_smiles("[CH3:1][OH:2]");
  CHECK(mapped.has_warning("atom-map-stripped"));
  CHECK(formula(mapped)
        == std::map<std::string, int> {{"C", 1}, {"H", 4}, {"O", 1}});

  CHECK_FALSE(parse_smiles("CCO").has_warning("stereo-stripped"));
}

TEST_CASE("syntax errors carry positions") {
  CHECK_THROWS_AS(parse_smiles(""), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C("), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C)C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C=(C)"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C="), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("[CH4"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("[]"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C..C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles(".CC"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("CC."), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("Xx"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("Si"), SyntaxError);  // needs brackets
  CHECK_THROWS_AS(parse_smiles("c1ccte1"), SyntaxError);

  try {
    parse_smiles("CC(");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError &e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("ring closure errors") {
  CHECK_THROWS_AS(parse_smiles("C1CC"), RingClosureError);
  CHECK_THROWS_AS(parse_smiles("C11"), RingClosureError);
  CHECK_THROWS_AS(parse_smiles("C12CC12"), RingClosureError);
  // Conflicting explicit orders on the two ends of one closure.
  CHECK_THROWS_AS(parse_smiles("C=1CCCCC-1"), SyntaxError);
  // Matching explicit orders are accepted.
  CHECK(parse_smiles("C=1CCCCC=1").bonds().size() == 6);
}

TEST_CASE("valence violations are rejected, not repaired") {
  CHECK_THROWS_AS(parse_smiles("C(C)(C)(C)(C)C"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("N(C)(C)(C)C"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("O=S(=O)(O)O"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("OP(=O)(O)O"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("FF(F)F"), ValenceError);
  // Bracket atoms opt out of the table.
  CHECK_NOTHROW(parse_smiles("O=[S](=O)(O)O"));
}

TEST_CASE("canonical form is invariant under rewritings") {
  CHECK(canonical_smiles(parse_smiles("OCC"))
        == canonical_smiles(parse_smiles("CCO")));
  CHECK(canonical_smiles(parse_smiles("C(O)C"))
        == canonical_smiles(parse_smiles("CCO")));
  CHECK(canonical_smiles(parse_smiles("c1ccccc1O"))
        == canonical_smiles(parse_smiles("Oc1ccccc1")));
  CHECK(canonical_smiles(parse_smiles("[Na+].[Cl-]"))
        == canonical_smiles(parse_smiles("[Cl-].[Na+]")));
  CHECK(canonical_smiles(parse_smiles("C1CCCCC1"))
        == canonical_smiles(parse_smiles("C2CCCCC2")));

  // Distinct molecules stay distinct.
  CHECK(canonical_smiles(parse_smiles("CCO"))
        != canonical_smiles(parse_smiles("CCN")));
  CHECK(canonical_smiles(parse_smiles("CC=CC"))
        != canonical_smiles(parse_smiles("CCC=C")));
  CHECK(canonical_smiles(parse_smiles("[13CH4]"))
        != canonical_smiles(parse_smiles("C")));
  CHECK(canonical_smiles(parse_smiles("c1ccccc1"))
        != canonical_smiles(parse_smiles("C1CCCCC1")));
}

TEST_CASE("canonicalization is idempotent across the corpus") {
  for (const std::string &smiles: moluq::tests::corpus()) {
    INFO(smiles);
    std::string canonical = canonical_smiles(parse_smiles(smiles));
    CHECK(canonical_smiles(parse_smiles(canonical)) == canonical);
  }
}

TEST_CASE("write_smiles round-trips the graph") {
  for (const std::string &smiles: moluq::tests::corpus()) {
    INFO(smiles);
    MolGraph mol = parse_smiles(smiles);
    std::string rewritten = write_smiles(mol);
    MolGraph again = parse_smiles(rewritten);
    CHECK(canonical_smiles(again) == canonical_smiles(mol));
    CHECK(formula(again) == formula(mol));
  }
}

TEST_CASE("enumerate_variants is seeded, parent-free and duplicate-free") {
  MolGraph mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O");
  std::string parent = canonical_smiles(mol);

  VariantList a = enumerate_variants(mol, 8, 7);
  VariantList b = enumerate_variants(mol, 8, 7);
  CHECK(a.variants == b.variants);
  CHECK(a.seed == 7);
  CHECK(a.parent_canonical == parent);

  VariantList c = enumerate_variants(mol, 8, 8);
  CHECK(a.variants != c.variants);

  std::set<std::string> seen;
  for (const std::string &v: a.variants) {
    INFO(v);
    CHECK(v != parent);
    CHECK(seen.insert(v).second);
    CHECK(canonical_smiles(parse_smiles(v)) == parent);
  }
  CHECK(a.variants.size() == 8);
}

TEST_CASE("a bare methane admits no distinct rewriting") {
  VariantList v = enumerate_variants(parse_smiles("C"), 5, 3);
  CHECK(v.variants.empty());
}

TEST_CASE("variants preserve semantics across the corpus sample") {
  int checked = 0;
  for (std::size_t i = 0; i < moluq::tests::corpus().size(); i += 4) {
    const std::string &smiles = moluq::tests::corpus()[i];
    MolGraph mol = parse_smiles(smiles);
    VariantList variants = enumerate_variants(mol, 5, 11 + i);
    for (const std::string &v: variants.variants) {
      INFO(smiles << " -> " << v);
      CHECK(canonical_smiles(parse_smiles(v)) == variants.parent_canonical);
      ++checked;
    }
  }
  CHECK(checked > 50);
}
