// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "dslsynth/automata.hpp"
#include "support.hpp"

using namespace dslsynth;
using dslsynth::testing::Rng;
using dslsynth::testing::uniform;

namespace {

RankedAlphabet rect_sigma() {
  return {{"r1", 0}, {"r2", 0}, {"r3", 0}, {"r4", 0}, {"r5", 0}, {"and", 2}, {"or", 2}, {"not", 1}};
}

MacroGrammar g1() {
  return make_grammar("S", {{"S", 0}}, rect_sigma(),
                      {{"S", "and(S,S)"}, {"S", "r1"}, {"S", "r2"}, {"S", "r3"}, {"S", "r4"},
                       {"S", "r5"}});
}

MacroGrammar g3() {
  auto g = g1();
  g.rules.insert(g.rules.begin() + 1, {Symbol("S"), parse_term("or(S,S)")});
  return g;
}

// Explicit 2ATA given by a transition table; missing entries are false.
class TableAta : public TwoWayAta {
 public:
  TableAta(RankedAlphabet sigma, std::size_t states, std::vector<StateId> init)
      : sigma_(std::move(sigma)), n_(states), init_(std::move(init)) {}
  void set(StateId q, std::string_view f, Formula phi) { table_[{q, Symbol(f)}] = std::move(phi); }
  const RankedAlphabet& alphabet() const override { return sigma_; }
  std::vector<StateId> initial() const override { return init_; }
  Formula delta(StateId q, Symbol a, const Guide*) const override {
    auto it = table_.find({q, a});
    return it == table_.end() ? Formula::bottom() : it->second;
  }
  std::string describe(StateId q) const override { return "t" + std::to_string(q); }
  std::size_t num_states() const override { return n_; }

  std::map<std::pair<StateId, Symbol>, Formula> table_;

 private:
  RankedAlphabet sigma_;
  std::size_t n_;
  std::vector<StateId> init_;
};

Formula random_formula(Rng& rng, int states, int max_dir, int depth) {
  int pick = uniform(rng, 0, depth > 0 ? 5 : 2);
  if (pick == 0) return uniform(rng, 0, 5) == 0 ? Formula::top() : Formula::bottom();
  if (pick <= 2) return Formula::atom(uniform(rng, -1, max_dir), uniform(rng, 0, states - 1));
  std::vector<Formula> parts;
  for (int i = 0, n = uniform(rng, 2, 3); i < n; ++i)
    parts.push_back(random_formula(rng, states, max_dir, depth - 1));
  return pick <= 3 ? Formula::conj(parts) : Formula::disj(parts);
}

TableAta random_ata(Rng& rng, const RankedAlphabet& sigma, int states) {
  TableAta a(sigma, states, {0});
  for (int q = 0; q < states; ++q)
    for (const auto& [f, arity] : sigma.entries())
      a.table_[{static_cast<StateId>(q), f}] = random_formula(rng, states, arity, 2);
  return a;
}

}  // namespace

TEST_SUITE("automata") {

TEST_CASE("single-rule grammar automaton") {
  auto g = make_grammar("S", {{"S", 0}}, {{"a", 0}, {"b", 0}}, {{"S", "a"}});
  Nta a = nta_from_grammar(g);
  CHECK(a.num_states() <= 2);
  CHECK(nta_membership(parse_term("a"), a));
  CHECK_FALSE(nta_membership(parse_term("b"), a));
  CHECK_THROWS_AS(nta_from_grammar(make_grammar("S", {{"S", 0}, {"F", 1}}, {{"a", 0}},
                                                {{"S", "F(a)"}, {"F", "#1"}})),
                  Error);
}

TEST_CASE("conjunction grammar automaton agrees with enumeration") {
  Nta a = nta_from_grammar(g1());
  auto lang = derive_outermost(g1(), 3);
  for (const auto& [t, d] : lang) CHECK(a.accepts(t));
  for (const Term& t : dslsynth::testing::all_terms(rect_sigma(), 5)) {
    bool in = lang.count(t) != 0;
    CHECK(a.accepts(t) == in);
  }
}

TEST_CASE("intersection, union and emptiness") {
  auto sa = make_grammar("S", {{"S", 0}}, {{"a", 0}, {"b", 0}, {"f", 1}}, {{"S", "a"}});
  auto sb = make_grammar("S", {{"S", 0}}, {{"a", 0}, {"b", 0}, {"f", 1}}, {{"S", "f(b)"}});
  Nta a = nta_from_grammar(sa), b = nta_from_grammar(sb);
  Nta u = nta_union(a, b);
  std::vector<Term> all = dslsynth::testing::all_terms(a.alphabet(), 4);
  int accepted = 0;
  for (const Term& t : all) accepted += u.accepts(t);
  CHECK(accepted == 2);
  CHECK(u.accepts(parse_term("f(b)")));
  CHECK_FALSE(nta_emptiness(nta_intersect(a, b)).has_value());
  CHECK(nta_emptiness(a) == parse_term("a"));

  Nta g = nta_from_grammar(g3());
  Nta gg = nta_intersect(g, g);
  for (const Term& t : dslsynth::testing::all_terms(rect_sigma(), 5)) CHECK(g.accepts(t) == gg.accepts(t));
  auto w = nta_emptiness(g);
  REQUIRE(w.has_value());
  CHECK(parse_depth(g3(), *w) == Depth::finite_value(static_cast<int>(w->height())));
  CHECK_THROWS_AS(nta_intersect(a, g), Error);
}

TEST_CASE("trim keeps the language") {
  auto g = make_grammar("S", {{"S", 0}, {"D", 0}, {"U", 0}}, {{"a", 0}, {"f", 2}},
                        {{"S", "f(S,a)"}, {"S", "a"}, {"S", "f(D,a)"}, {"D", "f(D,D)"}, {"U", "a"}});
  Nta full = nta_from_grammar(g);
  Nta t = nta_trim(full);
  CHECK(t.num_states() < full.num_states());
  for (const Term& x : dslsynth::testing::all_terms(full.alphabet(), 7)) CHECK(t.accepts(x) == full.accepts(x));
}

TEST_CASE("language enumeration is ordered by size then term order") {
  Nta a = nta_from_grammar(g3());
  NtaEnumerator en(a);
  std::vector<Term> got;
  en.for_each(5, [&](const Term& t) {
    got.push_back(t);
    return true;
  });
  std::vector<Term> expect;
  for (const Term& t : dslsynth::testing::all_terms(rect_sigma(), 5))
    if (a.accepts(t)) expect.push_back(t);
  std::stable_sort(expect.begin(), expect.end(), [](const Term& x, const Term& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  });
  CHECK(got == expect);
  CHECK(got.size() == 5 + 2 * 25 + 2 * 2 * 50 * 5);
}

TEST_CASE("property: grammar automata agree with parse depth") {
  Rng rng(31337);
  for (int round = 0; round < 120; ++round) {
    auto g = dslsynth::testing::random_grammar(rng, false);
    Nta a = nta_from_grammar(g);
    std::map<Term, int> lang;
    try {
      lang = derive_outermost(g, 6);
    } catch (const ResourceLimit&) {
      continue;
    }
    for (const Term& t : dslsynth::testing::all_terms(g.alphabet, 6)) {
      Depth d = parse_depth(g, t);
      CHECK(a.accepts(t) == d.is_finite());
      if (d.is_finite() && d.value <= 6) CHECK(lang.count(t));
    }
  }
}

TEST_CASE("property: emptiness witnesses are minimal-height and complete") {
  Rng rng(4242);
  for (int round = 0; round < 150; ++round) {
    auto g = dslsynth::testing::random_grammar(rng, false);
    Nta a = nta_from_grammar(g);
    auto w = nta_emptiness(a);
    auto small = dslsynth::testing::all_terms(g.alphabet, 6);
    if (w) {
      CHECK(a.accepts(*w));
      CHECK(w->height() <= a.num_states() + 1);
      for (const Term& t : small)
        if (a.accepts(t)) CHECK(t.height() >= w->height());
    } else {
      for (const Term& t : small) CHECK_FALSE(a.accepts(t));
    }
  }
}

TEST_CASE("dual complements truth tables") {
  Rng rng(5);
  for (int round = 0; round < 300; ++round) {
    Formula f = random_formula(rng, 3, 0, 3).map_atoms(
        [](int, StateId q) { return Formula::atom(kStay, q); });
    Formula d = dual(f);
    for (int v = 0; v < 8; ++v) {
      auto val = [v](int, StateId q) { return ((v >> q) & 1) != 0; };
      auto neg = [v](int, StateId q) { return ((v >> q) & 1) == 0; };
      CHECK(d.evaluate(val) == !f.evaluate(neg));
    }
  }
  CHECK(dual(Formula::top()).is_bottom());
}

TEST_CASE("adorn rewrites child atoms only") {
  Formula f = Formula::atom(1, 7) && (Formula::atom(2, 8) || Formula::atom(kUp, 9));
  Formula g = adorn(f, [](StateId q, int i) { return q * 10 + i; });
  CHECK(g.to_string() == "((stay,71) & ((stay,82) | (up,9)))");
}

TEST_CASE("2ATA acceptance is a least fixpoint") {
  RankedAlphabet s{{"a", 0}, {"f", 1}};
  TableAta yes(s, 1, {0});
  yes.set(0, "a", Formula::top());
  CHECK(ata_membership(parse_term("a"), yes));
  TableAta loop(s, 1, {0});
  loop.set(0, "a", Formula::stay(0));
  CHECK_FALSE(ata_membership(parse_term("a"), loop));
  // Moving off the tree evaluates to false.
  TableAta off(s, 1, {0});
  off.set(0, "a", Formula::atom(kUp, 0) || Formula::atom(1, 0));
  CHECK_FALSE(ata_membership(parse_term("a"), off));
  // Down to the leaf and back up.
  TableAta updown(s, 3, {0});
  updown.set(0, "f", Formula::atom(1, 1));
  updown.set(1, "a", Formula::atom(kUp, 2));
  updown.set(2, "f", Formula::top());
  CHECK(ata_membership(parse_term("f(a)"), updown));
  CHECK_FALSE(ata_membership(parse_term("f(f(a))"), updown));
}

TEST_CASE("property: weakening a formula never loses acceptance") {
  Rng rng(77);
  RankedAlphabet s{{"a", 0}, {"f", 1}, {"g", 2}};
  auto trees = dslsynth::testing::all_terms(s, 5);
  for (int round = 0; round < 60; ++round) {
    TableAta a = random_ata(rng, s, 3);
    TableAta b = a;
    auto it = b.table_.begin();
    std::advance(it, uniform(rng, 0, static_cast<int>(b.table_.size()) - 1));
    it->second = Formula::top();
    for (const Term& t : trees)
      if (ata_membership(t, a)) CHECK(ata_membership(t, b));
  }
}

TEST_CASE("conversion of a child-only automaton") {
  RankedAlphabet s{{"a", 0}, {"b", 0}, {"f", 2}};
  TableAta a(s, 1, {0});
  a.set(0, "a", Formula::top());
  a.set(0, "f", Formula::atom(1, 0) && Formula::atom(2, 0));
  Nta n = ata_to_nta(a);
  for (const Term& t : dslsynth::testing::all_terms(s, 7)) CHECK(n.accepts(t) == ata_membership(t, a));
  TableAta none(s, 2, {0, 1});
  CHECK_FALSE(nta_emptiness(ata_to_nta(none)).has_value());
}

TEST_CASE("property: conversion agrees with fixed-tree membership") {
  Rng rng(2718);
  RankedAlphabet s{{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}};
  auto trees = dslsynth::testing::all_terms(s, 6);
  int nonempty = 0;
  for (int round = 0; round < 80; ++round) {
    TableAta a = random_ata(rng, s, uniform(rng, 1, 3));
    Nta n = ata_to_nta(a);
    bool any = false;
    for (const Term& t : trees) {
      bool m = ata_membership(t, a);
      any = any || m;
      CHECK(n.accepts(t) == m);
    }
    nonempty += any;
    // Witnesses of the lazy product are accepted by both sides.
    Nta meta = nta_from_grammar(make_grammar("T", {{"T", 0}}, s,
                                             {{"T", "g(T,T)"}, {"T", "f(T)"}, {"T", "a"}}));
    auto w = ata_product_witness(meta, a);
    if (w) {
      CHECK(meta.accepts(*w));
      CHECK(ata_membership(*w, a));
    } else {
      for (const Term& t : trees)
        if (meta.accepts(t)) CHECK_FALSE(ata_membership(t, a));
    }
  }
  CHECK(nonempty > 10);
}

TEST_CASE("intersection of two-way automata") {
  RankedAlphabet s{{"a", 0}, {"b", 0}, {"f", 2}};
  auto leaf_is = [&](const char* sym) {
    auto t = std::make_shared<TableAta>(s, 1, std::vector<StateId>{0});
    t->set(0, sym, Formula::top());
    t->set(0, "f", Formula::atom(1, 0) || Formula::atom(2, 0));
    return t;
  };
  AtaIntersection both({leaf_is("a"), leaf_is("b")});
  CHECK(ata_membership(parse_term("f(a,b)"), both));
  CHECK_FALSE(ata_membership(parse_term("f(a,a)"), both));
  Nta n = ata_to_nta(both);
  for (const Term& t : dslsynth::testing::all_terms(s, 5)) CHECK(n.accepts(t) == ata_membership(t, both));
}

TEST_CASE("configuration cap") {
  RankedAlphabet s{{"a", 0}, {"f", 1}};
  TableAta a(s, 2, {0});
  a.set(0, "f", Formula::atom(1, 0) || Formula::atom(1, 1));
  a.set(1, "f", Formula::atom(1, 0));
  ResourceLimits tiny;
  tiny.max_configurations = 3;
  CHECK_THROWS_AS(ata_membership(parse_term("f(f(f(f(a))))"), a, tiny), ResourceLimit);
}

}  // TEST_SUITE
