// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "dslsynth/core.hpp"
#include "support.hpp"

using namespace dslsynth;
using dslsynth::testing::keys;

namespace {

RankedAlphabet rect_sigma() {
  return {{"r1", 0}, {"r2", 0}, {"r3", 0}, {"r4", 0}, {"r5", 0}, {"and", 2}, {"or", 2}, {"not", 1}};
}

// S -> F(H), F(1) -> f(1,1), H -> a | b.
MacroGrammar copy_macro() {
  return make_grammar("S", {{"S", 0}, {"F", 1}, {"H", 0}}, {{"f", 2}, {"a", 0}, {"b", 0}},
                      {{"S", "F(H)"}, {"F", "f(#1,#1)"}, {"H", "a"}, {"H", "b"}});
}

// S -> H(A) | f(f(S)) | A, H(1) -> h(h(h(1))), A -> a.
MacroGrammar nested_macro() {
  return make_grammar("S", {{"S", 0}, {"H", 1}, {"A", 0}}, {{"f", 1}, {"h", 1}, {"a", 0}},
                      {{"S", "H(A)"}, {"S", "f(f(S))"}, {"S", "A"}, {"H", "h(h(h(#1)))"}, {"A", "a"}});
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("well_formed_term checks arities") {
  RankedAlphabet s{{"g", 2}, {"a", 0}, {"b", 0}, {"h", 1}};
  CHECK(well_formed_term(parse_term("g(a,b)"), s));
  CHECK_FALSE(well_formed_term(parse_term("g(a)"), s));
  CHECK(well_formed_term(parse_term("h(h(h(a)))"), s));
  CHECK_FALSE(well_formed_term(parse_term("z"), s));
  CHECK_FALSE(well_formed_term(parse_term("g(a,#1)"), s));
}

TEST_CASE("terms parse, print and compare structurally") {
  Term t = parse_term("f(a, g(#2, b))");
  CHECK(t.to_string() == "f(a,g(#2,b))");
  CHECK(t == parse_term("f(a,g(#2,b))"));
  CHECK(t.size() == 5);
  CHECK(t.height() == 3);
  CHECK(t.max_param() == 2);
  CHECK(t.substitute({parse_term("x"), parse_term("y")}) == parse_term("f(a,g(y,b))"));
  CHECK(parse_term("a") < parse_term("b"));
  CHECK_THROWS_AS(parse_term("f(a"), Error);
}

TEST_CASE("extend appends the base rules") {
  RankedAlphabet s = rect_sigma();
  auto g = make_grammar("N1", {{"N1", 0}, {"N2", 0}}, s, {{"N1", "and(N2,N2)"}});
  auto base = make_grammar("", {{"N2", 0}}, s, {{"N2", "r1"}, {"N2", "r2"}});
  auto e = extend(g, base);
  REQUIRE(e.rules.size() == 3);
  CHECK(e.start == Symbol("N1"));
  CHECK(e.rules[0] == g.rules[0]);
  CHECK(e.rules[2].rhs == parse_term("r2"));
  CHECK(g.rules.size() == 1);

  MacroGrammar empty_base;
  empty_base.alphabet = s;
  CHECK(extend(g, empty_base).rules == g.rules);

  auto g1 = make_grammar("S", {{"S", 0}}, s, {{"S", "and(S,S)"}, {"S", "r1"}});
  MacroGrammar bad;
  bad.alphabet = s;
  bad.nonterminals.add("S", 1);
  CHECK_THROWS_AS(extend(g1, bad), Error);
  MacroGrammar other;
  other.alphabet = {{"a", 0}};
  CHECK_THROWS_AS(extend(g1, other), Error);
}

TEST_CASE("outermost derivation of the F(H) grammar") {
  auto g = copy_macro();
  auto lang = derive_outermost(g, 3);
  REQUIRE(lang.count(parse_term("f(a,b)")));
  CHECK(lang.at(parse_term("f(a,b)")) == 3);
  std::set<Term> expect{parse_term("f(a,a)"), parse_term("f(a,b)"), parse_term("f(b,a)"),
                        parse_term("f(b,b)")};
  CHECK(keys(lang) == expect);
  CHECK(derive_outermost(g, 2).empty());
  CHECK(keys(derive_outermost(g, 6)) == expect);
  CHECK(derive_outermost(g, 0).empty());
}

TEST_CASE("argument branches do not count towards parse depth") {
  auto g = nested_macro();
  auto lang = derive_outermost(g, 4);
  CHECK(lang.at(parse_term("h(h(h(a)))")) == 3);
  CHECK(lang.at(parse_term("a")) == 2);
  CHECK(lang.at(parse_term("f(f(a))")) == 3);
  CHECK(lang.at(parse_term("f(f(h(h(h(a)))))")) == 4);
  CHECK(parse_depth(g, parse_term("h(h(h(a)))")) == Depth::finite_value(3));
  CHECK(parse_depth(g, parse_term("h(a)"), 8).kind == Depth::Kind::at_least);
}

TEST_CASE("parse depth in the rectangle grammars") {
  auto gp = make_grammar("S", {{"S", 0}}, rect_sigma(),
                         {{"S", "r1"}, {"S", "r2"}, {"S", "r3"}, {"S", "r4"}, {"S", "r5"},
                          {"S", "and(S,S)"}, {"S", "or(S,S)"}, {"S", "not(S)"}});
  CHECK(parse_depth(gp, parse_term("or(r1,r2)")) == Depth::finite_value(2));
  CHECK(parse_depth(gp, parse_term("and(r3,and(r4,r5))")) == Depth::finite_value(3));
  CHECK(parse_depth(gp, parse_term("r4")) == Depth::finite_value(1));
  auto g1 = make_grammar("S", {{"S", 0}}, rect_sigma(),
                         {{"S", "and(S,S)"}, {"S", "r1"}, {"S", "r2"}, {"S", "r3"}, {"S", "r4"},
                          {"S", "r5"}});
  CHECK(parse_depth(g1, parse_term("or(r1,r2)")) == Depth::infinity());
}

TEST_CASE("macro depth of right-hand sides") {
  NonterminalSet n{{"N", 2}, {"H", 1}, {"A", 0}};
  CHECK(macro_depth(parse_term("f(a)"), n) == 0);
  CHECK(macro_depth(parse_term("N(a,a)"), n) == 1);
  CHECK(macro_depth(parse_term("N(#1,H(#2))"), n) == 2);
  CHECK(macro_depth(parse_term("H(A)"), n) == 1);
  CHECK(macro_depth_bound(nested_macro()) == 1);
  CHECK(macro_depth_bound(make_grammar("S", {{"S", 0}}, {{"a", 0}}, {{"S", "a"}})) == 0);
}

TEST_CASE("ill-formed grammars are reported") {
  MacroGrammar g;
  g.alphabet = {{"a", 0}};
  g.nonterminals = {{"S", 0}, {"F", 1}};
  g.start = Symbol("S");
  g.rules.push_back({Symbol("F"), parse_term("#2")});
  CHECK_FALSE(g.well_formed());
  g.rules = {{Symbol("S"), parse_term("#1")}};
  CHECK_FALSE(g.well_formed());
  g.start = Symbol("F");
  g.rules.clear();
  CHECK_FALSE(g.well_formed());
}

TEST_CASE("derive_outermost reports its cap") {
  auto g = make_grammar("S", {{"S", 0}}, {{"f", 2}, {"a", 0}}, {{"S", "f(S,S)"}, {"S", "a"}});
  ResourceLimits tight;
  tight.max_terms = 50;
  CHECK_THROWS_AS(derive_outermost(g, 6, tight), ResourceLimit);
}

TEST_CASE("property: derived depths agree with parse_depth and grow monotonically") {
  dslsynth::testing::Rng rng(12345);
  for (int round = 0; round < 150; ++round) {
    bool macros = round % 2 == 1;
    auto g = dslsynth::testing::random_grammar(rng, macros);
    std::map<Term, int> d3, d4;
    try {
      d3 = derive_outermost(g, 3);
      d4 = derive_outermost(g, 4);
    } catch (const ResourceLimit&) {
      continue;
    }
    for (const auto& [t, d] : d3) {
      CHECK(d <= 3);
      REQUIRE(d4.count(t));
      CHECK(d4.at(t) == d);
    }
    for (const auto& [t, d] : d4) {
      if (t.size() > 40) continue;
      Depth pd = parse_depth(g, t, 6);
      CHECK(pd == Depth::finite_value(d));
    }
  }
}

TEST_CASE("property: macro_depth_bound is zero exactly for regular grammars") {
  dslsynth::testing::Rng rng(99);
  for (int round = 0; round < 200; ++round) {
    auto g = dslsynth::testing::random_grammar(rng, round % 2 == 0);
    // Only grammars that mention every declared macro symbol qualify.
    bool all_used = true;
    for (const auto& [n, a] : g.nonterminals.entries()) {
      if (a == 0) continue;
      bool used = false;
      for (const Rule& r : g.rules) used = used || macro_depth(r.rhs, {{n.name(), a}}) > 0;
      all_used = all_used && used;
    }
    if (!all_used) continue;
    CHECK((macro_depth_bound(g) == 0) == g.is_regular());
  }
}

TEST_CASE("property: extend concatenates rule lists associatively") {
  dslsynth::testing::Rng rng(7);
  for (int round = 0; round < 50; ++round) {
    auto a = dslsynth::testing::random_grammar(rng, false);
    MacroGrammar b = a, c = a;
    b.rules = dslsynth::testing::random_grammar(rng, false).rules;
    c.rules.clear();
    b.alphabet = c.alphabet = a.alphabet;
    if (!b.well_formed()) continue;
    CHECK(extend(extend(a, b), c).rules == extend(a, extend(b, c)).rules);
  }
}

}  // TEST_SUITE
