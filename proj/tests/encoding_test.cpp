// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "dslsynth/automata.hpp"
#include "dslsynth/encoding.hpp"
#include "support.hpp"

using namespace dslsynth;

namespace {

// N1 -> N3(N2); N3(1) -> g(1,1); N2 -> h(N1) | a, in drawing order.
MacroGrammar fig1(bool with_b = false) {
  RankedAlphabet sigma{{"a", 0}, {"h", 1}, {"g", 2}};
  if (with_b) sigma.add("b", 0);
  return make_grammar("N1", {{"N1", 0}, {"N2", 0}, {"N3", 1}}, sigma,
                      {{"N1", "N3(N2)"}, {"N3", "g(#1,#1)"}, {"N2", "h(N1)"}, {"N2", "a"}});
}

}  // namespace

TEST_SUITE("encoding") {

TEST_CASE("grammar alphabet symbols and arities") {
  GrammarAlphabet gamma({{"a", 0}, {"h", 1}, {"g", 2}}, {{"N1", 0}, {"N2", 0}, {"N3", 1}});
  const auto& s = gamma.symbols();
  CHECK(s.arity_of(Symbol("root")) == 1);
  CHECK(s.arity_of(Symbol("end")) == 0);
  CHECK(s.arity_of(Symbol("lhs_N3")) == 2);
  CHECK(s.arity_of(Symbol("rhs_N3")) == 1);
  CHECK(s.arity_of(Symbol("rhs_N1")) == 0);
  CHECK(s.arity_of(Symbol("1")) == 0);
  CHECK_FALSE(s.contains(Symbol("2")));
  CHECK(s.size() == 3 + 2 + 6 + 1);
  CHECK(gamma.classify(Symbol("rhs_N2")).nonterminal == Symbol("N2"));
  CHECK_THROWS_AS(GrammarAlphabet({{"root", 0}}, {{"S", 0}}), Error);
  CHECK_THROWS_AS(GrammarAlphabet({{"lhs_S", 0}}, {{"S", 0}}), Error);
}

TEST_CASE("the macro grammar encodes to the drawn tree") {
  Term t = enc(fig1());
  CHECK(t == parse_term("root(lhs_N1(rhs_N3(rhs_N2), lhs_N3(g(1,1), lhs_N2(h(rhs_N1), "
                        "lhs_N2(a, end)))))"));
  GrammarAlphabet gamma(fig1().alphabet, fig1().nonterminals);
  CHECK(dec(t, gamma) == fig1());
  CHECK(dec(t, gamma).start == Symbol("N1"));
}

TEST_CASE("the regular three-rule grammar encodes to the drawn tree") {
  auto g = make_grammar("N1", {{"N1", 0}, {"N2", 0}, {"N3", 1}},
                        {{"a", 0}, {"b", 0}, {"h", 1}, {"g", 2}},
                        {{"N1", "h(N2)"}, {"N2", "g(a,b)"}, {"N2", "h(N1)"}});
  Term t = enc(g);
  CHECK(t == parse_term("root(lhs_N1(h(rhs_N2), lhs_N2(g(a,b), lhs_N2(h(rhs_N1), end))))"));
  GrammarAlphabet gamma(g.alphabet, g.nonterminals);
  CHECK(dec(t, gamma) == g);
}

TEST_CASE("empty rule list") {
  MacroGrammar g;
  g.alphabet = {{"a", 0}};
  g.nonterminals = {{"S", 0}};
  g.start = Symbol("S");
  CHECK(enc(g) == parse_term("root(end)"));
  GrammarAlphabet gamma(g.alphabet, g.nonterminals);
  CHECK_THROWS_WITH_AS(dec(parse_term("root(end)"), gamma),
                       "empty grammar tree has no start nonterminal", Error);
}

TEST_CASE("dec reports malformed trees with node paths") {
  GrammarAlphabet gamma(fig1().alphabet, fig1().nonterminals);
  auto msg = [&](const char* text) { return check_grammar_tree(parse_term(text), gamma).value_or(""); };
  CHECK(msg("lhs_N1(a,end)").find("at /:") == 0);
  CHECK(msg("root(lhs_N1(a,a))").find("at /1/2:") == 0);
  CHECK(msg("root(lhs_N1(root(a),end))").find("at /1/1:") == 0);
  CHECK(msg("root(lhs_N2(h(1),end))").find("out of scope") != std::string::npos);
  CHECK(msg("root(lhs_N2(h(1),end))").find("at /1/1/1:") == 0);
  CHECK(msg("root(lhs_N3(g(1,zz),end))").find("not in the grammar alphabet") != std::string::npos);
  CHECK(msg("root(lhs_N1(g(a),end))").find("arity") != std::string::npos);
  CHECK_FALSE(check_grammar_tree(enc(fig1()), gamma).has_value());
  CHECK_THROWS_AS(dec(parse_term("root(lhs_N3(a,end))"), gamma), Error);  // start of arity 1
}

TEST_CASE("permissive meta-grammar accepts encodings") {
  auto g = fig1(true);
  auto meta = permissive_meta(g.alphabet, g.nonterminals);
  CHECK(meta.is_regular());
  Nta a = nta_from_grammar(meta);
  CHECK(a.accepts(enc(g)));
  auto g2 = make_grammar("N1", g.nonterminals, g.alphabet,
                         {{"N1", "h(N2)"}, {"N2", "h(N1)"}, {"N2", "g(a,b)"}});
  CHECK(a.accepts(enc(g2)));
  CHECK(a.accepts(parse_term("root(end)")));
  CHECK_FALSE(a.accepts(parse_term("root(root(end))")));
  GrammarAlphabet gamma(g.alphabet, g.nonterminals);
  CHECK(meta_macro_depth_bound(meta, gamma) == std::nullopt);
}

TEST_CASE("macro depth bound of restricted meta-grammars") {
  RankedAlphabet sigma{{"a", 0}, {"g", 2}};
  NonterminalSet n{{"S", 0}, {"F", 1}};
  GrammarAlphabet gamma(sigma, n);
  auto meta = make_grammar("M", {{"M", 0}, {"P", 0}, {"T", 0}, {"U", 0}}, gamma.symbols(),
                           {{"M", "root(P)"},
                            {"P", "lhs_S(T,P)"},
                            {"P", "lhs_F(U,P)"},
                            {"P", "end"},
                            {"T", "rhs_F(rhs_F(U))"},
                            {"T", "a"},
                            {"U", "g(1,1)"},
                            {"U", "a"}});
  CHECK(meta_macro_depth_bound(meta, gamma) == 2);
  auto regular_only = make_grammar("M", {{"M", 0}, {"P", 0}}, gamma.symbols(),
                                   {{"M", "root(P)"}, {"P", "lhs_S(a,P)"}, {"P", "end"}});
  CHECK(meta_macro_depth_bound(regular_only, gamma) == 0);
  // A macro cycle through a nonproductive nonterminal does not count.
  auto dead = make_grammar("M", {{"M", 0}, {"P", 0}, {"D", 0}}, gamma.symbols(),
                           {{"M", "root(P)"}, {"P", "lhs_S(a,P)"}, {"P", "end"}, {"P", "lhs_S(D,end)"},
                            {"D", "rhs_F(D)"}});
  CHECK(meta_macro_depth_bound(dead, gamma) == 0);
}

TEST_CASE("property: dec inverts enc on random grammars") {
  dslsynth::testing::Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto g = dslsynth::testing::random_grammar(rng, i % 2 == 0);
    if (g.rules.empty()) continue;
    // dec makes the first lhs the start symbol.
    MacroGrammar expect = g;
    expect.start = g.rules.front().lhs;
    if (g.nonterminals.arity_of(expect.start) != 0) continue;
    GrammarAlphabet gamma(g.alphabet, g.nonterminals);
    Term t = enc(g, gamma);
    CHECK(dec(t, gamma) == expect);
    std::size_t spine = 0;
    for (const Term* n = &t.child(0); n->symbol() != gamma.end(); n = &n->child(1)) ++spine;
    CHECK(spine == g.rules.size());
    CHECK(nta_from_grammar(permissive_meta(g.alphabet, g.nonterminals)).accepts(t));
  }
}

TEST_CASE("property: checked trees of the permissive meta-grammar decode") {
  RankedAlphabet sigma{{"a", 0}, {"h", 1}};
  NonterminalSet n{{"S", 0}, {"F", 1}};
  GrammarAlphabet gamma(sigma, n);
  Nta meta = nta_from_grammar(permissive_meta(sigma, n));
  NtaEnumerator en(meta);
  int decoded = 0;
  en.for_each(8, [&](const Term& t) {
    if (!check_grammar_tree(t, gamma)) {
      const Term& top = t.child(0);
      if (top.symbol() == gamma.end()) return true;
      if (n.arity_of(gamma.classify(top.symbol()).nonterminal) != 0) return true;
      CHECK_NOTHROW(dec(t, gamma));
      ++decoded;
    }
    return true;
  });
  CHECK(decoded > 20);
}

}  // TEST_SUITE
