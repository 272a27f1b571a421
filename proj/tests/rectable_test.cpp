// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "dslsynth/rectable.hpp"
#include "fixtures.hpp"
#include "micro.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dslsynth;
using namespace dslsynth::testing;

namespace {

const LearningInstance& fig2() {
  static const LearningInstance inst = compile_rectangles(fig2_scenario());
  return inst;
}

const InstanceAutomata& fig2_automata() {
  static const InstanceAutomata ia = instance_automata(fig2());
  return ia;
}

std::string vec(const std::string& term) {
  return vector_label(behavior(parse_term(term), fig2()), fig2());
}

// Row index of a label in the start column, or -1.
int row_of(const RecursionTable& t, const std::string& label) {
  auto lr = t.labelled_rows();
  for (std::size_t i = 0; i < lr.size(); ++i)
    if (lr[i][0].count(label)) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST_SUITE("rectable") {

TEST_CASE("columns put the start first") {
  auto g = make_grammar("S", {{"A", 0}, {"S", 0}, {"B", 0}}, {{"a", 0}}, {{"S", "A"}});
  auto cols = table_columns(g);
  REQUIRE(cols.size() == 3);
  CHECK(cols[0].name() == "S");
  CHECK(cols[1].name() == "A");
  CHECK(cols[2].name() == "B");
}

TEST_CASE("G1 row 1 holds the five atom vectors") {
  auto t = behavioral_table(table_g1(), empty_base(rect_alphabet()), fig2());
  auto lr = t.labelled_rows();
  CHECK(lr[0][0].empty());
  std::set<std::string> atoms;
  for (const char* r : {"r1", "r2", "r3", "r4", "r5"}) atoms.insert(vec(r));
  CHECK(lr.at(1)[0] == atoms);
  CHECK(lr[1][0].count("(1,1,0,1,1,1,0,0,0)"));
  CHECK(t.distinct_values() <= 512);
  CHECK(t.stable_at <= t.bound);
}

TEST_CASE("G1 and G2 tables are identical") {
  auto base = empty_base(rect_alphabet());
  auto v1 = behavioral_table(table_g1(), base, fig2());
  auto v2 = behavioral_table(table_g2(), base, fig2());
  CHECK(v1.labelled_rows() == v2.labelled_rows());
  auto s1 = recursion_table(extend(table_g1(), base), fig2_automata());
  auto s2 = recursion_table(extend(table_g2(), base), fig2_automata());
  CHECK(s1.labelled_rows() == s2.labelled_rows());
  CHECK(s1.stable_at == v1.stable_at);
}

TEST_CASE("G3 registers the disjunction before the conjunction") {
  auto t = behavioral_table(table_g3(), empty_base(rect_alphabet()), fig2());
  CHECK(row_of(t, vec("or(r1,r2)")) == 2);
  CHECK(row_of(t, vec("and(r3,and(r4,r5))")) == 3);
  auto v = acceptable(t);
  CHECK_FALSE(v.accepted);
  REQUIRE(v.blocking_row);
  CHECK(*v.blocking_row < *v.row);
  CHECK(*v.row == 3);
}

TEST_CASE("Fig-2 verdicts") {
  auto base = empty_base(rect_alphabet());
  auto g3 = extend(table_g3(), base);
  auto g1 = extend(table_g1(), base);
  CHECK_FALSE(solves_grammar(g3, fig2_automata(), Ordering::depth).accepted);
  auto adequate3 = solves_grammar(g3, fig2_automata(), Ordering::adequate);
  CHECK(adequate3.accepted);
  REQUIRE(adequate3.witness);
  CHECK(solves(*adequate3.witness, fig2()));

  auto d1 = solves_grammar(g1, fig2_automata(), Ordering::depth);
  auto o1 = acceptable(behavioral_table(g1, fig2()));
  CHECK_FALSE(d1.accepted);
  CHECK(d1.accepted == o1.accepted);
  CHECK(d1.row == o1.row);
  CHECK(d1.blocking_row == std::optional<std::size_t>(1));
  REQUIRE(d1.blocking_witness);
  CHECK(non_generalizing(*d1.blocking_witness, fig2()));
  CHECK(solves_grammar(g1, fig2_automata(), Ordering::adequate).accepted);
}

TEST_CASE("acceptable reads the strict inequality") {
  RecursionTable t;
  t.columns = {Symbol("S")};
  t.bound = 8;
  t.f1 = {1};
  t.f2 = {2};
  for (RecursionTable::Entry e : {1, 2, 3}) t.labels[e] = std::to_string(e);
  auto rows = [&](std::vector<RecursionTable::Cell> cells) {
    t.rows.clear();
    for (auto& c : cells) t.rows.push_back({c});
    t.stable_at = t.rows.size() - 1;
  };
  rows({{}, {3}, {1}});
  CHECK(acceptable(t).accepted);
  CHECK(acceptable(t).row == std::optional<std::size_t>(2));
  rows({{}, {2}, {3}, {1}});
  CHECK_FALSE(acceptable(t).accepted);
  CHECK(acceptable(t).reason.find("non-generalizing first at row 1") == 0);
  rows({{}, {3}, {1, 2}});
  CHECK(acceptable(t).accepted);
  CHECK_FALSE(acceptable(t, {true}).accepted);
  rows({{}});
  CHECK_FALSE(acceptable(t).accepted);
  CHECK(acceptable(t).reason == "no generalizing value in any row");
  CHECK_FALSE(adequate(t).accepted);
}

TEST_CASE("step_H") {
  auto g = extend(table_g1(), empty_base(rect_alphabet()));
  const auto& ia = fig2_automata();
  std::vector<StateCell> empty(1);
  auto r1 = step_H(g, ia.a1, ia.a2, empty);
  // Depth-1 values: one A1 state per atom behavior plus the A2 states of
  // atoms that pass training.
  std::set<StateId> a1_states;
  for (TaggedState s : r1[0])
    if (s.automaton == 1) a1_states.insert(s.state);
  std::set<std::string> expected;
  for (const char* r : {"r1", "r2", "r3", "r4", "r5"}) expected.insert(vec(r));
  std::set<std::string> got;
  for (StateId q : a1_states) got.insert(ia.a1.label(q));
  CHECK(got == expected);

  auto pass = make_grammar("S", {{"S", 0}}, rect_alphabet(), {{"S", "S"}});
  StateCell some{{1, 3}, {1, 7}};
  auto out = step_H(pass, ia.a1, ia.a2, {some});
  CHECK(std::includes(out[0].begin(), out[0].end(), some.begin(), some.end()));

  auto macro = make_grammar("S", {{"S", 0}, {"F", 1}}, rect_alphabet(), {{"S", "F(r1)"}, {"F", "#1"}});
  CHECK_THROWS_AS(step_H(macro, ia.a1, ia.a2, {{}, {}}), Unsupported);
}

TEST_CASE("step_H is monotone" * doctest::description("property")) {
  Rng rng(11);
  for (int round = 0; round < 40; ++round) {
    MicroProblem p = random_micro_problem(rng);
    auto ia = instance_automata(p.instance);
    MacroGrammar g = p.grammar_of(random_subset(rng, p.pool.size(), 3));
    auto cols = table_columns(g);
    std::vector<StateCell> r(cols.size()), r2(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (StateId q = 0; q < ia.a1.num_states(); ++q) {
        int pick = uniform(rng, 0, 2);
        if (pick == 1) r[j].insert({1, q});
        if (pick >= 1) r2[j].insert({1, q});
      }
      for (StateId q = 0; q < ia.a2.num_states(); ++q) {
        int pick = uniform(rng, 0, 2);
        if (pick == 1) r[j].insert({2, q});
        if (pick >= 1) r2[j].insert({2, q});
      }
    }
    auto h = step_H(g, ia.a1, ia.a2, r);
    auto h2 = step_H(g, ia.a1, ia.a2, r2);
    for (std::size_t j = 0; j < cols.size(); ++j)
      CHECK(std::includes(h2[j].begin(), h2[j].end(), h[j].begin(), h[j].end()));
  }
}

TEST_CASE("tables stay within their bound" * doctest::description("property")) {
  Rng rng(12);
  for (int round = 0; round < 50; ++round) {
    MicroProblem p = random_micro_problem(rng);
    auto ia = instance_automata(p.instance);
    MacroGrammar g = p.grammar_of(random_subset(rng, p.pool.size(), 3));
    auto t = recursion_table(g, ia);
    CHECK(t.stable_at <= t.bound);
    CHECK(t.bound == t.columns.size() * (ia.a1.num_states() + ia.a2.num_states()));
    // Rows are disjoint per column.
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      std::set<RecursionTable::Entry> seen;
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (auto e : t.cell(i, j)) CHECK(seen.insert(e).second);
    }
    for (std::size_t j = 0; j < t.columns.size(); ++j) CHECK(t.cell(0, j).empty());
  }
}

TEST_CASE("first achievement matches parse depths" * doctest::description("property")) {
  Rng rng(13);
  for (int round = 0; round < 30; ++round) {
    MicroProblem p = random_micro_problem(rng);
    MacroGrammar g = p.grammar_of(random_subset(rng, p.pool.size(), 3));
    auto t = behavioral_table(g, p.instance);
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      MacroGrammar from = g;
      from.start = t.columns[j];
      std::map<std::string, int> first;
      auto terms = bounded_derive(from, 4, 20000);
      for (const auto& [e, d] : terms.terms) {
        auto label = vector_label(behavior(e, p.instance), p.instance);
        auto [it, fresh] = first.try_emplace(label, d);
        if (!fresh) it->second = std::min(it->second, d);
      }
      for (std::size_t i = 1; i <= static_cast<std::size_t>(terms.depth); ++i) {
        std::set<std::string> expected;
        for (const auto& [label, d] : first)
          if (d == static_cast<int>(i)) expected.insert(label);
        std::set<std::string> got;
        for (auto e : t.cell(i, j)) got.insert(t.labels.at(e));
        CHECK(got == expected);
      }
    }
  }
}

TEST_CASE("state and vector tables agree" * doctest::description("property")) {
  Rng rng(14);
  for (int round = 0; round < 60; ++round) {
    MicroProblem p = random_micro_problem(rng);
    auto ia = instance_automata(p.instance);
    MacroGrammar g = p.grammar_of(random_subset(rng, p.pool.size(), 3));
    auto s = recursion_table(g, ia);
    auto v = behavioral_table(g, p.instance);
    for (auto mode : {Ordering::adequate, Ordering::depth}) {
      auto vs = mode == Ordering::depth ? acceptable(s) : adequate(s);
      auto vv = mode == Ordering::depth ? acceptable(v) : adequate(v);
      CHECK(vs.accepted == vv.accepted);
      CHECK(vs.row == vv.row);
      CHECK(vs.blocking_row == vv.blocking_row);
    }
    if (p.instance.test.empty()) CHECK(acceptable(v).accepted == adequate(v).accepted);
  }
}

TEST_CASE("witnesses replay to their values") {
  auto t = behavioral_table(table_g3(), empty_base(rect_alphabet()), fig2());
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    for (auto e : t.cell(i, 0)) {
      const Term* w = t.witness(0, e);
      REQUIRE(w);
      CHECK(vec(w->to_string()) == t.labels.at(e));
      CHECK(parse_depth(table_g3(), *w) == Depth::finite_value(static_cast<int>(i)));
    }
}

TEST_CASE("table printer") {
  auto t = behavioral_table(table_g1(), empty_base(rect_alphabet()), fig2());
  std::string s = t.to_string();
  CHECK(s.find("d | S\n0 | {}\n1 | {") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("rectable") {

TEST_CASE("tables agree with the brute-force definition" * doctest::description("property")) {
  Rng rng(15);
  int determined = 0, total = 0;
  for (int round = 0; round < 60; ++round) {
    MicroProblem p = random_micro_problem(rng);
    auto ia = instance_automata(p.instance);
    for (const auto& picks : all_subsets(p.pool.size(), 3)) {
      MacroGrammar g = p.grammar_of(picks);
      auto lang = bounded_derive(g, 6, 20000);
      for (bool depth : {false, true}) {
        ++total;
        auto b = brute_verdict(lang, p.instance, depth);
        if (b.kind == BruteVerdict::Kind::unknown) continue;
        ++determined;
        auto s = solves_grammar(g, ia, depth ? Ordering::depth : Ordering::adequate);
        CHECK(s.accepted == (b.kind == BruteVerdict::Kind::accept));
        if (s.accepted) CHECK(s.row == std::optional<std::size_t>(*b.generalizing_depth));
      }
    }
  }
  MESSAGE("determined " << determined << " of " << total);
  CHECK(determined * 10 >= total * 9);
}

}  // TEST_SUITE
