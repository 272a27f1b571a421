// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "dslsynth/io.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace dslsynth;
using namespace dslsynth::testing;
using io::Json;

namespace {

Json problem_doc() {
  return io::parse_json(R"({
    "format": 1,
    "alphabet": {"and": 2, "x": 0, "y": 0},
    "semantics": {"kind": "finite", "domain": ["0", "1"],
      "examples": [
        {"ops": {"and": ["0", "0", "0", "1"], "x": "1", "y": "1"}, "accepting": ["1"]},
        {"ops": {"and": ["0", "0", "0", "1"], "x": "1", "y": "0"}, "accepting": ["0"]}],
      "instances": [{"train": [0], "test": [1]}]}
  })");
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("rationals") {
  CHECK(io::parse_rational(Json("53/10")) == Rational(53, 10));
  CHECK(io::parse_rational(Json("-3")) == Rational(-3));
  CHECK(io::parse_rational(Json(7)) == Rational(7));
  CHECK(io::rational_string(Rational(4, 2)) == "2");
  CHECK(io::rational_string(Rational(-1, 5)) == "-1/5");
  CHECK_THROWS_AS(io::parse_rational(Json("1/0")), Error);
  CHECK_THROWS_AS(io::parse_rational(Json("x")), Error);
  CHECK_THROWS_AS(io::parse_rational(Json(0.5)), Error);
}

TEST_CASE("syntax errors name line and column") {
  try {
    io::parse_json("{\n  \"a\": ,\n}", "doc.json");
    FAIL("no throw");
  } catch (const Error& e) {
    std::string m = e.what();
    CHECK(m.find("doc.json:2:") != std::string::npos);
  }
}

TEST_CASE("dump sorts keys and ends with a newline") {
  Json j{{"b", 1}, {"a", {2, 3}}};
  CHECK(io::dump(j) == "{\n  \"a\": [\n    2,\n    3\n  ],\n  \"b\": 1\n}\n");
}

TEST_CASE("terms") {
  Term t = io::term_from_json(io::parse_json(R"(["f", "a", ["g", {"param": 2}]])"));
  CHECK(t.to_string() == "f(a,g(#2))");
  CHECK(io::term_to_json(t).dump() == R"(["f",["a"],["g",{"param":2}]])");
  CHECK(io::term_from_json(io::term_to_json(t)) == t);
  CHECK_THROWS_AS(io::term_from_json(Json::array()), Error);
  CHECK_THROWS_AS(io::term_from_json(Json{{"param", 0}}), Error);
}

TEST_CASE("grammars infer their alphabets") {
  MacroGrammar g = io::grammar_from_json(io::parse_json(R"({
    "start": "S",
    "rules": [{"lhs": "S", "rhs": ["F", ["a"]]}, {"lhs": "F", "rhs": ["f", {"param": 1}, {"param": 1}]}]
  })"));
  CHECK(g.nonterminals.arity_of(Symbol("F")) == 1);
  CHECK(g.alphabet.arity_of(Symbol("f")) == 2);
  CHECK(g.alphabet.arity_of(Symbol("a")) == 0);
  CHECK(io::grammar_from_json(io::grammar_to_json(g)).to_string() == g.to_string());
  CHECK_THROWS_AS(io::grammar_from_json(io::parse_json(R"({"start": "S", "rules": [], "extra": 1})")), Error);
}

TEST_CASE("property: grammars and grammar trees survive JSON") {
  Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    MacroGrammar g = random_grammar(rng, round % 2 == 0);
    MacroGrammar back = io::grammar_from_json(io::grammar_to_json(g), &g.alphabet, &g.nonterminals);
    REQUIRE(back.to_string() == g.to_string());
    GrammarAlphabet gamma(g.alphabet, g.nonterminals);
    Term t = enc(g, gamma);
    auto [t2, gamma2] = io::grammar_tree_from_json(io::parse_json(io::dump(io::grammar_tree_to_json(t, gamma))));
    CHECK(t2 == t);
    CHECK(gamma2.symbols() == gamma.symbols());
  }
}

TEST_CASE("rectangle scenarios round trip") {
  RectangleScenario s = fig2_scenario();
  RectangleScenario back = io::rectangles_from_json(io::rectangles_to_json(s));
  CHECK(io::rectangles_to_json(back) == io::rectangles_to_json(s));
  CHECK(compile_rectangles(back).train.size() == 3);
  CHECK(compile_rectangles(back).test.size() == 6);
}

TEST_CASE("finite problems") {
  SynthesisProblem p = io::problem_from_json(problem_doc());
  REQUIRE(p.instances.size() == 1);
  CHECK(p.instances[0].train.size() == 1);
  CHECK(p.instances[0].test.size() == 1);
  CHECK(p.mode == Ordering::depth);
  CHECK(p.nonterminals.contains(Symbol("S")));
  CHECK(solves(parse_term("and(x,y)"), p.instances[0]));
  CHECK(!solves(parse_term("x"), p.instances[0]));
}

TEST_CASE("problem validation") {
  Json j = problem_doc();
  j["colour"] = "red";
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j["format"] = 2;
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j["semantics"]["instances"][0]["test"] = {5};
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j["semantics"]["examples"][0]["ops"]["and"] = {"0", "1"};
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j["semantics"]["examples"][0]["ops"]["z"] = "1";
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j.erase("alphabet");
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
  j = problem_doc();
  j["mode"] = "lexical";
  CHECK_THROWS_AS(io::problem_from_json(j), Error);
}

}  // TEST_SUITE
