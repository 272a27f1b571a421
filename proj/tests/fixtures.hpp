// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

// Test-side transcriptions of the rectangle figure and the table grammars.
#ifndef DSLSYNTH_TESTS_FIXTURES_HPP
#define DSLSYNTH_TESTS_FIXTURES_HPP

#include "dslsynth/semantics.hpp"

namespace dslsynth::testing {

inline Rational q(long long n, long long d = 1) { return Rational(n, d); }

inline RectangleScenario fig2_scenario() {
  RectangleScenario s;
  s.rectangles["r1"] = {q(1, 5), q(14, 5), q(2, 5), q(23, 5)};
  s.rectangles["r2"] = {q(3), q(53, 10), q(1), q(23, 5)};
  s.rectangles["r3"] = {q(1, 5), q(4), q(33, 20), q(19, 4)};
  s.rectangles["r4"] = {q(8, 5), q(43, 10), q(2, 5), q(9, 2)};
  s.rectangles["r5"] = {q(4, 5), q(53, 10), q(11, 10), q(15, 4)};
  s.points = {{q(2), q(16, 5), true},       {q(9, 4), q(2), true},
              {q(7, 2), q(5, 2), true},     {q(3, 5), q(41, 10), false},
              {q(6, 5), q(5, 2), false},    {q(19, 10), q(7, 10), false},
              {q(15, 4), q(27, 20), false}, {q(19, 4), q(11, 4), false},
              {q(17, 5), q(41, 10), false}};
  return s;
}

inline RankedAlphabet rect_alphabet() { return fig2_scenario().alphabet(); }

inline MacroGrammar rect_grammar(const std::vector<std::string>& extra) {
  std::vector<std::pair<std::string, std::string>> rules;
  for (const auto& e : extra) rules.push_back({"S", e});
  for (const char* r : {"r1", "r2", "r3", "r4", "r5"}) rules.push_back({"S", r});
  return make_grammar("S", {{"S", 0}}, rect_alphabet(), rules);
}

inline MacroGrammar table_g1() { return rect_grammar({"and(S,S)"}); }
inline MacroGrammar table_g2() { return rect_grammar({"not(or(not(S),not(S)))"}); }
inline MacroGrammar table_g3() { return rect_grammar({"and(S,S)", "or(S,S)"}); }

/// The empty base grammar over the rectangle alphabet.
inline MacroGrammar empty_base(const RankedAlphabet& sigma) {
  MacroGrammar b;
  b.alphabet = sigma;
  return b;
}

}  // namespace dslsynth::testing

#endif  // DSLSYNTH_TESTS_FIXTURES_HPP
