// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

// Random generators and small helpers shared by the test binaries.
#ifndef DSLSYNTH_TESTS_SUPPORT_HPP
#define DSLSYNTH_TESTS_SUPPORT_HPP

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dslsynth/core.hpp"

namespace dslsynth::testing {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Alphabet with 1-3 constants and 0-2 symbols of arity 1-3.
inline RankedAlphabet random_alphabet(Rng& rng, const std::string& prefix = "s") {
  RankedAlphabet a;
  int constants = uniform(rng, 1, 3);
  for (int i = 0; i < constants; ++i) a.add(prefix + "c" + std::to_string(i), 0);
  int ops = uniform(rng, 0, 2);
  for (int i = 0; i < ops; ++i) a.add(prefix + "f" + std::to_string(i), uniform(rng, 1, 3));
  return a;
}

inline Term random_rhs(Rng& rng, const RankedAlphabet& sigma, const NonterminalSet& n,
                       int params, int depth) {
  std::vector<std::pair<Symbol, int>> choices;
  for (const auto& [f, a] : sigma.entries())
    if (depth > 0 || a == 0) choices.push_back({f, a});
  for (const auto& [x, a] : n.entries())
    if (depth > 0 || a == 0) choices.push_back({x, a});
  int pick = uniform(rng, 0, static_cast<int>(choices.size()) - 1 + params);
  if (pick >= static_cast<int>(choices.size()))
    return Term::param(pick - static_cast<int>(choices.size()) + 1);
  auto [s, a] = choices[pick];
  std::vector<Term> kids;
  for (int i = 0; i < a; ++i) kids.push_back(random_rhs(rng, sigma, n, params, depth - 1));
  return Term::app(s, std::move(kids));
}

/// Well-formed grammar with 1-3 nonterminals; macro symbols of arity ≤ 2
/// when `macros` is set.
inline MacroGrammar random_grammar(Rng& rng, bool macros, int max_rules = 5) {
  MacroGrammar g;
  g.alphabet = random_alphabet(rng);
  int k = uniform(rng, 1, 3);
  for (int i = 0; i < k; ++i) {
    int arity = (macros && i > 0) ? uniform(rng, 0, 2) : 0;
    g.nonterminals.add("N" + std::to_string(i), arity);
  }
  g.start = Symbol("N0");
  int rules = uniform(rng, 0, max_rules);
  std::vector<Symbol> lhs;
  for (const auto& [x, a] : g.nonterminals.entries()) lhs.push_back(x);
  for (int i = 0; i < rules; ++i) {
    Symbol l = lhs[uniform(rng, 0, static_cast<int>(lhs.size()) - 1)];
    int params = g.nonterminals.arity_of(l);
    g.rules.push_back({l, random_rhs(rng, g.alphabet, g.nonterminals, params, uniform(rng, 0, 3))});
  }
  return g;
}

inline std::set<Term> keys(const std::map<Term, int>& m) {
  std::set<Term> out;
  for (const auto& [t, d] : m) out.insert(t);
  return out;
}

/// All well-formed ground terms over sigma with at most max_size nodes.
inline std::vector<Term> all_terms(const RankedAlphabet& sigma, std::size_t max_size) {
  std::vector<std::vector<Term>> by_size(max_size + 1);
  for (std::size_t s = 1; s <= max_size; ++s) {
    for (const auto& [f, a] : sigma.entries()) {
      if (a == 0) {
        if (s == 1) by_size[1].push_back(Term::leaf(f));
        continue;
      }
      std::vector<Term> kids;
      std::function<void(int, std::size_t)> go = [&](int i, std::size_t left) {
        if (i == a) {
          if (left == 0) by_size[s].push_back(Term::app(f, kids));
          return;
        }
        for (std::size_t cs = 1; cs + (a - i - 1) <= left; ++cs)
          for (const Term& c : by_size[cs]) {
            kids.push_back(c);
            go(i + 1, left - cs);
            kids.pop_back();
          }
      };
      go(0, s - 1);
    }
  }
  std::vector<Term> out;
  for (auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace dslsynth::testing

#endif  // DSLSYNTH_TESTS_SUPPORT_HPP
