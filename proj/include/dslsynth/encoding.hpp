// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Grammars as trees: the grammar alphabet, enc/dec, and the permissive
/// meta-grammar.
#ifndef DSLSYNTH_ENCODING_HPP
#define DSLSYNTH_ENCODING_HPP

#include <optional>
#include <string>
#include <vector>

#include "dslsynth/core.hpp"

namespace dslsynth {

/// Alphabet of grammar trees over a base alphabet and a nonterminal set:
/// the base symbols, `root`/1, `end`/0, `lhs_N`/2 and `rhs_N`/arity(N) per
/// nonterminal, and the nullary parameter symbols `1`..`k`.
class GrammarAlphabet {
 public:
  enum class Kind { base, root, end, lhs, rhs, param };

  struct Info {
    Kind kind = Kind::base;
    Symbol nonterminal;  ///< for lhs/rhs
    int index = 0;       ///< nonterminal column for lhs/rhs, parameter index for param
  };

  GrammarAlphabet() = default;
  GrammarAlphabet(RankedAlphabet base, NonterminalSet nonterminals);

  const RankedAlphabet& base() const { return base_; }
  const NonterminalSet& nonterminals() const { return nonterminals_; }
  /// Every symbol of the grammar alphabet with its arity.
  const RankedAlphabet& symbols() const { return symbols_; }

  Symbol root() const { return root_; }
  Symbol end() const { return end_; }
  Symbol lhs(Symbol nonterminal) const;
  Symbol rhs(Symbol nonterminal) const;
  Symbol param(int i) const;
  int max_param() const { return static_cast<int>(params_.size()); }

  /// Nonterminals in column order (sorted by name).
  const std::vector<Symbol>& columns() const { return columns_; }
  int column(Symbol nonterminal) const;

  const Info* info(Symbol s) const;
  /// Throws for symbols outside the grammar alphabet.
  const Info& classify(Symbol s) const;

 private:
  RankedAlphabet base_;
  NonterminalSet nonterminals_;
  RankedAlphabet symbols_;
  Symbol root_, end_;
  std::vector<Symbol> columns_, lhs_, rhs_, params_;
  std::map<Symbol, Info> info_;
};

/// Encodes the rule list as a right-going spine of lhs nodes under root.
Term enc(const MacroGrammar& g);
Term enc(const MacroGrammar& g, const GrammarAlphabet& gamma);

/// First violation of the grammar-tree shape, prefixed by the node path
/// (child indices from the root, 1-based), or nullopt.
std::optional<std::string> check_grammar_tree(const Term& t, const GrammarAlphabet& gamma);

/// Inverse of enc. The start symbol is the nonterminal of the topmost lhs.
MacroGrammar dec(const Term& t, const GrammarAlphabet& gamma);

/// Regular grammar over the grammar alphabet accepting the encoding of every
/// well-formed grammar (parameter scoping is left to dec).
MacroGrammar permissive_meta(const RankedAlphabet& sigma, const NonterminalSet& nonterminals);

/// Regular grammar over the grammar alphabet accepting the encodings of the
/// nonempty rule sequences drawn from `pool` whose first rule is for `start`.
/// Rules may repeat.
MacroGrammar pool_meta(const RankedAlphabet& sigma, const NonterminalSet& nonterminals,
                       Symbol start, const std::vector<Rule>& pool);

/// Least bound on the macro depth of every rule rhs generated by a regular
/// meta-grammar, or nullopt when unbounded.
std::optional<int> meta_macro_depth_bound(const MacroGrammar& meta, const GrammarAlphabet& gamma);

}  // namespace dslsynth

#endif  // DSLSYNTH_ENCODING_HPP
