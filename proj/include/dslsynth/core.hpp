// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Ranked alphabets, terms, macro tree grammars and their outermost
/// derivation semantics.
#ifndef DSLSYNTH_CORE_HPP
#define DSLSYNTH_CORE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dslsynth {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource cap was exceeded.
class ResourceLimit : public Error {
 public:
  ResourceLimit(const std::string& cap, std::size_t explored);
  const std::string& cap() const { return cap_; }
  std::size_t explored() const { return explored_; }

 private:
  std::string cap_;
  std::size_t explored_;
};

/// The requested configuration is outside what the library decides.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Explicit caps shared by the enumeration-heavy operations.
struct ResourceLimits {
  std::size_t max_terms = 1'000'000;
  std::size_t max_term_size = 10'000;
  std::size_t max_configurations = 5'000'000;
  std::size_t max_states = 200'000;
};

/// Interned name. Equality is by identity, ordering is lexicographic so that
/// every container keyed by symbols iterates deterministically.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const { return id_; }
  bool empty() const { return id_ == 0; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b);

 private:
  std::uint32_t id_ = 0;
  const std::string* name_ = nullptr;
};

/// Symbol name to arity. Also used for nonterminal sets.
class RankedAlphabet {
 public:
  RankedAlphabet() = default;
  RankedAlphabet(std::initializer_list<std::pair<std::string_view, int>> entries);

  /// Throws if the name is already declared with a different arity.
  void add(Symbol s, int arity);
  void add(std::string_view name, int arity) { add(Symbol(name), arity); }

  bool contains(Symbol s) const { return arity_.count(s) != 0; }
  std::optional<int> arity(Symbol s) const;
  /// Throws for undeclared symbols.
  int arity_of(Symbol s) const;
  int max_arity() const;
  std::size_t size() const { return arity_.size(); }
  const std::map<Symbol, int>& entries() const { return arity_; }

  friend bool operator==(const RankedAlphabet&, const RankedAlphabet&) = default;

 private:
  std::map<Symbol, int> arity_;
};

using NonterminalSet = RankedAlphabet;

/// Immutable ranked tree. Leaves are either nullary applications or
/// parameter leaves carrying a 1-based index.
class Term {
 public:
  Term() = default;

  static Term leaf(Symbol s) { return app(s, {}); }
  static Term leaf(std::string_view name) { return leaf(Symbol(name)); }
  static Term app(Symbol s, std::vector<Term> children);
  static Term app(std::string_view name, std::vector<Term> children) {
    return app(Symbol(name), std::move(children));
  }
  static Term param(int index);

  bool valid() const { return node_ != nullptr; }
  bool is_param() const { return node_->param != 0; }
  int param_index() const { return node_->param; }
  Symbol symbol() const { return node_->symbol; }
  const std::vector<Term>& children() const { return node_->children; }
  const Term& child(std::size_t i) const { return node_->children[i]; }
  std::size_t arity() const { return node_->children.size(); }
  std::size_t size() const { return node_->size; }
  std::size_t height() const { return node_->height; }
  std::size_t hash() const { return node_->hash; }
  const void* identity() const { return node_.get(); }

  /// Replaces parameter leaf i by args[i-1].
  Term substitute(const std::vector<Term>& args) const;
  bool has_params() const;
  int max_param() const;

  std::string to_string() const;

  friend bool operator==(const Term& a, const Term& b);
  /// Total order: symbol name, then parameter index, then children.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node {
    Symbol symbol;
    int param = 0;
    std::vector<Term> children;
    std::size_t hash = 0;
    std::size_t size = 1;
    std::size_t height = 1;
  };
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// Parses `f(a,g(b))`; `#3` denotes parameter leaf 3.
Term parse_term(std::string_view text);

/// True iff every symbol is declared with the right arity and no parameter
/// leaf occurs.
bool well_formed_term(const Term& t, const RankedAlphabet& sigma);

struct Rule {
  Symbol lhs;
  Term rhs;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Macro tree grammar. A grammar without positive-arity nonterminals is a
/// regular tree grammar.
class MacroGrammar {
 public:
  Symbol start;
  NonterminalSet nonterminals;
  RankedAlphabet alphabet;
  std::vector<Rule> rules;

  bool is_regular() const;
  bool is_nonterminal(Symbol s) const { return nonterminals.contains(s); }
  bool is_macro(Symbol s) const;

  /// Reason for ill-formedness, or nullopt when well formed.
  std::optional<std::string> check() const;
  bool well_formed() const { return !check().has_value(); }
  /// Throws Error with the check() message.
  void validate() const;

  std::vector<std::size_t> rules_for(Symbol lhs) const;
  std::string to_string() const;

  friend bool operator==(const MacroGrammar&, const MacroGrammar&) = default;
};

/// Convenience constructor used by tests and fixtures: rules given as
/// (lhs, rhs-text) pairs, symbol arities inferred from the text.
MacroGrammar make_grammar(std::string_view start,
                          const NonterminalSet& nonterminals,
                          const RankedAlphabet& alphabet,
                          const std::vector<std::pair<std::string, std::string>>& rules);

/// Rules of g followed by the rules of base.
MacroGrammar extend(const MacroGrammar& g, const MacroGrammar& base);

/// Ground terms derivable from the start symbol by outermost rewriting
/// within the depth budget, each with its minimal parse depth.
std::map<Term, int> derive_outermost(const MacroGrammar& g, int depth_budget,
                                     const ResourceLimits& limits = {});

/// Result of a depth query. `at_least` is set when the answer is only known
/// to exceed the search budget.
struct Depth {
  enum class Kind { finite, infinite, at_least };
  Kind kind = Kind::infinite;
  int value = 0;

  static Depth finite_value(int d) { return {Kind::finite, d}; }
  static Depth infinity() { return {Kind::infinite, 0}; }
  static Depth lower_bound(int d) { return {Kind::at_least, d}; }
  bool is_finite() const { return kind == Kind::finite; }
  friend bool operator==(const Depth&, const Depth&) = default;
};

/// Minimal parse depth of a ground term. Exact for regular grammars; macro
/// grammars are searched up to `budget`.
Depth parse_depth(const MacroGrammar& g, const Term& e, int budget = 16,
                  const ResourceLimits& limits = {});

/// Maximum nesting of macro symbols along any path of a single term.
int macro_depth(const Term& rhs, const NonterminalSet& nonterminals);
/// Maximum macro_depth over all right-hand sides.
int macro_depth_bound(const MacroGrammar& g);

}  // namespace dslsynth

#endif  // DSLSYNTH_CORE_HPP
