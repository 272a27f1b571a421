// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Recursion tables over instance-automaton states or behavioral vectors,
/// the row acceptability test, and the grammar-level verdicts built on them.
#ifndef DSLSYNTH_RECTABLE_HPP
#define DSLSYNTH_RECTABLE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dslsynth/automata.hpp"
#include "dslsynth/core.hpp"
#include "dslsynth/semantics.hpp"

namespace dslsynth {

/// A state of A1 (automaton 1) or A2 (automaton 2).
struct TaggedState {
  int automaton = 1;
  StateId state = 0;
  friend auto operator<=>(const TaggedState&, const TaggedState&) = default;
};

using StateCell = std::set<TaggedState>;

/// start first, the remaining nonterminals by name.
std::vector<Symbol> table_columns(const MacroGrammar& g);

/// One application of H to the k-vector r (indexed like table_columns(g)).
/// Throws Unsupported when a rule mentions a macro symbol.
std::vector<StateCell> step_H(const MacroGrammar& g, const Nta& a1, const Nta& a2,
                              const std::vector<StateCell>& r);

/// Per-example values of an expression, train examples first.
using BehavioralVector = std::vector<Value>;

BehavioralVector behavior(const Term& e, const LearningInstance& inst);
std::string vector_label(const BehavioralVector& v, const LearningInstance& inst);

class RecursionTable {
 public:
  enum class Mode { states, vectors };
  using Entry = std::uint64_t;
  using Cell = std::vector<Entry>;  ///< sorted

  Mode mode = Mode::states;
  std::vector<Symbol> columns;
  /// n*: the worst-case row bound k times the size of the value domain.
  std::size_t bound = 0;
  /// Least i with H^i(Z0) = H^(i+1)(Z0). Rows past it are empty.
  std::size_t stable_at = 0;
  /// rows[i][j] for i ≤ stable_at; rows[0] is all empty.
  std::vector<std::vector<Cell>> rows;
  std::set<Entry> f1;  ///< generalizing values
  std::set<Entry> f2;  ///< non-generalizing values
  std::map<Entry, std::string> labels;
  /// A term first achieving each (column, value).
  std::map<std::pair<std::size_t, Entry>, Term> witnesses;

  std::size_t num_rows() const { return bound + 1; }
  const Cell& cell(std::size_t row, std::size_t column) const;
  const Term* witness(std::size_t column, Entry e) const;
  /// Cells as sorted label sets, for cell-for-cell comparisons.
  std::vector<std::vector<std::set<std::string>>> labelled_rows() const;
  std::size_t distinct_values() const;
  std::string to_string() const;
};

/// Entry encoding of a tagged state in state mode.
inline RecursionTable::Entry state_entry(TaggedState s) {
  return (RecursionTable::Entry{static_cast<std::uint32_t>(s.automaton)} << 32) | s.state;
}

/// Iterates H on the (regular) grammar from the all-empty vector.
RecursionTable recursion_table(const MacroGrammar& extended, const InstanceAutomata& automata,
                               const ResourceLimits& limits = {});
RecursionTable recursion_table(const MacroGrammar& g, const MacroGrammar& base,
                               const LearningInstance& inst, const ResourceLimits& limits = {});
/// Same scheme evaluated directly on the examples, without automata.
RecursionTable behavioral_table(const MacroGrammar& extended, const LearningInstance& inst,
                                const ResourceLimits& limits = {});
RecursionTable behavioral_table(const MacroGrammar& g, const MacroGrammar& base,
                                const LearningInstance& inst, const ResourceLimits& limits = {});

struct Verdict {
  bool accepted = false;
  /// Accepting row, or the first generalizing row of a rejected table.
  std::optional<std::size_t> row;
  /// First row holding a non-generalizing value, when one exists.
  std::optional<std::size_t> blocking_row;
  std::optional<Term> witness;
  std::optional<Term> blocking_witness;
  std::string reason;
};

struct AcceptOptions {
  /// Compares rows j ≤ i instead of j < i. Only the oracle harness sets
  /// this, to check that the tie fixture detects the change.
  bool nonstrict_tie = false;
};

Verdict acceptable(const RecursionTable& t, const std::set<RecursionTable::Entry>& f1,
                   const std::set<RecursionTable::Entry>& f2, AcceptOptions options = {});
Verdict acceptable(const RecursionTable& t, AcceptOptions options = {});
/// Accept iff some row of the start column holds a generalizing value.
Verdict adequate(const RecursionTable& t);

enum class Ordering { adequate, depth };

Ordering parse_ordering(const std::string& name);
std::string to_string(Ordering o);

/// Verdict for extend(g, base) on one instance, computed on state tables.
Verdict solves_grammar(const MacroGrammar& g, const MacroGrammar& base,
                       const LearningInstance& inst, Ordering ordering,
                       const ResourceLimits& limits = {});
Verdict solves_grammar(const MacroGrammar& extended, const InstanceAutomata& automata,
                       Ordering ordering, const ResourceLimits& limits = {});

}  // namespace dslsynth

#endif  // DSLSYNTH_RECTABLE_HPP
