// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Synthesis automata over grammar trees, the macro-grammar verdicts, and
/// the synthesis procedures.
#ifndef DSLSYNTH_SYNTH_HPP
#define DSLSYNTH_SYNTH_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dslsynth/automata.hpp"
#include "dslsynth/core.hpp"
#include "dslsynth/encoding.hpp"
#include "dslsynth/rectable.hpp"
#include "dslsynth/semantics.hpp"

namespace dslsynth {

// ---------------------------------------------------------------------------
// Automata reading grammar trees over GrammarAlphabet(base.alphabet, n).
//
// Each accepts { t : the verdict for extend(dec(t), base) on the instance
// accepts }. During fixed-tree membership the guesses are resolved through
// the guide; without a guide every guess is enumerated, which is only
// feasible on micro instances.

/// Adequacy for regular grammars: find productions, then read them while
/// simulating A1.
std::shared_ptr<const TwoWayAta> adequate_automaton(const LearningInstance& inst,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n);
std::shared_ptr<const TwoWayAta> adequate_automaton(std::shared_ptr<const InstanceAutomata> ia,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n);

/// Depth-ordered synthesis for regular grammars: guesses the recursion
/// table row by row and checks every row with hit and miss sub-automata.
std::shared_ptr<const TwoWayAta> dslsynth_automaton(const LearningInstance& inst,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n);
std::shared_ptr<const TwoWayAta> dslsynth_automaton(std::shared_ptr<const InstanceAutomata> ia,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n);

/// Adequacy for macro grammars: macro calls pass the sets of A1 states
/// their arguments reach.
std::shared_ptr<const TwoWayAta> adequate_macro_automaton(const LearningInstance& inst,
                                                          const MacroGrammar& base,
                                                          const NonterminalSet& n);
std::shared_ptr<const TwoWayAta> adequate_macro_automaton(
    std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base, const NonterminalSet& n);

/// Depth-ordered synthesis for macro grammars whose rules have macro depth
/// at most b. Depth budgets are explicit in the states and rows are
/// explored up to `horizon`. Throws Unsupported for an unbounded b.
std::shared_ptr<const TwoWayAta> dslsynth_macro_automaton(const LearningInstance& inst,
                                                          const MacroGrammar& base,
                                                          const NonterminalSet& n,
                                                          std::optional<int> b, int horizon = 12);
std::shared_ptr<const TwoWayAta> dslsynth_macro_automaton(
    std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base, const NonterminalSet& n,
    std::optional<int> b, int horizon = 12);

// ---------------------------------------------------------------------------
// Macro-grammar verdicts.

struct MacroVerdictOptions {
  /// Depth levels explored before giving up with ResourceLimit.
  int max_depth = 64;
  ResourceLimits limits;
};

/// Verdict for extend(g, base) by depth-indexed evaluation of behavioral
/// vectors over the outermost semantics. Arguments are tracked as profiles
/// (values per landing budget). The search stops once the start symbol has
/// reached every value its unbounded language reaches.
Verdict solves_macro_grammar(const MacroGrammar& g, const MacroGrammar& base,
                             const LearningInstance& inst, Ordering ordering,
                             const MacroVerdictOptions& options = {});
/// Same, on an already extended grammar.
Verdict solves_macro_grammar(const MacroGrammar& extended, const LearningInstance& inst,
                             Ordering ordering, const MacroVerdictOptions& options = {});

// ---------------------------------------------------------------------------
// Synthesis.

struct SynthesisProblem {
  RankedAlphabet alphabet;
  NonterminalSet nonterminals;
  MacroGrammar base;  ///< regular, nonterminals ⊆ `nonterminals`
  std::vector<LearningInstance> instances;
  std::optional<MacroGrammar> meta;  ///< permissive_meta when absent
  Ordering mode = Ordering::depth;
  bool macros = false;
  /// Macro depth bound; computed from the meta-grammar when absent.
  std::optional<int> bound;

  GrammarAlphabet gamma() const { return GrammarAlphabet(alphabet, nonterminals); }
  MacroGrammar meta_grammar() const;
  /// The bound in effect: `bound`, else the meta-grammar's, else nullopt.
  std::optional<int> effective_bound() const;
  /// Throws Error or Unsupported on inconsistent problems.
  void validate() const;
};

struct SynthesisOutcome {
  enum class Kind { solution, no_solution_within_bound, no_solution, resource_limit };
  Kind kind = Kind::no_solution_within_bound;
  std::optional<MacroGrammar> grammar;
  std::optional<Term> tree;
  /// One per instance, for solutions.
  std::vector<Verdict> verdicts;
  std::size_t size_bound = 0;
  std::size_t candidates = 0;
  std::string details;
};

std::string to_string(SynthesisOutcome::Kind k);

struct SynthesisStrategy {
  enum class Kind { enumerate, convert };
  Kind kind = Kind::enumerate;
  std::size_t max_size = 12;
  int horizon = 12;  ///< rows explored by the macro depth automaton
  ResourceLimits limits;
};

/// Checks one grammar against every instance with the mode-appropriate
/// verdict. Stops at the first rejecting instance.
std::vector<Verdict> check_grammar(const SynthesisProblem& p, const MacroGrammar& g,
                                   const ResourceLimits& limits = {});

SynthesisOutcome synthesize(const SynthesisProblem& p, const SynthesisStrategy& s = {});

}  // namespace dslsynth

#endif  // DSLSYNTH_SYNTH_HPP
