// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// JSON problem, grammar and report files. Every document carries
/// "format": 1.
#ifndef DSLSYNTH_IO_HPP
#define DSLSYNTH_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "dslsynth/core.hpp"
#include "dslsynth/encoding.hpp"
#include "dslsynth/rectable.hpp"
#include "dslsynth/semantics.hpp"
#include "dslsynth/synth.hpp"

namespace dslsynth::io {

using Json = nlohmann::json;

inline constexpr int kFormat = 1;

/// Throws Error naming `source` with line and column on syntax errors.
Json parse_json(const std::string& text, const std::string& source = "<input>");
Json read_json_file(const std::string& path);
/// Two-space indented, sorted keys, trailing newline.
std::string dump(const Json& j);

/// "p/q", "p" or a JSON integer.
Rational parse_rational(const Json& j);
std::string rational_string(const Rational& r);

/// Nested arrays ["f", child, ...]; a bare string is a leaf and
/// {"param": i} a parameter.
Term term_from_json(const Json& j);
Json term_to_json(const Term& t);

/// Reads start and rules. The alphabet and nonterminals come from the
/// arguments, else from the document's "alphabet"/"nonterminals" keys, else
/// they are inferred: rule left-hand sides (and the start) are nonterminals
/// with the arity of their largest parameter, every other symbol is a
/// terminal with the arity of its uses.
MacroGrammar grammar_from_json(const Json& j, const RankedAlphabet* alphabet = nullptr,
                               const NonterminalSet* nonterminals = nullptr);
Json grammar_to_json(const MacroGrammar& g);

Json alphabet_to_json(const RankedAlphabet& a);
RankedAlphabet alphabet_from_json(const Json& j);
NonterminalSet nonterminals_from_json(const Json& j);

/// {"format", "alphabet", "nonterminals", "tree"}.
Json grammar_tree_to_json(const Term& t, const GrammarAlphabet& gamma);
/// Returns the tree and its grammar alphabet.
std::pair<Term, GrammarAlphabet> grammar_tree_from_json(const Json& j);

RectangleScenario rectangles_from_json(const Json& semantics);
Json rectangles_to_json(const RectangleScenario& s);

/// Throws Error on unknown keys, undeclared symbols or out-of-range
/// indices.
SynthesisProblem problem_from_json(const Json& j);

Json verdict_to_json(const Verdict& v);
Json table_to_json(const RecursionTable& t);
Json outcome_to_json(const SynthesisOutcome& o, bool witnesses);

}  // namespace dslsynth::io

#endif  // DSLSYNTH_IO_HPP
