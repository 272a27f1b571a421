// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Finite-domain example semantics, learning instances, the rectangle
/// front-end, and example/instance automata.
#ifndef DSLSYNTH_SEMANTICS_HPP
#define DSLSYNTH_SEMANTICS_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "dslsynth/automata.hpp"
#include "dslsynth/core.hpp"

namespace dslsynth {

using Value = std::uint32_t;

/// One example: a finite domain, a total operation table per symbol, and the
/// accepting values. consistent(e, M) iff evaluate(e, M) is accepting.
class FiniteInterpretation {
 public:
  FiniteInterpretation() = default;
  FiniteInterpretation(RankedAlphabet alphabet, std::vector<std::string> domain);

  const RankedAlphabet& alphabet() const { return alphabet_; }
  std::size_t domain_size() const { return domain_.size(); }
  const std::vector<std::string>& domain() const { return domain_; }
  const std::string& label(Value v) const { return domain_.at(v); }
  /// Throws for labels outside the domain.
  Value value(const std::string& label) const;

  /// Row-major table over argument tuples: |V|^arity entries.
  void set_op(Symbol f, std::vector<Value> table);
  void set_op(Symbol f, const std::function<Value(const std::vector<Value>&)>& fn);
  bool has_op(Symbol f) const { return ops_.count(f) != 0; }
  const std::vector<Value>& op_table(Symbol f) const;
  Value apply(Symbol f, const std::vector<Value>& args) const;

  void set_accepting(const std::vector<Value>& values);
  bool accepting(Value v) const { return accepting_.at(v); }
  std::vector<Value> accepting_values() const;

  /// Throws unless every alphabet symbol has an operation.
  void validate() const;

 private:
  RankedAlphabet alphabet_;
  std::vector<std::string> domain_;
  std::map<Symbol, std::vector<Value>> ops_;
  std::vector<bool> accepting_;
};

/// Throws Error for symbols without an operation.
Value evaluate(const Term& e, const FiniteInterpretation& m);
bool consistent(const Term& e, const FiniteInterpretation& m);

/// Training examples X and testing examples Y.
struct LearningInstance {
  std::vector<FiniteInterpretation> train;
  std::vector<FiniteInterpretation> test;

  std::size_t size() const { return train.size() + test.size(); }
  /// Train first, then test.
  const FiniteInterpretation& example(std::size_t i) const;
  const RankedAlphabet& alphabet() const { return train.front().alphabet(); }
  void validate() const;
};

bool solves(const Term& e, const std::vector<FiniteInterpretation>& examples);
/// Consistent with X ∪ Y.
bool solves(const Term& e, const LearningInstance& inst);
/// Consistent with X but not with Y.
bool non_generalizing(const Term& e, const LearningInstance& inst);

using Rational = boost::rational<long long>;

/// Closed axis-parallel rectangle.
struct Rectangle {
  Rational xmin, xmax, ymin, ymax;
  bool contains(const Rational& x, const Rational& y) const {
    return xmin <= x && x <= xmax && ymin <= y && y <= ymax;
  }
};

struct LabeledPoint {
  Rational x, y;
  bool positive = true;
};

/// Rectangle names are the constants; and/2, or/2 and not/1 are fixed.
struct RectangleScenario {
  std::map<std::string, Rectangle> rectangles;
  std::vector<LabeledPoint> points;

  RankedAlphabet alphabet() const;
  void validate() const;
};

inline const Symbol& and_symbol() { static const Symbol s("and"); return s; }
inline const Symbol& or_symbol() { static const Symbol s("or"); return s; }
inline const Symbol& not_symbol() { static const Symbol s("not"); return s; }

/// One Boolean interpretation per point; positive points train with
/// accepting {1}, negative points test with accepting {0}.
LearningInstance compile_rectangles(const RectangleScenario& s);

enum class Polarity { positive, negated };

/// States are the domain values; L is the consistent (or inconsistent)
/// expressions.
Nta example_automaton(const FiniteInterpretation& m, Polarity p);

struct InstanceAutomata {
  Nta a1;  ///< generalizing: consistent with X ∪ Y
  Nta a2;  ///< non-generalizing: consistent with X, inconsistent with some Y
};

InstanceAutomata instance_automata(const LearningInstance& inst);

}  // namespace dslsynth

#endif  // DSLSYNTH_SEMANTICS_HPP
