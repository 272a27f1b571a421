// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/semantics.hpp"

#include <algorithm>

namespace dslsynth {

FiniteInterpretation::FiniteInterpretation(RankedAlphabet alphabet, std::vector<std::string> domain)
    : alphabet_(std::move(alphabet)), domain_(std::move(domain)), accepting_(domain_.size(), false) {
  if (domain_.empty()) throw Error("finite interpretation needs a nonempty domain");
}

Value FiniteInterpretation::value(const std::string& label) const {
  auto it = std::find(domain_.begin(), domain_.end(), label);
  if (it == domain_.end()) throw Error("value '" + label + "' is not in the domain");
  return static_cast<Value>(it - domain_.begin());
}

namespace {

std::size_t table_size(std::size_t domain, int arity) {
  std::size_t n = 1;
  for (int i = 0; i < arity; ++i) n *= domain;
  return n;
}

}  // namespace

void FiniteInterpretation::set_op(Symbol f, std::vector<Value> table) {
  int arity = alphabet_.arity_of(f);
  if (table.size() != table_size(domain_.size(), arity))
    throw Error("operation table for '" + f.name() + "' has the wrong size");
  for (Value v : table)
    if (v >= domain_.size()) throw Error("operation '" + f.name() + "' leaves the domain");
  ops_[f] = std::move(table);
}

void FiniteInterpretation::set_op(Symbol f, const std::function<Value(const std::vector<Value>&)>& fn) {
  int arity = alphabet_.arity_of(f);
  std::size_t n = table_size(domain_.size(), arity);
  std::vector<Value> table(n);
  std::vector<Value> args(arity);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    for (int k = arity - 1; k >= 0; --k) {
      args[k] = static_cast<Value>(rest % domain_.size());
      rest /= domain_.size();
    }
    table[i] = fn(args);
  }
  set_op(f, std::move(table));
}

const std::vector<Value>& FiniteInterpretation::op_table(Symbol f) const {
  auto it = ops_.find(f);
  if (it == ops_.end()) throw Error("no operation for symbol '" + f.name() + "'");
  return it->second;
}

Value FiniteInterpretation::apply(Symbol f, const std::vector<Value>& args) const {
  const auto& table = op_table(f);
  std::size_t i = 0;
  for (Value a : args) i = i * domain_.size() + a;
  return table.at(i);
}

void FiniteInterpretation::set_accepting(const std::vector<Value>& values) {
  std::fill(accepting_.begin(), accepting_.end(), false);
  for (Value v : values) accepting_.at(v) = true;
}

std::vector<Value> FiniteInterpretation::accepting_values() const {
  std::vector<Value> out;
  for (Value v = 0; v < accepting_.size(); ++v)
    if (accepting_[v]) out.push_back(v);
  return out;
}

void FiniteInterpretation::validate() const {
  for (const auto& [f, a] : alphabet_.entries())
    if (!ops_.count(f)) throw Error("no operation for symbol '" + f.name() + "'");
}

Value evaluate(const Term& e, const FiniteInterpretation& m) {
  if (e.is_param()) throw Error("cannot evaluate a parameter leaf");
  std::vector<Value> args;
  args.reserve(e.arity());
  for (const Term& c : e.children()) args.push_back(evaluate(c, m));
  return m.apply(e.symbol(), args);
}

bool consistent(const Term& e, const FiniteInterpretation& m) { return m.accepting(evaluate(e, m)); }

const FiniteInterpretation& LearningInstance::example(std::size_t i) const {
  return i < train.size() ? train.at(i) : test.at(i - train.size());
}

void LearningInstance::validate() const {
  if (train.empty()) throw Error("learning instance needs at least one training example");
  for (std::size_t i = 0; i < size(); ++i) {
    example(i).validate();
    if (!(example(i).alphabet() == alphabet()))
      throw Error("examples of one instance must share the alphabet");
  }
}

bool solves(const Term& e, const std::vector<FiniteInterpretation>& examples) {
  return std::all_of(examples.begin(), examples.end(),
                     [&](const FiniteInterpretation& m) { return consistent(e, m); });
}

bool solves(const Term& e, const LearningInstance& inst) {
  return solves(e, inst.train) && solves(e, inst.test);
}

bool non_generalizing(const Term& e, const LearningInstance& inst) {
  return solves(e, inst.train) && !solves(e, inst.test);
}

RankedAlphabet RectangleScenario::alphabet() const {
  RankedAlphabet a;
  for (const auto& [name, r] : rectangles) a.add(name, 0);
  a.add(and_symbol(), 2);
  a.add(or_symbol(), 2);
  a.add(not_symbol(), 1);
  return a;
}

void RectangleScenario::validate() const {
  for (const auto& [name, r] : rectangles) {
    if (r.xmin > r.xmax || r.ymin > r.ymax) throw Error("rectangle '" + name + "' is inverted");
    Symbol s(name);
    if (s == and_symbol() || s == or_symbol() || s == not_symbol())
      throw Error("rectangle name '" + name + "' is reserved");
  }
}

LearningInstance compile_rectangles(const RectangleScenario& s) {
  s.validate();
  RankedAlphabet sigma = s.alphabet();
  LearningInstance inst;
  for (const LabeledPoint& p : s.points) {
    FiniteInterpretation m(sigma, {"0", "1"});
    for (const auto& [name, r] : s.rectangles) m.set_op(Symbol(name), {r.contains(p.x, p.y) ? 1u : 0u});
    m.set_op(and_symbol(), {0, 0, 0, 1});
    m.set_op(or_symbol(), {0, 1, 1, 1});
    m.set_op(not_symbol(), {1, 0});
    m.set_accepting({p.positive ? 1u : 0u});
    (p.positive ? inst.train : inst.test).push_back(std::move(m));
  }
  return inst;
}

Nta example_automaton(const FiniteInterpretation& m, Polarity p) {
  m.validate();
  Nta a(m.alphabet());
  for (Value v = 0; v < m.domain_size(); ++v) a.add_state(m.label(v));
  for (Value v = 0; v < m.domain_size(); ++v)
    if (m.accepting(v) == (p == Polarity::positive)) a.add_initial(v);
  const std::size_t d = m.domain_size();
  for (const auto& [f, arity] : m.alphabet().entries()) {
    const auto& table = m.op_table(f);
    for (std::size_t i = 0; i < table.size(); ++i) {
      std::vector<StateId> kids(arity);
      std::size_t rest = i;
      for (int k = arity - 1; k >= 0; --k) {
        kids[k] = static_cast<StateId>(rest % d);
        rest /= d;
      }
      a.add_transition(table[i], f, std::move(kids));
    }
  }
  return a;
}

InstanceAutomata instance_automata(const LearningInstance& inst) {
  inst.validate();
  std::vector<Nta> pos;
  for (std::size_t i = 0; i < inst.size(); ++i)
    pos.push_back(example_automaton(inst.example(i), Polarity::positive));
  std::vector<const Nta*> all, train;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    all.push_back(&pos[i]);
    if (i < inst.train.size()) train.push_back(&pos[i]);
  }
  InstanceAutomata out{nta_intersect_all(all), Nta(inst.alphabet())};
  if (!inst.test.empty()) {
    Nta any_neg = example_automaton(inst.test.front(), Polarity::negated);
    for (std::size_t i = 1; i < inst.test.size(); ++i)
      any_neg = nta_union(any_neg, example_automaton(inst.test[i], Polarity::negated));
    out.a2 = nta_intersect(nta_intersect_all(train), any_neg);
  }
  return out;
}

}  // namespace dslsynth
