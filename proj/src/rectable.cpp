// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/rectable.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace dslsynth {

std::vector<Symbol> table_columns(const MacroGrammar& g) {
  std::vector<Symbol> cols;
  if (!g.start.empty()) cols.push_back(g.start);
  for (const auto& [n, a] : g.nonterminals.entries())
    if (n != g.start) cols.push_back(n);
  return cols;
}

namespace {

/// Value reached with the witness that reaches it.
template <class V>
using Reach = std::map<V, Term>;

// Smaller witnesses win; ties are broken by term order.
template <class V>
void offer(Reach<V>& out, const V& v, const std::function<Term()>& make, std::size_t size) {
  auto it = out.find(v);
  if (it == out.end()) {
    out.emplace(v, make());
    return;
  }
  if (size > it->second.size()) return;
  Term t = make();
  if (t.size() < it->second.size() || (t.size() == it->second.size() && t < it->second))
    it->second = std::move(t);
}

void require_regular(const MacroGrammar& g) {
  for (const Rule& r : g.rules)
    if (g.nonterminals.arity_of(r.lhs) > 0 || macro_depth(r.rhs, g.nonterminals) > 0)
      throw Unsupported("recursion tables need a regular grammar; the rule for '" +
                        r.lhs.name() + "' uses a macro symbol");
}

std::map<Symbol, std::size_t> column_index(const std::vector<Symbol>& cols) {
  std::map<Symbol, std::size_t> idx;
  for (std::size_t i = 0; i < cols.size(); ++i) idx[cols[i]] = i;
  return idx;
}

// ⟦t⟧ for one automaton: states having an accepting run on t when the
// nonterminal leaf N is accepted exactly from r[N].
Reach<StateId> eval_states(const Nta& a, const Term& t, const std::map<Symbol, std::size_t>& col,
                           const std::vector<Reach<StateId>>& r) {
  if (auto it = col.find(t.symbol()); it != col.end()) return r[it->second];
  std::vector<Reach<StateId>> kids;
  kids.reserve(t.arity());
  for (const Term& c : t.children()) {
    kids.push_back(eval_states(a, c, col, r));
    if (kids.back().empty()) return {};
  }
  std::vector<StateSet> sets(kids.size(), StateSet(a.num_states()));
  std::vector<const StateSet*> ptrs;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    for (const auto& [q, w] : kids[i]) sets[i].set(q);
    ptrs.push_back(&sets[i]);
  }
  Reach<StateId> out;
  a.for_each_up(t.symbol(), ptrs, [&](const Nta::Transition& tr) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < kids.size(); ++i) size += kids[i].at(tr.children[i]).size();
    offer<StateId>(out, tr.from, [&] {
      std::vector<Term> args;
      for (std::size_t i = 0; i < kids.size(); ++i) args.push_back(kids[i].at(tr.children[i]));
      return Term::app(t.symbol(), std::move(args));
    }, size);
  });
  return out;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    return std::numeric_limits<std::size_t>::max();
  return a * b;
}

// Shared first-achievement loop. `step` maps the cumulative vector Z to H(Z).
RecursionTable iterate(RecursionTable t,
                       const std::function<std::vector<Reach<RecursionTable::Entry>>(
                           const std::vector<Reach<RecursionTable::Entry>>&)>& step,
                       const ResourceLimits& limits) {
  using Entry = RecursionTable::Entry;
  const std::size_t k = t.columns.size();
  std::vector<Reach<Entry>> z(k);
  t.rows.assign(1, std::vector<RecursionTable::Cell>(k));
  std::size_t stored = 0;
  for (std::size_t i = 1;; ++i) {
    std::vector<Reach<Entry>> next = step(z);
    std::vector<RecursionTable::Cell> row(k);
    bool grew = false;
    for (std::size_t j = 0; j < k; ++j)
      for (auto& [v, w] : next[j])
        if (!z[j].count(v)) {
          row[j].push_back(v);
          t.witnesses.emplace(std::make_pair(j, v), w);
          z[j].emplace(v, w);
          grew = true;
          if (++stored > limits.max_states) throw ResourceLimit("max_states", stored);
        }
    if (!grew) {
      t.stable_at = i - 1;
      break;
    }
    t.rows.push_back(std::move(row));
    if (i > t.bound) throw Error("recursion table exceeded its row bound");
  }
  return t;
}

}  // namespace

std::vector<StateCell> step_H(const MacroGrammar& g, const Nta& a1, const Nta& a2,
                              const std::vector<StateCell>& r) {
  require_regular(g);
  auto cols = table_columns(g);
  if (r.size() != cols.size()) throw Error("step_H: vector length differs from the column count");
  auto col = column_index(cols);
  std::vector<Reach<StateId>> r1(cols.size()), r2(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (TaggedState s : r[j]) {
      if (s.automaton == 1 && s.state < a1.num_states()) r1[j].emplace(s.state, Term::leaf(cols[j]));
      else if (s.automaton == 2 && s.state < a2.num_states()) r2[j].emplace(s.state, Term::leaf(cols[j]));
      else throw Error("step_H: state outside both automata");
    }
  std::vector<StateCell> out(cols.size());
  for (const Rule& rule : g.rules) {
    std::size_t j = col.at(rule.lhs);
    for (const auto& [q, w] : eval_states(a1, rule.rhs, col, r1)) out[j].insert({1, q});
    for (const auto& [q, w] : eval_states(a2, rule.rhs, col, r2)) out[j].insert({2, q});
  }
  return out;
}

BehavioralVector behavior(const Term& e, const LearningInstance& inst) {
  BehavioralVector v;
  v.reserve(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) v.push_back(evaluate(e, inst.example(i)));
  return v;
}

std::string vector_label(const BehavioralVector& v, const LearningInstance& inst) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += inst.example(i).label(v[i]);
  }
  return s + ")";
}

const RecursionTable::Cell& RecursionTable::cell(std::size_t row, std::size_t column) const {
  static const Cell empty;
  if (column >= columns.size()) throw Error("table column out of range");
  if (row >= rows.size()) return empty;
  return rows[row][column];
}

const Term* RecursionTable::witness(std::size_t column, Entry e) const {
  auto it = witnesses.find({column, e});
  return it == witnesses.end() ? nullptr : &it->second;
}

std::vector<std::vector<std::set<std::string>>> RecursionTable::labelled_rows() const {
  std::vector<std::vector<std::set<std::string>>> out;
  for (const auto& row : rows) {
    auto& r = out.emplace_back();
    for (const Cell& c : row) {
      auto& s = r.emplace_back();
      for (Entry e : c) s.insert(labels.at(e));
    }
  }
  return out;
}

std::size_t RecursionTable::distinct_values() const {
  std::set<Entry> all;
  for (const auto& row : rows)
    for (const Cell& c : row) all.insert(c.begin(), c.end());
  return all.size();
}

std::string RecursionTable::to_string() const {
  std::ostringstream os;
  os << "mode " << (mode == Mode::states ? "states" : "vectors") << ", bound " << bound
     << ", stable at " << stable_at << "\n";
  os << "d";
  for (Symbol c : columns) os << " | " << c.name();
  os << "\n";
  auto lr = labelled_rows();
  for (std::size_t i = 0; i < lr.size(); ++i) {
    os << i;
    for (const auto& cell : lr[i]) {
      os << " | {";
      bool first = true;
      for (const auto& l : cell) {
        os << (first ? "" : " ") << l;
        first = false;
      }
      os << "}";
    }
    os << "\n";
  }
  return os.str();
}

RecursionTable recursion_table(const MacroGrammar& extended, const InstanceAutomata& automata,
                               const ResourceLimits& limits) {
  extended.validate();
  require_regular(extended);
  const Nta& a1 = automata.a1;
  const Nta& a2 = automata.a2;
  RecursionTable t;
  t.mode = RecursionTable::Mode::states;
  t.columns = table_columns(extended);
  t.bound = saturating_mul(t.columns.size(), a1.num_states() + a2.num_states());
  for (StateId q : a1.initial()) t.f1.insert(state_entry({1, q}));
  for (StateId q : a2.initial()) t.f2.insert(state_entry({2, q}));
  for (StateId q = 0; q < a1.num_states(); ++q) t.labels[state_entry({1, q})] = "1:" + a1.label(q);
  for (StateId q = 0; q < a2.num_states(); ++q) t.labels[state_entry({2, q})] = "2:" + a2.label(q);
  auto col = column_index(t.columns);
  using Entry = RecursionTable::Entry;
  const std::size_t k = t.columns.size();
  auto step = [&](const std::vector<Reach<Entry>>& z) {
    std::vector<Reach<StateId>> r1(k), r2(k);
    for (std::size_t j = 0; j < k; ++j)
      for (const auto& [e, w] : z[j]) (e >> 32 == 1 ? r1 : r2)[j].emplace(static_cast<StateId>(e), w);
    std::vector<Reach<Entry>> out(k);
    for (const Rule& rule : extended.rules) {
      std::size_t j = col.at(rule.lhs);
      for (const auto& [q, w] : eval_states(a1, rule.rhs, col, r1))
        offer<Entry>(out[j], state_entry({1, q}), [&] { return w; }, w.size());
      for (const auto& [q, w] : eval_states(a2, rule.rhs, col, r2))
        offer<Entry>(out[j], state_entry({2, q}), [&] { return w; }, w.size());
    }
    return out;
  };
  return iterate(std::move(t), step, limits);
}

RecursionTable recursion_table(const MacroGrammar& g, const MacroGrammar& base,
                               const LearningInstance& inst, const ResourceLimits& limits) {
  return recursion_table(extend(g, base), instance_automata(inst), limits);
}

namespace {

class VectorSpace {
 public:
  explicit VectorSpace(const LearningInstance& inst) : inst_(inst) {
    for (std::size_t i = 0; i < inst.size(); ++i) {
      std::map<Symbol, const std::vector<Value>*> ops;
      for (const auto& [f, a] : inst.alphabet().entries()) ops[f] = &inst.example(i).op_table(f);
      tables_.push_back(std::move(ops));
    }
  }

  RecursionTable::Entry intern(const BehavioralVector& v) {
    auto [it, fresh] = ids_.try_emplace(v, vectors_.size());
    if (fresh) vectors_.push_back(v);
    return it->second;
  }
  const BehavioralVector& get(RecursionTable::Entry e) const { return vectors_.at(e); }
  std::size_t size() const { return vectors_.size(); }

  BehavioralVector apply(Symbol f, const std::vector<const BehavioralVector*>& args) const {
    BehavioralVector out(inst_.size());
    for (std::size_t i = 0; i < inst_.size(); ++i) {
      std::size_t idx = 0;
      const std::size_t d = inst_.example(i).domain_size();
      for (const BehavioralVector* a : args) idx = idx * d + (*a)[i];
      out[i] = (*tables_[i].at(f))[idx];
    }
    return out;
  }

  bool generalizing(const BehavioralVector& v) const {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return false;
    return true;
  }
  bool non_generalizing(const BehavioralVector& v) const {
    for (std::size_t i = 0; i < inst_.train.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return false;
    for (std::size_t i = inst_.train.size(); i < v.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return true;
    return false;
  }

 private:
  const LearningInstance& inst_;
  std::vector<std::map<Symbol, const std::vector<Value>*>> tables_;
  std::map<BehavioralVector, RecursionTable::Entry> ids_;
  std::vector<BehavioralVector> vectors_;
};

Reach<RecursionTable::Entry> eval_vectors(VectorSpace& space, const Term& t,
                                          const std::map<Symbol, std::size_t>& col,
                                          const std::vector<Reach<RecursionTable::Entry>>& z) {
  using Entry = RecursionTable::Entry;
  if (auto it = col.find(t.symbol()); it != col.end()) return z[it->second];
  std::vector<std::vector<std::pair<Entry, Term>>> kids;
  for (const Term& c : t.children()) {
    auto r = eval_vectors(space, c, col, z);
    if (r.empty()) return {};
    kids.emplace_back(r.begin(), r.end());
  }
  Reach<Entry> out;
  std::vector<std::size_t> idx(kids.size(), 0);
  std::vector<BehavioralVector> args(kids.size());
  std::vector<const BehavioralVector*> ptrs(kids.size());
  for (;;) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      ptrs[i] = &space.get(kids[i][idx[i]].first);
      size += kids[i][idx[i]].second.size();
    }
    Entry e = space.intern(space.apply(t.symbol(), ptrs));
    offer<Entry>(out, e, [&] {
      std::vector<Term> a;
      for (std::size_t i = 0; i < kids.size(); ++i) a.push_back(kids[i][idx[i]].second);
      return Term::app(t.symbol(), std::move(a));
    }, size);
    std::size_t j = kids.size();
    while (j > 0 && ++idx[j - 1] == kids[j - 1].size()) idx[--j] = 0;
    if (j == 0) break;
  }
  return out;
}

}  // namespace

RecursionTable behavioral_table(const MacroGrammar& extended, const LearningInstance& inst,
                                const ResourceLimits& limits) {
  extended.validate();
  require_regular(extended);
  inst.validate();
  if (!(extended.alphabet == inst.alphabet()))
    throw Error("grammar and instance use different alphabets");
  RecursionTable t;
  t.mode = RecursionTable::Mode::vectors;
  t.columns = table_columns(extended);
  std::size_t domain = 1;
  for (std::size_t i = 0; i < inst.size(); ++i) domain = saturating_mul(domain, inst.example(i).domain_size());
  t.bound = saturating_mul(t.columns.size(), domain);
  VectorSpace space(inst);
  auto col = column_index(t.columns);
  using Entry = RecursionTable::Entry;
  const std::size_t k = t.columns.size();
  auto step = [&](const std::vector<Reach<Entry>>& z) {
    std::vector<Reach<Entry>> out(k);
    for (const Rule& rule : extended.rules) {
      std::size_t j = col.at(rule.lhs);
      for (const auto& [e, w] : eval_vectors(space, rule.rhs, col, z))
        offer<Entry>(out[j], e, [&] { return w; }, w.size());
    }
    return out;
  };
  t = iterate(std::move(t), step, limits);
  for (Entry e = 0; e < space.size(); ++e) {
    t.labels[e] = vector_label(space.get(e), inst);
    if (space.generalizing(space.get(e))) t.f1.insert(e);
    if (space.non_generalizing(space.get(e))) t.f2.insert(e);
  }
  return t;
}

RecursionTable behavioral_table(const MacroGrammar& g, const MacroGrammar& base,
                                const LearningInstance& inst, const ResourceLimits& limits) {
  return behavioral_table(extend(g, base), inst, limits);
}

namespace {

std::optional<std::pair<std::size_t, RecursionTable::Entry>> first_hit(
    const RecursionTable& t, const std::set<RecursionTable::Entry>& f) {
  if (t.columns.empty()) return std::nullopt;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (RecursionTable::Entry e : t.cell(i, 0))
      if (f.count(e)) return std::make_pair(i, e);
  return std::nullopt;
}

std::string describe_hit(const RecursionTable& t, RecursionTable::Entry e) {
  const Term* w = t.witness(0, e);
  return w ? w->to_string() : t.labels.at(e);
}

}  // namespace

Verdict acceptable(const RecursionTable& t, const std::set<RecursionTable::Entry>& f1,
                   const std::set<RecursionTable::Entry>& f2, AcceptOptions options) {
  Verdict v;
  auto gen = first_hit(t, f1);
  auto bad = first_hit(t, f2);
  if (gen) {
    v.row = gen->first;
    if (const Term* w = t.witness(0, gen->second)) v.witness = *w;
  }
  if (bad) {
    v.blocking_row = bad->first;
    if (const Term* w = t.witness(0, bad->second)) v.blocking_witness = *w;
  }
  if (!gen) {
    v.reason = "no generalizing value in any row";
    return v;
  }
  bool blocked = bad && (options.nonstrict_tie ? bad->first <= gen->first : bad->first < gen->first);
  if (blocked) {
    v.reason = "non-generalizing first at row " + std::to_string(bad->first) + " (" +
               describe_hit(t, bad->second) + "), before generalizing row " +
               std::to_string(gen->first);
    return v;
  }
  v.accepted = true;
  v.reason = "generalizing at row " + std::to_string(gen->first) + " (" +
             describe_hit(t, gen->second) + ")";
  return v;
}

Verdict acceptable(const RecursionTable& t, AcceptOptions options) {
  return acceptable(t, t.f1, t.f2, options);
}

Verdict adequate(const RecursionTable& t) {
  Verdict v;
  if (auto gen = first_hit(t, t.f1)) {
    v.accepted = true;
    v.row = gen->first;
    if (const Term* w = t.witness(0, gen->second)) v.witness = *w;
    v.reason = "generalizing at row " + std::to_string(gen->first) + " (" +
               describe_hit(t, gen->second) + ")";
  } else {
    v.reason = "no generalizing value in any row";
  }
  return v;
}

Ordering parse_ordering(const std::string& name) {
  if (name == "adequate") return Ordering::adequate;
  if (name == "depth") return Ordering::depth;
  throw Error("unknown ordering '" + name + "' (expected adequate or depth)");
}

std::string to_string(Ordering o) { return o == Ordering::adequate ? "adequate" : "depth"; }

Verdict solves_grammar(const MacroGrammar& extended, const InstanceAutomata& automata,
                       Ordering ordering, const ResourceLimits& limits) {
  RecursionTable t = recursion_table(extended, automata, limits);
  return ordering == Ordering::depth ? acceptable(t) : adequate(t);
}

Verdict solves_grammar(const MacroGrammar& g, const MacroGrammar& base,
                       const LearningInstance& inst, Ordering ordering,
                       const ResourceLimits& limits) {
  return solves_grammar(extend(g, base), instance_automata(inst), ordering, limits);
}

}  // namespace dslsynth
