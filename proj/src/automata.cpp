// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/automata.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace dslsynth {

// ---------------------------------------------------------------------------
// Nta

namespace {
const std::vector<std::uint32_t> kNoTransitions;
}

StateId Nta::add_state(std::string label) {
  if (label.empty()) label = "q" + std::to_string(labels_.size());
  labels_.push_back(std::move(label));
  return static_cast<StateId>(labels_.size() - 1);
}

void Nta::add_initial(StateId q) {
  if (q >= num_states()) throw Error("initial state not declared");
  if (!is_initial(q)) initial_.push_back(q);
}

bool Nta::is_initial(StateId q) const {
  return std::find(initial_.begin(), initial_.end(), q) != initial_.end();
}

void Nta::add_transition(StateId from, Symbol symbol, std::vector<StateId> children) {
  auto arity = alphabet_.arity(symbol);
  if (!arity) throw Error("transition on undeclared symbol '" + symbol.name() + "'");
  if (static_cast<std::size_t>(*arity) != children.size())
    throw Error("transition arity mismatch for '" + symbol.name() + "'");
  if (from >= num_states()) throw Error("transition from undeclared state");
  for (StateId c : children)
    if (c >= num_states()) throw Error("transition to undeclared state");
  auto idx = static_cast<std::uint32_t>(transitions_.size());
  transitions_.push_back({from, symbol, std::move(children)});
  from_[key(from, symbol)].push_back(idx);
  on_[symbol.id()].push_back(idx);
  tuple_index_.reset();
}

const std::vector<std::uint32_t>& Nta::transitions_from(StateId q, Symbol f) const {
  auto it = from_.find(key(q, f));
  return it == from_.end() ? kNoTransitions : it->second;
}

const std::vector<std::uint32_t>& Nta::transitions_on(Symbol f) const {
  auto it = on_.find(f.id());
  return it == on_.end() ? kNoTransitions : it->second;
}

void Nta::for_each_up(Symbol f, const std::vector<const StateSet*>& kids,
                      const std::function<void(const Transition&)>& fn) const {
  const auto& on = transitions_on(f);
  if (on.empty()) return;
  double tuples = 1;
  for (const StateSet* k : kids) tuples *= static_cast<double>(k->count());
  if (tuples == 0) return;
  if (kids.empty() || tuples * 4 > static_cast<double>(on.size())) {
    for (std::uint32_t i : on) {
      const Transition& tr = transitions_[i];
      bool ok = tr.children.size() == kids.size();
      for (std::size_t k = 0; ok && k < kids.size(); ++k) ok = kids[k]->test(tr.children[k]);
      if (ok) fn(tr);
    }
    return;
  }
  std::shared_ptr<const TupleIndex> index;
  {
    std::lock_guard<std::mutex> lock(*index_mu_);
    if (!tuple_index_) {
      auto built = std::make_shared<TupleIndex>();
      for (std::uint32_t i = 0; i < transitions_.size(); ++i) {
        std::vector<StateId> k{transitions_[i].symbol.id()};
        k.insert(k.end(), transitions_[i].children.begin(), transitions_[i].children.end());
        (*built)[std::move(k)].push_back(i);
      }
      tuple_index_ = std::move(built);
    }
    index = tuple_index_;
  }
  std::vector<std::vector<StateId>> members(kids.size());
  for (std::size_t k = 0; k < kids.size(); ++k)
    for (auto b = kids[k]->find_first(); b != StateSet::npos; b = kids[k]->find_next(b))
      members[k].push_back(static_cast<StateId>(b));
  std::vector<std::size_t> idx(kids.size(), 0);
  std::vector<StateId> probe(kids.size() + 1);
  probe[0] = f.id();
  for (;;) {
    for (std::size_t k = 0; k < kids.size(); ++k) probe[k + 1] = members[k][idx[k]];
    if (auto it = index->find(probe); it != index->end())
      for (std::uint32_t i : it->second) fn(transitions_[i]);
    std::size_t j = kids.size();
    while (j > 0 && ++idx[j - 1] == members[j - 1].size()) idx[--j] = 0;
    if (j == 0) break;
  }
}

StateSet Nta::run_states(const Term& t) const {
  std::vector<StateSet> kids;
  kids.reserve(t.arity());
  for (const Term& c : t.children()) kids.push_back(run_states(c));
  StateSet out(num_states());
  if (t.is_param()) return out;
  std::vector<const StateSet*> ptrs;
  for (const StateSet& k : kids) ptrs.push_back(&k);
  for_each_up(t.symbol(), ptrs, [&](const Transition& tr) { out.set(tr.from); });
  return out;
}

bool Nta::accepts(const Term& t) const {
  StateSet s = run_states(t);
  for (StateId q : initial_)
    if (s.test(q)) return true;
  return false;
}

bool nta_membership(const Term& t, const Nta& a) { return a.accepts(t); }

Nta nta_from_grammar(const MacroGrammar& g) {
  g.validate();
  if (!g.is_regular()) throw Error("nta_from_grammar requires a regular grammar");
  Nta a(g.alphabet);
  std::map<Symbol, StateId> state;
  for (const auto& [n, arity] : g.nonterminals.entries()) state[n] = a.add_state(n.name());

  std::map<Symbol, std::vector<Nta::Transition>> own;
  std::map<Symbol, std::set<Symbol>> unit;
  std::function<void(StateId, Symbol, const Term&)> build = [&](StateId q, Symbol owner,
                                                                const Term& t) {
    std::vector<StateId> kids;
    for (const Term& c : t.children()) {
      if (g.is_nonterminal(c.symbol())) {
        kids.push_back(state.at(c.symbol()));
      } else {
        StateId s = a.add_state(owner.name() + "@" + c.to_string());
        build(s, owner, c);
        kids.push_back(s);
      }
    }
    a.add_transition(q, t.symbol(), kids);
    if (q == state.at(owner)) own[owner].push_back({q, t.symbol(), kids});
  };
  for (const Rule& r : g.rules) {
    if (g.is_nonterminal(r.rhs.symbol())) {
      if (r.rhs.symbol() != r.lhs) unit[r.lhs].insert(r.rhs.symbol());
    } else {
      build(state.at(r.lhs), r.lhs, r.rhs);
    }
  }
  for (const auto& [n, direct] : unit) {
    std::set<Symbol> seen(direct.begin(), direct.end());
    std::vector<Symbol> work(direct.begin(), direct.end());
    while (!work.empty()) {
      Symbol m = work.back();
      work.pop_back();
      auto it = unit.find(m);
      if (it == unit.end()) continue;
      for (Symbol x : it->second)
        if (seen.insert(x).second) work.push_back(x);
    }
    seen.erase(n);
    for (Symbol m : seen)
      for (const auto& tr : own[m]) a.add_transition(state.at(n), tr.symbol, tr.children);
  }
  if (!g.start.empty()) a.add_initial(state.at(g.start));
  return a;
}

namespace {

std::vector<std::vector<std::uint32_t>> by_state(const Nta& a) {
  std::vector<std::vector<std::uint32_t>> out(a.num_states());
  for (std::uint32_t i = 0; i < a.transitions().size(); ++i)
    out[a.transitions()[i].from].push_back(i);
  return out;
}

}  // namespace

Nta nta_intersect(const Nta& a, const Nta& b) {
  if (!(a.alphabet() == b.alphabet())) throw Error("nta_intersect: alphabet mismatch");
  Nta out(a.alphabet());
  auto a_by = by_state(a);
  std::map<std::pair<StateId, StateId>, StateId> ids;
  std::vector<std::pair<StateId, StateId>> work;
  auto intern = [&](StateId p, StateId q) {
    auto [it, fresh] = ids.try_emplace({p, q}, 0);
    if (fresh) {
      it->second = out.add_state("(" + a.label(p) + "," + b.label(q) + ")");
      work.push_back({p, q});
    }
    return it->second;
  };
  for (StateId p : a.initial())
    for (StateId q : b.initial()) out.add_initial(intern(p, q));
  for (std::size_t w = 0; w < work.size(); ++w) {
    auto [p, q] = work[w];
    StateId self = ids.at({p, q});
    for (std::uint32_t i : a_by[p]) {
      const auto& ta = a.transitions()[i];
      for (std::uint32_t j : b.transitions_from(q, ta.symbol)) {
        const auto& tb = b.transitions()[j];
        std::vector<StateId> kids;
        for (std::size_t k = 0; k < ta.children.size(); ++k)
          kids.push_back(intern(ta.children[k], tb.children[k]));
        out.add_transition(self, ta.symbol, std::move(kids));
      }
    }
  }
  return out;
}

Nta nta_intersect_all(const std::vector<const Nta*>& parts) {
  if (parts.empty()) throw Error("nta_intersect_all: no automata");
  for (const Nta* p : parts)
    if (!(p->alphabet() == parts.front()->alphabet()))
      throw Error("nta_intersect_all: alphabet mismatch");
  const std::size_t n = parts.size();
  Nta out(parts.front()->alphabet());
  std::map<std::vector<StateId>, StateId> ids;
  std::vector<std::vector<StateId>> work;
  auto intern = [&](const std::vector<StateId>& tuple) {
    auto [it, fresh] = ids.try_emplace(tuple, 0);
    if (fresh) {
      std::string label = "(";
      for (std::size_t i = 0; i < n; ++i) label += (i ? "," : "") + parts[i]->label(tuple[i]);
      it->second = out.add_state(label + ")");
      work.push_back(tuple);
    }
    return it->second;
  };
  std::vector<std::vector<StateId>> inits(1);
  for (const Nta* p : parts) {
    std::vector<std::vector<StateId>> next;
    for (const auto& prefix : inits)
      for (StateId q : p->initial()) {
        next.push_back(prefix);
        next.back().push_back(q);
      }
    inits = std::move(next);
  }
  for (const auto& t : inits) out.add_initial(intern(t));
  for (std::size_t w = 0; w < work.size(); ++w) {
    const std::vector<StateId> tuple = work[w];
    const StateId self = ids.at(tuple);
    for (const auto& [f, arity] : out.alphabet().entries()) {
      std::vector<const std::vector<std::uint32_t>*> lists;
      for (std::size_t i = 0; i < n; ++i) lists.push_back(&parts[i]->transitions_from(tuple[i], f));
      if (std::any_of(lists.begin(), lists.end(), [](const auto* l) { return l->empty(); })) continue;
      std::vector<std::size_t> idx(n, 0);
      for (;;) {
        std::vector<StateId> kids;
        for (int c = 0; c < arity; ++c) {
          std::vector<StateId> child(n);
          for (std::size_t i = 0; i < n; ++i)
            child[i] = parts[i]->transitions()[(*lists[i])[idx[i]]].children[c];
          kids.push_back(intern(child));
        }
        out.add_transition(self, f, std::move(kids));
        std::size_t j = n;
        while (j > 0 && ++idx[j - 1] == lists[j - 1]->size()) idx[--j] = 0;
        if (j == 0) break;
      }
    }
  }
  return out;
}

Nta nta_union(const Nta& a, const Nta& b) {
  if (!(a.alphabet() == b.alphabet())) throw Error("nta_union: alphabet mismatch");
  Nta out(a.alphabet());
  for (StateId q = 0; q < a.num_states(); ++q) out.add_state("L:" + a.label(q));
  auto off = static_cast<StateId>(a.num_states());
  for (StateId q = 0; q < b.num_states(); ++q) out.add_state("R:" + b.label(q));
  for (const auto& t : a.transitions()) out.add_transition(t.from, t.symbol, t.children);
  for (const auto& t : b.transitions()) {
    std::vector<StateId> kids = t.children;
    for (StateId& k : kids) k += off;
    out.add_transition(t.from + off, t.symbol, std::move(kids));
  }
  for (StateId q : a.initial()) out.add_initial(q);
  for (StateId q : b.initial()) out.add_initial(q + off);
  return out;
}

namespace {

std::vector<bool> productive_states(const Nta& a) {
  std::vector<bool> prod(a.num_states(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& t : a.transitions()) {
      if (prod[t.from]) continue;
      if (std::all_of(t.children.begin(), t.children.end(), [&](StateId c) { return prod[c]; })) {
        prod[t.from] = true;
        changed = true;
      }
    }
  }
  return prod;
}

}  // namespace

Nta nta_trim(const Nta& a) {
  auto prod = productive_states(a);
  auto by = by_state(a);
  std::vector<StateId> remap(a.num_states(), kNoNode);
  Nta out(a.alphabet());
  std::vector<StateId> work;
  auto visit = [&](StateId q) {
    if (remap[q] == kNoNode) {
      remap[q] = out.add_state(a.label(q));
      work.push_back(q);
    }
    return remap[q];
  };
  for (StateId q : a.initial())
    if (prod[q]) out.add_initial(visit(q));
  for (std::size_t w = 0; w < work.size(); ++w) {
    StateId q = work[w];
    for (std::uint32_t i : by[q]) {
      const auto& t = a.transitions()[i];
      if (!std::all_of(t.children.begin(), t.children.end(), [&](StateId c) { return prod[c]; }))
        continue;
      std::vector<StateId> kids;
      for (StateId c : t.children) kids.push_back(visit(c));
      out.add_transition(remap[q], t.symbol, std::move(kids));
    }
  }
  return out;
}

std::optional<Term> nta_emptiness(const Nta& a) {
  const std::size_t n = a.num_states();
  std::vector<std::optional<Term>> witness(n);
  auto better = [](const Term& x, const Term& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  };
  for (bool changed = true; changed;) {
    changed = false;
    std::map<StateId, Term> found;
    for (const auto& t : a.transitions()) {
      if (witness[t.from]) continue;
      bool ready = std::all_of(t.children.begin(), t.children.end(),
                               [&](StateId c) { return witness[c].has_value(); });
      if (!ready) continue;
      std::vector<Term> kids;
      for (StateId c : t.children) kids.push_back(*witness[c]);
      Term cand = Term::app(t.symbol, std::move(kids));
      auto it = found.find(t.from);
      if (it == found.end())
        found.emplace(t.from, cand);
      else if (better(cand, it->second))
        it->second = cand;
    }
    for (auto& [q, term] : found) {
      witness[q] = term;
      changed = true;
    }
    std::optional<Term> best;
    for (StateId q : a.initial())
      if (witness[q] && (!best || better(*witness[q], *best))) best = witness[q];
    if (best) return best;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// NtaEnumerator

NtaEnumerator::NtaEnumerator(const Nta& a, ResourceLimits limits) : a_(a), limits_(limits) {}

void NtaEnumerator::charge(std::size_t n) {
  stored_ += n;
  if (stored_ > limits_.max_terms) throw ResourceLimit("max_terms", stored_);
}

const std::vector<Term>& NtaEnumerator::from_state(StateId q, std::size_t size) {
  auto key = std::make_pair(q, size);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  std::vector<Term> out;
  if (size > 0) {
    for (const auto& tr : a_.transitions()) {
      if (tr.from != q) continue;
      const std::size_t k = tr.children.size();
      if (k == 0) {
        if (size == 1) out.push_back(Term::leaf(tr.symbol));
        continue;
      }
      if (size - 1 < k) continue;
      std::vector<const std::vector<Term>*> parts(k);
      std::vector<std::size_t> sizes(k, 0);
      std::function<void(std::size_t, std::size_t)> split = [&](std::size_t i, std::size_t left) {
        if (i + 1 == k) {
          sizes[i] = left;
          for (std::size_t c = 0; c < k; ++c) {
            parts[c] = &from_state(tr.children[c], sizes[c]);
            if (parts[c]->empty()) return;
          }
          std::vector<std::size_t> idx(k, 0);
          for (;;) {
            std::vector<Term> kids;
            kids.reserve(k);
            for (std::size_t c = 0; c < k; ++c) kids.push_back((*parts[c])[idx[c]]);
            out.push_back(Term::app(tr.symbol, std::move(kids)));
            charge(1);
            std::size_t j = k;
            while (j > 0 && ++idx[j - 1] == parts[j - 1]->size()) idx[--j] = 0;
            if (j == 0) break;
          }
          return;
        }
        for (std::size_t s = 1; s + (k - i - 1) <= left; ++s) {
          sizes[i] = s;
          split(i + 1, left - s);
        }
      };
      split(0, size - 1);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return memo_.emplace(key, std::move(out)).first->second;
}

std::vector<Term> NtaEnumerator::accepted(std::size_t size) {
  std::vector<Term> out;
  for (StateId q : a_.initial()) {
    const auto& part = from_state(q, size);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void NtaEnumerator::for_each(std::size_t max_size, const std::function<bool(const Term&)>& fn) {
  for (std::size_t s = 1; s <= max_size; ++s)
    for (const Term& t : accepted(s))
      if (!fn(t)) return;
}

// ---------------------------------------------------------------------------
// Formula

Formula Formula::top() {
  static const Formula f(std::make_shared<const Node>(Node{Kind::top, 0, 0, {}}));
  return f;
}

Formula Formula::bottom() {
  static const Formula f(std::make_shared<const Node>(Node{Kind::bottom, 0, 0, {}}));
  return f;
}

Formula Formula::atom(int dir, StateId q) {
  return Formula(std::make_shared<const Node>(Node{Kind::atom, dir, q, {}}));
}

Formula Formula::conj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  for (Formula& p : parts) {
    switch (p.kind()) {
      case Kind::bottom: return bottom();
      case Kind::top: break;
      case Kind::conj: flat.insert(flat.end(), p.parts().begin(), p.parts().end()); break;
      default: flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return top();
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const Node>(Node{Kind::conj, 0, 0, std::move(flat)}));
}

Formula Formula::disj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  for (Formula& p : parts) {
    switch (p.kind()) {
      case Kind::top: return top();
      case Kind::bottom: break;
      case Kind::disj: flat.insert(flat.end(), p.parts().begin(), p.parts().end()); break;
      default: flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return bottom();
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const Node>(Node{Kind::disj, 0, 0, std::move(flat)}));
}

bool Formula::evaluate(const std::function<bool(int, StateId)>& atom_value) const {
  switch (kind()) {
    case Kind::top: return true;
    case Kind::bottom: return false;
    case Kind::atom: return atom_value(dir(), state());
    case Kind::conj:
      for (const Formula& p : parts())
        if (!p.evaluate(atom_value)) return false;
      return true;
    case Kind::disj:
      for (const Formula& p : parts())
        if (p.evaluate(atom_value)) return true;
      return false;
  }
  return false;
}

void Formula::for_each_atom(const std::function<void(int, StateId)>& fn) const {
  if (kind() == Kind::atom) fn(dir(), state());
  for (const Formula& p : parts()) p.for_each_atom(fn);
}

Formula Formula::map_atoms(const std::function<Formula(int, StateId)>& fn) const {
  switch (kind()) {
    case Kind::atom: return fn(dir(), state());
    case Kind::conj:
    case Kind::disj: {
      std::vector<Formula> mapped;
      mapped.reserve(parts().size());
      for (const Formula& p : parts()) mapped.push_back(p.map_atoms(fn));
      return kind() == Kind::conj ? conj(std::move(mapped)) : disj(std::move(mapped));
    }
    default: return *this;
  }
}

std::size_t Formula::size() const {
  std::size_t n = 1;
  for (const Formula& p : parts()) n += p.size();
  return n;
}

std::string Formula::to_string() const {
  switch (kind()) {
    case Kind::top: return "true";
    case Kind::bottom: return "false";
    case Kind::atom: {
      std::string d = dir() == kStay ? "stay" : dir() == kUp ? "up" : std::to_string(dir());
      return "(" + d + "," + std::to_string(state()) + ")";
    }
    default: {
      std::string s = "(";
      for (std::size_t i = 0; i < parts().size(); ++i) {
        if (i) s += kind() == Kind::conj ? " & " : " | ";
        s += parts()[i].to_string();
      }
      return s + ")";
    }
  }
}

Formula dual(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::top: return Formula::bottom();
    case K::bottom: return Formula::top();
    case K::atom: return f;
    default: {
      std::vector<Formula> parts;
      for (const Formula& p : f.parts()) parts.push_back(dual(p));
      return f.kind() == K::conj ? Formula::disj(std::move(parts)) : Formula::conj(std::move(parts));
    }
  }
}

Formula adorn(const Formula& f, const std::function<StateId(StateId, int)>& state_for) {
  return f.map_atoms([&](int dir, StateId q) {
    return dir >= 1 ? Formula::stay(state_for(q, dir)) : Formula::atom(dir, q);
  });
}

Formula nta_formula(const Nta& a, StateId q, Symbol f) {
  std::vector<Formula> alts;
  for (std::uint32_t i : a.transitions_from(q, f)) {
    const auto& t = a.transitions()[i];
    std::vector<Formula> cs;
    for (std::size_t k = 0; k < t.children.size(); ++k)
      cs.push_back(Formula::atom(static_cast<int>(k) + 1, t.children[k]));
    alts.push_back(Formula::conj(std::move(cs)));
  }
  return Formula::disj(std::move(alts));
}

// ---------------------------------------------------------------------------
// TreeView and fixed-tree membership

TreeView::TreeView(const Term& t) {
  std::vector<std::pair<const Term*, NodeId>> stack{{&t, kNoNode}};
  while (!stack.empty()) {
    auto [term, parent] = stack.back();
    stack.pop_back();
    auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({*term, parent, {}});
    if (parent != kNoNode) nodes_[parent].children.push_back(id);
    for (std::size_t i = term->arity(); i-- > 0;) stack.push_back({&term->child(i), id});
  }
}

NodeId TreeView::move(NodeId n, int dir) const {
  if (dir == kStay) return n;
  if (dir == kUp) return nodes_[n].parent;
  const auto& kids = nodes_[n].children;
  return static_cast<std::size_t>(dir) <= kids.size() ? kids[dir - 1] : kNoNode;
}

class AtaEvaluator::Impl {
 public:
  Impl(const TwoWayAta& a, const Term& t, ResourceLimits limits)
      : a_(a), tree_(t), limits_(limits) {}

  bool accepts() {
    for (StateId q : a_.initial())
      if (holds(tree_.root(), q)) return true;
    return false;
  }

  bool holds(NodeId n, StateId q) {
    if (n == kNoNode) return false;
    auto k = key(n, q);
    if (auto it = final_.find(k); it != final_.end()) return it->second;
    solve(n, q);
    return final_.at(k);
  }

  std::size_t configurations() const { return final_.size(); }

 private:
  class LocalGuide : public Guide {
   public:
    LocalGuide(Impl& impl, NodeId n) : impl_(impl), n_(n) {}
    const TreeView& tree() const override { return impl_.tree_; }
    NodeId node() const override { return n_; }
    bool holds(NodeId n, StateId q) const override { return impl_.holds(n, q); }

   private:
    Impl& impl_;
    NodeId n_;
  };

  struct Config {
    NodeId node;
    StateId state;
    Formula formula;
    bool value = false;
    bool resolved = false;  // already final when its turn came
    std::uint32_t root = 0;  // gate of the formula
    std::vector<std::uint32_t> watchers;  // atom gates reading this config
  };

  // Formulas are flattened into AND/OR gates with countdowns so that every
  // gate fires at most once.
  struct Gate {
    std::uint32_t parent;
    std::uint32_t remaining;  // children still false (conj) or 1 (disj, atom)
    bool value = false;
  };
  static constexpr std::uint32_t kRootGate = ~std::uint32_t{0};

  static std::uint64_t key(NodeId n, StateId q) { return (std::uint64_t{n} << 32) | q; }

  void solve(NodeId n0, StateId q0) {
    std::vector<Config> cfgs;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    auto add = [&](NodeId n, StateId q) {
      auto [it, fresh] = index.try_emplace(key(n, q), static_cast<std::uint32_t>(cfgs.size()));
      if (fresh) {
        cfgs.push_back({n, q, Formula::bottom(), false, false, 0, {}});
        if (++explored_ > limits_.max_configurations)
          throw ResourceLimit("max_configurations", explored_);
      }
      return it->second;
    };
    add(n0, q0);
    for (std::uint32_t i = 0; i < cfgs.size(); ++i) {
      NodeId n = cfgs[i].node;
      StateId q = cfgs[i].state;
      auto k = key(n, q);
      if (auto it = final_.find(k); it != final_.end()) {
        cfgs[i].resolved = true;
        cfgs[i].value = it->second;
        continue;
      }
      if (!computing_.insert(k).second)
        throw Error("re-entrant guide probe at state " + a_.describe(q));
      Formula f;
      try {
        LocalGuide guide(*this, n);
        f = a_.delta(q, tree_.label(n), &guide);
      } catch (...) {
        computing_.erase(k);
        throw;
      }
      computing_.erase(k);
      cfgs[i].formula = f;
      f.for_each_atom([&](int dir, StateId q2) {
        NodeId m = tree_.move(n, dir);
        if (m == kNoNode || final_.count(key(m, q2))) return;
        add(m, q2);
      });
    }

    std::vector<Gate> gates;
    std::vector<std::uint32_t> owner;  // config of each root gate, or kRootGate
    std::vector<std::uint32_t> fired;
    auto fire = [&](std::uint32_t g) {
      if (gates[g].value) return;
      gates[g].value = true;
      fired.push_back(g);
    };
    using K = Formula::Kind;
    std::function<std::uint32_t(const Formula&, NodeId, std::uint32_t)> build =
        [&](const Formula& f, NodeId n, std::uint32_t parent) -> std::uint32_t {
      auto g = static_cast<std::uint32_t>(gates.size());
      gates.push_back({parent, 1, false});
      owner.push_back(kRootGate);
      switch (f.kind()) {
        case K::top: fire(g); break;
        case K::bottom: break;
        case K::atom: {
          NodeId m = tree_.move(n, f.dir());
          if (m == kNoNode) break;
          auto k = key(m, f.state());
          if (auto it = final_.find(k); it != final_.end()) {
            if (it->second) fire(g);
            break;
          }
          Config& target = cfgs[index.at(k)];
          if (target.resolved) {
            if (target.value) fire(g);
          } else {
            target.watchers.push_back(g);
          }
          break;
        }
        case K::conj:
        case K::disj: {
          gates[g].remaining = f.kind() == K::conj ? static_cast<std::uint32_t>(f.parts().size()) : 1;
          if (gates[g].remaining == 0) fire(g);
          for (const Formula& p : f.parts()) build(p, n, g);
          break;
        }
      }
      return g;
    };
    for (std::uint32_t i = 0; i < cfgs.size(); ++i) {
      if (cfgs[i].resolved) continue;
      cfgs[i].root = build(cfgs[i].formula, cfgs[i].node, kRootGate);
      owner[cfgs[i].root] = i;
      cfgs[i].formula = Formula::bottom();
    }
    while (!fired.empty()) {
      std::uint32_t g = fired.back();
      fired.pop_back();
      if (std::uint32_t p = gates[g].parent; p != kRootGate) {
        if (!gates[p].value && --gates[p].remaining == 0) fire(p);
      } else if (std::uint32_t i = owner[g]; i != kRootGate) {
        cfgs[i].value = true;
        for (std::uint32_t w : cfgs[i].watchers) fire(w);
      }
    }
    for (const Config& c : cfgs) final_.emplace(key(c.node, c.state), c.value);
  }

  const TwoWayAta& a_;
  TreeView tree_;
  ResourceLimits limits_;
  std::unordered_map<std::uint64_t, bool> final_;
  std::unordered_set<std::uint64_t> computing_;
  std::size_t explored_ = 0;
};

AtaEvaluator::AtaEvaluator(const TwoWayAta& a, const Term& t, ResourceLimits limits)
    : impl_(std::make_unique<Impl>(a, t, limits)) {}
AtaEvaluator::~AtaEvaluator() = default;
bool AtaEvaluator::accepts() { return impl_->accepts(); }
bool AtaEvaluator::holds(NodeId n, StateId q) { return impl_->holds(n, q); }
std::size_t AtaEvaluator::configurations() const { return impl_->configurations(); }

bool ata_membership(const Term& t, const TwoWayAta& a, const ResourceLimits& limits) {
  return AtaEvaluator(a, t, limits).accepts();
}

// ---------------------------------------------------------------------------
// Subtree summaries

namespace {

using Cube = std::vector<std::uint32_t>;  // sorted local state indices
using Dnf = std::vector<Cube>;            // antichain, sorted

bool subset(const Cube& a, const Cube& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Dnf minimize(Dnf d) {
  std::sort(d.begin(), d.end(), [](const Cube& a, const Cube& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  d.erase(std::unique(d.begin(), d.end()), d.end());
  Dnf out;
  for (Cube& c : d)
    if (std::none_of(out.begin(), out.end(), [&](const Cube& o) { return subset(o, c); }))
      out.push_back(std::move(c));
  std::sort(out.begin(), out.end());
  return out;
}

Dnf dnf_or(const Dnf& a, const Dnf& b) {
  Dnf d = a;
  d.insert(d.end(), b.begin(), b.end());
  return minimize(std::move(d));
}

Dnf dnf_and(const Dnf& a, const Dnf& b) {
  Dnf d;
  for (const Cube& x : a)
    for (const Cube& y : b) {
      Cube c;
      std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(c));
      d.push_back(std::move(c));
    }
  return minimize(std::move(d));
}

const Dnf kTrue{Cube{}};
const Dnf kFalse{};

}  // namespace

class SummaryAutomaton::Impl {
 public:
  Impl(const TwoWayAta& a, RankedAlphabet symbols, ResourceLimits limits)
      : a_(a), symbols_(symbols.size() ? std::move(symbols) : a.alphabet()), limits_(limits) {
    for (StateId q : a_.initial()) initial_.push_back(local(q));
    for (std::uint32_t i = 0; i < global_.size(); ++i) {
      for (const auto& [f, arity] : symbols_.entries()) {
        Formula phi = a_.delta(global_[i], f, nullptr);
        phi.for_each_atom([&](int dir, StateId q) {
          if (dir <= arity) local(q);
        });
        delta_[{i, f}] = phi;
      }
    }
  }

  SummaryId step(Symbol f, const std::vector<SummaryId>& kids) {
    auto memo_key = std::make_pair(f, kids);
    if (auto it = steps_.find(memo_key); it != steps_.end()) return it->second;
    const int arity = symbols_.arity_of(f);
    if (static_cast<std::size_t>(arity) != kids.size()) throw Error("summary step arity mismatch");
    const std::size_t n = global_.size();
    std::vector<Dnf> x(n, kFalse);
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<Dnf> next(n);
      for (std::uint32_t p = 0; p < n; ++p) next[p] = eval(delta_.at({p, f}), x, kids, arity);
      if (next != x) {
        x = std::move(next);
        changed = true;
      }
    }
    auto [it, fresh] = ids_.try_emplace(x, static_cast<SummaryId>(summaries_.size()));
    if (fresh) {
      summaries_.push_back(x);
      if (summaries_.size() > limits_.max_states)
        throw ResourceLimit("max_states", summaries_.size());
    }
    steps_.emplace(std::move(memo_key), it->second);
    return it->second;
  }

  bool accepting(SummaryId s) const {
    for (std::uint32_t q : initial_) {
      const Dnf& d = summaries_.at(s)[q];
      if (!d.empty() && d.front().empty()) return true;
    }
    return false;
  }

  std::size_t num_summaries() const { return summaries_.size(); }
  std::size_t num_states() const { return global_.size(); }
  const RankedAlphabet& symbols() const { return symbols_; }

 private:
  std::uint32_t local(StateId q) {
    auto [it, fresh] = local_.try_emplace(q, static_cast<std::uint32_t>(global_.size()));
    if (fresh) {
      global_.push_back(q);
      if (global_.size() > limits_.max_states) throw ResourceLimit("max_states", global_.size());
    }
    return it->second;
  }

  Dnf eval(const Formula& phi, const std::vector<Dnf>& x, const std::vector<SummaryId>& kids,
           int arity) const {
    using K = Formula::Kind;
    switch (phi.kind()) {
      case K::top: return kTrue;
      case K::bottom: return kFalse;
      case K::conj: {
        Dnf acc = kTrue;
        for (const Formula& p : phi.parts()) {
          acc = dnf_and(acc, eval(p, x, kids, arity));
          if (acc.empty()) break;
        }
        return acc;
      }
      case K::disj: {
        Dnf acc = kFalse;
        for (const Formula& p : phi.parts()) acc = dnf_or(acc, eval(p, x, kids, arity));
        return acc;
      }
      case K::atom: {
        const int dir = phi.dir();
        if (dir > arity) return kFalse;
        const std::uint32_t q = local_.at(phi.state());
        if (dir == kStay) return x[q];
        if (dir == kUp) return Dnf{Cube{q}};
        Dnf acc = kFalse;
        for (const Cube& c : summaries_[kids[dir - 1]][q]) {
          Dnf term = kTrue;
          for (std::uint32_t p : c) {
            term = dnf_and(term, x[p]);
            if (term.empty()) break;
          }
          acc = dnf_or(acc, term);
        }
        return acc;
      }
    }
    return kFalse;
  }

  const TwoWayAta& a_;
  RankedAlphabet symbols_;
  ResourceLimits limits_;
  std::vector<StateId> global_;
  std::unordered_map<StateId, std::uint32_t> local_;
  std::vector<std::uint32_t> initial_;
  std::map<std::pair<std::uint32_t, Symbol>, Formula> delta_;
  std::vector<std::vector<Dnf>> summaries_;
  std::map<std::vector<Dnf>, SummaryId> ids_;
  std::map<std::pair<Symbol, std::vector<SummaryId>>, SummaryId> steps_;
};

SummaryAutomaton::SummaryAutomaton(const TwoWayAta& a, RankedAlphabet symbols,
                                   ResourceLimits limits)
    : impl_(std::make_unique<Impl>(a, std::move(symbols), limits)) {}
SummaryAutomaton::~SummaryAutomaton() = default;
SummaryAutomaton::SummaryId SummaryAutomaton::step(Symbol f, const std::vector<SummaryId>& kids) {
  return impl_->step(f, kids);
}
bool SummaryAutomaton::accepting(SummaryId s) const { return impl_->accepting(s); }
std::size_t SummaryAutomaton::num_summaries() const { return impl_->num_summaries(); }
std::size_t SummaryAutomaton::num_states() const { return impl_->num_states(); }
const RankedAlphabet& SummaryAutomaton::symbols() const { return impl_->symbols(); }

namespace {

// Calls fn for every tuple drawn from the given lists.
template <class T, class Fn>
void for_each_tuple(const std::vector<const std::vector<T>*>& lists, Fn&& fn) {
  for (const auto* l : lists)
    if (l->empty()) return;
  std::vector<std::size_t> idx(lists.size(), 0);
  std::vector<T> tuple(lists.size());
  for (;;) {
    for (std::size_t i = 0; i < lists.size(); ++i) tuple[i] = (*lists[i])[idx[i]];
    fn(tuple);
    std::size_t j = lists.size();
    while (j > 0 && ++idx[j - 1] == lists[j - 1]->size()) idx[--j] = 0;
    if (j == 0) break;
  }
}

}  // namespace

Nta ata_to_nta(const TwoWayAta& a, const ResourceLimits& limits) {
  SummaryAutomaton sa(a, a.alphabet(), limits);
  std::vector<SummaryAutomaton::SummaryId> known;
  std::set<SummaryAutomaton::SummaryId> seen;
  std::set<std::pair<Symbol, std::vector<SummaryAutomaton::SummaryId>>> done;
  std::vector<Nta::Transition> trans;
  for (bool changed = true; changed;) {
    changed = false;
    const std::vector<SummaryAutomaton::SummaryId> snapshot = known;
    for (const auto& [f, arity] : a.alphabet().entries()) {
      std::vector<const std::vector<SummaryAutomaton::SummaryId>*> lists(arity, &snapshot);
      auto visit = [&](const std::vector<SummaryAutomaton::SummaryId>& kids) {
        if (!done.insert({f, kids}).second) return;
        auto s = sa.step(f, kids);
        trans.push_back({s, f, std::vector<StateId>(kids.begin(), kids.end())});
        if (seen.insert(s).second) {
          known.push_back(s);
          changed = true;
        }
      };
      if (arity == 0)
        visit({});
      else
        for_each_tuple(lists, visit);
    }
  }
  Nta out(a.alphabet());
  for (std::size_t s = 0; s < sa.num_summaries(); ++s) out.add_state("S" + std::to_string(s));
  for (auto& t : trans) out.add_transition(t.from, t.symbol, t.children);
  for (std::size_t s = 0; s < sa.num_summaries(); ++s)
    if (sa.accepting(static_cast<SummaryAutomaton::SummaryId>(s)))
      out.add_initial(static_cast<StateId>(s));
  return out;
}

std::optional<Term> ata_product_witness(const Nta& meta, const TwoWayAta& a,
                                        const ResourceLimits& limits) {
  for (const auto& [f, arity] : meta.alphabet().entries())
    if (a.alphabet().arity(f) != arity)
      throw Error("ata_product_witness: symbol '" + f.name() + "' not in the automaton alphabet");
  SummaryAutomaton sa(a, meta.alphabet(), limits);
  using Pair = std::pair<StateId, SummaryAutomaton::SummaryId>;
  std::map<Pair, Term> witness;
  std::vector<std::vector<Pair>> by_state(meta.num_states());
  std::set<std::pair<std::uint32_t, std::vector<Pair>>> done;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::pair<Pair, Term>> fresh;
    auto snapshot = by_state;
    for (std::uint32_t ti = 0; ti < meta.transitions().size(); ++ti) {
      const auto& tr = meta.transitions()[ti];
      std::vector<const std::vector<Pair>*> lists;
      for (StateId c : tr.children) lists.push_back(&snapshot[c]);
      auto visit = [&](const std::vector<Pair>& kids) {
        if (!done.insert({ti, kids}).second) return;
        std::vector<SummaryAutomaton::SummaryId> ss;
        std::vector<Term> ts;
        for (const Pair& k : kids) {
          ss.push_back(k.second);
          ts.push_back(witness.at(k));
        }
        Pair p{tr.from, sa.step(tr.symbol, ss)};
        if (!witness.count(p)) fresh.push_back({p, Term::app(tr.symbol, std::move(ts))});
      };
      if (tr.children.empty())
        visit({});
      else
        for_each_tuple(lists, visit);
    }
    for (auto& [p, t] : fresh) {
      auto [it, inserted] = witness.try_emplace(p, t);
      if (!inserted) {
        if (t.size() < it->second.size() || (t.size() == it->second.size() && t < it->second))
          it->second = t;
        continue;
      }
      by_state[p.first].push_back(p);
      changed = true;
      if (witness.size() > limits.max_states) throw ResourceLimit("max_states", witness.size());
    }
  }
  std::optional<Term> best;
  for (const auto& [p, t] : witness)
    if (meta.is_initial(p.first) && sa.accepting(p.second))
      if (!best || t.size() < best->size() || (t.size() == best->size() && t < *best)) best = t;
  return best;
}

// ---------------------------------------------------------------------------
// AtaIntersection

namespace {

class PartGuide : public Guide {
 public:
  PartGuide(const Guide& outer, std::function<StateId(StateId)> lift)
      : outer_(outer), lift_(std::move(lift)) {}
  const TreeView& tree() const override { return outer_.tree(); }
  NodeId node() const override { return outer_.node(); }
  bool holds(NodeId n, StateId q) const override { return outer_.holds(n, lift_(q)); }

 private:
  const Guide& outer_;
  std::function<StateId(StateId)> lift_;
};

}  // namespace

AtaIntersection::AtaIntersection(std::vector<std::shared_ptr<const TwoWayAta>> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw Error("AtaIntersection needs at least one automaton");
  for (const auto& p : parts_)
    if (!(p->alphabet() == parts_.front()->alphabet()))
      throw Error("AtaIntersection: alphabet mismatch");
}

Formula AtaIntersection::delta(StateId q, Symbol a, const Guide* guide) const {
  if (q == 0) {
    std::vector<Formula> all;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      std::vector<Formula> any;
      for (StateId s : parts_[i]->initial()) any.push_back(Formula::stay(join(i, s)));
      all.push_back(Formula::disj(std::move(any)));
    }
    return Formula::conj(std::move(all));
  }
  auto [i, local] = split(q);
  auto lift = [this, i = i](StateId s) { return join(i, s); };
  Formula f;
  if (guide) {
    PartGuide pg(*guide, lift);
    f = parts_[i]->delta(local, a, &pg);
  } else {
    f = parts_[i]->delta(local, a, nullptr);
  }
  return f.map_atoms([&](int dir, StateId s) { return Formula::atom(dir, lift(s)); });
}

std::string AtaIntersection::describe(StateId q) const {
  if (q == 0) return "iota";
  auto [i, local] = split(q);
  return std::to_string(i) + ":" + parts_[i]->describe(local);
}

std::size_t AtaIntersection::num_states() const {
  std::size_t n = 1;
  for (const auto& p : parts_) n += p->num_states();
  return n;
}

}  // namespace dslsynth
