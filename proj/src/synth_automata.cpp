// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

// Two-way alternating automata over grammar trees.
//
// Values are tagged states: index u < n1 is A1 state u, index n1 + q is A2
// state q. Every construction reads the production spine of the input tree
// and consults the base productions directly when it reaches `end`.

#include <algorithm>
#include <map>
#include <mutex>

#include "dslsynth/synth.hpp"

namespace dslsynth {
namespace {

using GK = GrammarAlphabet::Kind;

/// Caps the number of disjuncts produced by an unguided guess.
constexpr std::size_t kMaxGuesses = std::size_t{1} << 16;

std::size_t hash_term(const Term& t) { return t.valid() ? t.hash() : 0; }

std::size_t hash_sets(const std::vector<StateSet>& v) {
  std::size_t h = v.size();
  for (const auto& s : v) boost::hash_combine(h, boost::hash_value(s));
  return h;
}

/// Rewrites base rules into grammar-alphabet terms (nonterminal leaves
/// become rhs_N).
Term gamma_term(const Term& t, const MacroGrammar& g, const GrammarAlphabet& gamma) {
  if (t.is_param()) return Term::leaf(gamma.param(t.param_index()));
  std::vector<Term> kids;
  for (const Term& c : t.children()) kids.push_back(gamma_term(c, g, gamma));
  return Term::app(g.is_nonterminal(t.symbol()) ? gamma.rhs(t.symbol()) : t.symbol(),
                   std::move(kids));
}

struct Context {
  std::shared_ptr<const InstanceAutomata> ia;
  GrammarAlphabet gamma;
  /// Base productions per column, as grammar-alphabet terms.
  std::vector<std::vector<Term>> base;
  std::size_t n1 = 0, n2 = 0;
  StateSet f1, f2;  // tagged initial states

  Context(std::shared_ptr<const InstanceAutomata> a, const MacroGrammar& b, const NonterminalSet& n)
      : ia(std::move(a)), gamma(ia->a1.alphabet(), n) {
    if (!b.is_regular()) throw Unsupported("the base grammar must be regular");
    for (const auto& [s, ar] : b.nonterminals.entries())
      if (n.arity(s) != ar)
        throw Error("base nonterminal '" + s.name() + "' is not declared with arity " +
                    std::to_string(ar));
    base.resize(gamma.columns().size());
    RankedAlphabet symbols = gamma.base();
    for (const auto& [s, ar] : b.nonterminals.entries()) symbols.add(s, ar);
    for (const Rule& r : b.rules) {
      if (!well_formed_term(r.rhs, symbols))
        throw Error("base rule for '" + r.lhs.name() + "' is not over the alphabet");
      base[gamma.column(r.lhs)].push_back(gamma_term(r.rhs, b, gamma));
    }
    n1 = ia->a1.num_states();
    n2 = ia->a2.num_states();
    f1 = StateSet(n1 + n2);
    f2 = StateSet(n1 + n2);
    for (StateId q : ia->a1.initial()) f1.set(q);
    for (StateId q : ia->a2.initial()) f2.set(n1 + q);
  }

  std::size_t values() const { return n1 + n2; }
  std::size_t columns() const { return gamma.columns().size(); }
  int automaton(StateId u) const { return u < n1 ? 1 : 2; }
  const Nta& nta(StateId u) const { return u < n1 ? ia->a1 : ia->a2; }
  StateId local(StateId u) const { return u < n1 ? u : static_cast<StateId>(u - n1); }
  StateId tag(StateId q, StateId like) const {
    return like < n1 ? q : static_cast<StateId>(q + n1);
  }
  std::string value_name(StateId u) const {
    return std::to_string(automaton(u)) + ":" + nta(u).label(local(u));
  }
  std::string set_name(const StateSet& s) const {
    std::string out = "{";
    for (auto u = s.find_first(); u != StateSet::npos; u = s.find_next(u)) {
      if (out.size() > 1) out += ",";
      out += value_name(static_cast<StateId>(u));
    }
    return out + "}";
  }
  std::string sets_name(const std::vector<StateSet>& v) const {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + set_name(v[i]);
    return out + ")";
  }
  const GrammarAlphabet::Info& info(Symbol a) const { return gamma.classify(a); }
};

/// Disjunction over every subset of `from`, built by `make`.
Formula for_each_subset(const StateSet& from, const std::function<Formula(const StateSet&)>& make) {
  std::vector<std::size_t> bits;
  for (auto u = from.find_first(); u != StateSet::npos; u = from.find_next(u)) bits.push_back(u);
  if (bits.size() >= 16) throw ResourceLimit("unguided guess bits", bits.size());
  std::vector<Formula> alts;
  for (std::size_t mask = 0; mask < (std::size_t{1} << bits.size()); ++mask) {
    StateSet s(from.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (mask >> i & 1) s.set(bits[i]);
    alts.push_back(make(s));
  }
  return Formula::disj(std::move(alts));
}

/// Disjunction over every vector of subsets, one per entry of `from`.
Formula for_each_subsets(const std::vector<StateSet>& from,
                         const std::function<Formula(const std::vector<StateSet>&)>& make) {
  std::size_t total = 0;
  for (const auto& s : from) total += s.count();
  if (total >= 16) throw ResourceLimit("unguided guess bits", total);
  std::vector<StateSet> pick;
  std::vector<Formula> alts;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == from.size()) {
      alts.push_back(make(pick));
      return;
    }
    for_each_subset(from[i], [&](const StateSet& s) {
      pick.push_back(s);
      rec(i + 1);
      pick.pop_back();
      return Formula::bottom();
    });
  };
  rec(0);
  if (alts.size() > kMaxGuesses) throw ResourceLimit("guesses", alts.size());
  return Formula::disj(std::move(alts));
}

template <class Desc, class Hash>
class InternedAta : public TwoWayAta {
 public:
  InternedAta(std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base,
              const NonterminalSet& n)
      : c_(std::move(ia), base, n) {}
  const RankedAlphabet& alphabet() const override { return c_.gamma.symbols(); }
  std::size_t num_states() const override { return states_.size(); }

 protected:
  StateId id(const Desc& d) const { return states_.intern(d); }
  Desc get(StateId q) const { return states_.get(q); }

  Context c_;
  mutable StateInterner<Desc, Hash> states_;
};

// ---------------------------------------------------------------------------
// Adequacy, regular grammars.

struct AdDesc {
  enum Kind : std::uint8_t { start, column, plain, sub };
  Kind kind = start;
  StateId q = 0;  // A1 state
  int col = -1;
  Term alpha;
  friend bool operator==(const AdDesc&, const AdDesc&) = default;
};

struct AdHash {
  std::size_t operator()(const AdDesc& d) const {
    std::size_t h = d.kind;
    boost::hash_combine(h, d.q);
    boost::hash_combine(h, d.col);
    boost::hash_combine(h, hash_term(d.alpha));
    return h;
  }
};

class AdequateAta final : public InternedAta<AdDesc, AdHash> {
 public:
  using InternedAta::InternedAta;

  std::vector<StateId> initial() const override {
    std::vector<StateId> out;
    for (StateId q : c_.ia->a1.initial()) out.push_back(id({AdDesc::start, q, -1, {}}));
    return out;
  }

  std::string describe(StateId s) const override {
    AdDesc d = get(s);
    std::string q = c_.ia->a1.label(d.q);
    switch (d.kind) {
      case AdDesc::start: return "<" + q + ",start>";
      case AdDesc::column: return "<" + q + "," + c_.gamma.columns()[d.col].name() + ">";
      case AdDesc::plain: return q;
      case AdDesc::sub: return "<" + q + "," + d.alpha.to_string() + ">";
    }
    return "?";
  }

  Formula delta(StateId s, Symbol a, const Guide*) const override {
    AdDesc d = get(s);
    const auto& in = c_.info(a);
    switch (d.kind) {
      case AdDesc::start:
        if (in.kind == GK::root) return Formula::atom(kDown, s);
        if (in.kind == GK::lhs) return Formula::stay(id({AdDesc::column, d.q, in.index, {}}));
        return Formula::bottom();
      case AdDesc::column: {
        Formula up = Formula::atom(kUp, s);
        Formula base = base_alternatives(d.q, d.col);
        if (in.kind == GK::lhs && in.index != d.col) return up || Formula::atom(kRight, s);
        if (in.kind == GK::lhs)
          return Formula::disj({up, Formula::atom(kLeft, id({AdDesc::plain, d.q, -1, {}})),
                                Formula::atom(kRight, s), base});
        return up || base;
      }
      case AdDesc::plain:
        if (in.kind == GK::base)
          return nta_formula(c_.ia->a1, d.q, a).map_atoms([&](int dir, StateId q) {
            return Formula::atom(dir, id({AdDesc::plain, q, -1, {}}));
          });
        if (in.kind == GK::rhs && c_.gamma.symbols().arity_of(a) == 0)
          return Formula::stay(id({AdDesc::column, d.q, in.index, {}}));
        return Formula::bottom();
      case AdDesc::sub: {
        const auto& sin = c_.info(d.alpha.symbol());
        if (sin.kind == GK::rhs)
          return Formula::stay(id({AdDesc::column, d.q, sin.index, {}})) ||
                 base_alternatives(d.q, sin.index);
        return adorn(nta_formula(c_.ia->a1, d.q, d.alpha.symbol()), [&](StateId q, int i) {
          return id({AdDesc::sub, q, -1, d.alpha.child(i - 1)});
        });
      }
    }
    return Formula::bottom();
  }

 private:
  Formula base_alternatives(StateId q, int col) const {
    std::vector<Formula> alts;
    for (const Term& alpha : c_.base[col]) alts.push_back(Formula::stay(id({AdDesc::sub, q, -1, alpha})));
    return Formula::disj(std::move(alts));
  }
};

// ---------------------------------------------------------------------------
// Depth ordering, regular grammars.

struct DsDesc {
  enum Kind : std::uint8_t {
    reset, start, row, prod,
    hit, hit_node, hit_base, hit_base_node,
    miss, miss_node, miss_base, miss_base_node,
    solve, ok,
  };
  Kind kind = reset;
  std::vector<StateSet> L, C, W, R;
  StateSet U;
  int i = -1;
  StateId u = 0;
  Term alpha;
  friend bool operator==(const DsDesc&, const DsDesc&) = default;
};

struct DsHash {
  std::size_t operator()(const DsDesc& d) const {
    std::size_t h = d.kind;
    boost::hash_combine(h, hash_sets(d.L));
    boost::hash_combine(h, hash_sets(d.C));
    boost::hash_combine(h, hash_sets(d.W));
    boost::hash_combine(h, hash_sets(d.R));
    boost::hash_combine(h, boost::hash_value(d.U));
    boost::hash_combine(h, d.i);
    boost::hash_combine(h, d.u);
    boost::hash_combine(h, hash_term(d.alpha));
    return h;
  }
};

std::vector<StateSet> unite(std::vector<StateSet> a, const std::vector<StateSet>& b) {
  for (std::size_t j = 0; j < a.size(); ++j) a[j] |= b[j];
  return a;
}

bool all_empty(const std::vector<StateSet>& v) {
  return std::all_of(v.begin(), v.end(), [](const StateSet& s) { return s.none(); });
}

class DslsynthAta final : public InternedAta<DsDesc, DsHash> {
 public:
  using InternedAta::InternedAta;

  std::vector<StateId> initial() const override {
    std::vector<StateSet> none(c_.columns(), StateSet(c_.values()));
    std::vector<StateSet> full = none;
    for (auto& s : full) s.set();
    DsDesc d;
    d.kind = DsDesc::reset;
    d.L = none;
    d.C = none;
    d.R = full;
    return {id(d)};
  }

  std::string describe(StateId s) const override {
    DsDesc d = get(s);
    auto L = c_.sets_name(d.L);
    switch (d.kind) {
      case DsDesc::reset: return "<" + L + "," + c_.sets_name(d.C) + "," + c_.sets_name(d.R) + ",reset>";
      case DsDesc::start: return "<" + L + "," + c_.sets_name(d.C) + "," + c_.sets_name(d.R) + ",start>";
      case DsDesc::row:
        return "<" + L + "," + c_.sets_name(d.C) + "," + c_.sets_name(d.R) + "," +
               std::to_string(d.i) + ",row>";
      case DsDesc::prod:
        return "<" + L + "," + c_.sets_name(d.C) + "," + c_.sets_name(d.W) + "," +
               c_.sets_name(d.R) + "," + std::to_string(d.i) + ",prod>";
      case DsDesc::hit: return "<" + L + "," + c_.set_name(d.U) + ",hit>";
      case DsDesc::miss: return "<" + L + "," + c_.set_name(d.U) + ",miss>";
      case DsDesc::hit_node: return "<" + c_.value_name(d.u) + "," + L + ",hit>";
      case DsDesc::miss_node: return "<" + c_.value_name(d.u) + "," + L + ",miss>";
      case DsDesc::hit_base:
        return "<" + L + "," + c_.set_name(d.U) + "," + d.alpha.to_string() + ",hit>";
      case DsDesc::miss_base:
        return "<" + L + "," + c_.set_name(d.U) + "," + d.alpha.to_string() + ",miss>";
      case DsDesc::hit_base_node:
        return "<" + c_.value_name(d.u) + "," + L + "," + d.alpha.to_string() + ",hit>";
      case DsDesc::miss_base_node:
        return "<" + c_.value_name(d.u) + "," + L + "," + d.alpha.to_string() + ",miss>";
      case DsDesc::solve: return "solve" + c_.set_name(d.U);
      case DsDesc::ok: return "ok" + c_.set_name(d.U);
    }
    return "?";
  }

  Formula delta(StateId s, Symbol a, const Guide* guide) const override {
    DsDesc d = get(s);
    const auto& in = c_.info(a);
    switch (d.kind) {
      case DsDesc::reset:
        if (in.kind == GK::root) {
          d.kind = DsDesc::start;
          return Formula::atom(kDown, id(d));
        }
        return Formula::atom(kUp, s);
      case DsDesc::start:
        if (in.kind != GK::lhs) return Formula::bottom();
        d.kind = DsDesc::row;
        d.i = in.index;
        return Formula::stay(id(d));
      case DsDesc::row: return row(d, guide);
      case DsDesc::prod: return prod(d, in, guide);
      case DsDesc::hit:
      case DsDesc::miss:
      case DsDesc::hit_base:
      case DsDesc::miss_base: {
        auto node_kind = static_cast<DsDesc::Kind>(d.kind + 1);
        std::vector<Formula> parts;
        for (auto u = d.U.find_first(); u != StateSet::npos; u = d.U.find_next(u))
          parts.push_back(Formula::stay(single(node_kind, d.L, static_cast<StateId>(u), d.alpha)));
        return Formula::conj(std::move(parts));
      }
      case DsDesc::hit_node:
      case DsDesc::miss_node: {
        bool is_hit = d.kind == DsDesc::hit_node;
        if (in.kind == GK::base) {
          Formula f = nta_formula(c_.nta(d.u), c_.local(d.u), a);
          if (!is_hit) f = dual(f);
          return f.map_atoms([&](int dir, StateId q) {
            return Formula::atom(dir, single(d.kind, d.L, c_.tag(q, d.u), {}));
          });
        }
        if (in.kind == GK::rhs && c_.gamma.symbols().arity_of(a) == 0)
          return d.L[in.index].test(d.u) == is_hit ? Formula::top() : Formula::bottom();
        return Formula::bottom();
      }
      case DsDesc::hit_base_node:
      case DsDesc::miss_base_node: {
        bool is_hit = d.kind == DsDesc::hit_base_node;
        const auto& ain = c_.info(d.alpha.symbol());
        if (ain.kind == GK::rhs)
          return d.L[ain.index].test(d.u) == is_hit ? Formula::top() : Formula::bottom();
        Formula f = nta_formula(c_.nta(d.u), c_.local(d.u), d.alpha.symbol());
        if (!is_hit) f = dual(f);
        return adorn(f, [&](StateId q, int i) {
          return single(d.kind, d.L, c_.tag(q, d.u), d.alpha.child(i - 1));
        });
      }
      case DsDesc::solve: return (d.U & c_.f1).any() ? Formula::top() : Formula::bottom();
      case DsDesc::ok: return (d.U & c_.f2).none() ? Formula::top() : Formula::bottom();
    }
    return Formula::bottom();
  }

 private:
  StateId single(DsDesc::Kind k, const std::vector<StateSet>& L, StateId u, Term alpha) const {
    DsDesc d;
    d.kind = k;
    d.L = L;
    d.u = u;
    d.alpha = std::move(alpha);
    return id(d);
  }
  StateId group(DsDesc::Kind k, const std::vector<StateSet>& L, StateSet U, Term alpha = {}) const {
    DsDesc d;
    d.kind = k;
    d.L = L;
    d.U = std::move(U);
    d.alpha = std::move(alpha);
    return id(d);
  }

  /// Values of R reached by some production of the tree or the base.
  std::vector<StateSet> reached(const std::vector<StateSet>& L, const std::vector<StateSet>& R,
                                const Guide& g) const {
    std::vector<StateSet> out(c_.columns(), StateSet(c_.values()));
    const TreeView& t = g.tree();
    NodeId n = t.children(t.root()).at(0);
    while (c_.info(t.label(n)).kind == GK::lhs) {
      int j = c_.info(t.label(n)).index;
      NodeId left = t.children(n)[0];
      for (auto u = R[j].find_first(); u != StateSet::npos; u = R[j].find_next(u))
        if (!out[j].test(u) && g.holds(left, single(DsDesc::hit_node, L, static_cast<StateId>(u), {})))
          out[j].set(u);
      n = t.children(n)[1];
    }
    for (std::size_t j = 0; j < c_.columns(); ++j)
      for (const Term& alpha : c_.base[j])
        for (auto u = R[j].find_first(); u != StateSet::npos; u = R[j].find_next(u))
          if (!out[j].test(u) &&
              g.holds(n, single(DsDesc::hit_base_node, L, static_cast<StateId>(u), alpha)))
            out[j].set(u);
    return out;
  }

  Formula row(const DsDesc& d, const Guide* guide) const {
    auto L = unite(d.L, d.C);
    auto make = [&](const std::vector<StateSet>& C2) {
      if (all_empty(C2)) return Formula::bottom();
      DsDesc p;
      p.kind = DsDesc::prod;
      p.L = L;
      p.C = C2;
      p.W = C2;
      p.R = d.R;
      for (std::size_t j = 0; j < C2.size(); ++j) p.R[j] -= C2[j];
      p.i = d.i;
      return Formula::stay(id(p));
    };
    if (guide) {
      auto reach = reached(L, d.R, *guide);
      return make(reach);
    }
    return for_each_subsets(d.R, make);
  }

  Formula prod(const DsDesc& d, const GrammarAlphabet::Info& in, const Guide* guide) const {
    if (in.kind == GK::lhs) {
      int j = in.index;
      Formula miss = Formula::atom(kLeft, group(DsDesc::miss, d.L, d.R[j]));
      auto make = [&](const StateSet& U) {
        DsDesc next = d;
        next.C[j] = d.C[j] - U;
        return Formula::conj({Formula::atom(kLeft, group(DsDesc::hit, d.L, U)), miss,
                              Formula::atom(kRight, id(next))});
      };
      if (guide) {
        const TreeView& t = guide->tree();
        NodeId left = t.children(guide->node())[0];
        StateSet U(c_.values());
        for (auto u = d.C[j].find_first(); u != StateSet::npos; u = d.C[j].find_next(u))
          if (guide->holds(left, single(DsDesc::hit_node, d.L, static_cast<StateId>(u), {})))
            U.set(u);
        return make(U);
      }
      return for_each_subset(d.C[j], make);
    }
    if (in.kind != GK::end) return Formula::bottom();
    for (std::size_t j = 0; j < c_.columns(); ++j)
      if (c_.base[j].empty() && d.C[j].any()) return Formula::bottom();
    StateSet cum = d.L[d.i] | d.W[d.i];
    DsDesc again;
    again.kind = DsDesc::reset;
    again.L = d.L;
    again.C = d.W;
    again.R = d.R;
    std::vector<Formula> parts;
    parts.push_back(Formula::stay(group(DsDesc::solve, {}, cum)) ||
                    (Formula::stay(id(again)) && Formula::stay(group(DsDesc::ok, {}, cum))));
    for (std::size_t j = 0; j < c_.columns(); ++j) {
      if (c_.base[j].empty()) continue;
      for (auto u = d.C[j].find_first(); u != StateSet::npos; u = d.C[j].find_next(u)) {
        std::vector<Formula> alts;
        StateSet one(c_.values());
        one.set(u);
        for (const Term& alpha : c_.base[j]) alts.push_back(Formula::stay(group(DsDesc::hit_base, d.L, one, alpha)));
        parts.push_back(Formula::disj(std::move(alts)));
      }
      for (const Term& alpha : c_.base[j])
        parts.push_back(Formula::stay(group(DsDesc::miss_base, d.L, d.R[j], alpha)));
    }
    return Formula::conj(std::move(parts));
  }
};

// ---------------------------------------------------------------------------
// Adequacy, macro grammars.

struct AmDesc {
  enum Kind : std::uint8_t { start, column, spine, plain, sub };
  Kind kind = start;
  StateId q = 0;  // A1 state
  int col = -1;
  std::vector<StateSet> ctx;  // over A1
  Term alpha;
  friend bool operator==(const AmDesc&, const AmDesc&) = default;
};

struct AmHash {
  std::size_t operator()(const AmDesc& d) const {
    std::size_t h = d.kind;
    boost::hash_combine(h, d.q);
    boost::hash_combine(h, d.col);
    boost::hash_combine(h, hash_sets(d.ctx));
    boost::hash_combine(h, hash_term(d.alpha));
    return h;
  }
};

/// Least fixpoint of the A1 states reached by every nonterminal under given
/// argument sets, over the productions of one grammar tree and the base.
class MacroReach {
 public:
  MacroReach(const Context& c, const Term& tree) : c_(c), rules_(c.columns()) {
    const Term* n = &tree.child(0);
    while (c.info(n->symbol()).kind == GK::lhs) {
      rules_[c.info(n->symbol()).index].push_back(n->child(0));
      n = &n->child(1);
    }
    for (std::size_t j = 0; j < c.columns(); ++j)
      rules_[j].insert(rules_[j].end(), c.base[j].begin(), c.base[j].end());
  }

  StateSet reach(const Term& t, const std::vector<StateSet>& ctx) {
    while (true) {
      changed_ = false;
      StateSet out = eval(t, ctx);
      if (!changed_) return out;
      solve();
    }
  }

  /// Argument sets of `node` under the Kleene iterates T_0, T_1, ... of the
  /// table, up to the exact ones, without repeats. A value reached at stage
  /// i + 1 only needs argument sets from stage i, so offering this chain
  /// keeps the verifying automaton's least fixpoint complete.
  std::vector<std::vector<StateSet>> argument_chain(const Term& node, const std::vector<StateSet>& ctx) {
    std::vector<StateSet> exact;
    for (const Term& k : node.children()) exact.push_back(reach(k, ctx));
    std::vector<std::vector<StateSet>> chain;
    for (int i = 0;; ++i) {
      std::vector<StateSet> b;
      for (const Term& k : node.children()) b.push_back(staged_eval(k, ctx, i));
      if (chain.empty() || chain.back() != b) chain.push_back(b);
      if (b == exact) return chain;
    }
  }

 private:
  using Key = std::pair<int, std::vector<StateSet>>;

  StateSet staged_eval(const Term& t, const std::vector<StateSet>& ctx, int stage) {
    const auto& in = c_.info(t.symbol());
    if (in.kind == GK::param) return ctx.at(in.index - 1);
    std::vector<StateSet> kids;
    for (const Term& k : t.children()) kids.push_back(staged_eval(k, ctx, stage));
    if (in.kind == GK::rhs) return staged_lookup(stage, {in.index, std::move(kids)});
    StateSet out(c_.n1);
    std::vector<const StateSet*> ptrs;
    for (const auto& k : kids) ptrs.push_back(&k);
    c_.ia->a1.for_each_up(t.symbol(), ptrs, [&](const Nta::Transition& tr) { out.set(tr.from); });
    return out;
  }

  StateSet staged_lookup(int stage, const Key& k) {
    if (stage == 0) return StateSet(c_.n1);
    auto key = std::make_pair(stage, k);
    if (auto it = staged_.find(key); it != staged_.end()) return it->second;
    StateSet out(c_.n1);
    for (const Term& rhs : rules_[k.first]) out |= staged_eval(rhs, k.second, stage - 1);
    staged_.emplace(std::move(key), out);
    return out;
  }

  StateSet eval(const Term& t, const std::vector<StateSet>& ctx) {
    const auto& in = c_.info(t.symbol());
    if (in.kind == GK::param) return ctx.at(in.index - 1);
    std::vector<StateSet> kids;
    for (const Term& k : t.children()) kids.push_back(eval(k, ctx));
    if (in.kind == GK::rhs) return lookup({in.index, std::move(kids)});
    StateSet out(c_.n1);
    std::vector<const StateSet*> ptrs;
    for (const auto& k : kids) ptrs.push_back(&k);
    c_.ia->a1.for_each_up(t.symbol(), ptrs, [&](const Nta::Transition& tr) { out.set(tr.from); });
    return out;
  }

  StateSet lookup(const Key& k) {
    auto [it, fresh] = table_.try_emplace(k, StateSet(c_.n1));
    if (fresh) changed_ = true;
    return it->second;
  }

  void solve() {
    changed_ = true;
    while (changed_) {
      changed_ = false;
      std::vector<Key> keys;
      for (const auto& [k, v] : table_) keys.push_back(k);
      for (const Key& k : keys) {
        StateSet now(c_.n1);
        for (const Term& rhs : rules_[k.first]) now |= eval(rhs, k.second);
        StateSet& slot = table_.at(k);
        if (!now.is_subset_of(slot)) {
          slot |= now;
          changed_ = true;
        }
      }
    }
  }

  const Context& c_;
  std::vector<std::vector<Term>> rules_;
  std::map<Key, StateSet> table_;
  std::map<std::pair<int, Key>, StateSet> staged_;
  bool changed_ = false;
};

class AdequateMacroAta final : public InternedAta<AmDesc, AmHash> {
 public:
  using InternedAta::InternedAta;

  std::vector<StateId> initial() const override {
    std::vector<StateId> out;
    for (StateId q : c_.ia->a1.initial()) out.push_back(id({AmDesc::start, q, -1, {}, {}}));
    return out;
  }

  std::string describe(StateId s) const override {
    AmDesc d = get(s);
    std::string q = c_.ia->a1.label(d.q);
    switch (d.kind) {
      case AmDesc::start: return "<" + q + ",start>";
      case AmDesc::column: return "<" + q + "," + c_.gamma.columns()[d.col].name() + ">";
      case AmDesc::spine:
        return "<" + c_.sets_name(d.ctx) + "," + q + "," + c_.gamma.columns()[d.col].name() + ">";
      case AmDesc::plain: return "<" + q + "," + c_.sets_name(d.ctx) + ">";
      case AmDesc::sub: return "<" + q + "," + d.alpha.to_string() + ">";
    }
    return "?";
  }

  Formula delta(StateId s, Symbol a, const Guide* guide) const override {
    AmDesc d = get(s);
    const auto& in = c_.info(a);
    switch (d.kind) {
      case AmDesc::start:
        if (in.kind == GK::root) return Formula::atom(kDown, s);
        if (in.kind == GK::lhs && c_.gamma.nonterminals().arity_of(in.nonterminal) == 0)
          return Formula::stay(id({AmDesc::column, d.q, in.index, {}, {}}));
        return Formula::bottom();
      case AmDesc::column:
      case AmDesc::spine: {
        Formula up = Formula::atom(kUp, s);
        Formula base = d.kind == AmDesc::column ? base_alternatives(d.q, d.col) : Formula::bottom();
        if (in.kind == GK::lhs && in.index != d.col) return up || Formula::atom(kRight, s);
        if (in.kind == GK::lhs)
          return Formula::disj({up, Formula::atom(kLeft, id({AmDesc::plain, d.q, -1, d.ctx, {}})),
                                Formula::atom(kRight, s), base});
        return up || base;
      }
      case AmDesc::plain: return plain(d, a, in, guide);
      case AmDesc::sub: {
        const auto& sin = c_.info(d.alpha.symbol());
        if (sin.kind == GK::rhs)
          return Formula::stay(id({AmDesc::column, d.q, sin.index, {}, {}})) ||
                 base_alternatives(d.q, sin.index);
        return adorn(nta_formula(c_.ia->a1, d.q, d.alpha.symbol()), [&](StateId q, int i) {
          return id({AmDesc::sub, q, -1, {}, d.alpha.child(i - 1)});
        });
      }
    }
    return Formula::bottom();
  }

 private:
  Formula base_alternatives(StateId q, int col) const {
    std::vector<Formula> alts;
    for (const Term& alpha : c_.base[col]) alts.push_back(Formula::stay(id({AmDesc::sub, q, -1, {}, alpha})));
    return Formula::disj(std::move(alts));
  }

  Formula plain(const AmDesc& d, Symbol a, const GrammarAlphabet::Info& in, const Guide* guide) const {
    if (in.kind == GK::base)
      return nta_formula(c_.ia->a1, d.q, a).map_atoms([&](int dir, StateId q) {
        return Formula::atom(dir, id({AmDesc::plain, q, -1, d.ctx, {}}));
      });
    if (in.kind == GK::param)
      return in.index <= static_cast<int>(d.ctx.size()) && d.ctx[in.index - 1].test(d.q)
                 ? Formula::top()
                 : Formula::bottom();
    if (in.kind != GK::rhs) return Formula::bottom();
    int r = c_.gamma.symbols().arity_of(a);
    if (r == 0) return Formula::stay(id({AmDesc::column, d.q, in.index, {}, {}}));
    auto make = [&](const std::vector<StateSet>& B) {
      std::vector<Formula> parts;
      for (int p = 0; p < r; ++p)
        for (auto q = B[p].find_first(); q != StateSet::npos; q = B[p].find_next(q))
          parts.push_back(Formula::atom(p + 1, id({AmDesc::plain, static_cast<StateId>(q), -1, d.ctx, {}})));
      parts.push_back(Formula::atom(kUp, id({AmDesc::spine, d.q, in.index, B, {}})));
      return Formula::conj(std::move(parts));
    };
    if (guide) {
      std::vector<Formula> alts;
      for (const auto& B : argument_chain(*guide, d.ctx)) alts.push_back(make(B));
      return Formula::disj(std::move(alts));
    }
    StateSet all(c_.n1);
    all.set();
    return for_each_subsets(std::vector<StateSet>(r, all), make);
  }

  /// Candidate argument sets at the guide's rhs node; the atoms built from
  /// them still verify every member.
  std::vector<std::vector<StateSet>> argument_chain(const Guide& g, const std::vector<StateSet>& ctx) const {
    const TreeView& t = g.tree();
    const Term& tree = t.subterm(t.root());
    std::lock_guard<std::mutex> lock(mu_);
    auto it = reach_.find(tree);
    if (it == reach_.end()) {
      if (reach_.size() > 64) reach_.clear();
      it = reach_.emplace(tree, std::make_unique<MacroReach>(c_, tree)).first;
    }
    return it->second->argument_chain(t.subterm(g.node()), ctx);
  }

  mutable std::mutex mu_;
  mutable std::map<Term, std::unique_ptr<MacroReach>> reach_;
};

// ---------------------------------------------------------------------------
// Depth ordering, macro grammars, with explicit budgets.

/// Values per parameter and landing budget.
using Profile = std::vector<std::vector<StateSet>>;

struct EmDesc {
  enum Kind : std::uint8_t {
    init, reset, start, row, solve, ok,
    guard_spine, guard_rhs,
    hit_search, miss_search, hit_node, miss_node, hit_base, miss_base,
  };
  Kind kind = init;
  int n = 0;  // row, budget, or nesting depth
  int col = -1;
  int phase = 0;  // searches: 0 climbing to the root, 1 scanning the spine
  StateId u = 0;
  StateSet U;
  Profile ctx;
  Term alpha;
  friend bool operator==(const EmDesc&, const EmDesc&) = default;
};

struct EmHash {
  std::size_t operator()(const EmDesc& d) const {
    std::size_t h = d.kind;
    boost::hash_combine(h, d.n);
    boost::hash_combine(h, d.col);
    boost::hash_combine(h, d.phase);
    boost::hash_combine(h, d.u);
    boost::hash_combine(h, boost::hash_value(d.U));
    for (const auto& p : d.ctx) boost::hash_combine(h, hash_sets(p));
    boost::hash_combine(h, hash_term(d.alpha));
    return h;
  }
};

class DslsynthMacroAta final : public InternedAta<EmDesc, EmHash> {
 public:
  DslsynthMacroAta(std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base,
                   const NonterminalSet& n, int b, int horizon)
      : InternedAta(std::move(ia), base, n), b_(b), horizon_(horizon) {
    if (horizon < 1) throw Error("the row horizon must be positive");
  }

  std::vector<StateId> initial() const override { return {id(EmDesc{})}; }

  std::string describe(StateId s) const override {
    EmDesc d = get(s);
    auto n = std::to_string(d.n);
    auto col = d.col >= 0 ? c_.gamma.columns()[d.col].name() : std::string("-");
    switch (d.kind) {
      case EmDesc::init: return "init";
      case EmDesc::reset: return "<" + n + "," + c_.set_name(d.U) + ",reset>";
      case EmDesc::start: return "<" + n + "," + c_.set_name(d.U) + ",start>";
      case EmDesc::row: return "<" + n + "," + c_.set_name(d.U) + "," + col + ",row>";
      case EmDesc::solve: return "solve" + c_.set_name(d.U);
      case EmDesc::ok: return "ok" + c_.set_name(d.U);
      case EmDesc::guard_spine: return "guard";
      case EmDesc::guard_rhs: return "guard" + n;
      case EmDesc::hit_search:
      case EmDesc::miss_search:
        return std::string(d.kind == EmDesc::hit_search ? "hit" : "miss") + "<" +
               c_.value_name(d.u) + "," + col + "," + n + "," + profile_name(d.ctx) +
               (d.phase ? ",scan>" : ",up>");
      case EmDesc::hit_node:
      case EmDesc::miss_node:
        return std::string(d.kind == EmDesc::hit_node ? "hit" : "miss") + "<" +
               c_.value_name(d.u) + "," + n + "," + profile_name(d.ctx) + ">";
      case EmDesc::hit_base:
      case EmDesc::miss_base:
        return std::string(d.kind == EmDesc::hit_base ? "hit" : "miss") + "<" +
               c_.value_name(d.u) + "," + d.alpha.to_string() + "," + n + ">";
    }
    return "?";
  }

  Formula delta(StateId s, Symbol a, const Guide* guide) const override {
    EmDesc d = get(s);
    const auto& in = c_.info(a);
    switch (d.kind) {
      case EmDesc::init: {
        if (in.kind != GK::root) return Formula::bottom();
        EmDesc r;
        r.kind = EmDesc::reset;
        r.n = 1;
        r.U = StateSet(c_.values());
        EmDesc g;
        g.kind = EmDesc::guard_spine;
        return Formula::stay(id(r)) && Formula::atom(kDown, id(g));
      }
      case EmDesc::reset:
        if (in.kind != GK::root) return Formula::atom(kUp, s);
        d.kind = EmDesc::start;
        return Formula::atom(kDown, id(d));
      case EmDesc::start:
        if (in.kind != GK::lhs || c_.gamma.nonterminals().arity_of(in.nonterminal) != 0)
          return Formula::bottom();
        d.kind = EmDesc::row;
        d.col = in.index;
        return Formula::stay(id(d));
      case EmDesc::row: return row(d, guide);
      case EmDesc::solve: return (d.U & c_.f1).any() ? Formula::top() : Formula::bottom();
      case EmDesc::ok: return (d.U & c_.f2).none() ? Formula::top() : Formula::bottom();
      case EmDesc::guard_spine:
        if (in.kind == GK::end) return Formula::top();
        if (in.kind != GK::lhs) return Formula::bottom();
        return Formula::atom(kLeft, guard(0)) && Formula::atom(kRight, s);
      case EmDesc::guard_rhs: {
        int depth = d.n;
        if (in.kind == GK::rhs && c_.gamma.symbols().arity_of(a) > 0 && ++depth > b_)
          return Formula::bottom();
        std::vector<Formula> kids;
        for (int i = 1; i <= c_.gamma.symbols().arity_of(a); ++i)
          kids.push_back(Formula::atom(i, guard(depth)));
        return Formula::conj(std::move(kids));
      }
      case EmDesc::hit_search:
      case EmDesc::miss_search: return search(d, s, in);
      case EmDesc::hit_node:
      case EmDesc::miss_node: return node(d, a, in, guide);
      case EmDesc::hit_base:
      case EmDesc::miss_base: return base(d);
    }
    return Formula::bottom();
  }

 private:
  std::string profile_name(const Profile& p) const {
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? ";" : "") + c_.sets_name(p[i]);
    return out + "]";
  }

  StateId guard(int depth) const {
    EmDesc g;
    g.kind = EmDesc::guard_rhs;
    g.n = depth;
    return id(g);
  }

  StateId search_state(bool hit, StateId u, int col, int budget, Profile ctx) const {
    EmDesc d;
    d.kind = hit ? EmDesc::hit_search : EmDesc::miss_search;
    d.u = u;
    d.col = col;
    d.n = budget;
    d.ctx = std::move(ctx);
    return id(d);
  }

  StateId node_state(bool hit, StateId u, int budget, const Profile& ctx) const {
    EmDesc d;
    d.kind = hit ? EmDesc::hit_node : EmDesc::miss_node;
    d.u = u;
    d.n = budget;
    d.ctx = ctx;
    return id(d);
  }

  StateId base_state(bool hit, StateId u, Term alpha, int budget) const {
    EmDesc d;
    d.kind = hit ? EmDesc::hit_base : EmDesc::miss_base;
    d.u = u;
    d.alpha = std::move(alpha);
    d.n = budget;
    return id(d);
  }

  StateId set_state(EmDesc::Kind k, StateSet U, int n = 0) const {
    EmDesc d;
    d.kind = k;
    d.U = std::move(U);
    d.n = n;
    return id(d);
  }

  Formula row(const EmDesc& d, const Guide* guide) const {
    StateSet fresh = ~d.U;
    auto make = [&](const StateSet& C) {
      std::vector<Formula> parts;
      for (auto u = fresh.find_first(); u != StateSet::npos; u = fresh.find_next(u)) {
        bool hit = C.test(u);
        parts.push_back(Formula::stay(search_state(hit, static_cast<StateId>(u), d.col, d.n - 1, {})));
      }
      StateSet cum = d.U | C;
      Formula more = d.n < horizon_ ? Formula::stay(set_state(EmDesc::reset, cum, d.n + 1))
                                    : Formula::bottom();
      parts.push_back(Formula::stay(set_state(EmDesc::solve, cum)) ||
                      (Formula::stay(set_state(EmDesc::ok, cum)) && more));
      return Formula::conj(std::move(parts));
    };
    if (guide) {
      StateSet C(c_.values());
      for (auto u = fresh.find_first(); u != StateSet::npos; u = fresh.find_next(u))
        if (guide->holds(guide->node(), search_state(true, static_cast<StateId>(u), d.col, d.n - 1, {})))
          C.set(u);
      return make(C);
    }
    return for_each_subset(fresh, make);
  }

  Formula search(EmDesc d, StateId s, const GrammarAlphabet::Info& in) const {
    bool hit = d.kind == EmDesc::hit_search;
    if (d.phase == 0) {
      if (in.kind != GK::root) return Formula::atom(kUp, s);
      d.phase = 1;
      return Formula::atom(kDown, id(d));
    }
    if (in.kind == GK::lhs) {
      Formula right = Formula::atom(kRight, s);
      if (in.index != d.col) return right;
      Formula left = Formula::atom(kLeft, node_state(hit, d.u, d.n, d.ctx));
      return hit ? (left || right) : (left && right);
    }
    if (in.kind != GK::end) return hit ? Formula::bottom() : Formula::top();
    std::vector<Formula> parts;
    for (const Term& alpha : c_.base[d.col]) parts.push_back(Formula::stay(base_state(hit, d.u, alpha, d.n)));
    return hit ? Formula::disj(std::move(parts)) : Formula::conj(std::move(parts));
  }

  Formula node(const EmDesc& d, Symbol a, const GrammarAlphabet::Info& in, const Guide* guide) const {
    bool hit = d.kind == EmDesc::hit_node;
    Formula no = hit ? Formula::bottom() : Formula::top();
    if (in.kind == GK::base) {
      Formula f = nta_formula(c_.nta(d.u), c_.local(d.u), a);
      if (!hit) f = dual(f);
      return f.map_atoms([&](int dir, StateId q) {
        return Formula::atom(dir, node_state(hit, c_.tag(q, d.u), d.n, d.ctx));
      });
    }
    if (in.kind == GK::param) {
      // Parameters outside the enclosing rule's arity do not decode.
      if (in.index > static_cast<int>(d.ctx.size())) return no;
      const auto& p = d.ctx[in.index - 1];
      bool in_ctx = d.n < static_cast<int>(p.size()) && p[d.n].test(d.u);
      return in_ctx == hit ? Formula::top() : Formula::bottom();
    }
    if (in.kind != GK::rhs) return no;
    if (d.n < 1) return no;
    int r = c_.gamma.symbols().arity_of(a);
    if (r == 0) return Formula::stay(search_state(hit, d.u, in.index, d.n - 1, {}));
    // One set per parameter and landing budget 0..n-1, over the automaton of u.
    StateSet own(c_.values());
    for (StateId q = 0; q < c_.nta(d.u).num_states(); ++q) own.set(c_.tag(q, d.u));
    auto make = [&](const Profile& pi) {
      std::vector<Formula> parts;
      for (int p = 0; p < r; ++p)
        for (int b = 0; b < d.n; ++b) {
          StateSet check = hit ? pi[p][b] : own - pi[p][b];
          for (auto q = check.find_first(); q != StateSet::npos; q = check.find_next(q))
            parts.push_back(Formula::atom(p + 1, node_state(hit, static_cast<StateId>(q), b, d.ctx)));
        }
      parts.push_back(Formula::stay(search_state(hit, d.u, in.index, d.n - 1, pi)));
      return Formula::conj(std::move(parts));
    };
    if (guide) {
      const TreeView& t = guide->tree();
      const auto& kids = t.children(guide->node());
      Profile pi(r, std::vector<StateSet>(d.n, StateSet(c_.values())));
      for (int p = 0; p < r; ++p)
        for (int b = 0; b < d.n; ++b)
          for (auto q = own.find_first(); q != StateSet::npos; q = own.find_next(q))
            if (guide->holds(kids[p], node_state(hit, static_cast<StateId>(q), b, d.ctx)) == hit)
              pi[p][b].set(q);
      return make(pi);
    }
    std::vector<StateSet> slots(static_cast<std::size_t>(r) * d.n, own);
    return for_each_subsets(slots, [&](const std::vector<StateSet>& flat) {
      Profile pi(r);
      for (int p = 0; p < r; ++p) pi[p].assign(flat.begin() + p * d.n, flat.begin() + (p + 1) * d.n);
      return make(pi);
    });
  }

  Formula base(const EmDesc& d) const {
    bool hit = d.kind == EmDesc::hit_base;
    const auto& ain = c_.info(d.alpha.symbol());
    if (ain.kind == GK::rhs) {
      if (d.n < 1) return hit ? Formula::bottom() : Formula::top();
      return Formula::stay(search_state(hit, d.u, ain.index, d.n - 1, {}));
    }
    Formula f = nta_formula(c_.nta(d.u), c_.local(d.u), d.alpha.symbol());
    if (!hit) f = dual(f);
    return adorn(f, [&](StateId q, int i) {
      return base_state(hit, c_.tag(q, d.u), d.alpha.child(i - 1), d.n);
    });
  }

  int b_;
  int horizon_;
};

}  // namespace

std::shared_ptr<const TwoWayAta> adequate_automaton(std::shared_ptr<const InstanceAutomata> ia,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n) {
  return std::make_shared<AdequateAta>(std::move(ia), base, n);
}

std::shared_ptr<const TwoWayAta> adequate_automaton(const LearningInstance& inst,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n) {
  return adequate_automaton(std::make_shared<InstanceAutomata>(instance_automata(inst)), base, n);
}

std::shared_ptr<const TwoWayAta> dslsynth_automaton(std::shared_ptr<const InstanceAutomata> ia,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n) {
  if (!n.entries().empty() && n.max_arity() > 0)
    throw Unsupported("the depth automaton for regular grammars needs nullary nonterminals");
  return std::make_shared<DslsynthAta>(std::move(ia), base, n);
}

std::shared_ptr<const TwoWayAta> dslsynth_automaton(const LearningInstance& inst,
                                                    const MacroGrammar& base,
                                                    const NonterminalSet& n) {
  return dslsynth_automaton(std::make_shared<InstanceAutomata>(instance_automata(inst)), base, n);
}

std::shared_ptr<const TwoWayAta> adequate_macro_automaton(
    std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base, const NonterminalSet& n) {
  return std::make_shared<AdequateMacroAta>(std::move(ia), base, n);
}

std::shared_ptr<const TwoWayAta> adequate_macro_automaton(const LearningInstance& inst,
                                                          const MacroGrammar& base,
                                                          const NonterminalSet& n) {
  return adequate_macro_automaton(std::make_shared<InstanceAutomata>(instance_automata(inst)), base,
                                  n);
}

std::shared_ptr<const TwoWayAta> dslsynth_macro_automaton(
    std::shared_ptr<const InstanceAutomata> ia, const MacroGrammar& base, const NonterminalSet& n,
    std::optional<int> b, int horizon) {
  if (!b)
    throw Unsupported(
        "depth-ordered synthesis over macro grammars with unbounded macro nesting is undecidable; "
        "give a macro depth bound");
  if (*b < 0) throw Error("the macro depth bound must be non-negative");
  return std::make_shared<DslsynthMacroAta>(std::move(ia), base, n, *b, horizon);
}

std::shared_ptr<const TwoWayAta> dslsynth_macro_automaton(const LearningInstance& inst,
                                                          const MacroGrammar& base,
                                                          const NonterminalSet& n,
                                                          std::optional<int> b, int horizon) {
  return dslsynth_macro_automaton(std::make_shared<InstanceAutomata>(instance_automata(inst)), base,
                                  n, b, horizon);
}

}  // namespace dslsynth
