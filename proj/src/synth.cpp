// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/synth.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace dslsynth {
namespace {

// ---------------------------------------------------------------------------
// Behavioral vectors under the outermost macro semantics.

using VectorId = std::uint32_t;
/// Reached vectors, each with a smallest witness expression.
using Values = std::map<VectorId, Term>;

void offer(Values& into, VectorId v, const Term& w) {
  auto [it, fresh] = into.try_emplace(v, w);
  if (!fresh && (w.size() < it->second.size() || (w.size() == it->second.size() && w < it->second)))
    it->second = w;
}

bool merge(Values& into, const Values& from) {
  bool grew = false;
  for (const auto& [v, w] : from) {
    grew = grew || !into.count(v);
    offer(into, v, w);
  }
  return grew;
}

std::vector<VectorId> ids_of(const Values& v) {
  std::vector<VectorId> out;
  for (const auto& [id, w] : v) out.push_back(id);
  return out;
}

class MacroEvaluator {
 public:
  // Argument values per parameter and landing budget.
  using Profile = std::vector<std::vector<Values>>;

  MacroEvaluator(const MacroGrammar& g, const LearningInstance& inst, const MacroVerdictOptions& o)
      : g_(g), inst_(inst), options_(o) {
    for (std::size_t i = 0; i < inst.size(); ++i) {
      std::map<Symbol, const std::vector<Value>*> ops;
      for (const auto& [f, a] : inst.alphabet().entries()) ops[f] = &inst.example(i).op_table(f);
      tables_.push_back(std::move(ops));
    }
    for (const auto& [n, a] : g.nonterminals.entries()) rules_[n] = g.rules_for(n);
  }

  const BehavioralVector& vector(VectorId v) const { return vectors_.at(v); }

  bool generalizing(VectorId id) const {
    const auto& v = vectors_.at(id);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return false;
    return true;
  }
  bool non_generalizing(VectorId id) const {
    const auto& v = vectors_.at(id);
    for (std::size_t i = 0; i < inst_.train.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return false;
    for (std::size_t i = inst_.train.size(); i < v.size(); ++i)
      if (!inst_.example(i).accepting(v[i])) return true;
    return false;
  }

  /// Values of the start symbol with budget d (parse depth ≤ d).
  Values at_depth(int d) { return call(g_.start, d - 1, {}); }

  /// Values of the start symbol without a budget.
  Values unbounded() {
    InfKey top{g_.start, {}};
    lookup_inf(top);
    iterate_inf();
    return inf_.at(top);
  }

 private:
  using InfKey = std::pair<Symbol, std::vector<std::vector<VectorId>>>;
  using Key = std::tuple<Symbol, int, std::vector<std::vector<std::vector<VectorId>>>>;

  VectorId intern(BehavioralVector v) {
    auto [it, fresh] = ids_.try_emplace(v, static_cast<VectorId>(vectors_.size()));
    if (fresh) vectors_.push_back(std::move(v));
    return it->second;
  }

  void charge() {
    if (++work_ > options_.limits.max_configurations)
      throw ResourceLimit("max_configurations", work_);
  }

  /// Applies f pointwise to every combination of child values.
  void apply(Symbol f, const std::vector<Values>& kids, Values& out) {
    for (const auto& k : kids)
      if (k.empty()) return;
    std::vector<Values::const_iterator> at;
    for (const auto& k : kids) at.push_back(k.begin());
    while (true) {
      charge();
      BehavioralVector v(inst_.size());
      for (std::size_t i = 0; i < inst_.size(); ++i) {
        std::size_t idx = 0;
        const std::size_t d = inst_.example(i).domain_size();
        for (const auto& it : at) idx = idx * d + vectors_[it->first][i];
        v[i] = (*tables_[i].at(f))[idx];
      }
      std::vector<Term> ws;
      for (const auto& it : at) ws.push_back(it->second);
      offer(out, intern(std::move(v)), Term::app(f, std::move(ws)));
      std::size_t j = at.size();
      while (j > 0) {
        --j;
        if (++at[j] != kids[j].end()) break;
        at[j] = kids[j].begin();
        if (j == 0) return;
      }
      if (at.empty()) return;
    }
  }

  // Budgeted evaluation: a nonterminal occurrence with budget b expands its
  // rules at b - 1; parameters read the profile at their landing budget.
  Values eval(const Term& t, int b, const Profile& rho) {
    if (t.is_param()) {
      const auto& p = rho.at(t.param_index() - 1);
      return b < static_cast<int>(p.size()) ? p[b] : Values{};
    }
    if (g_.is_nonterminal(t.symbol())) {
      if (b < 1) return {};
      Profile sigma(t.arity());
      for (std::size_t p = 0; p < t.arity(); ++p)
        for (int l = 0; l < b; ++l) sigma[p].push_back(eval(t.child(p), l, rho));
      return call(t.symbol(), b - 1, sigma);
    }
    std::vector<Values> kids;
    for (const Term& c : t.children()) kids.push_back(eval(c, b, rho));
    Values out;
    apply(t.symbol(), kids, out);
    return out;
  }

  Values call(Symbol n, int body, const Profile& sigma) {
    if (body < 0) return {};
    Key key{n, body, {}};
    for (const auto& p : sigma) {
      std::vector<std::vector<VectorId>> per;
      for (const auto& v : p) per.push_back(ids_of(v));
      std::get<2>(key).push_back(std::move(per));
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() > options_.limits.max_states) throw ResourceLimit("max_states", memo_.size());
    Values out;
    for (std::size_t r : rules_.at(n)) merge(out, eval(g_.rules[r].rhs, body, sigma));
    memo_.emplace(std::move(key), out);
    return out;
  }

  // Unbounded evaluation; nonterminal calls read the current approximation.
  Values eval_inf(const Term& t, const std::vector<Values>& args) {
    if (t.is_param()) return args.at(t.param_index() - 1);
    if (g_.is_nonterminal(t.symbol())) {
      std::vector<Values> sigma;
      for (const Term& c : t.children()) sigma.push_back(eval_inf(c, args));
      InfKey key{t.symbol(), {}};
      for (const auto& s : sigma) key.second.push_back(ids_of(s));
      return lookup_inf(key, &sigma);
    }
    std::vector<Values> kids;
    for (const Term& c : t.children()) kids.push_back(eval_inf(c, args));
    Values out;
    apply(t.symbol(), kids, out);
    return out;
  }

  Values lookup_inf(const InfKey& key, const std::vector<Values>* args = nullptr) {
    auto [it, fresh] = inf_.try_emplace(key);
    if (fresh) {
      fresh_ = true;
      inf_args_[key] = args ? *args : std::vector<Values>{};
      if (inf_.size() > options_.limits.max_states) throw ResourceLimit("max_states", inf_.size());
    }
    return it->second;
  }

  bool refresh(const InfKey& key) {
    Values now;
    for (std::size_t r : rules_.at(key.first)) merge(now, eval_inf(g_.rules[r].rhs, inf_args_.at(key)));
    return merge(inf_.at(key), now);
  }

  void iterate_inf() {
    for (bool changed = true; changed;) {
      changed = false;
      fresh_ = false;
      std::vector<InfKey> keys;
      for (const auto& [k, v] : inf_) keys.push_back(k);
      for (const InfKey& k : keys) changed = refresh(k) || changed;
      changed = changed || fresh_;
    }
  }

  const MacroGrammar& g_;
  const LearningInstance& inst_;
  MacroVerdictOptions options_;
  std::vector<std::map<Symbol, const std::vector<Value>*>> tables_;
  std::map<Symbol, std::vector<std::size_t>> rules_;
  std::vector<BehavioralVector> vectors_;
  std::map<BehavioralVector, VectorId> ids_;
  std::map<Key, Values> memo_;
  std::map<InfKey, Values> inf_;
  std::map<InfKey, std::vector<Values>> inf_args_;
  bool fresh_ = false;
  std::size_t work_ = 0;
};

std::optional<std::pair<VectorId, Term>> first_of(const Values& v,
                                                  const std::function<bool(VectorId)>& pred) {
  std::optional<std::pair<VectorId, Term>> best;
  for (const auto& [id, w] : v)
    if (pred(id) && (!best || w.size() < best->second.size() ||
                     (w.size() == best->second.size() && w < best->second)))
      best = std::make_pair(id, w);
  return best;
}

// ---------------------------------------------------------------------------
// Synthesis helpers.

class Checker {
 public:
  explicit Checker(const SynthesisProblem& p, ResourceLimits limits) : p_(p), limits_(limits) {
    for (const auto& inst : p.instances) automata_.push_back(instance_automata(inst));
  }

  std::vector<Verdict> check(const MacroGrammar& g) const {
    std::vector<Verdict> out;
    MacroGrammar ext = extend(g, p_.base);
    for (std::size_t i = 0; i < p_.instances.size(); ++i) {
      Verdict v;
      if (ext.is_regular()) {
        v = solves_grammar(ext, automata_[i], p_.mode, limits_);
      } else {
        MacroVerdictOptions o;
        o.limits = limits_;
        v = solves_macro_grammar(ext, p_.instances[i], p_.mode, o);
      }
      out.push_back(v);
      if (!v.accepted) break;
    }
    return out;
  }

  static bool all_accepted(const std::vector<Verdict>& vs, std::size_t n) {
    return vs.size() == n && std::all_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.accepted; });
  }

  const std::vector<InstanceAutomata>& automata() const { return automata_; }

 private:
  const SynthesisProblem& p_;
  ResourceLimits limits_;
  std::vector<InstanceAutomata> automata_;
};

}  // namespace

// ---------------------------------------------------------------------------

Verdict solves_macro_grammar(const MacroGrammar& extended, const LearningInstance& inst,
                             Ordering ordering, const MacroVerdictOptions& options) {
  extended.validate();
  inst.validate();
  if (extended.nonterminals.arity_of(extended.start) != 0)
    throw Error("the start nonterminal must have arity 0");
  MacroEvaluator ev(extended, inst, options);
  Values all = ev.unbounded();
  auto gen_pred = [&](VectorId v) { return ev.generalizing(v); };
  auto bad_pred = [&](VectorId v) { return ev.non_generalizing(v); };
  bool gen_exists = first_of(all, gen_pred).has_value();
  bool bad_exists = first_of(all, bad_pred).has_value();

  Verdict v;
  std::optional<std::pair<VectorId, Term>> gen, bad;
  int gen_row = 0, bad_row = 0;
  for (int d = 1; (gen_exists && !gen) || (bad_exists && !bad); ++d) {
    if (d > options.max_depth) throw ResourceLimit("max_depth", static_cast<std::size_t>(d));
    Values row = ev.at_depth(d);
    if (!gen && (gen = first_of(row, gen_pred))) gen_row = d;
    if (!bad && (bad = first_of(row, bad_pred))) bad_row = d;
    // Later non-generalizing rows cannot block an earlier generalizing one.
    if (gen) break;
  }
  if (gen) {
    v.row = static_cast<std::size_t>(gen_row);
    v.witness = gen->second;
  }
  if (bad) {
    v.blocking_row = static_cast<std::size_t>(bad_row);
    v.blocking_witness = bad->second;
  }
  if (!gen) {
    v.reason = "no generalizing value in any row";
    return v;
  }
  if (ordering == Ordering::depth && bad && bad_row < gen_row) {
    v.reason = "non-generalizing first at row " + std::to_string(bad_row) + " (" +
               bad->second.to_string() + "), before generalizing row " + std::to_string(gen_row);
    return v;
  }
  v.accepted = true;
  v.reason = "generalizing at row " + std::to_string(gen_row) + " (" + gen->second.to_string() + ")";
  return v;
}

Verdict solves_macro_grammar(const MacroGrammar& g, const MacroGrammar& base,
                             const LearningInstance& inst, Ordering ordering,
                             const MacroVerdictOptions& options) {
  return solves_macro_grammar(extend(g, base), inst, ordering, options);
}

MacroGrammar SynthesisProblem::meta_grammar() const {
  return meta ? *meta : permissive_meta(alphabet, nonterminals);
}

std::optional<int> SynthesisProblem::effective_bound() const {
  if (bound) return bound;
  if (nonterminals.size() == 0 || nonterminals.max_arity() == 0) return 0;
  return meta_macro_depth_bound(meta_grammar(), gamma());
}

void SynthesisProblem::validate() const {
  for (const auto& inst : instances) {
    inst.validate();
    if (!(inst.alphabet() == alphabet)) throw Error("instance alphabet differs from the problem alphabet");
  }
  if (!base.is_regular()) throw Unsupported("the base grammar must be regular");
  for (const auto& [n, a] : base.nonterminals.entries())
    if (nonterminals.arity(n) != a)
      throw Error("base nonterminal '" + n.name() + "' is not a declared nonterminal");
  for (const auto& [n, a] : nonterminals.entries())
    if (a > 0 && !macros)
      throw Error("nonterminal '" + n.name() + "' has parameters but macros are disabled");
  MacroGrammar m = meta_grammar();
  m.validate();
  if (!m.is_regular()) throw Error("the meta-grammar must be regular");
  for (const auto& [f, a] : m.alphabet.entries())
    if (gamma().symbols().arity(f) != a)
      throw Error("meta-grammar symbol '" + f.name() + "' is not in the grammar alphabet");
  if (macros && mode == Ordering::depth && !effective_bound())
    throw Unsupported(
        "depth-ordered synthesis over macro grammars with unbounded macro nesting is undecidable; "
        "give a macro depth bound or a meta-grammar that bounds it");
}

std::string to_string(SynthesisOutcome::Kind k) {
  switch (k) {
    case SynthesisOutcome::Kind::solution: return "solution";
    case SynthesisOutcome::Kind::no_solution_within_bound: return "no_solution_within_bound";
    case SynthesisOutcome::Kind::no_solution: return "no_solution";
    case SynthesisOutcome::Kind::resource_limit: return "resource_limit";
  }
  return "?";
}

std::vector<Verdict> check_grammar(const SynthesisProblem& p, const MacroGrammar& g,
                                   const ResourceLimits& limits) {
  return Checker(p, limits).check(g);
}

SynthesisOutcome synthesize(const SynthesisProblem& p, const SynthesisStrategy& s) {
  p.validate();
  const GrammarAlphabet gamma = p.gamma();
  const std::optional<int> bound = p.effective_bound();
  Nta meta = nta_trim(nta_from_grammar(p.meta_grammar()));
  SynthesisOutcome out;
  out.size_bound = s.max_size;

  auto admissible = [&](const Term& t) -> std::optional<MacroGrammar> {
    if (check_grammar_tree(t, gamma)) return std::nullopt;
    MacroGrammar g;
    try {
      g = dec(t, gamma);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!g.well_formed()) return std::nullopt;
    if (!p.macros && !g.is_regular()) return std::nullopt;
    if (p.macros && bound && macro_depth_bound(g) > *bound) return std::nullopt;
    return g;
  };

  try {
    Checker checker(p, s.limits);
    // Without instances every admissible tree solves, so both strategies
    // return the smallest one.
    if (s.kind == SynthesisStrategy::Kind::enumerate || p.instances.empty()) {
      NtaEnumerator en(meta, s.limits);
      en.for_each(s.max_size, [&](const Term& t) {
        auto g = admissible(t);
        if (!g) return true;
        ++out.candidates;
        auto verdicts = checker.check(*g);
        if (!Checker::all_accepted(verdicts, p.instances.size())) return true;
        out.kind = SynthesisOutcome::Kind::solution;
        out.grammar = std::move(g);
        out.tree = t;
        out.verdicts = std::move(verdicts);
        return false;
      });
      if (out.kind == SynthesisOutcome::Kind::solution) return out;
      // Only the conversion path can prove that no solution exists.
      out.kind = SynthesisOutcome::Kind::no_solution_within_bound;
      out.details = "no grammar tree of size <= " + std::to_string(s.max_size) + " solves every instance";
      return out;
    }

    // Automaton conversion: one automaton per instance, intersected, then
    // checked for emptiness against the meta-grammar.
    std::vector<std::shared_ptr<const TwoWayAta>> parts;
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
      auto ia = std::make_shared<InstanceAutomata>(checker.automata()[i]);
      if (p.mode == Ordering::adequate)
        parts.push_back(p.macros ? adequate_macro_automaton(ia, p.base, p.nonterminals)
                                 : adequate_automaton(ia, p.base, p.nonterminals));
      else
        parts.push_back(p.macros ? dslsynth_macro_automaton(ia, p.base, p.nonterminals, bound, s.horizon)
                                 : dslsynth_automaton(ia, p.base, p.nonterminals));
    }
    AtaIntersection all(parts);
    std::optional<Term> w = ata_product_witness(meta, all, s.limits);
    if (!w) {
      out.kind = SynthesisOutcome::Kind::no_solution;
      out.details = "the intersection of the meta-grammar with the synthesis automata is empty";
      return out;
    }
    auto g = admissible(*w);
    if (!g) throw Error("automaton witness is not an admissible grammar tree: " + w->to_string());
    out.kind = SynthesisOutcome::Kind::solution;
    out.grammar = std::move(g);
    out.tree = *w;
    out.verdicts = checker.check(*out.grammar);
    out.candidates = 1;
    if (!Checker::all_accepted(out.verdicts, p.instances.size()))
      throw Error("automaton witness fails the direct check: " + w->to_string());
    return out;
  } catch (const ResourceLimit& e) {
    out.kind = SynthesisOutcome::Kind::resource_limit;
    out.details = std::string(e.what());
    return out;
  }
}

}  // namespace dslsynth
