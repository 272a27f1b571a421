// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/encoding.hpp"

#include <algorithm>
#include <set>

namespace dslsynth {

GrammarAlphabet::GrammarAlphabet(RankedAlphabet base, NonterminalSet nonterminals)
    : base_(std::move(base)), nonterminals_(std::move(nonterminals)) {
  auto declare = [&](Symbol s, int arity, Info info) {
    if (base_.contains(s) || nonterminals_.contains(s) || symbols_.contains(s))
      throw Error("grammar alphabet symbol '" + s.name() + "' collides with an existing name");
    symbols_.add(s, arity);
    info_.emplace(s, info);
  };
  for (const auto& [f, a] : base_.entries()) {
    if (nonterminals_.contains(f))
      throw Error("'" + f.name() + "' is both a nonterminal and an alphabet symbol");
    symbols_.add(f, a);
    info_.emplace(f, Info{Kind::base, Symbol(), 0});
  }
  root_ = Symbol("root");
  end_ = Symbol("end");
  declare(root_, 1, {Kind::root, Symbol(), 0});
  declare(end_, 0, {Kind::end, Symbol(), 0});
  for (const auto& [n, a] : nonterminals_.entries()) {
    int col = static_cast<int>(columns_.size());
    columns_.push_back(n);
    lhs_.push_back(Symbol("lhs_" + n.name()));
    rhs_.push_back(Symbol("rhs_" + n.name()));
    declare(lhs_.back(), 2, {Kind::lhs, n, col});
    declare(rhs_.back(), a, {Kind::rhs, n, col});
  }
  for (int i = 1; i <= nonterminals_.max_arity(); ++i) {
    params_.push_back(Symbol(std::to_string(i)));
    declare(params_.back(), 0, {Kind::param, Symbol(), i});
  }
}

int GrammarAlphabet::column(Symbol nonterminal) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), nonterminal);
  if (it == columns_.end() || *it != nonterminal)
    throw Error("'" + nonterminal.name() + "' is not a nonterminal");
  return static_cast<int>(it - columns_.begin());
}

Symbol GrammarAlphabet::lhs(Symbol nonterminal) const { return lhs_[column(nonterminal)]; }
Symbol GrammarAlphabet::rhs(Symbol nonterminal) const { return rhs_[column(nonterminal)]; }

Symbol GrammarAlphabet::param(int i) const {
  if (i < 1 || i > max_param()) throw Error("parameter index out of range");
  return params_[i - 1];
}

const GrammarAlphabet::Info* GrammarAlphabet::info(Symbol s) const {
  auto it = info_.find(s);
  return it == info_.end() ? nullptr : &it->second;
}

const GrammarAlphabet::Info& GrammarAlphabet::classify(Symbol s) const {
  if (const Info* i = info(s)) return *i;
  throw Error("symbol '" + s.name() + "' is not in the grammar alphabet");
}

namespace {

Term enc_term(const Term& t, const MacroGrammar& g, const GrammarAlphabet& gamma) {
  if (t.is_param()) return Term::leaf(gamma.param(t.param_index()));
  std::vector<Term> kids;
  kids.reserve(t.arity());
  for (const Term& c : t.children()) kids.push_back(enc_term(c, g, gamma));
  Symbol head = g.is_nonterminal(t.symbol()) ? gamma.rhs(t.symbol()) : t.symbol();
  return Term::app(head, std::move(kids));
}

std::string path_string(const std::vector<int>& path) {
  if (path.empty()) return "/";
  std::string s;
  for (int i : path) s += "/" + std::to_string(i);
  return s;
}

class Decoder {
 public:
  explicit Decoder(const GrammarAlphabet& gamma) : gamma_(gamma) {}

  std::optional<std::string> check(const Term& t) {
    path_.clear();
    if (t.is_param() || t.symbol() != gamma_.root() || t.arity() != 1)
      return fail("expected root/1");
    path_.push_back(1);
    const Term* node = &t.child(0);
    while (true) {
      const auto* info = node->is_param() ? nullptr : gamma_.info(node->symbol());
      if (info && info->kind == GrammarAlphabet::Kind::end && node->arity() == 0) return std::nullopt;
      if (!info || info->kind != GrammarAlphabet::Kind::lhs || node->arity() != 2)
        return fail("expected lhs or end on the production spine");
      int arity = gamma_.nonterminals().arity_of(info->nonterminal);
      path_.push_back(1);
      if (auto e = check_rhs(node->child(0), arity)) return e;
      path_.back() = 2;
      node = &node->child(1);
    }
  }

  MacroGrammar decode(const Term& t) {
    if (auto e = check(t)) throw Error("malformed grammar tree: " + *e);
    MacroGrammar g;
    g.alphabet = gamma_.base();
    g.nonterminals = gamma_.nonterminals();
    const Term* node = &t.child(0);
    while (node->symbol() != gamma_.end()) {
      Symbol n = gamma_.classify(node->symbol()).nonterminal;
      if (g.start.empty()) g.start = n;
      g.rules.push_back({n, dec_term(node->child(0))});
      node = &node->child(1);
    }
    if (g.start.empty()) throw Error("empty grammar tree has no start nonterminal");
    if (gamma_.nonterminals().arity_of(g.start) != 0)
      throw Error("start nonterminal '" + g.start.name() + "' must have arity 0");
    return g;
  }

 private:
  std::optional<std::string> fail(const std::string& what) const {
    return "at " + path_string(path_) + ": " + what;
  }

  std::optional<std::string> check_rhs(const Term& t, int lhs_arity) {
    if (t.is_param()) return fail("raw parameter leaf in a grammar tree");
    const auto* info = gamma_.info(t.symbol());
    if (!info) return fail("symbol '" + t.symbol().name() + "' is not in the grammar alphabet");
    using K = GrammarAlphabet::Kind;
    if (info->kind == K::root || info->kind == K::end || info->kind == K::lhs)
      return fail("'" + t.symbol().name() + "' inside a right-hand side");
    if (static_cast<std::size_t>(gamma_.symbols().arity_of(t.symbol())) != t.arity())
      return fail("arity mismatch for '" + t.symbol().name() + "'");
    if (info->kind == K::param && info->index > lhs_arity)
      return fail("parameter " + std::to_string(info->index) + " out of scope for lhs arity " +
                  std::to_string(lhs_arity));
    for (std::size_t i = 0; i < t.arity(); ++i) {
      path_.push_back(static_cast<int>(i) + 1);
      if (auto e = check_rhs(t.child(i), lhs_arity)) return e;
      path_.pop_back();
    }
    return std::nullopt;
  }

  Term dec_term(const Term& t) const {
    const auto& info = gamma_.classify(t.symbol());
    if (info.kind == GrammarAlphabet::Kind::param) return Term::param(info.index);
    std::vector<Term> kids;
    kids.reserve(t.arity());
    for (const Term& c : t.children()) kids.push_back(dec_term(c));
    Symbol head = info.kind == GrammarAlphabet::Kind::rhs ? info.nonterminal : t.symbol();
    return Term::app(head, std::move(kids));
  }

  const GrammarAlphabet& gamma_;
  std::vector<int> path_;
};

}  // namespace

Term enc(const MacroGrammar& g) { return enc(g, GrammarAlphabet(g.alphabet, g.nonterminals)); }

Term enc(const MacroGrammar& g, const GrammarAlphabet& gamma) {
  g.validate();
  Term spine = Term::leaf(gamma.end());
  for (auto it = g.rules.rbegin(); it != g.rules.rend(); ++it)
    spine = Term::app(gamma.lhs(it->lhs), {enc_term(it->rhs, g, gamma), spine});
  return Term::app(gamma.root(), {spine});
}

std::optional<std::string> check_grammar_tree(const Term& t, const GrammarAlphabet& gamma) {
  return Decoder(gamma).check(t);
}

MacroGrammar dec(const Term& t, const GrammarAlphabet& gamma) { return Decoder(gamma).decode(t); }

MacroGrammar permissive_meta(const RankedAlphabet& sigma, const NonterminalSet& nonterminals) {
  GrammarAlphabet gamma(sigma, nonterminals);
  MacroGrammar m;
  Symbol s("@S"), prod("@Prod"), term("@Term");
  m.start = s;
  m.alphabet = gamma.symbols();
  for (Symbol n : {s, prod, term}) {
    if (m.alphabet.contains(n)) throw Error("meta nonterminal '" + n.name() + "' collides");
    m.nonterminals.add(n, 0);
  }
  Term t = Term::leaf(term);
  auto args = [&](int k) { return std::vector<Term>(static_cast<std::size_t>(k), t); };
  m.rules.push_back({s, Term::app(gamma.root(), {Term::leaf(prod)})});
  for (Symbol n : gamma.columns())
    m.rules.push_back({prod, Term::app(gamma.lhs(n), {t, Term::leaf(prod)})});
  m.rules.push_back({prod, Term::leaf(gamma.end())});
  for (const auto& [f, a] : sigma.entries()) m.rules.push_back({term, Term::app(f, args(a))});
  for (Symbol n : gamma.columns())
    m.rules.push_back({term, Term::app(gamma.rhs(n), args(nonterminals.arity_of(n)))});
  for (int i = 1; i <= gamma.max_param(); ++i) m.rules.push_back({term, Term::leaf(gamma.param(i))});
  m.validate();
  return m;
}

MacroGrammar pool_meta(const RankedAlphabet& sigma, const NonterminalSet& nonterminals,
                       Symbol start, const std::vector<Rule>& pool) {
  GrammarAlphabet gamma(sigma, nonterminals);
  MacroGrammar shape;
  shape.alphabet = sigma;
  shape.nonterminals = nonterminals;
  MacroGrammar m;
  Symbol s("@S"), first("@First"), rest("@Rest");
  m.start = s;
  m.alphabet = gamma.symbols();
  for (Symbol n : {s, first, rest}) {
    if (m.alphabet.contains(n)) throw Error("meta nonterminal '" + n.name() + "' collides");
    m.nonterminals.add(n, 0);
  }
  m.rules.push_back({s, Term::app(gamma.root(), {Term::leaf(first)})});
  for (const Rule& r : pool) {
    shape.rules = {r};
    shape.start = start;
    if (auto why = shape.check()) throw Error("pool rule is ill-formed: " + *why);
    Term node = enc_term(r.rhs, shape, gamma);
    if (r.lhs == start) m.rules.push_back({first, Term::app(gamma.lhs(r.lhs), {node, Term::leaf(rest)})});
    m.rules.push_back({rest, Term::app(gamma.lhs(r.lhs), {node, Term::leaf(rest)})});
  }
  m.rules.push_back({rest, Term::leaf(gamma.end())});
  return m;
}

namespace {

bool all_productive(const Term& t, const MacroGrammar& g, const std::set<Symbol>& prod) {
  if (g.is_nonterminal(t.symbol())) return prod.count(t.symbol()) != 0;
  for (const Term& c : t.children())
    if (!all_productive(c, g, prod)) return false;
  return true;
}

int weight(const Term& t, const MacroGrammar& meta, const GrammarAlphabet& gamma,
           const std::map<Symbol, int>& md) {
  if (meta.is_nonterminal(t.symbol())) return md.at(t.symbol());
  int m = 0;
  for (const Term& c : t.children()) m = std::max(m, weight(c, meta, gamma, md));
  const auto* info = gamma.info(t.symbol());
  if (info && info->kind == GrammarAlphabet::Kind::rhs &&
      gamma.nonterminals().arity_of(info->nonterminal) > 0)
    ++m;
  return m;
}

void reach(const Term& t, const MacroGrammar& g, std::set<Symbol>& out,
           std::vector<Symbol>& work) {
  if (g.is_nonterminal(t.symbol()) && out.insert(t.symbol()).second) work.push_back(t.symbol());
  for (const Term& c : t.children()) reach(c, g, out, work);
}

}  // namespace

std::optional<int> meta_macro_depth_bound(const MacroGrammar& meta, const GrammarAlphabet& gamma) {
  if (!meta.is_regular()) throw Error("meta-grammar must be regular");
  std::set<Symbol> productive;
  for (bool changed = true; changed;) {
    changed = false;
    for (const Rule& r : meta.rules)
      if (!productive.count(r.lhs) && all_productive(r.rhs, meta, productive)) {
        productive.insert(r.lhs);
        changed = true;
      }
  }
  std::set<Symbol> reachable;
  std::vector<Symbol> work;
  if (!meta.start.empty() && productive.count(meta.start)) {
    reachable.insert(meta.start);
    work.push_back(meta.start);
  }
  while (!work.empty()) {
    Symbol n = work.back();
    work.pop_back();
    for (const Rule& r : meta.rules)
      if (r.lhs == n && all_productive(r.rhs, meta, productive)) reach(r.rhs, meta, reachable, work);
  }
  std::vector<const Rule*> live;
  for (const Rule& r : meta.rules)
    if (reachable.count(r.lhs) && all_productive(r.rhs, meta, productive)) live.push_back(&r);

  std::map<Symbol, int> md;
  for (const auto& [n, a] : meta.nonterminals.entries()) md[n] = 0;
  // Without a positive-weight cycle the values settle within |N| rounds.
  const std::size_t rounds = meta.nonterminals.size() + 2;
  for (std::size_t round = 0; round <= rounds; ++round) {
    bool changed = false;
    for (const Rule* r : live) {
      int w = weight(r->rhs, meta, gamma, md);
      if (w > md[r->lhs]) {
        md[r->lhs] = w;
        changed = true;
      }
    }
    if (!changed) {
      int best = 0;
      for (Symbol n : reachable) best = std::max(best, md[n]);
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace dslsynth
