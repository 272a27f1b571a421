// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/core.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <deque>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/functional/hash.hpp>

namespace dslsynth {

ResourceLimit::ResourceLimit(const std::string& cap, std::size_t explored)
    : Error("resource limit '" + cap + "' exceeded after " + std::to_string(explored) +
            " explored items"),
      cap_(cap),
      explored_(explored) {}

// ---------------------------------------------------------------------------
// Symbol interning

namespace {

struct Interner {
  std::mutex mu;
  std::deque<std::string> names{std::string()};
  std::unordered_map<std::string_view, std::uint32_t> ids{{std::string_view(), 0}};
};

Interner& interner() {
  static Interner* in = new Interner;
  return *in;
}

}  // namespace

Symbol::Symbol(std::string_view name) {
  Interner& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.ids.find(name);
  if (it != in.ids.end()) {
    id_ = it->second;
    name_ = &in.names[id_];
    return;
  }
  // std::deque never relocates existing elements on push_back.
  in.names.emplace_back(name);
  id_ = static_cast<std::uint32_t>(in.names.size() - 1);
  name_ = &in.names.back();
  in.ids.emplace(std::string_view(*name_), id_);
}

const std::string& Symbol::name() const {
  static const std::string empty;
  return name_ ? *name_ : empty;
}

std::strong_ordering operator<=>(Symbol a, Symbol b) {
  if (a.id_ == b.id_) return std::strong_ordering::equal;
  int c = a.name().compare(b.name());
  return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
}

// ---------------------------------------------------------------------------
// RankedAlphabet

RankedAlphabet::RankedAlphabet(std::initializer_list<std::pair<std::string_view, int>> entries) {
  for (const auto& [name, arity] : entries) add(name, arity);
}

void RankedAlphabet::add(Symbol s, int arity) {
  if (s.empty()) throw Error("empty symbol name");
  if (arity < 0) throw Error("negative arity for symbol '" + s.name() + "'");
  auto [it, inserted] = arity_.emplace(s, arity);
  if (!inserted && it->second != arity)
    throw Error("symbol '" + s.name() + "' declared with arities " +
                std::to_string(it->second) + " and " + std::to_string(arity));
}

std::optional<int> RankedAlphabet::arity(Symbol s) const {
  auto it = arity_.find(s);
  if (it == arity_.end()) return std::nullopt;
  return it->second;
}

int RankedAlphabet::arity_of(Symbol s) const {
  auto a = arity(s);
  if (!a) throw Error("undeclared symbol '" + s.name() + "'");
  return *a;
}

int RankedAlphabet::max_arity() const {
  int m = 0;
  for (const auto& [s, a] : arity_) m = std::max(m, a);
  return m;
}

// ---------------------------------------------------------------------------
// Term

Term Term::app(Symbol s, std::vector<Term> children) {
  auto n = std::make_shared<Node>();
  n->symbol = s;
  std::size_t h = std::hash<std::uint32_t>()(s.id());
  std::size_t size = 1, height = 0;
  for (const Term& c : children) {
    if (!c.valid()) throw Error("invalid child term");
    boost::hash_combine(h, c.hash());
    size += c.size();
    height = std::max(height, c.height());
  }
  n->hash = h;
  n->size = size;
  n->height = height + 1;
  n->children = std::move(children);
  Term t;
  t.node_ = std::move(n);
  return t;
}

Term Term::param(int index) {
  if (index < 1) throw Error("parameter index must be positive");
  auto n = std::make_shared<Node>();
  n->param = index;
  n->hash = boost::hash_value(std::make_pair(0x9e3779b9u, index));
  Term t;
  t.node_ = std::move(n);
  return t;
}

Term Term::substitute(const std::vector<Term>& args) const {
  if (is_param()) {
    if (static_cast<std::size_t>(param_index()) > args.size())
      throw Error("parameter #" + std::to_string(param_index()) + " has no argument");
    return args[param_index() - 1];
  }
  if (children().empty()) return *this;
  std::vector<Term> kids;
  kids.reserve(arity());
  bool changed = false;
  for (const Term& c : children()) {
    kids.push_back(c.substitute(args));
    changed = changed || kids.back().identity() != c.identity();
  }
  if (!changed) return *this;
  return app(symbol(), std::move(kids));
}

bool Term::has_params() const { return max_param() > 0; }

int Term::max_param() const {
  if (is_param()) return param_index();
  int m = 0;
  for (const Term& c : children()) m = std::max(m, c.max_param());
  return m;
}

namespace {

void print_term(const Term& t, std::string& out) {
  if (t.is_param()) {
    out += '#';
    out += std::to_string(t.param_index());
    return;
  }
  out += t.symbol().name();
  if (t.arity() == 0) return;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    print_term(t.child(i), out);
  }
  out += ')';
}

}  // namespace

std::string Term::to_string() const {
  std::string out;
  if (valid()) print_term(*this, out);
  return out;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  if (a.node_->param != b.node_->param || a.symbol() != b.symbol()) return false;
  if (a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (!(a.child(i) == b.child(i))) return false;
  return true;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (!a.node_) return std::strong_ordering::less;
  if (!b.node_) return std::strong_ordering::greater;
  if (auto c = a.symbol() <=> b.symbol(); c != 0) return c;
  if (auto c = a.node_->param <=> b.node_->param; c != 0) return c;
  if (auto c = a.arity() <=> b.arity(); c != 0) return c;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (auto c = a.child(i) <=> b.child(i); c != 0) return c;
  return std::strong_ordering::equal;
}

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view s) : s_(s) {}

  Term parse() {
    Term t = term();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return t;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw Error("term parse error at offset " + std::to_string(pos_) + ": " + what);
  }
  static bool name_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',';
  }
  Term term() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '#') {
      ++pos_;
      std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (b == pos_) fail("expected parameter index");
      return Term::param(std::stoi(std::string(s_.substr(b, pos_ - b))));
    }
    std::size_t b = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    if (b == pos_) fail("expected symbol");
    Symbol sym(s_.substr(b, pos_ - b));
    skip();
    std::vector<Term> kids;
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      for (;;) {
        kids.push_back(term());
        skip();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return Term::app(sym, std::move(kids));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Term parse_term(std::string_view text) { return TermParser(text).parse(); }

bool well_formed_term(const Term& t, const RankedAlphabet& sigma) {
  if (!t.valid() || t.is_param()) return false;
  auto a = sigma.arity(t.symbol());
  if (!a || static_cast<std::size_t>(*a) != t.arity()) return false;
  for (const Term& c : t.children())
    if (!well_formed_term(c, sigma)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// MacroGrammar

bool MacroGrammar::is_regular() const {
  for (const auto& [n, a] : nonterminals.entries())
    if (a > 0) return false;
  return true;
}

bool MacroGrammar::is_macro(Symbol s) const {
  auto a = nonterminals.arity(s);
  return a && *a > 0;
}

namespace {

std::optional<std::string> check_rhs(const MacroGrammar& g, const Term& t, int lhs_arity) {
  if (t.is_param()) {
    if (t.param_index() > lhs_arity)
      return "parameter #" + std::to_string(t.param_index()) + " exceeds arity " +
             std::to_string(lhs_arity);
    return std::nullopt;
  }
  auto a = g.nonterminals.arity(t.symbol());
  if (!a) a = g.alphabet.arity(t.symbol());
  if (!a) return "undeclared symbol '" + t.symbol().name() + "'";
  if (static_cast<std::size_t>(*a) != t.arity())
    return "symbol '" + t.symbol().name() + "' expects " + std::to_string(*a) + " children, got " +
           std::to_string(t.arity());
  for (const Term& c : t.children())
    if (auto e = check_rhs(g, c, lhs_arity)) return e;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> MacroGrammar::check() const {
  for (const auto& [n, a] : nonterminals.entries())
    if (alphabet.contains(n)) return "nonterminal '" + n.name() + "' is also an alphabet symbol";
  if (!start.empty()) {
    auto a = nonterminals.arity(start);
    if (!a) return "start '" + start.name() + "' is not a nonterminal";
    if (*a != 0) return "start '" + start.name() + "' must have arity 0";
  }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const Rule& r = rules[i];
    auto a = nonterminals.arity(r.lhs);
    if (!a) return "rule " + std::to_string(i) + ": lhs '" + r.lhs.name() + "' is not a nonterminal";
    if (!r.rhs.valid()) return "rule " + std::to_string(i) + ": empty rhs";
    if (auto e = check_rhs(*this, r.rhs, *a)) return "rule " + std::to_string(i) + ": " + *e;
  }
  return std::nullopt;
}

void MacroGrammar::validate() const {
  if (auto e = check()) throw Error("ill-formed grammar: " + *e);
}

std::vector<std::size_t> MacroGrammar::rules_for(Symbol lhs) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (rules[i].lhs == lhs) out.push_back(i);
  return out;
}

std::string MacroGrammar::to_string() const {
  std::ostringstream os;
  os << "start " << (start.empty() ? std::string("-") : start.name()) << '\n';
  for (const Rule& r : rules) {
    os << r.lhs.name();
    int a = nonterminals.arity(r.lhs).value_or(0);
    if (a > 0) {
      os << '(';
      for (int i = 1; i <= a; ++i) os << (i > 1 ? "," : "") << '#' << i;
      os << ')';
    }
    os << " -> " << r.rhs.to_string() << '\n';
  }
  return os.str();
}

MacroGrammar make_grammar(std::string_view start, const NonterminalSet& nonterminals,
                          const RankedAlphabet& alphabet,
                          const std::vector<std::pair<std::string, std::string>>& rules) {
  MacroGrammar g;
  if (!start.empty()) g.start = Symbol(start);
  g.nonterminals = nonterminals;
  g.alphabet = alphabet;
  for (const auto& [lhs, rhs] : rules) g.rules.push_back({Symbol(lhs), parse_term(rhs)});
  g.validate();
  return g;
}

MacroGrammar extend(const MacroGrammar& g, const MacroGrammar& base) {
  if (!(g.alphabet == base.alphabet)) throw Error("extend: alphabets differ");
  MacroGrammar out = g;
  for (const auto& [n, a] : base.nonterminals.entries()) {
    auto mine = g.nonterminals.arity(n);
    if (mine && *mine != a)
      throw Error("extend: nonterminal '" + n.name() + "' has arity " + std::to_string(*mine) +
                  " but the base declares " + std::to_string(a));
    out.nonterminals.add(n, a);
  }
  out.rules.insert(out.rules.end(), base.rules.begin(), base.rules.end());
  return out;
}

// ---------------------------------------------------------------------------
// Outermost derivation

namespace {

struct FormKey {
  Term form;
  int depth;
  friend bool operator==(const FormKey&, const FormKey&) = default;
};

struct FormKeyHash {
  std::size_t operator()(const FormKey& k) const {
    std::size_t h = k.form.hash();
    boost::hash_combine(h, k.depth);
    return h;
  }
};

using TermSet = std::vector<Term>;  // sorted, unique

class Deriver {
 public:
  Deriver(const MacroGrammar& g, const ResourceLimits& limits) : g_(g), limits_(limits) {
    for (std::size_t i = 0; i < g.rules.size(); ++i) by_lhs_[g.rules[i].lhs].push_back(i);
  }

  // Ground terms derivable from the parameter-free sentential form within
  // the budget.
  const TermSet& derive(const Term& form, int depth) {
    FormKey key{form, depth};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    TermSet out = compute(form, depth);
    return memo_.emplace(std::move(key), std::move(out)).first->second;
  }

  bool ground(const Term& t) {
    if (auto it = ground_.find(t.identity()); it != ground_.end()) return it->second;
    bool r = !g_.is_nonterminal(t.symbol());
    for (const Term& c : t.children()) r = r && ground(c);
    ground_.emplace(t.identity(), r);
    keep_.push_back(t);
    return r;
  }

 private:
  TermSet compute(const Term& form, int depth) {
    if (form.size() > limits_.max_term_size) throw ResourceLimit("max_term_size", form.size());
    if (ground(form)) return {form};
    Symbol head = form.symbol();
    if (g_.is_nonterminal(head)) {
      if (depth == 0) return {};
      std::vector<Term> merged;
      auto it = by_lhs_.find(head);
      if (it == by_lhs_.end()) return {};
      for (std::size_t r : it->second) {
        Term body = g_.rules[r].rhs.substitute(form.children());
        const TermSet& part = derive(body, depth - 1);
        merged.insert(merged.end(), part.begin(), part.end());
        charge(merged.size());
      }
      std::sort(merged.begin(), merged.end());
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      return merged;
    }
    // Terminal head: cartesian product over children.
    std::vector<const TermSet*> parts;
    std::size_t total = 1;
    for (const Term& c : form.children()) {
      parts.push_back(&derive(c, depth));
      total *= parts.back()->size();
      if (total == 0) return {};
      charge(total);
    }
    TermSet out;
    out.reserve(total);
    const std::size_t n = parts.size();
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      std::vector<Term> kids;
      kids.reserve(n);
      for (std::size_t i = 0; i < n; ++i) kids.push_back((*parts[i])[idx[i]]);
      out.push_back(Term::app(head, std::move(kids)));
      std::size_t i = n;
      while (i > 0 && ++idx[i - 1] == parts[i - 1]->size()) idx[--i] = 0;
      if (i == 0) break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void charge(std::size_t n) {
    if (n > limits_.max_terms) throw ResourceLimit("max_terms", n);
  }

  const MacroGrammar& g_;
  const ResourceLimits& limits_;
  std::map<Symbol, std::vector<std::size_t>> by_lhs_;
  std::unordered_map<FormKey, TermSet, FormKeyHash> memo_;
  std::unordered_map<const void*, bool> ground_;
  std::vector<Term> keep_;
};

}  // namespace

std::map<Term, int> derive_outermost(const MacroGrammar& g, int depth_budget,
                                     const ResourceLimits& limits) {
  if (depth_budget < 0) throw Error("negative depth budget");
  g.validate();
  std::map<Term, int> out;
  if (g.start.empty()) return out;
  Deriver d(g, limits);
  Term start = Term::leaf(g.start);
  for (int depth = 1; depth <= depth_budget; ++depth) {
    for (const Term& t : d.derive(start, depth)) out.emplace(t, depth);
    if (out.size() > limits.max_terms) throw ResourceLimit("max_terms", out.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parse depth

namespace {

constexpr int kInf = INT_MAX;

// Bottom-up minimal parse depth for regular grammars.
class RegularDepth {
 public:
  explicit RegularDepth(const MacroGrammar& g) : g_(g) {
    for (const auto& [n, a] : g.nonterminals.entries()) index_.emplace(n, index_.size());
  }

  int depth_of(Symbol n, const Term& e) {
    const std::vector<int>& d = table(e);
    return d[index_.at(n)];
  }

 private:
  const std::vector<int>& table(const Term& e) {
    if (auto it = memo_.find(e.identity()); it != memo_.end()) return it->second;
    for (const Term& c : e.children()) table(c);
    std::vector<int> d(index_.size(), kInf);
    // Unit rules may relate nonterminals on the same subterm; relax until stable.
    for (bool changed = true; changed;) {
      changed = false;
      for (const Rule& r : g_.rules) {
        int m = match(r.rhs, e, d);
        if (m == kInf) continue;
        int& slot = d[index_.at(r.lhs)];
        if (m + 1 < slot) {
          slot = m + 1;
          changed = true;
        }
      }
    }
    keep_.push_back(e);
    return memo_.emplace(e.identity(), std::move(d)).first->second;
  }

  int match(const Term& pat, const Term& e, const std::vector<int>& here) {
    if (g_.is_nonterminal(pat.symbol())) return lookup(pat.symbol(), e, here);
    if (pat.symbol() != e.symbol() || pat.arity() != e.arity()) return kInf;
    int m = 0;
    for (std::size_t i = 0; i < pat.arity(); ++i) {
      int c = match(pat.child(i), e.child(i), here);
      if (c == kInf) return kInf;
      m = std::max(m, c);
    }
    return m;
  }

  int lookup(Symbol n, const Term& e, const std::vector<int>& here) {
    auto it = memo_.find(e.identity());
    if (it == memo_.end()) return here[index_.at(n)];
    return it->second[index_.at(n)];
  }

  const MacroGrammar& g_;
  std::map<Symbol, std::size_t> index_;
  std::unordered_map<const void*, std::vector<int>> memo_;
  std::vector<Term> keep_;
};

struct SearchKey {
  Term form;
  const void* target;
  int depth;
  friend bool operator==(const SearchKey&, const SearchKey&) = default;
};

struct SearchKeyHash {
  std::size_t operator()(const SearchKey& k) const {
    std::size_t h = k.form.hash();
    boost::hash_combine(h, k.target);
    boost::hash_combine(h, k.depth);
    return h;
  }
};

// Targeted outermost search for macro grammars, memoized on
// (sentential form, target subterm, budget).
class MacroDepth {
 public:
  MacroDepth(const MacroGrammar& g, const ResourceLimits& limits) : g_(g), limits_(limits) {}

  bool derives(const Term& form, const Term& target, int depth) {
    SearchKey key{form, target.identity(), depth};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() > limits_.max_terms) throw ResourceLimit("max_terms", memo_.size());
    if (form.size() > limits_.max_term_size) throw ResourceLimit("max_term_size", form.size());
    bool r = false;
    if (g_.is_nonterminal(form.symbol())) {
      if (depth > 0) {
        for (const Rule& rule : g_.rules) {
          if (rule.lhs != form.symbol()) continue;
          if (derives(rule.rhs.substitute(form.children()), target, depth - 1)) {
            r = true;
            break;
          }
        }
      }
    } else if (form.symbol() == target.symbol() && form.arity() == target.arity()) {
      r = true;
      for (std::size_t i = 0; i < form.arity() && r; ++i)
        r = derives(form.child(i), target.child(i), depth);
    }
    memo_.emplace(std::move(key), r);
    return r;
  }

 private:
  const MacroGrammar& g_;
  const ResourceLimits& limits_;
  std::unordered_map<SearchKey, bool, SearchKeyHash> memo_;
};

}  // namespace

Depth parse_depth(const MacroGrammar& g, const Term& e, int budget, const ResourceLimits& limits) {
  g.validate();
  if (g.start.empty() || !well_formed_term(e, g.alphabet)) return Depth::infinity();
  if (g.is_regular()) {
    RegularDepth rd(g);
    int d = rd.depth_of(g.start, e);
    return d == kInf ? Depth::infinity() : Depth::finite_value(d);
  }
  MacroDepth md(g, limits);
  Term start = Term::leaf(g.start);
  for (int d = 1; d <= budget; ++d)
    if (md.derives(start, e, d)) return Depth::finite_value(d);
  return Depth::lower_bound(budget + 1);
}

int macro_depth(const Term& rhs, const NonterminalSet& nonterminals) {
  if (rhs.is_param()) return 0;
  int m = 0;
  for (const Term& c : rhs.children()) m = std::max(m, macro_depth(c, nonterminals));
  auto a = nonterminals.arity(rhs.symbol());
  return (a && *a > 0) ? m + 1 : m;
}

int macro_depth_bound(const MacroGrammar& g) {
  int m = 0;
  for (const Rule& r : g.rules) m = std::max(m, macro_depth(r.rhs, g.nonterminals));
  return m;
}

}  // namespace dslsynth
