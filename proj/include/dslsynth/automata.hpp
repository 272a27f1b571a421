// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Top-down nondeterministic tree automata and two-way alternating tree
/// automata over lazily generated state spaces.
#ifndef DSLSYNTH_AUTOMATA_HPP
#define DSLSYNTH_AUTOMATA_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <boost/functional/hash.hpp>

#include "dslsynth/core.hpp"

namespace dslsynth {

using StateId = std::uint32_t;
using StateSet = boost::dynamic_bitset<>;

/// Top-down nondeterministic tree automaton.
class Nta {
 public:
  struct Transition {
    StateId from;
    Symbol symbol;
    std::vector<StateId> children;
  };

  Nta() = default;
  explicit Nta(RankedAlphabet alphabet) : alphabet_(std::move(alphabet)) {}

  StateId add_state(std::string label = {});
  void add_initial(StateId q);
  /// Throws on undeclared states, unknown symbols or arity mismatch.
  void add_transition(StateId from, Symbol symbol, std::vector<StateId> children);

  const RankedAlphabet& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return labels_.size(); }
  const std::string& label(StateId q) const { return labels_.at(q); }
  const std::vector<StateId>& initial() const { return initial_; }
  bool is_initial(StateId q) const;
  const std::vector<Transition>& transitions() const { return transitions_; }
  /// Indices into transitions() for (from, symbol).
  const std::vector<std::uint32_t>& transitions_from(StateId q, Symbol f) const;
  /// Indices into transitions() for a symbol.
  const std::vector<std::uint32_t>& transitions_on(Symbol f) const;

  /// Calls fn for every transition on f whose children lie in the given
  /// sets, scanning or probing a child-tuple index, whichever is cheaper.
  void for_each_up(Symbol f, const std::vector<const StateSet*>& kids,
                   const std::function<void(const Transition&)>& fn) const;
  /// States from which t has an accepting run (bottom-up).
  StateSet run_states(const Term& t) const;
  bool accepts(const Term& t) const;

 private:
  static std::uint64_t key(StateId q, Symbol f) { return (std::uint64_t{q} << 32) | f.id(); }

  RankedAlphabet alphabet_;
  std::vector<std::string> labels_;
  std::vector<StateId> initial_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> from_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> on_;
  // Child-tuple index, symbol id first; built on demand.
  using TupleIndex = std::unordered_map<std::vector<StateId>, std::vector<std::uint32_t>,
                                        boost::hash<std::vector<StateId>>>;
  mutable std::shared_ptr<const TupleIndex> tuple_index_;
  mutable std::shared_ptr<std::mutex> index_mu_ = std::make_shared<std::mutex>();
};

/// L = L(G). One state per nonterminal plus one per non-nonterminal proper
/// subterm of a rule rhs; unit rules are closed away.
Nta nta_from_grammar(const MacroGrammar& g);
Nta nta_intersect(const Nta& a, const Nta& b);
/// n-ary product over reachable state tuples, labelled "(l1,...,ln)".
Nta nta_intersect_all(const std::vector<const Nta*>& parts);
Nta nta_union(const Nta& a, const Nta& b);
/// Restriction to productive states reachable from the initial states.
Nta nta_trim(const Nta& a);
bool nta_membership(const Term& t, const Nta& a);
/// A witness of minimal height, or nullopt when the language is empty.
std::optional<Term> nta_emptiness(const Nta& a);

/// Accepted terms by increasing size, each size block in Term order.
class NtaEnumerator {
 public:
  explicit NtaEnumerator(const Nta& a, ResourceLimits limits = {});

  const std::vector<Term>& from_state(StateId q, std::size_t size);
  std::vector<Term> accepted(std::size_t size);
  /// Calls fn on every accepted term of size ≤ max_size until fn returns false.
  void for_each(std::size_t max_size, const std::function<bool(const Term&)>& fn);

 private:
  void charge(std::size_t n);

  const Nta& a_;
  ResourceLimits limits_;
  std::size_t stored_ = 0;
  std::map<std::pair<StateId, std::size_t>, std::vector<Term>> memo_;
};

// ---------------------------------------------------------------------------
// Positive Boolean transition formulas.

/// Directions: 0 stays, -1 moves up, i ≥ 1 moves to child i.
constexpr int kStay = 0;
constexpr int kUp = -1;
constexpr int kLeft = 1;
constexpr int kRight = 2;
constexpr int kDown = 1;

class Formula {
 public:
  enum class Kind { top, bottom, conj, disj, atom };

  Formula() : Formula(bottom()) {}
  static Formula top();
  static Formula bottom();
  static Formula atom(int dir, StateId q);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula stay(StateId q) { return atom(kStay, q); }

  Kind kind() const { return node_->kind; }
  bool is_top() const { return kind() == Kind::top; }
  bool is_bottom() const { return kind() == Kind::bottom; }
  int dir() const { return node_->dir; }
  StateId state() const { return node_->state; }
  const std::vector<Formula>& parts() const { return node_->parts; }

  bool evaluate(const std::function<bool(int, StateId)>& atom_value) const;
  void for_each_atom(const std::function<void(int, StateId)>& fn) const;
  /// Replaces every atom by fn(dir, state).
  Formula map_atoms(const std::function<Formula(int, StateId)>& fn) const;
  std::size_t size() const;
  std::string to_string() const;

  friend Formula operator&&(const Formula& a, const Formula& b) { return conj({a, b}); }
  friend Formula operator||(const Formula& a, const Formula& b) { return disj({a, b}); }

 private:
  struct Node {
    Kind kind;
    int dir = 0;
    StateId state = 0;
    std::vector<Formula> parts;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Swaps conjunction with disjunction and true with false; atoms unchanged.
Formula dual(const Formula& f);
/// Replaces each child atom (i, q) by (stay, state_for(q, i)); other atoms
/// are left in place.
Formula adorn(const Formula& f, const std::function<StateId(StateId q, int child)>& state_for);
/// The NTA's transition formula: the disjunction over transitions of q on f
/// of the conjunction of child atoms.
Formula nta_formula(const Nta& a, StateId q, Symbol f);

// ---------------------------------------------------------------------------
// Two-way alternating tree automata.

using NodeId = std::uint32_t;
constexpr NodeId kNoNode = ~NodeId{0};

/// Preorder node array over a term.
class TreeView {
 public:
  explicit TreeView(const Term& t);

  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  Symbol label(NodeId n) const { return nodes_[n].term.symbol(); }
  const Term& subterm(NodeId n) const { return nodes_[n].term; }
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  const std::vector<NodeId>& children(NodeId n) const { return nodes_[n].children; }
  /// Target of a move, or kNoNode when it leaves the tree.
  NodeId move(NodeId n, int dir) const;

 private:
  struct Node {
    Term term;
    NodeId parent;
    std::vector<NodeId> children;
  };
  std::vector<Node> nodes_;
};

/// Read access to the fixed input tree during membership. holds() decides
/// membership of a configuration in the winning set; constructions use it to
/// resolve guesses that are checkable deterministically.
class Guide {
 public:
  virtual ~Guide() = default;
  virtual const TreeView& tree() const = 0;
  virtual NodeId node() const = 0;
  virtual bool holds(NodeId n, StateId q) const = 0;
};

class TwoWayAta {
 public:
  virtual ~TwoWayAta() = default;
  virtual const RankedAlphabet& alphabet() const = 0;
  virtual std::vector<StateId> initial() const = 0;
  /// Transition formula. `guide` is null outside fixed-tree membership, in
  /// which case guesses must be enumerated.
  virtual Formula delta(StateId q, Symbol a, const Guide* guide) const = 0;
  virtual std::string describe(StateId q) const = 0;
  virtual std::size_t num_states() const = 0;
};

/// Thread-safe interning of structured state descriptors.
template <class Desc, class Hash = boost::hash<Desc>>
class StateInterner {
 public:
  StateId intern(const Desc& d) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, fresh] = ids_.try_emplace(d, static_cast<StateId>(descs_.size()));
    if (fresh) descs_.push_back(d);
    return it->second;
  }
  Desc get(StateId q) const {
    std::lock_guard<std::mutex> lock(mu_);
    return descs_.at(q);
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return descs_.size();
  }

 private:
  mutable std::mutex mu_;
  std::deque<Desc> descs_;
  std::unordered_map<Desc, StateId, Hash> ids_;
};

/// Fixed-tree membership: least fixpoint over the configurations reachable
/// from (root, initial). Results are cached across queries on the same tree.
class AtaEvaluator {
 public:
  AtaEvaluator(const TwoWayAta& a, const Term& t, ResourceLimits limits = {});
  ~AtaEvaluator();

  bool accepts();
  bool holds(NodeId n, StateId q);
  std::size_t configurations() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

bool ata_membership(const Term& t, const TwoWayAta& a, const ResourceLimits& limits = {});

/// Bottom-up deterministic summaries of subtrees: for every state, the
/// minimal sets of configurations at the parent that make the state win.
class SummaryAutomaton {
 public:
  /// Closes the initial states under all transition formulas over the
  /// given symbols (all of a.alphabet() when empty).
  SummaryAutomaton(const TwoWayAta& a, RankedAlphabet symbols = {}, ResourceLimits limits = {});
  ~SummaryAutomaton();

  using SummaryId = std::uint32_t;
  SummaryId step(Symbol f, const std::vector<SummaryId>& children);
  bool accepting(SummaryId s) const;
  std::size_t num_summaries() const;
  std::size_t num_states() const;
  const RankedAlphabet& symbols() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

/// L(result) = L(a). Exponential; meant for micro instances.
Nta ata_to_nta(const TwoWayAta& a, const ResourceLimits& limits = {});

/// Emptiness of L(meta) ∩ L(a) by a lazy bottom-up product with summaries.
/// Returns a witness accepted by both, or nullopt when the intersection is
/// empty.
std::optional<Term> ata_product_witness(const Nta& meta, const TwoWayAta& a,
                                        const ResourceLimits& limits = {});

/// Conjunction of automata over one alphabet through a fresh initial state.
class AtaIntersection : public TwoWayAta {
 public:
  explicit AtaIntersection(std::vector<std::shared_ptr<const TwoWayAta>> parts);
  const RankedAlphabet& alphabet() const override { return parts_.front()->alphabet(); }
  std::vector<StateId> initial() const override { return {0}; }
  Formula delta(StateId q, Symbol a, const Guide* guide) const override;
  std::string describe(StateId q) const override;
  std::size_t num_states() const override;

 private:
  std::pair<std::size_t, StateId> split(StateId q) const { return {(q - 1) % parts_.size(), (q - 1) / parts_.size()}; }
  StateId join(std::size_t part, StateId q) const {
    return static_cast<StateId>(1 + q * parts_.size() + part);
  }
  std::vector<std::shared_ptr<const TwoWayAta>> parts_;
};

}  // namespace dslsynth

#endif  // DSLSYNTH_AUTOMATA_HPP
