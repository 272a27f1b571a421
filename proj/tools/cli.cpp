// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/cli.hpp"

#include <algorithm>
#include <sstream>

#include <CLI11.hpp>

#include "dslsynth/io.hpp"

namespace dslsynth::cli {

namespace {

using io::Json;

struct Options {
  bool json = false;
  std::string problem, grammar, input;
  std::string mode;  // overrides the problem's mode when set
  std::string table_mode = "vectors";
  std::string strategy = "enumerate";
  std::size_t max_size = 12;
  int horizon = 12;
  int depth = 3;
  std::size_t instance = 0;
  bool emit_witnesses = false;
  bool nonstrict_tie = false;
};

SynthesisProblem load_problem(const Options& o) {
  SynthesisProblem p = io::problem_from_json(io::read_json_file(o.problem));
  if (!o.mode.empty()) p.mode = parse_ordering(o.mode);
  return p;
}

MacroGrammar load_grammar_for(const SynthesisProblem& p, const std::string& path) {
  return io::grammar_from_json(io::read_json_file(path), &p.alphabet, &p.nonterminals);
}

std::string verdict_line(std::size_t i, const Verdict& v) {
  std::ostringstream os;
  os << "instance " << i << ": " << (v.accepted ? "accept" : "reject");
  if (v.accepted && v.row) os << " at row " << *v.row;
  if (v.accepted && v.witness) os << ", witness " << v.witness->to_string();
  if (!v.accepted) os << ": " << v.reason;
  return os.str();
}

int cmd_encode(const Options& o, std::ostream& out) {
  MacroGrammar g = o.problem.empty() ? io::grammar_from_json(io::read_json_file(o.input))
                                      : load_grammar_for(load_problem(o), o.input);
  GrammarAlphabet gamma(g.alphabet, g.nonterminals);
  Term t = enc(g, gamma);
  if (o.json) {
    out << io::dump(io::grammar_tree_to_json(t, gamma));
  } else {
    out << t.to_string() << "\n";
  }
  return kOk;
}

int cmd_decode(const Options& o, std::ostream& out) {
  auto [t, gamma] = io::grammar_tree_from_json(io::read_json_file(o.input));
  if (auto why = check_grammar_tree(t, gamma)) throw Error("not a grammar tree: " + *why);
  MacroGrammar g = dec(t, gamma);
  if (o.json) {
    out << io::dump(io::grammar_to_json(g));
  } else {
    out << g.to_string();
  }
  return kOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  SynthesisProblem p = load_problem(o);
  MacroGrammar g = load_grammar_for(p, o.grammar);
  std::vector<Verdict> vs = check_grammar(p, g);
  bool all = vs.size() == p.instances.size() &&
             std::all_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.accepted; });
  if (o.json) {
    Json inst = Json::array();
    for (const Verdict& v : vs) inst.push_back(io::verdict_to_json(v));
    out << io::dump({{"format", io::kFormat},
                     {"mode", to_string(p.mode)},
                     {"accepted", all},
                     {"instances", inst}});
  } else {
    for (std::size_t i = 0; i < vs.size(); ++i) out << verdict_line(i, vs[i]) << "\n";
    out << "result: " << (all ? "accept" : "reject") << " (" << to_string(p.mode) << ")\n";
  }
  return all ? kOk : kReject;
}

int cmd_table(const Options& o, std::ostream& out) {
  SynthesisProblem p = load_problem(o);
  MacroGrammar g = load_grammar_for(p, o.grammar);
  if (o.instance >= p.instances.size()) throw Error("no instance " + std::to_string(o.instance));
  const LearningInstance& inst = p.instances[o.instance];
  RecursionTable t;
  if (o.table_mode == "states") {
    t = recursion_table(g, p.base, inst);
  } else if (o.table_mode == "vectors") {
    t = behavioral_table(g, p.base, inst);
  } else {
    throw Error("unknown table mode '" + o.table_mode + "' (expected states or vectors)");
  }
  if (o.json) {
    out << io::dump(io::table_to_json(t));
  } else {
    out << t.to_string();
  }
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  SynthesisProblem p = load_problem(o);
  SynthesisStrategy s;
  if (o.strategy == "enumerate") {
    s.kind = SynthesisStrategy::Kind::enumerate;
  } else if (o.strategy == "convert") {
    s.kind = SynthesisStrategy::Kind::convert;
  } else {
    throw Error("unknown strategy '" + o.strategy + "' (expected enumerate or convert)");
  }
  s.max_size = o.max_size;
  s.horizon = o.horizon;
  SynthesisOutcome r = synthesize(p, s);
  if (o.json) {
    out << io::dump(io::outcome_to_json(r, o.emit_witnesses));
  } else {
    out << "outcome: " << to_string(r.kind) << "\n";
    out << "candidates: " << r.candidates << "\n";
    if (!r.details.empty()) out << "details: " << r.details << "\n";
    if (r.grammar) out << r.grammar->to_string();
    if (o.emit_witnesses)
      for (std::size_t i = 0; i < r.verdicts.size(); ++i) out << verdict_line(i, r.verdicts[i]) << "\n";
  }
  switch (r.kind) {
    case SynthesisOutcome::Kind::solution: return kOk;
    case SynthesisOutcome::Kind::no_solution_within_bound: return kNoSolutionWithinBound;
    case SynthesisOutcome::Kind::no_solution: return kNoSolution;
    case SynthesisOutcome::Kind::resource_limit: return kError;
  }
  return kError;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  SynthesisProblem p = load_problem(o);
  GrammarAlphabet gamma = p.gamma();
  Nta meta = nta_trim(nta_from_grammar(p.meta_grammar()));
  std::vector<InstanceAutomata> automata;
  for (const auto& inst : p.instances) automata.push_back(instance_automata(inst));
  bool empty_y = std::all_of(p.instances.begin(), p.instances.end(),
                             [](const LearningInstance& i) { return i.test.empty(); });
  AcceptOptions accept;
  accept.nonstrict_tie = o.nonstrict_tie;

  std::size_t candidates = 0, skipped = 0, comparisons = 0, disagreements = 0;
  Json examples = Json::array();
  NtaEnumerator en(meta);
  en.for_each(o.max_size, [&](const Term& t) {
    if (check_grammar_tree(t, gamma)) return true;
    MacroGrammar g;
    try {
      g = dec(t, gamma);
    } catch (const Error&) {
      return true;
    }
    if (!g.well_formed()) return true;
    if (!g.is_regular()) {
      ++skipped;
      return true;
    }
    ++candidates;
    MacroGrammar ext = extend(g, p.base);
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
      bool states = solves_grammar(ext, automata[i], p.mode).accepted;
      RecursionTable bt = behavioral_table(ext, p.instances[i]);
      bool vectors = p.mode == Ordering::adequate ? adequate(bt).accepted : acceptable(bt, accept).accepted;
      ++comparisons;
      bool agree = states == vectors;
      if (agree && empty_y) agree = solves_grammar(ext, automata[i], Ordering::adequate).accepted ==
                                    solves_grammar(ext, automata[i], Ordering::depth).accepted;
      if (!agree) {
        ++disagreements;
        if (examples.size() < 5)
          examples.push_back({{"instance", i},
                              {"grammar", g.to_string()},
                              {"state_table", states},
                              {"behavioral_table", vectors}});
      }
    }
    return true;
  });
  if (o.json) {
    out << io::dump({{"format", io::kFormat},
                     {"mode", to_string(p.mode)},
                     {"max_size", o.max_size},
                     {"candidates", candidates},
                     {"skipped_macro_grammars", skipped},
                     {"comparisons", comparisons},
                     {"disagreements", disagreements},
                     {"examples", examples}});
  } else {
    out << "candidates: " << candidates << "\n";
    if (skipped) out << "skipped macro grammars: " << skipped << "\n";
    out << "comparisons: " << comparisons << "\n";
    out << "disagreements: " << disagreements << "\n";
    for (const Json& e : examples)
      out << "  instance " << e["instance"].get<std::size_t>() << ": state table "
          << (e["state_table"].get<bool>() ? "accepts" : "rejects") << ", behavioral table "
          << (e["behavioral_table"].get<bool>() ? "accepts" : "rejects") << "\n"
          << e["grammar"].get<std::string>();
  }
  return disagreements == 0 ? kOk : kReject;
}

int cmd_derive(const Options& o, std::ostream& out) {
  MacroGrammar g = io::grammar_from_json(io::read_json_file(o.grammar));
  if (o.depth < 0) throw Error("--depth must be nonnegative");
  auto terms = derive_outermost(g, o.depth);
  std::vector<std::pair<int, Term>> sorted;
  for (const auto& [t, d] : terms) sorted.push_back({d, t});
  std::sort(sorted.begin(), sorted.end());
  if (o.json) {
    Json list = Json::array();
    for (const auto& [d, t] : sorted) list.push_back({{"term", t.to_string()}, {"depth", d}});
    out << io::dump({{"format", io::kFormat}, {"depth", o.depth}, {"terms", list}});
  } else {
    for (const auto& [d, t] : sorted) out << d << "\t" << t.to_string() << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Grammar synthesis from learning instances", "dslsynth"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  auto json_flag = [&](CLI::App* c) { c->add_flag("--json", o.json, "Emit JSON"); };

  auto* encode = app.add_subcommand("encode", "Encode a grammar file as a grammar tree");
  encode->add_option("grammar", o.input, "Grammar file")->required();
  encode->add_option("--problem", o.problem, "Take the alphabet and nonterminals from a problem file");
  json_flag(encode);

  auto* decode = app.add_subcommand("decode", "Decode a grammar tree file");
  decode->add_option("tree", o.input, "Grammar tree file")->required();
  json_flag(decode);

  auto* check = app.add_subcommand("check", "Check a grammar against every instance of a problem");
  check->add_option("problem", o.problem)->required();
  check->add_option("grammar", o.grammar)->required();
  check->add_option("--mode", o.mode, "adequate or depth (default: the problem's)");
  json_flag(check);

  auto* table = app.add_subcommand("table", "Print the recursion table of a grammar");
  table->add_option("problem", o.problem)->required();
  table->add_option("grammar", o.grammar)->required();
  table->add_option("--mode", o.table_mode, "states or vectors")->capture_default_str();
  table->add_option("--instance", o.instance, "Instance index")->capture_default_str();
  json_flag(table);

  auto* synth = app.add_subcommand("synth", "Synthesize a grammar");
  synth->add_option("problem", o.problem)->required();
  synth->add_option("--strategy", o.strategy, "enumerate or convert")->capture_default_str();
  synth->add_option("--max-size", o.max_size, "Largest grammar tree enumerated")->capture_default_str();
  synth->add_option("--horizon", o.horizon, "Rows explored by the macro depth automaton")
      ->capture_default_str();
  synth->add_option("--mode", o.mode, "adequate or depth (default: the problem's)");
  synth->add_flag("--emit-witnesses", o.emit_witnesses, "Report witness expressions");
  json_flag(synth);

  auto* oracle = app.add_subcommand("oracle", "Compare state-table and behavioral-table verdicts");
  oracle->add_option("problem", o.problem)->required();
  oracle->add_option("--max-size", o.max_size, "Largest grammar tree enumerated")->capture_default_str();
  oracle->add_option("--mode", o.mode, "adequate or depth (default: the problem's)");
  oracle->add_flag("--inject-nonstrict-tie", o.nonstrict_tie)->group("");
  json_flag(oracle);

  auto* derive = app.add_subcommand("derive", "List the outermost language up to a depth");
  derive->add_option("grammar", o.grammar)->required();
  derive->add_option("--depth", o.depth, "Depth budget")->capture_default_str();
  json_flag(derive);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*encode) return cmd_encode(o, out);
    if (*decode) return cmd_decode(o, out);
    if (*check) return cmd_check(o, out);
    if (*table) return cmd_table(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*oracle) return cmd_oracle(o, out);
    if (*derive) return cmd_derive(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace dslsynth::cli
