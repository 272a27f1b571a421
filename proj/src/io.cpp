// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include "dslsynth/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dslsynth::io {

namespace {

void check_keys(const Json& j, const std::string& what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(what + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw Error(what + ": unknown key '" + k + "'");
  }
}

void check_format(const Json& j, const std::string& what) {
  if (!j.contains("format")) return;
  if (!j["format"].is_number_integer() || j["format"].get<int>() != kFormat)
    throw Error(what + ": unsupported format " + j["format"].dump() + " (expected 1)");
}

const std::string& as_string(const Json& j, const std::string& what) {
  if (!j.is_string()) throw Error(what + ": expected a string, got " + j.dump());
  return j.get_ref<const std::string&>();
}

int as_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(what + ": expected an integer, got " + j.dump());
  return j.get<int>();
}

/// Domain labels may be written as strings or numbers.
std::string label_of(const Json& j, const std::string& what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw Error(what + ": expected a domain label, got " + j.dump());
}

void collect_uses(const Term& t, std::map<Symbol, int>& arities) {
  if (t.is_param()) return;
  auto [it, fresh] = arities.try_emplace(t.symbol(), static_cast<int>(t.arity()));
  if (!fresh && it->second != static_cast<int>(t.arity()))
    throw Error("symbol '" + t.symbol().name() + "' used with arities " + std::to_string(it->second) +
                " and " + std::to_string(t.arity()));
  for (const Term& c : t.children()) collect_uses(c, arities);
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Rational parse_rational(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_string()) throw Error("expected a rational string, got " + j.dump());
  const std::string& s = j.get_ref<const std::string&>();
  auto parse_int = [&](const std::string& part, bool allow_sign) -> long long {
    std::size_t i = 0;
    if (allow_sign && !part.empty() && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) throw Error("malformed rational '" + s + "'");
    for (std::size_t k = i; k < part.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(part[k]))) throw Error("malformed rational '" + s + "'");
    try {
      return std::stoll(part);
    } catch (const std::out_of_range&) {
      throw Error("rational '" + s + "' out of range");
    }
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(parse_int(s, true));
  long long num = parse_int(s.substr(0, slash), true);
  long long den = parse_int(s.substr(slash + 1), false);
  if (den == 0) throw Error("rational '" + s + "' has a zero denominator");
  return Rational(num, den);
}

std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Term term_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get_ref<const std::string&>().empty()) throw Error("empty symbol name");
    return Term::leaf(j.get<std::string>());
  }
  if (j.is_object()) {
    check_keys(j, "parameter", {"param"});
    int i = as_int(j.at("param"), "parameter index");
    if (i < 1) throw Error("parameter indices start at 1");
    return Term::param(i);
  }
  if (!j.is_array() || j.empty()) throw Error("expected a term, got " + j.dump());
  const std::string& head = as_string(j[0], "term head");
  if (head.empty()) throw Error("empty symbol name");
  std::vector<Term> kids;
  for (std::size_t i = 1; i < j.size(); ++i) kids.push_back(term_from_json(j[i]));
  return Term::app(head, std::move(kids));
}

Json term_to_json(const Term& t) {
  if (t.is_param()) return Json{{"param", t.param_index()}};
  Json out = Json::array({t.symbol().name()});
  for (const Term& c : t.children()) out.push_back(term_to_json(c));
  return out;
}

Json alphabet_to_json(const RankedAlphabet& a) {
  Json out = Json::object();
  for (const auto& [s, k] : a.entries()) out[s.name()] = k;
  return out;
}

RankedAlphabet alphabet_from_json(const Json& j) {
  if (!j.is_object()) throw Error("alphabet: expected an object of symbol arities");
  RankedAlphabet a;
  for (const auto& [k, v] : j.items()) {
    int arity = as_int(v, "arity of '" + k + "'");
    if (arity < 0) throw Error("arity of '" + k + "' is negative");
    a.add(k, arity);
  }
  return a;
}

NonterminalSet nonterminals_from_json(const Json& j) { return alphabet_from_json(j); }

MacroGrammar grammar_from_json(const Json& j, const RankedAlphabet* alphabet,
                               const NonterminalSet* nonterminals) {
  check_keys(j, "grammar", {"format", "start", "rules", "alphabet", "nonterminals"});
  check_format(j, "grammar");
  MacroGrammar g;
  std::vector<Rule> rules;
  if (j.contains("rules")) {
    if (!j["rules"].is_array()) throw Error("grammar: 'rules' must be an array");
    for (const Json& r : j["rules"]) {
      Json lhs, rhs;
      if (r.is_array() && r.size() == 2) {
        lhs = r[0];
        rhs = r[1];
      } else {
        check_keys(r, "rule", {"lhs", "rhs"});
        if (!r.contains("lhs") || !r.contains("rhs")) throw Error("rule: needs 'lhs' and 'rhs'");
        lhs = r["lhs"];
        rhs = r["rhs"];
      }
      rules.push_back({Symbol(as_string(lhs, "rule lhs")), term_from_json(rhs)});
    }
  }
  if (j.contains("start")) g.start = Symbol(as_string(j["start"], "grammar start"));

  if (nonterminals) {
    g.nonterminals = *nonterminals;
  } else if (j.contains("nonterminals")) {
    g.nonterminals = nonterminals_from_json(j["nonterminals"]);
  } else {
    std::map<Symbol, int> arity;
    if (!g.start.empty()) arity[g.start] = 0;
    for (const Rule& r : rules) {
      int& a = arity[r.lhs];
      if (r.rhs.has_params()) a = std::max(a, r.rhs.max_param());
    }
    for (const auto& [n, a] : arity) g.nonterminals.add(n, a);
  }
  if (alphabet) {
    g.alphabet = *alphabet;
  } else if (j.contains("alphabet")) {
    g.alphabet = alphabet_from_json(j["alphabet"]);
  } else {
    std::map<Symbol, int> uses;
    for (const Rule& r : rules) collect_uses(r.rhs, uses);
    for (const auto& [s, a] : uses) {
      if (g.nonterminals.contains(s)) continue;
      g.alphabet.add(s, a);
    }
  }
  g.rules = std::move(rules);
  g.validate();
  return g;
}

Json grammar_to_json(const MacroGrammar& g) {
  Json rules = Json::array();
  for (const Rule& r : g.rules) rules.push_back({{"lhs", r.lhs.name()}, {"rhs", term_to_json(r.rhs)}});
  Json out{{"format", kFormat},
           {"alphabet", alphabet_to_json(g.alphabet)},
           {"nonterminals", alphabet_to_json(g.nonterminals)},
           {"rules", rules}};
  if (!g.start.empty()) out["start"] = g.start.name();
  return out;
}

Json grammar_tree_to_json(const Term& t, const GrammarAlphabet& gamma) {
  return {{"format", kFormat},
          {"alphabet", alphabet_to_json(gamma.base())},
          {"nonterminals", alphabet_to_json(gamma.nonterminals())},
          {"tree", term_to_json(t)}};
}

std::pair<Term, GrammarAlphabet> grammar_tree_from_json(const Json& j) {
  check_keys(j, "grammar tree", {"format", "alphabet", "nonterminals", "tree"});
  check_format(j, "grammar tree");
  for (const char* k : {"alphabet", "nonterminals", "tree"})
    if (!j.contains(k)) throw Error(std::string("grammar tree: missing '") + k + "'");
  GrammarAlphabet gamma(alphabet_from_json(j["alphabet"]), nonterminals_from_json(j["nonterminals"]));
  return {term_from_json(j["tree"]), gamma};
}

RectangleScenario rectangles_from_json(const Json& sem) {
  check_keys(sem, "rectangle semantics", {"kind", "rectangles", "points"});
  RectangleScenario s;
  if (!sem.contains("rectangles") || !sem["rectangles"].is_object())
    throw Error("rectangle semantics: 'rectangles' must be an object");
  for (const auto& [name, box] : sem["rectangles"].items()) {
    if (!box.is_array() || box.size() != 4)
      throw Error("rectangle '" + name + "': expected [xmin, xmax, ymin, ymax]");
    s.rectangles[name] = {parse_rational(box[0]), parse_rational(box[1]), parse_rational(box[2]),
                          parse_rational(box[3])};
  }
  if (!sem.contains("points") || !sem["points"].is_array())
    throw Error("rectangle semantics: 'points' must be an array");
  for (const Json& p : sem["points"]) {
    check_keys(p, "point", {"xy", "label"});
    if (!p.contains("xy") || !p["xy"].is_array() || p["xy"].size() != 2)
      throw Error("point: 'xy' must be [x, y]");
    const std::string& label = as_string(p.at("label"), "point label");
    if (label != "+" && label != "-") throw Error("point label must be \"+\" or \"-\"");
    s.points.push_back({parse_rational(p["xy"][0]), parse_rational(p["xy"][1]), label == "+"});
  }
  s.validate();
  return s;
}

Json rectangles_to_json(const RectangleScenario& s) {
  Json rects = Json::object();
  for (const auto& [name, r] : s.rectangles)
    rects[name] = {rational_string(r.xmin), rational_string(r.xmax), rational_string(r.ymin),
                   rational_string(r.ymax)};
  Json points = Json::array();
  for (const auto& p : s.points)
    points.push_back({{"xy", {rational_string(p.x), rational_string(p.y)}}, {"label", p.positive ? "+" : "-"}});
  return {{"kind", "rectangles"}, {"rectangles", rects}, {"points", points}};
}

namespace {

std::vector<LearningInstance> finite_from_json(const Json& sem, const RankedAlphabet& sigma) {
  check_keys(sem, "finite semantics", {"kind", "domain", "examples", "instances"});
  if (!sem.contains("domain") || !sem["domain"].is_array() || sem["domain"].empty())
    throw Error("finite semantics: 'domain' must be a nonempty array");
  std::vector<std::string> domain;
  for (const Json& d : sem["domain"]) domain.push_back(label_of(d, "domain"));
  std::set<std::string> distinct(domain.begin(), domain.end());
  if (distinct.size() != domain.size()) throw Error("finite semantics: duplicate domain labels");

  if (!sem.contains("examples") || !sem["examples"].is_array())
    throw Error("finite semantics: 'examples' must be an array");
  std::vector<FiniteInterpretation> examples;
  for (std::size_t e = 0; e < sem["examples"].size(); ++e) {
    const Json& ex = sem["examples"][e];
    const std::string where = "example " + std::to_string(e);
    check_keys(ex, where, {"ops", "accepting"});
    FiniteInterpretation m(sigma, domain);
    if (!ex.contains("ops") || !ex["ops"].is_object()) throw Error(where + ": 'ops' must be an object");
    for (const auto& [name, table] : ex["ops"].items()) {
      Symbol f(name);
      if (!sigma.contains(f)) throw Error(where + ": operation for undeclared symbol '" + name + "'");
      std::vector<Value> values;
      auto add = [&](const Json& v) { values.push_back(m.value(label_of(v, where + ", " + name))); };
      if (table.is_array()) {
        for (const Json& v : table) add(v);
      } else {
        add(table);
      }
      std::size_t expected = 1;
      for (int i = 0; i < sigma.arity_of(f); ++i) expected *= domain.size();
      if (values.size() != expected)
        throw Error(where + ": operation '" + name + "' needs " + std::to_string(expected) + " entries");
      m.set_op(f, values);
    }
    std::vector<Value> accepting;
    if (!ex.contains("accepting") || !ex["accepting"].is_array())
      throw Error(where + ": 'accepting' must be an array");
    for (const Json& v : ex["accepting"]) accepting.push_back(m.value(label_of(v, where)));
    m.set_accepting(accepting);
    m.validate();
    examples.push_back(std::move(m));
  }

  std::vector<LearningInstance> out;
  auto pick = [&](const Json& list, const std::string& where) {
    std::vector<FiniteInterpretation> xs;
    if (!list.is_array()) throw Error(where + ": expected an index array");
    for (const Json& i : list) {
      int k = as_int(i, where);
      if (k < 0 || static_cast<std::size_t>(k) >= examples.size())
        throw Error(where + ": example index " + std::to_string(k) + " out of range");
      xs.push_back(examples[k]);
    }
    return xs;
  };
  if (!sem.contains("instances")) {
    if (examples.empty()) throw Error("finite semantics: no examples");
    LearningInstance inst;
    inst.train = examples;
    out.push_back(std::move(inst));
    return out;
  }
  for (std::size_t i = 0; i < sem["instances"].size(); ++i) {
    const Json& in = sem["instances"][i];
    const std::string where = "instance " + std::to_string(i);
    check_keys(in, where, {"train", "test"});
    LearningInstance inst;
    inst.train = pick(in.value("train", Json::array()), where + " train");
    inst.test = pick(in.value("test", Json::array()), where + " test");
    if (inst.train.empty()) throw Error(where + ": needs at least one training example");
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

SynthesisProblem problem_from_json(const Json& j) {
  check_keys(j, "problem", {"format", "alphabet", "nonterminals", "base_grammar", "meta_grammar",
                            "semantics", "mode", "macros", "bound"});
  check_format(j, "problem");
  if (!j.contains("semantics")) throw Error("problem: missing 'semantics'");
  const Json& sem = j["semantics"];
  if (!sem.is_object() || !sem.contains("kind")) throw Error("semantics: missing 'kind'");
  const std::string& kind = as_string(sem["kind"], "semantics kind");

  SynthesisProblem p;
  std::optional<RectangleScenario> rects;
  if (kind == "rectangles") {
    rects = rectangles_from_json(sem);
    p.alphabet = rects->alphabet();
    if (j.contains("alphabet") && !(alphabet_from_json(j["alphabet"]) == p.alphabet))
      throw Error("problem: 'alphabet' differs from the rectangle alphabet");
  } else if (kind == "finite") {
    if (!j.contains("alphabet")) throw Error("problem: finite semantics needs 'alphabet'");
    p.alphabet = alphabet_from_json(j["alphabet"]);
  } else {
    throw Error("semantics: unknown kind '" + kind + "'");
  }
  p.nonterminals = j.contains("nonterminals") ? nonterminals_from_json(j["nonterminals"])
                                              : NonterminalSet{{"S", 0}};
  for (const auto& [n, a] : p.nonterminals.entries())
    if (p.alphabet.contains(n)) throw Error("nonterminal '" + n.name() + "' is also a terminal");

  if (j.contains("base_grammar")) {
    const Json& b = j["base_grammar"];
    MacroGrammar all = grammar_from_json(b, &p.alphabet, &p.nonterminals);
    p.base.alphabet = p.alphabet;
    p.base.start = all.start;
    p.base.rules = all.rules;
    std::function<void(const Term&)> mention = [&](const Term& t) {
      if (t.is_param()) return;
      if (p.nonterminals.contains(t.symbol()) && !p.base.nonterminals.contains(t.symbol()))
        p.base.nonterminals.add(t.symbol(), p.nonterminals.arity_of(t.symbol()));
      for (const Term& c : t.children()) mention(c);
    };
    for (const Rule& r : all.rules) {
      if (!p.base.nonterminals.contains(r.lhs)) p.base.nonterminals.add(r.lhs, p.nonterminals.arity_of(r.lhs));
      mention(r.rhs);
    }
    if (!p.base.start.empty() && !p.base.nonterminals.contains(p.base.start))
      p.base.nonterminals.add(p.base.start, 0);
  } else {
    p.base.alphabet = p.alphabet;
  }
  if (j.contains("meta_grammar")) {
    GrammarAlphabet gamma = p.gamma();
    const Json& m = j["meta_grammar"];
    const RankedAlphabet& symbols = gamma.symbols();
    MacroGrammar meta = grammar_from_json(m, &symbols, nullptr);
    p.meta = std::move(meta);
  }
  if (j.contains("mode")) p.mode = parse_ordering(as_string(j["mode"], "mode"));
  if (j.contains("macros")) {
    if (!j["macros"].is_boolean()) throw Error("problem: 'macros' must be a boolean");
    p.macros = j["macros"].get<bool>();
  }
  if (j.contains("bound")) {
    int b = as_int(j["bound"], "bound");
    if (b < 0) throw Error("problem: 'bound' must be nonnegative");
    p.bound = b;
  }
  if (rects) {
    p.instances = {compile_rectangles(*rects)};
  } else {
    p.instances = finite_from_json(sem, p.alphabet);
  }
  p.validate();
  return p;
}

Json verdict_to_json(const Verdict& v) {
  Json out{{"accepted", v.accepted}, {"reason", v.reason}};
  out["row"] = v.row ? Json(*v.row) : Json(nullptr);
  out["blocking_row"] = v.blocking_row ? Json(*v.blocking_row) : Json(nullptr);
  out["witness"] = v.witness ? Json(v.witness->to_string()) : Json(nullptr);
  out["blocking_witness"] = v.blocking_witness ? Json(v.blocking_witness->to_string()) : Json(nullptr);
  return out;
}

Json table_to_json(const RecursionTable& t) {
  Json cols = Json::array();
  for (Symbol c : t.columns) cols.push_back(c.name());
  Json rows = Json::array();
  for (const auto& row : t.labelled_rows()) {
    Json r = Json::array();
    for (const auto& cell : row) r.push_back(Json(std::vector<std::string>(cell.begin(), cell.end())));
    rows.push_back(r);
  }
  return {{"format", kFormat},
          {"mode", t.mode == RecursionTable::Mode::states ? "states" : "vectors"},
          {"columns", cols},
          {"bound", t.bound},
          {"stable_at", t.stable_at},
          {"distinct_values", t.distinct_values()},
          {"rows", rows}};
}

Json outcome_to_json(const SynthesisOutcome& o, bool witnesses) {
  Json out{{"format", kFormat},
           {"outcome", to_string(o.kind)},
           {"size_bound", o.size_bound},
           {"candidates", o.candidates},
           {"details", o.details}};
  if (o.grammar) out["grammar"] = grammar_to_json(*o.grammar);
  if (o.tree) out["tree"] = term_to_json(*o.tree);
  if (witnesses && o.kind == SynthesisOutcome::Kind::solution) {
    Json vs = Json::array();
    for (const Verdict& v : o.verdicts) vs.push_back(verdict_to_json(v));
    out["instances"] = vs;
  }
  return out;
}

}  // namespace dslsynth::io
