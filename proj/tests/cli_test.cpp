// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dslsynth/cli.hpp"
#include "dslsynth/io.hpp"

using namespace dslsynth;

namespace {

std::string fixture(const std::string& name) { return std::string(DSLSYNTH_FIXTURES) + "/" + name; }

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
  std::string path = std::string(DSLSYNTH_BINARY_DIR) + "/" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check exit codes") {
  CHECK(run({"check", fixture("fig2.json"), fixture("g3.json")}).code == cli::kReject);
  CHECK(run({"check", fixture("fig2.json"), fixture("g1.json"), "--mode", "adequate"}).code == cli::kOk);
  CHECK(run({"check", fixture("boolean_ordering.json"), fixture("boolean_and.json")}).code == cli::kOk);
  CHECK(run({"check", fixture("boolean_ordering.json"), fixture("boolean_and_or.json")}).code == cli::kReject);
  Run macro = run({"check", fixture("pair_macro_problem.json"), fixture("pair_macro.json")});
  CHECK(macro.code == cli::kOk);
  CHECK(macro.out.find("accept at row 3, witness h(a,b)") != std::string::npos);
  Run missing = run({"check", fixture("nope.json"), fixture("g1.json")});
  CHECK(missing.code == cli::kError);
  CHECK(missing.err.rfind("error: ", 0) == 0);
  CHECK(run({"check", fixture("fig2.json")}).code == cli::kError);
  CHECK(run({"check", fixture("fig2.json"), fixture("g1.json"), "--mode", "lexical"}).code == cli::kError);
  CHECK(run({"--help"}).code == cli::kOk);
  CHECK(run({"frobnicate"}).code == cli::kError);
}

TEST_CASE("check reports rows and witnesses") {
  Run r = run({"check", fixture("fig2.json"), fixture("g3.json")});
  CHECK(r.out ==
        "instance 0: reject: non-generalizing first at row 1 (r3), before generalizing row 3\n"
        "result: reject (depth)\n");
  Run j = run({"check", fixture("fig2.json"), fixture("g1.json"), "--mode", "adequate", "--json"});
  io::Json doc = io::parse_json(j.out);
  CHECK(doc["format"] == 1);
  CHECK(doc["accepted"] == true);
  CHECK(doc["instances"][0]["row"] == 3);
  CHECK(doc["instances"][0]["witness"] == "and(and(r3,r4),r5)");
}

TEST_CASE("every JSON document carries the format key") {
  std::vector<std::vector<std::string>> cmds{
      {"encode", fixture("g1.json"), "--json"},
      {"check", fixture("fig2.json"), fixture("g1.json"), "--json"},
      {"table", fixture("fig2.json"), fixture("g1.json"), "--json"},
      {"table", fixture("fig2.json"), fixture("g1.json"), "--mode", "states", "--json"},
      {"synth", fixture("r2_only.json"), "--json"},
      {"oracle", fixture("tie.json"), "--max-size", "8", "--json"},
      {"derive", fixture("copy_macro.json"), "--json"},
  };
  for (const auto& c : cmds) {
    CAPTURE(c[0]);
    Run r = run(c);
    REQUIRE(r.code != cli::kError);
    CHECK(io::parse_json(r.out)["format"] == 1);
  }
}

TEST_CASE("outputs are byte-deterministic") {
  std::vector<std::vector<std::string>> cmds{
      {"table", fixture("fig2.json"), fixture("g3.json"), "--json"},
      {"synth", fixture("fig2_pool.json"), "--mode", "adequate", "--max-size", "12", "--emit-witnesses", "--json"},
      {"derive", fixture("lockstep_macro.json"), "--depth", "5"},
  };
  for (const auto& c : cmds) {
    CAPTURE(c[0]);
    Run a = run(c), b = run(c);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("G1 and G2 tables print identically") {
  for (const char* mode : {"vectors", "states"}) {
    Run a = run({"table", fixture("fig2.json"), fixture("g1.json"), "--mode", mode, "--json"});
    Run b = run({"table", fixture("fig2.json"), fixture("g2.json"), "--mode", mode, "--json"});
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);
  }
  CHECK(run({"table", fixture("fig2.json"), fixture("g1.json"), "--mode", "rows"}).code == cli::kError);
  CHECK(run({"table", fixture("fig2.json"), fixture("g1.json"), "--instance", "1"}).code == cli::kError);
}

TEST_CASE("encode and decode round trip") {
  Run e = run({"encode", fixture("nested_macro.json"), "--json"});
  REQUIRE(e.code == cli::kOk);
  std::string tree = temp_file("cli_nested_tree.json", e.out);
  Run d = run({"decode", tree, "--json"});
  REQUIRE(d.code == cli::kOk);
  MacroGrammar back = io::grammar_from_json(io::parse_json(d.out));
  MacroGrammar orig = io::grammar_from_json(io::read_json_file(fixture("nested_macro.json")));
  CHECK(back.to_string() == orig.to_string());
  CHECK(run({"encode", fixture("g1.json")}).out ==
        "root(lhs_S(and(rhs_S,rhs_S),lhs_S(r1,lhs_S(r2,lhs_S(r3,lhs_S(r4,lhs_S(r5,end)))))))\n");
}

TEST_CASE("decode rejects malformed trees") {
  io::Json doc = io::parse_json(run({"encode", fixture("g1.json"), "--json"}).out);
  doc["tree"] = io::Json::array({"root", io::Json::array({"end"})});
  Run r = run({"decode", temp_file("cli_empty_tree.json", io::dump(doc))});
  CHECK(r.code == cli::kError);
  doc["tree"] = io::Json::array({"lhs_S", io::Json::array({"r1"}), io::Json::array({"end"})});
  CHECK(run({"decode", temp_file("cli_rootless_tree.json", io::dump(doc))}).code == cli::kError);
  CHECK(run({"decode", temp_file("cli_bad_json.json", "{\"format\": 1,")}).code == cli::kError);
}

TEST_CASE("derive lists the outermost language") {
  Run r = run({"derive", fixture("copy_macro.json"), "--depth", "3"});
  CHECK(r.out == "3\tf(a,a)\n3\tf(a,b)\n3\tf(b,a)\n3\tf(b,b)\n");
  CHECK(run({"derive", fixture("pair_macro.json"), "--depth", "3"}).out.find("h(a,b)") != std::string::npos);
  std::string six = run({"derive", fixture("lockstep_macro.json"), "--depth", "6"}).out;
  CHECK(six.find("\tplus(h(h(x)),h(h(y)))\n") != std::string::npos);
  CHECK(six.find("\tplus(h(x),g(y))\n") == std::string::npos);
  CHECK(run({"derive", fixture("copy_macro.json"), "--depth", "-1"}).code == cli::kError);
}

TEST_CASE("synth exit codes") {
  CHECK(run({"synth", fixture("r2_only.json"), "--strategy", "convert"}).code == cli::kNoSolution);
  CHECK(run({"synth", fixture("r2_only.json"), "--max-size", "10"}).code == cli::kNoSolutionWithinBound);
  CHECK(run({"synth", fixture("r2_only.json"), "--strategy", "guess"}).code == cli::kError);
  Run s = run({"synth", fixture("fig2_pool.json"), "--mode", "adequate", "--max-size", "12", "--emit-witnesses",
               "--json"});
  REQUIRE(s.code == cli::kOk);
  io::Json doc = io::parse_json(s.out);
  CHECK(doc["outcome"] == "solution");
  CHECK(doc.contains("grammar"));
}

TEST_CASE("a missing meta-grammar means the permissive one") {
  Run s = run({"synth", fixture("fig2.json"), "--mode", "adequate", "--max-size", "6"});
  CHECK(s.code != cli::kError);
}

TEST_CASE("oracle agreement and the injected tie") {
  Run clean = run({"oracle", fixture("tie.json"), "--max-size", "12"});
  CHECK(clean.code == cli::kOk);
  CHECK(clean.out.find("disagreements: 0\n") != std::string::npos);
  Run tie = run({"oracle", fixture("tie.json"), "--max-size", "12", "--inject-nonstrict-tie"});
  CHECK(tie.code == cli::kReject);
  CHECK(tie.out.find("disagreements: 0\n") == std::string::npos);
  CHECK(run({"oracle", fixture("boolean_ordering.json"), "--max-size", "11"}).code == cli::kOk);
  CHECK(run({"oracle", "--help"}).out.find("inject") == std::string::npos);
}

}  // TEST_SUITE
