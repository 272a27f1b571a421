#!/usr/bin/env python3
# Copyright 2026 The dslsynth Authors.
# SPDX-License-Identifier: Apache-2.0
"""Exhaustive search for a Boolean-scenario ordering fixture.

Looks for a conjunction-only grammar G over x1..x3 and one disjunctive rule
o such that G is accepted under the depth ordering on some instance and
G + o is rejected. Each example is an assignment with accepting set {1} or
{0}; an instance assigns every assignment one of: unused, train+, train-,
test+, test-. At least one train+ example is required.

Verdicts come from truth tables computed here, independently of the C++
library: row i holds the values of S at parse depth i, and a grammar is
accepted at the first row i holding a generalizing value when no earlier row
holds a non-generalizing one.

Candidates are visited in a fixed order (disjunction family, grammar size,
rule order), and the first candidate with a solution wins; among its
instances the one with the fewest examples, then the lexicographically
first, is taken.

Usage:
    search_boolean_ordering.py --out DIR       write the fixture files
    search_boolean_ordering.py --check DIR     exit 1 unless DIR matches
    search_boolean_ordering.py --families      count solutions per family
"""

import argparse
import itertools
import json
import os
import sys

import numpy as np

K = 3
N = 1 << K
MAX_DEPTH = 8
NONE = 99

ATOM = [sum(1 << a for a in range(N) if (a >> v) & 1) for v in range(K)]

CONJ_POOL = ([("and", "S", "S")] + [("and", "S", i) for i in range(K)]
             + [("and", i, j) for i, j in itertools.combinations(range(K), 2)]
             + list(range(K)))

FAMILIES = [
    ("or(S,S)", [("or", "S", "S")]),
    ("or(S,x)", [("or", "S", i) for i in range(K)]),
    ("or(x,x)", [("or", i, j) for i, j in itertools.combinations(range(K), 2)]),
]


def values(rhs, prev):
    if rhs == "S":
        return set(prev)
    if isinstance(rhs, int):
        return {ATOM[rhs]}
    op, a, b = rhs
    left, right = values(a, prev), values(b, prev)
    if op == "and":
        return {f & g for f in left for g in right}
    return {f | g for f in left for g in right}


def rows(rules):
    table = [set()]
    for _ in range(MAX_DEPTH):
        nxt = set()
        for r in rules:
            nxt |= values(r, table[-1])
        table.append(nxt)
    return table


class Instances:
    def __init__(self):
        self.roles = np.array(list(itertools.product(range(5), repeat=N)), dtype=np.uint8)
        bits = (1 << np.arange(N)).astype(np.int64)
        masks = [((self.roles == r) * bits).sum(axis=1) for r in range(5)]
        self.tp, self.tn, self.yp, self.yn = masks[1:]
        self.used = (self.roles > 0).sum(axis=1)
        self.valid = self.tp != 0
        self.cache = {}

    def solves(self, f):
        if f not in self.cache:
            train = ((f & self.tp) == self.tp) & ((f & self.tn) == 0)
            test = ((f & self.yp) == self.yp) & ((f & self.yn) == 0)
            self.cache[f] = (train & test, train & ~test)
        return self.cache[f]

    def verdict(self, table):
        count = len(self.roles)
        gen = np.full(count, NONE)
        nongen = np.full(count, NONE)
        for i, row in enumerate(table):
            g = np.zeros(count, bool)
            n = np.zeros(count, bool)
            for f in row:
                a, b = self.solves(f)
                g |= a
                n |= b
            gen = np.where((gen == NONE) & g, i, gen)
            nongen = np.where((nongen == NONE) & n, i, nongen)
        return (gen < NONE) & (nongen >= gen), gen, nongen


def grammars():
    for size in range(2, len(CONJ_POOL) + 1):
        for g in itertools.combinations(CONJ_POOL, size):
            if any(isinstance(r, tuple) for r in g) and any("S" not in str(r) for r in g):
                yield g


def solutions(inst, family):
    for g in grammars():
        va = inst.verdict(rows(g))
        for o in family:
            vo = inst.verdict(rows(g + (o,)))
            ok = inst.valid & va[0] & ~vo[0]
            if ok.any():
                yield g, o, va, vo, np.where(ok)[0]


def search(inst):
    for _, family in FAMILIES:
        for g, o, va, vo, idx in solutions(inst, family):
            best = idx[np.argmin(inst.used[idx])]
            return g, o, inst.roles[best], [int(v[k][best]) for v in (va, vo) for k in (1, 2)]
    return None


def rhs_json(r):
    if r == "S":
        return ["S"]
    if isinstance(r, int):
        return ["x%d" % (r + 1)]
    return [r[0], rhs_json(r[1]), rhs_json(r[2])]


def row_or_null(v):
    return None if v == NONE else v


def fixture_files(found):
    g, o, roles, (ga, na, go, no) = found
    alphabet = {"and": 2, "or": 2}
    alphabet.update({"x%d" % (v + 1): 0 for v in range(K)})
    examples, train, test = [], [], []
    for a, r in enumerate(roles):
        if r == 0:
            continue
        ops = {"and": ["0", "0", "0", "1"], "or": ["0", "1", "1", "1"]}
        ops.update({"x%d" % (v + 1): str((a >> v) & 1) for v in range(K)})
        (train if r in (1, 2) else test).append(len(examples))
        examples.append({"ops": ops, "accepting": ["1"] if r in (1, 3) else ["0"]})
    problem = {
        "format": 1, "alphabet": alphabet, "nonterminals": {"S": 0}, "mode": "depth", "macros": False,
        "semantics": {"kind": "finite", "domain": ["0", "1"], "examples": examples,
                      "instances": [{"train": train, "test": test}]},
    }

    def grammar(rules):
        return {"format": 1, "start": "S", "rules": [{"lhs": "S", "rhs": rhs_json(r)} for r in rules]}

    expected = {
        "format": 1,
        "and_only": {"accepted": True, "generalizing_row": row_or_null(ga),
                     "non_generalizing_row": row_or_null(na)},
        "with_or": {"accepted": False, "generalizing_row": row_or_null(go),
                    "non_generalizing_row": row_or_null(no)},
    }
    return {
        "boolean_ordering.json": problem,
        "boolean_and.json": grammar(g),
        "boolean_and_or.json": grammar(g + (o,)),
        "boolean_ordering_expected.json": expected,
    }


def render(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def main():
    ap = argparse.ArgumentParser()
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--out")
    mode.add_argument("--check")
    mode.add_argument("--families", action="store_true")
    args = ap.parse_args()
    inst = Instances()
    if args.families:
        for name, family in FAMILIES:
            print("%s: %d grammar/rule pairs" % (name, sum(1 for _ in solutions(inst, family))))
        return 0
    found = search(inst)
    if found is None:
        print("no instance found", file=sys.stderr)
        return 1
    files = fixture_files(found)
    if args.out:
        for name, obj in files.items():
            with open(os.path.join(args.out, name), "w") as f:
                f.write(render(obj))
        print("wrote %d files" % len(files))
        return 0
    bad = 0
    for name, obj in files.items():
        path = os.path.join(args.check, name)
        try:
            with open(path) as f:
                text = f.read()
        except OSError:
            text = None
        if text != render(obj):
            print("mismatch: " + path, file=sys.stderr)
            bad += 1
    print("checked %d files, %d mismatches" % (len(files), bad))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
