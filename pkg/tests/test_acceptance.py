"""
The nine acceptance criteria, each at its stated scale and time limit.

Every test records one PASS/FAIL line (shown in the pytest terminal summary
and printed directly with `pytest -s` or `python3 tests/test_acceptance.py`).
Reference values come from the brute-force oracles in oracles.py or from
closed forms, never from the routine under test.
"""

import itertools
import json
import math
import random
import subprocess
import sys
import time

import numpy as np

from hompres.circuits import (all_assignments, compile_fo, eval_batch, eval_circuit, measure,
                              verify_reduction)
from hompres.cores import core, is_core, is_hom_preserved
from hompres.errors import PreservationFailure
from hompres.folog import (connective_block, evaluate, infer_signature, model_table,
                           parse_sentence, quantifier_rank, variable_width)
from hompres.graphparams import (Graph, clique, cycle, family, longest_path, path, tree_depth,
                                 tree_width)
from hompres.structures import (BINARY, BitEncoding, all_structures, binary_structure,
                                check_homomorphism, decode, from_graph, gaifman)
from hompres.subiso import (BlowUp, SubInstance, check_sub_reduction, hpt_pipeline, hpt_reduction,
                            minor_reduction, minor_reduction_chain, ops_from_branch_sets,
                            path_graph, path_reduction, sub_bruteforce, sub_dp_treewidth,
                            sub_formula_treedepth, verify_hpt_reduction)

from acceptance_record import record
from oracles import has_hom, homs, iso_oracle, sub_oracle, treedepth_oracle

SEED = 20260101
TRIANGLE = "EX x. EX y. EX z. (R(x,y) & R(y,z) & R(z,x))"


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def _finish(number, title, failures, clock, limit, detail=""):
    ok = not failures and clock.seconds < limit
    extra = detail if not failures else f"{len(failures)} violation(s), first: {failures[0]}"
    if clock.seconds >= limit:
        extra += f"; time limit {limit}s exceeded"
    record(number, title, ok, clock.seconds, extra)
    assert not failures, failures[:5]
    assert clock.seconds < limit, f"{clock.seconds:.1f}s >= {limit}s"


# 1 -------------------------------------------------------------------------------------


def test_acceptance_1_path_parameters():
    failures = []
    with Clock() as clock:
        for k in range(1, 16):
            td = tree_depth(path(k), max_order=15)[0]
            tw = tree_width(path(k), max_order=15)[0]
            if td != math.ceil(math.log2(k + 1)):
                failures.append(f"td(P_{k}) = {td}")
            # a single vertex has one bag of size 1, so width 0; every longer path has width 1
            if tw != (0 if k == 1 else 1):
                failures.append(f"tw(P_{k}) = {tw}")
    _finish(1, "td(P_k) = ceil(log2(k+1)), tw(P_k) = 1 (k >= 2; tw(P_1) = 0)", failures, clock, 1.0)


# 2 -------------------------------------------------------------------------------------


def _random_connected(rng, n, p):
    while True:
        G = Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p])
        if G.is_connected():
            return G


def test_acceptance_2_inequalities():
    rng = random.Random(SEED)
    failures = []
    with Clock() as clock:
        graphs = [_random_connected(rng, rng.randint(1, 8), rng.choice([0.3, 0.5, 0.7]))
                  for _ in range(200)]
        graphs += [family(kind, k) for kind in ("path", "clique", "binary_tree", "grid")
                   for k in range(1, 5)]
        for G in graphs:
            tw = tree_width(G, max_order=16)[0]
            td = tree_depth(G, max_order=16)[0]
            lp = longest_path(G, max_order=16)
            n = G.order
            if not (tw <= td - 1 and 2 ** (td - 1) <= n ** tw):
                failures.append(("tw/td", sorted(G.edges), tw, td))
            if not (lp + 1 <= 2 ** td and td <= lp):
                failures.append(("lp/td", sorted(G.edges), lp, td))
        # small members are also held against the exhaustive tree-depth oracle
        for G in graphs:
            if G.order <= 6 and tree_depth(G)[0] != treedepth_oracle(G):
                failures.append(("td oracle", sorted(G.edges)))
    _finish(2, f"tw <= td-1, 2^(td-1) <= n^tw, lp+1 <= 2^td, td <= lp on {len(graphs)} graphs",
            failures, clock, 30.0)


# 3 -------------------------------------------------------------------------------------


def _oracle_is_core(C):
    """No endomorphism of C misses an element."""
    return all(len(set(f)) == C.size for f in homs(C, C))


def _random_structure(rng, n):
    return binary_structure(n, [p for p in itertools.product(range(n), repeat=2) if rng.random() < 0.35])


def _twin(rng, A):
    """Add a copy of a random element that repeats some of its tuples; hom-equivalent to A."""
    v, w = rng.randrange(A.size), A.size
    extra = []
    for t in A.relations[0]:
        if v in t and rng.random() < 0.7:
            extra.append(tuple(w if x == v and rng.random() < 0.5 else x for x in t))
    return binary_structure(A.size + 1, list(A.relations[0]) + extra)


def test_acceptance_3_cores():
    rng = random.Random(SEED)
    failures = []
    with Clock() as clock:
        samples = list(all_structures(BINARY, 3)) + [_random_structure(rng, 4) for _ in range(200)]
        for A in samples:
            C = core(A)
            if not (has_hom(A, C) and has_hom(C, A)):
                failures.append(("not hom-equivalent", A))
            if not (is_core(C) and _oracle_is_core(C)):
                failures.append(("not a core", A))
        pairs = 0
        while pairs < 100:
            A = _random_structure(rng, rng.randint(1, 4))
            B = _twin(rng, A) if rng.random() < 0.5 else A.disjoint_union(
                A.induced(rng.sample(range(A.size), rng.randint(1, A.size))))
            B = B.rename(rng.sample(range(B.size), B.size))
            if not (has_hom(A, B) and has_hom(B, A)):
                failures.append(("pair generator broke", A, B))
                continue
            pairs += 1
            if not iso_oracle(core(A), core(B)):
                failures.append(("cores differ", A, B))
    _finish(3, f"core laws on {len(samples)} structures and {pairs} hom-equivalent pairs",
            failures, clock, 60.0)


# 4 -------------------------------------------------------------------------------------


CORPUS = [
    "(EX x. P(x)) | (EX y. ~Q(y))",
    "EX x. EX y. R(x,y)",
    "EX x. R(x,x)",
    TRIANGLE,
    "ALL x. EX y. R(x,y)",
    "ALL x. ALL y. (R(x,y) | ~R(y,x))",
    "EX x. (R(x,x) | ALL y. ~R(x,y))",
    "ALL x. x = x",
    "EX x. EX y. (~x = y & R(x,y) & R(y,x))",
    "ALL x. ALL y. ALL z. (~R(x,y) | ~R(y,z) | R(x,z))",
    "EX x. ALL y. (R(x,y) | x = y)",
    "ALL x. (~R(x,x) & EX y. R(y,x))",
]


def test_acceptance_4_compiler():
    failures = []
    cases = 0
    with Clock() as clock:
        for text in CORPUS:
            phi = parse_sentence(text)
            sig = infer_signature(phi)
            assert quantifier_rank(phi) <= 3 and variable_width(phi) <= 3
            for n in (1, 2, 3):
                C = compile_fo(phi, n, sig)
                table = model_table(phi, n, sig)
                width = sig.encoding_length(n)
                for e in range(1 << width):
                    x = [(e >> i) & 1 for i in range(width)]
                    if eval_circuit(C, x) != int(table[e]):
                        failures.append((text, n, e))
                m = measure(C)
                if m.depth > quantifier_rank(phi) + 1:
                    failures.append((text, n, "depth", m.depth))
                if m.max_fanin > max(n, connective_block(phi)):
                    failures.append((text, n, "fan-in", m.max_fanin))
                cases += 1
    _finish(4, f"compiled circuits match MODEL tables on {cases} (sentence, n) cases",
            failures, clock, 60.0)


# 5 -------------------------------------------------------------------------------------


SOLVER_GRAPHS = {
    "P2": path(2), "P3": path(3), "P4": path(4), "K3": clique(3), "C4": cycle(4),
    "K4-e": Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
}


def _oracle_table(G, n):
    """SUB(G,n) on every instance, straight from the variable-order definition."""
    E = sorted(G.edges)
    xs = np.arange(1 << (len(E) * n * n), dtype=np.int64)
    out = np.zeros(xs.shape[0], dtype=bool)
    for alpha in itertools.product(range(n), repeat=G.order):
        mask = 0
        for e, (u, v) in enumerate(E):
            mask |= 1 << ((e * n + alpha[u]) * n + alpha[v])
        out |= (xs & mask) == mask
    return out


def test_acceptance_5_solver_triad():
    rng = random.Random(SEED)
    failures = []
    exhaustive = sampled = 0
    with Clock() as clock:
        for name, G in SOLVER_GRAPHS.items():
            _, td = tree_width(G)
            _, forest = tree_depth(G)
            for n in range(1, 6):
                width = len(G.edges) * n * n
                if width > 32:
                    break
                F = sub_formula_treedepth(G, forest, n)
                B = BlowUp(G, n)
                if width <= 16:
                    want = _oracle_table(G, n)
                    X = all_assignments(width)
                    formula = eval_batch(F, X)
                    for x in range(1 << width):
                        inst = SubInstance.from_int(B, x)
                        brute = sub_bruteforce(G, n, inst)[0]
                        dp = sub_dp_treewidth(G, td, n, inst)
                        if not (brute == dp == bool(formula[x]) == bool(want[x])):
                            failures.append((name, n, x))
                    exhaustive += 1 << width
                else:
                    bits = np.array([[rng.getrandbits(1) for _ in range(width)] for _ in range(1000)],
                                    dtype=bool)
                    # push some rows towards yes-instances by planting a copy
                    for row in bits[::4]:
                        alpha = [rng.randrange(n) for _ in range(G.order)]
                        for i in B.copy_vars(alpha):
                            row[i] = True
                    formula = eval_batch(F, bits)
                    for row, fv in zip(bits, formula):
                        inst = SubInstance(B, tuple(int(b) for b in row))
                        want = sub_oracle(G, n, inst.bits)
                        if not (sub_bruteforce(G, n, inst)[0] == sub_dp_treewidth(G, td, n, inst)
                                == bool(fv) == want):
                            failures.append((name, n, "random"))
                    sampled += len(bits)
    _finish(5, f"brute force = DP = formula on {exhaustive} exhaustive and {sampled} random instances",
            failures, clock, 120.0)


# 6 -------------------------------------------------------------------------------------


def test_acceptance_6_reduction_gate():
    failures = []
    checked = []
    with Clock() as clock:
        n = 2

        def gate(label, H, G, rho):
            if rho.source_size > 20:
                return
            res = check_sub_reduction(H, G, n, rho)
            checked.append(label)
            if not res:
                failures.append((label, res.counterexample))

        # single deletions and contractions on every edge of several graphs
        for name, G in {"P3": path(3), "P4": path(4), "K3": clique(3), "C4": cycle(4),
                        "K4-e": SOLVER_GRAPHS["K4-e"]}.items():
            for u, v in G.sorted_edges():
                for kind in ("delete_edge", "contract"):
                    H, rho = minor_reduction(G, (kind, u, v), n)
                    gate(f"{kind} {u}{v} of {name}", H, G, rho)
            for v in range(G.order):
                H, rho = minor_reduction(G, ("delete_vertex", v), n)
                gate(f"delete vertex {v} of {name}", H, G, rho)
        # chains
        gate("P2 from P4", path(2), path(4),
             minor_reduction_chain(path(2), path(4), [("contract", 0, 1), ("contract", 0, 1)], n))
        gate("K3 from K4", clique(3), clique(4),
             minor_reduction_chain(clique(3), clique(4), [("delete_vertex", 3)], n))
        gate("P3 from C4", path(3), cycle(4),
             minor_reduction_chain(path(3), cycle(4), [("delete_edge", 0, 3), ("contract", 0, 1)], n))
        for H, G, sets in [(clique(3), cycle(5), [{0}, {1}, {2, 3, 4}]),
                           (path(3), path(5), [{0, 1}, {2}, {3, 4}]),
                           (clique(3), SOLVER_GRAPHS["K4-e"], [{0}, {1}, {2}])]:
            ops = ops_from_branch_sets(H, G, [frozenset(s) for s in sets])
            gate(f"branch sets {sets}", H, G, minor_reduction_chain(H, G, ops, n))
        # path reductions, including the two named cases
        for name, G in {"K3": clique(3), "P4": path(4), "C4": cycle(4), "P7": path(7),
                        "K4-e": SOLVER_GRAPHS["K4-e"], "K4": clique(4)}.items():
            k, rho = path_reduction(G, n)
            gate(f"path reduction of {name} (k={k})", path_graph(k), G, rho)
        # the reduction into MODEL, swept over all 2^12 instances two ways
        phi = parse_sentence(TRIANGLE)
        K3 = from_graph(clique(3))
        for route in ("circuit", "evaluate"):
            res = verify_hpt_reduction(phi, K3, n, route=route)
            checked.append(f"hpt triangle/K3 via {route}")
            if not res or res.instances != 1 << 12:
                failures.append(("hpt", route, res.counterexample))
        # and the same identity from first principles: SUB oracle vs evaluate on decoded rho*(X)
        rho = hpt_reduction(K3, n)
        f = lambda X: np.array([sub_oracle(clique(3), n, row) for row in X.astype(int)])  # noqa: E731
        g = lambda Y: np.array([evaluate(phi, decode(BitEncoding(BINARY, 6, tuple(int(b) for b in y))))  # noqa: E731
                                for y in Y])
        res = verify_reduction(f, g, rho)
        checked.append("hpt triangle/K3 from the definitions")
        if not res:
            failures.append(("hpt oracle", res.counterexample))
        for text, M in [("EX x. EX y. R(x,y)", binary_structure(2, [(0, 1)])),
                        ("EX x. R(x,x)", binary_structure(1, [(0, 0)])),
                        ("EX x. EX y. EX z. (R(x,y) & R(y,z))", binary_structure(3, [(0, 1), (1, 2)]))]:
            res = verify_hpt_reduction(parse_sentence(text), M, n)
            checked.append(f"hpt {text}")
            if not res:
                failures.append(("hpt", text, res.counterexample))
    _finish(6, f"{len(checked)} emitted projections verified exhaustively", failures, clock, 600.0)


# 7 -------------------------------------------------------------------------------------


def test_acceptance_7_pipeline():
    failures = []
    details = []
    with Clock() as clock:
        for text in (TRIANGLE, "EX x. EX y. R(x,y)", "(EX x. R(x,x)) | (EX x. EX y. R(x,y))"):
            phi = parse_sentence(text)
            rep = hpt_pipeline(phi, 3, 3)
            tds = [treedepth_oracle(gaifman(M)) for M in rep.mincores]
            if rep.preserved_up_to != 3 or not is_hom_preserved(phi, 3):
                failures.append((text, "preservation"))
            if rep.qr_psi != max(tds) or list(rep.tree_depths) != tds:
                failures.append((text, "qr", rep.qr_psi, tds))
            bad = [A for A in all_structures(BINARY, 3) if evaluate(phi, A) != evaluate(rep.psi, A)]
            if not rep.equivalent or bad:
                failures.append((text, "equivalence", bad[:1]))
            details.append(f"qr(psi)={rep.qr_psi}")
        try:
            hpt_pipeline(parse_sentence("ALL x. ALL y. ~R(x,y)"), 3, 3)
            failures.append("no_edge passed the preservation check")
        except PreservationFailure as exc:
            A, B, f = exc.counterexample
            phi = parse_sentence("ALL x. ALL y. ~R(x,y)")
            if not (evaluate(phi, A) and not evaluate(phi, B) and check_homomorphism(f.image, A, B)):
                failures.append(("bad counterexample", A, B, f))
            details.append(f"no_edge counterexample {A!r} -> {B!r}")
    _finish(7, "pipeline rebuilds three sentences; " + ", ".join(details), failures, clock, 600.0)


# 8 -------------------------------------------------------------------------------------


def test_acceptance_8_scaling():
    failures = []
    fits = []
    with Clock() as clock:
        ns = np.array([2, 3, 4])
        for k in (2, 3, 4, 7):
            td, forest = tree_depth(path(k))
            sizes = [measure(sub_formula_treedepth(path(k), forest, int(n))).formula_size for n in ns]
            slope = float(np.polyfit(np.log(ns), np.log(sizes), 1)[0])
            fits.append(f"P{k}: slope {slope:.3f} vs td+1={td + 1}")
            # the leaf count is exactly (k-1) * n^td, so the slope lands on the band edge
            if abs(slope - (td + 1)) > 1.0 + 1e-9:
                failures.append((k, slope, td))
    _finish(8, "formula size exponent; " + "; ".join(fits), failures, clock, 60.0)


# 9 -------------------------------------------------------------------------------------


def test_acceptance_9_determinism():
    failures = []
    with Clock() as clock:
        cmd = [sys.executable, "-m", "hompres", "--json", "selftest", "--level", "quick", "--seed", "0"]
        runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
        if any(r.returncode != 0 for r in runs):
            failures.append(("exit codes", [r.returncode for r in runs]))
        if runs[0].stdout != runs[1].stdout:
            failures.append("reports differ")
        ok = json.loads(runs[0].stdout)["results"]["ok"] if runs[0].stdout else False
        if not ok:
            failures.append("selftest reported a failure")
    _finish(9, f"selftest --level quick twice gives identical {len(runs[0].stdout)}-byte reports",
            failures, clock, 120.0)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_acceptance_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
