"""
Built-in invariant suites behind `hompres selftest`.

Each invariant returns a tally of passed and failed checks plus the first
failure.  Everything is driven by the seed and the bit budget, and the
report carries no timing, so equal arguments give identical reports.
"""

from __future__ import annotations

import hashlib
import math
import random
from importlib import resources
from pathlib import Path

from . import circuits, cores, folog, graphparams, structures, subiso

CORPUS = (
    "EX x. EX y. R(x,y)",
    "EX x. R(x,x)",
    "EX x. EX y. EX z. (R(x,y) & R(y,z) & R(z,x))",
    "ALL x. EX y. R(x,y)",
    "ALL x. ALL y. (R(x,y) | ~R(y,x))",
    "EX x. (R(x,x) | ALL y. ~R(x,y))",
    "ALL x. x = x",
    "EX x. EX y. (~x = y & R(x,y) & R(y,x))",
)


class Tally:
    def __init__(self):
        self.passed = 0
        self.failed = 0
        self.first_failure = None

    def check(self, ok, detail):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = detail

    def as_dict(self):
        return {"passed": self.passed, "failed": self.failed, "first_failure": self.first_failure}


def fixture_dir(path=None):
    return Path(path) if path else Path(str(resources.files("hompres") / "data"))


def _expectations(text):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("# expect"):
            for item in line[len("# expect"):].split():
                key, _, value = item.partition("=")
                out.append((key, value))
    return out


def _load(path):
    text = path.read_text()
    kind = path.suffix
    if kind == ".graph":
        return graphparams.parse_graph(text)
    if kind == ".struct":
        return structures.parse_structure(text)
    if kind == ".fo":
        return folog.parse_formula_file(text)
    return text


def _round_trip(path, obj, fixtures):
    kind = path.suffix
    if kind == ".graph":
        return graphparams.parse_graph(obj.to_text()) == obj
    if kind == ".struct":
        return structures.parse_structure(obj.to_text()) == obj
    if kind == ".fo":
        phi, sig = obj
        return folog.parse_formula(folog.render(phi), sig) == phi
    if kind == ".bits":
        G, n, X = _instance(path, obj, fixtures)
        return subiso.parse_instance(X.blowup, X.to_text()) == X
    return True


def _instance(path, text, fixtures):
    exp = dict(_expectations(text))
    G = graphparams.parse_graph((fixtures / exp["graph"]).read_text())
    n = int(exp["n"])
    return G, n, subiso.parse_instance(subiso.BlowUp(G, n), text)


def _as_bool(v):
    return v.lower() == "true"


def _check_expectation(path, obj, key, value, fixtures, budget):
    """(expected, got) for one `# expect key=value` line item."""
    kind = path.suffix
    if kind == ".graph":
        G = obj
        if key == "treewidth":
            return int(value), graphparams.tree_width(G)[0]
        if key == "treedepth":
            return int(value), graphparams.tree_depth(G)[0]
        if key == "longestpath":
            return int(value), graphparams.longest_path(G)
        if key.startswith("trichotomy"):
            ell = int(key[len("trichotomy"):])
            return sorted(value.split(",")), sorted(graphparams.trichotomy_check(G, ell))
        if key.startswith("minor_"):
            H = graphparams.family("clique", int(key[len("minor_k"):]))
            return _as_bool(value), graphparams.minor_contains(H, G) is not None
    elif kind == ".struct":
        if key == "core_size":
            return int(value), cores.core(obj).size
        if key == "is_core":
            return _as_bool(value), cores.is_core(obj)
    elif kind == ".fo":
        phi, sig = obj
        c = folog.classify(phi)
        if key == "qr":
            return int(value), folog.quantifier_rank(phi)
        if key == "vw":
            return int(value), folog.variable_width(phi)
        if key == "positive":
            return _as_bool(value), c.positive
        if key == "existential":
            return _as_bool(value), c.existential
        if key == "preserved":
            size = max(s for s in range(1, 4) if s == 1 or sig.encoding_length(s) <= budget)
            return _as_bool(value), cores.is_hom_preserved(phi, size, sig, max_bits=budget).preserved
    elif kind == ".bits":
        if key in ("graph", "n"):
            return value, value
        if key == "sub":
            G, n, X = _instance(path, obj, fixtures)
            brute = subiso.sub_bruteforce(G, n, X)[0]
            dp = subiso.sub_dp_treewidth(G, graphparams.tree_width(G)[1], n, X)
            F = graphparams.tree_depth(G)[1]
            form = bool(circuits.eval_circuit(subiso.sub_formula_treedepth(G, F, n), X.bits))
            got = brute if brute == dp == form else f"solvers disagree {brute}/{dp}/{form}"
            return _as_bool(value), got
    return value, f"unknown expectation {key!r}"


def check_fixtures(fixtures, budget, t_parse, t_expect, inputs):
    for path in sorted(fixtures.iterdir()):
        if path.suffix not in (".graph", ".struct", ".fo", ".bits"):
            continue
        data = path.read_bytes()
        inputs.append({"path": path.name, "sha256": hashlib.sha256(data).hexdigest()})
        try:
            obj = _load(path)
            ok = _round_trip(path, obj, fixtures)
        except (ValueError, KeyError, OSError) as exc:
            t_parse.check(False, f"{path.name}: {exc}")
            continue
        t_parse.check(ok, f"{path.name}: round trip changed the content")
        for key, value in _expectations(path.read_text()):
            try:
                want, got = _check_expectation(path, obj, key, value, fixtures, budget)
            except Exception as exc:  # a broken fixture is a failed check, not a crash
                want, got = value, f"{type(exc).__name__}: {exc}"
            t_expect.check(want == got, f"{path.name}: {key} expected {want}, got {got}")


def check_paths(t):
    for k in range(1, 16):
        G = graphparams.path(k)
        td = graphparams.tree_depth(G, max_order=15)[0]
        tw = graphparams.tree_width(G, max_order=15)[0]
        t.check(td == math.ceil(math.log2(k + 1)), f"td(P_{k}) = {td}")
        t.check(tw == (0 if k == 1 else 1), f"tw(P_{k}) = {tw}")


def random_connected_graph(rng, n, p=0.4):
    while True:
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
        G = graphparams.Graph.from_edges(n, edges)
        if G.is_connected():
            return G


def check_inequalities(rng, count, t):
    graphs = [random_connected_graph(rng, rng.randint(1, 8)) for _ in range(count)]
    # the k = 4 grid and binary tree have 16 and 15 vertices, above the default bounds
    graphs += [graphparams.family(kind, k) for kind in ("path", "clique", "binary_tree", "grid")
               for k in range(1, 5)]
    for G in graphs:
        tw = graphparams.tree_width(G, max_order=16)[0]
        td = graphparams.tree_depth(G, max_order=16)[0]
        lp = graphparams.longest_path(G, max_order=16)
        n = G.order
        t.check(tw <= td - 1 and 2 ** (td - 1) <= n ** tw and lp + 1 <= 2 ** td and td <= lp,
                f"graph {sorted(G.edges)}: tw={tw} td={td} lp={lp}")


def random_structure(rng, n, density=0.4):
    pairs = [(i, j) for i in range(n) for j in range(n) if rng.random() < density]
    return structures.binary_structure(n, pairs)


def check_cores(rng, count, max_n, t):
    for _ in range(count):
        A = random_structure(rng, rng.randint(1, max_n))
        r = cores.compute_core(A)
        ok = (structures.hom_equivalent(A, r.core) and cores.is_core(r.core)
              and structures.check_homomorphism(r.retraction, A, r.core)
              and all(r.retraction(x) == i for i, x in enumerate(r.kept)))
        t.check(ok, f"core of {A!r}")


def check_compiler(budget, t):
    for text in CORPUS:
        phi = folog.parse_sentence(text)
        sig = folog.infer_signature(phi)
        for n in (1, 2, 3):
            if sig.encoding_length(n) > budget:
                continue
            C = circuits.compile_fo(phi, n, sig)
            m = circuits.measure(C)
            same = bool((circuits.truth_table(C, budget) == folog.model_table(phi, n, sig, budget)).all())
            t.check(same and m.depth <= folog.quantifier_rank(phi) + 1
                    and m.max_fanin <= circuits.fanin_cap(phi, n), f"{text} at n={n}")


SOLVER_GRAPHS = {
    "P2": graphparams.path(2), "P3": graphparams.path(3), "P4": graphparams.path(4),
    "K3": graphparams.clique(3), "C4": graphparams.cycle(4),
    "K4-e": graphparams.Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
}


def check_solvers(rng, budget, samples, t):
    for name, G in SOLVER_GRAPHS.items():
        for n in (1, 2, 3):
            B = subiso.BlowUp(G, n)
            if B.num_vars > budget:
                continue
            table = subiso.sub_table(G, n, budget)
            F = graphparams.tree_depth(G)[1]
            C = subiso.sub_formula_treedepth(G, F, n)
            t.check(bool((circuits.truth_table(C, budget) == table).all()),
                    f"{name} n={n}: formula vs table")
            td = graphparams.tree_width(G)[1]
            for _ in range(samples):
                x = rng.getrandbits(B.num_vars) if B.num_vars else 0
                X = subiso.SubInstance.from_int(B, x)
                got = (subiso.sub_dp_treewidth(G, td, n, X), subiso.sub_bruteforce(G, n, X)[0])
                t.check(got == (table[x], table[x]), f"{name} n={n} instance {x}")


def check_reductions(budget, t):
    n = 2
    for name, G in SOLVER_GRAPHS.items():
        for e in G.sorted_edges():
            for op in (("delete_edge",) + e, ("contract",) + e):
                H, rho = subiso.minor_step(G, op, n)
                if rho.source_size <= budget:
                    t.check(bool(subiso.check_sub_reduction(H, G, n, rho, budget)), f"{name} {op}")
        if subiso.BlowUp(G, n).num_vars <= budget:
            k, rho = subiso.path_reduction(G, n)
            t.check(bool(subiso.check_sub_reduction(subiso.path_graph(k), G, n, rho, budget)),
                    f"{name} path reduction")
    edge = folog.parse_sentence("EX x. EX y. R(x,y)")
    M = structures.binary_structure(2, [(0, 1)])
    t.check(bool(subiso.verify_hpt_reduction(edge, M, n, max_bits=min(budget, 20))), "edge into MODEL")


def check_preservation(budget, t):
    for text, expected in (("EX x. EX y. R(x,y)", True), ("EX x. R(x,x) | EX x. EX y. R(x,y)", True),
                           ("ALL x. ALL y. ~R(x,y)", False), ("ALL x. EX y. R(x,y)", False)):
        phi = folog.parse_sentence(text)
        size = 3 if budget >= 9 else 2
        got = cores.is_hom_preserved(phi, size, max_bits=budget)
        ok = got.preserved == expected
        if ok and not expected:
            A, B, f = got.counterexample
            ok = (folog.evaluate(phi, A) and not folog.evaluate(phi, B)
                  and structures.check_homomorphism(f, A, B))
        t.check(ok, f"{text} preserved={got.preserved}")


def run_selftest(level, seed, budget, fixtures=None):
    rng = random.Random(seed)
    full = level == "full"
    names = ("fixture_round_trip", "fixture_expectations", "path_parameters",
             "parameter_inequalities", "core_laws", "compiler_soundness",
             "solver_agreement", "reduction_gate", "preservation")
    tallies = {name: Tally() for name in names}
    inputs = []
    check_fixtures(fixture_dir(fixtures), budget, tallies["fixture_round_trip"],
                   tallies["fixture_expectations"], inputs)
    check_paths(tallies["path_parameters"])
    check_inequalities(rng, 200 if full else 30, tallies["parameter_inequalities"])
    check_cores(rng, 200 if full else 40, 4 if full else 3, tallies["core_laws"])
    check_compiler(budget, tallies["compiler_soundness"])
    check_solvers(rng, budget, 100 if full else 20, tallies["solver_agreement"])
    check_reductions(budget, tallies["reduction_gate"])
    check_preservation(budget, tallies["preservation"])
    inv = {name: t.as_dict() for name, t in tallies.items()}
    return {"level": level, "seed": seed, "budget": budget, "invariants": inv,
            "ok": all(t["failed"] == 0 for t in inv.values()), "inputs": inputs}
