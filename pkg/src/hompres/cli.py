"""
Command-line front end.

Every command builds a report dict {command, inputs, results}; `--json`
prints it with sorted keys, otherwise a short human rendering is printed.
Exit status: 0 success, 1 domain failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from pathlib import Path

from . import circuits, cores, folog, graphparams, structures, subiso
from .errors import BoundExceeded, PreservationFailure

DEFAULT_MAX_BITS = 20
SELFTEST_BUDGET = {"quick": 16, "full": 22}


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    def __init__(self, message, results=None):
        super().__init__(message)
        self.results = results


# -- input loading -------------------------------------------------------------------


class Inputs:
    """Reads input files and remembers their content hashes for the report."""

    def __init__(self):
        self.seen = []

    def read(self, path):
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror or exc}") from None
        self.seen.append({"path": str(path), "sha256": hashlib.sha256(data).hexdigest()})
        return data.decode()

    def _parse(self, path, parser):
        text = self.read(path)
        try:
            return parser(text)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"{path}: {exc}") from None

    def graph(self, path):
        return self._parse(path, graphparams.parse_graph)

    def structure(self, path):
        return self._parse(path, structures.parse_structure)

    def formula(self, path):
        return self._parse(path, folog.parse_formula_file)

    def instance(self, path, blowup):
        return self._parse(path, lambda t: subiso.parse_instance(blowup, t))


# -- JSON helpers --------------------------------------------------------------------------


def structure_json(A):
    return {"size": A.size, "signature": str(A.signature),
            "relations": {name: sorted(list(t) for t in A.tuples(name)) for name in A.signature.names}}


def projection_json(rho):
    out = []
    for e in rho.entries:
        if isinstance(e, circuits.Const):
            out.append(e.value == 1 and "ONE" or "ZERO")
        elif isinstance(e, frozenset):
            out.append(sorted(e))
        else:
            out.append(e)
    return {"source_size": rho.source_size, "target_size": rho.target_size, "entries": out}


def check_json(res):
    return {"holds": bool(res.holds), "checked": res.checked,
            "counterexample": None if res.counterexample is None else list(res.counterexample)}


def _positive(value, name):
    if value is None or value < 1:
        raise UsageError(f"{name} must be a positive integer")
    return value


# -- commands ----------------------------------------------------------------------------------


def cmd_structure(args, io):
    A = io.structure(args.file)
    G = structures.gaifman(A)
    res = {"structure": structure_json(A), "num_tuples": A.num_tuples(),
           "encoding": "".join(map(str, structures.encode(A).bits)),
           "gaifman_edges": [list(e) for e in G.sorted_edges()],
           "is_core": cores.is_core(A)}
    human = [f"size {A.size}, signature {A.signature}, {A.num_tuples()} tuples",
             f"core: {'yes' if res['is_core'] else 'no'}"]
    return res, human


def cmd_core(args, io):
    A = io.structure(args.file)
    r = cores.compute_core(A)
    res = {"core": structure_json(r.core), "kept": list(r.kept),
           "retraction": list(r.retraction.image), "removed": list(r.removed),
           "core_size": r.core.size}
    return res, [f"core size {r.core.size}, kept {list(r.kept)}", r.core.to_text().rstrip()]


def cmd_mincores(args, io):
    gens = [io.structure(f) for f in args.files]
    try:
        ms = cores.min_cores(cores.GeneratedClass(tuple(gens)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = {"mincores": [structure_json(M) for M in ms], "count": len(ms)}
    human = [f"{len(ms)} minimal core(s)"] + [M.to_text().rstrip() for M in ms]
    return res, human


def _preservation_json(p):
    out = {"preserved": p.preserved, "size": p.size, "counterexample": None}
    if p.counterexample is not None:
        A, B, f = p.counterexample
        out["counterexample"] = {"A": structure_json(A), "B": structure_json(B), "map": list(f.image)}
    return out


def cmd_check_preserved(args, io):
    phi, sig = io.formula(args.file)
    n = _positive(args.max_size, "--max-size")
    p = cores.is_hom_preserved(phi, n, sig, max_bits=args.max_bits)
    res = _preservation_json(p)
    if not p:
        A, B, f = p.counterexample
        raise DomainFailure(f"not preserved: {A!r} models the formula, maps into {B!r} "
                            f"via {list(f.image)}, which does not", res)
    return res, [f"preserved under homomorphisms for sizes up to {n}"]


def cmd_treewidth(args, io):
    G = io.graph(args.file)
    k, td = graphparams.tree_width(G)
    return {"treewidth": k, "bags": [sorted(b) for b in td.bags],
            "tree_edges": [list(e) for e in td.tree_edges]}, [str(k)]


def cmd_treedepth(args, io):
    G = io.graph(args.file)
    k, F = graphparams.tree_depth(G)
    return {"treedepth": k, "parent": list(F.parent)}, [str(k)]


def cmd_longestpath(args, io):
    G = io.graph(args.file)
    p = graphparams.longest_path_witness(G)
    return {"longestpath": len(p), "path": list(p)}, [str(len(p))]


def cmd_minor(args, io):
    H, G = io.graph(args.minor), io.graph(args.graph)
    sets = graphparams.minor_contains(H, G)
    res = {"minor": sets is not None,
           "branch_sets": None if sets is None else [sorted(s) for s in sets]}
    human = ["minor: no"] if sets is None else \
        ["minor: yes"] + [f"  {i}: {sorted(s)}" for i, s in enumerate(sets)]
    return res, human


def cmd_trichotomy(args, io):
    G = io.graph(args.file)
    ell = _positive(args.ell, "--ell")
    got = sorted(graphparams.trichotomy_check(G, ell))
    return {"ell": ell, "holds": got}, [", ".join(got) or "none"]


def cmd_formula(args, io):
    phi, sig = io.formula(args.file)
    c = folog.classify(phi)
    res = {"formula": folog.render(phi), "signature": str(sig),
           "free_variables": sorted(folog.free_variables(phi)),
           "qr": folog.quantifier_rank(phi), "vw": folog.variable_width(phi),
           "connective_block": folog.connective_block(phi),
           "positive": c.positive, "existential": c.existential,
           "existential_positive": c.existential_positive}
    if c.existential_positive and not res["free_variables"]:
        res["pp_disjuncts"] = [str(p) for p in folog.to_pp_disjunction(phi, sig)]
    human = [res["formula"], f"qr {res['qr']}, vw {res['vw']}, "
             f"positive={c.positive} existential={c.existential}"]
    return res, human


def cmd_eval(args, io):
    phi, sig = io.formula(args.formula)
    A = io.structure(args.structure)
    try:
        folog.infer_signature(phi, A.signature)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    v = folog.evaluate(phi, A)
    return {"value": v}, ["true" if v else "false"]


def cmd_compile(args, io):
    phi, sig = io.formula(args.formula)
    n = _positive(args.n, "--n")
    fanin = args.max_fanin
    if fanin in ("auto", "none"):
        cap = None if fanin == "none" else "auto"
    elif fanin.isdigit() and int(fanin) > 0:
        cap = int(fanin)
    else:
        raise UsageError(f"--max-fanin must be auto, none or a positive integer, got {fanin!r}")
    C = circuits.compile_fo(phi, n, sig, max_fanin=cap)
    if args.tree:
        C = circuits.circuit_to_formula(C)
    m = circuits.measure(C)
    res = {"n": n, "inputs": C.n_inputs, "nodes": len(C.nodes), "size": m.size,
           "depth": m.depth, "max_fanin": m.max_fanin, "formula_size": m.formula_size,
           "netlist": circuits.to_netlist(C)}
    return res, [circuits.to_netlist(C).rstrip()]


def cmd_sub_solve(args, io):
    G = io.graph(args.graph)
    n = _positive(args.n, "--n")
    B = subiso.BlowUp(G, n)
    if args.instance:
        X = io.instance(args.instance, B)
    else:
        rng = random.Random(args.seed)
        X = subiso.SubInstance(B, tuple(rng.getrandbits(1) for _ in range(B.num_vars)))
    if args.solver == "brute":
        ans, alpha = subiso.sub_bruteforce(G, n, X)
        extra = {"alpha": None if alpha is None else list(alpha)}
    elif args.solver == "dp":
        _, td = graphparams.tree_width(G)
        ans, extra = subiso.sub_dp_treewidth(G, td, n, X), {"width": td.width}
    else:
        _, F = graphparams.tree_depth(G)
        C = subiso.sub_formula_treedepth(G, F, n)
        ans = bool(circuits.eval_circuit(C, X.bits))
        extra = {"formula_size": circuits.measure(C).formula_size}
    res = {"solver": args.solver, "n": n, "variables": B.num_vars,
           "instance": "".join(map(str, X.bits)), "sub": bool(ans), **extra}
    return res, ["true" if ans else "false"]


def _verify_sub(H, G, n, rho, max_bits):
    if rho.source_size > max_bits:
        return {"verified": None, "reason": f"{rho.source_size} source variables exceed --max-bits"}
    chk = subiso.check_sub_reduction(H, G, n, rho, max_bits=max_bits)
    if not chk:
        raise DomainFailure(f"reduction check failed at {chk.counterexample}", check_json(chk))
    return {"verified": True, "checked": chk.checked}


def cmd_sub_reduce_minor(args, io):
    H, G = io.graph(args.minor), io.graph(args.graph)
    n = _positive(args.n, "--n")
    sets = graphparams.minor_contains(H, G)
    if sets is None:
        raise DomainFailure("the first graph is not a minor of the second", {"minor": False})
    ops = subiso.ops_from_branch_sets(H, G, sets)
    rho = subiso.minor_reduction_chain(H, G, ops, n)
    res = {"branch_sets": [sorted(s) for s in sets], "ops": [list(o) for o in ops],
           "projection": projection_json(rho), **_verify_sub(H, G, n, rho, args.max_bits)}
    return res, [f"{len(ops)} operation(s): {ops}", f"verified: {res['verified']}"]


def cmd_sub_reduce_path(args, io):
    G = io.graph(args.graph)
    n = _positive(args.n, "--n")
    k, rho = subiso.path_reduction(G, n)
    res = {"k": k, "projection": projection_json(rho),
           **_verify_sub(subiso.path_graph(k), G, n, rho, args.max_bits)}
    return res, [f"path on {k} vertices", f"verified: {res['verified']}"]


def cmd_sub_hpt_reduce(args, io):
    M = io.structure(args.structure)
    n = _positive(args.n, "--n")
    rho = subiso.hpt_reduction(M, n)
    res = {"projection": projection_json(rho), "model_size": M.size * n, "verified": None}
    human = [f"{rho.source_size} instance variables -> {rho.target_size} encoding bits"]
    if args.formula:
        phi, _ = io.formula(args.formula)
        try:
            chk = subiso.verify_hpt_reduction(phi, M, n, max_bits=args.max_bits)
        except PreservationFailure as exc:
            raise DomainFailure(str(exc), {"preservation": "failed"}) from None
        res.update(verified=chk.holds, instances=chk.instances,
                   preservation_size=chk.preservation_size, mincore=chk.mincore)
        if not chk:
            raise DomainFailure(f"equivalence fails at {chk.counterexample}", res)
        human.append(f"verified on {chk.instances} instances (preservation checked to size "
                     f"{chk.preservation_size})")
    return res, human


def cmd_hpt_pipeline(args, io):
    phi, sig = io.formula(args.formula)
    size = _positive(args.max_size, "--max-size")
    nv = _positive(args.verify_size, "--verify-size")
    try:
        rep = subiso.hpt_pipeline(phi, size, nv, max_bits=args.max_bits)
    except PreservationFailure as exc:
        A, B, f = exc.counterexample
        cex = {"A": structure_json(A), "B": structure_json(B), "map": list(f.image)}
        raise DomainFailure(f"{exc}: {A!r} maps into {B!r} via {list(f.image)}",
                            {"preserved": False, "counterexample": cex}) from None
    res = {"preserved_up_to": rep.preserved_up_to,
           "mincores": [structure_json(M) for M in rep.mincores],
           "tree_depths": list(rep.tree_depths), "psi": folog.render(rep.psi),
           "qr_psi": rep.qr_psi, "verify_sizes": list(rep.verify_sizes),
           "equivalent": rep.equivalent,
           "mismatch": None if rep.mismatch is None else list(rep.mismatch),
           "note": "minimal cores are taken from models up to the size bound"}
    human = [f"mincores: {len(rep.mincores)}, tree-depths {list(rep.tree_depths)}",
             f"psi: {res['psi']}", f"qr(psi)={rep.qr_psi}",
             f"equivalent={'true' if rep.equivalent else 'false'}"]
    if not rep.equivalent:
        raise DomainFailure("rebuilt sentence disagrees with the input", res)
    return res, human


def cmd_selftest(args, io):
    from .selftest import run_selftest
    budget = SELFTEST_BUDGET[args.level]
    if args.max_bits_given:
        budget = min(budget, args.max_bits)
    report = run_selftest(args.level, args.seed, budget, args.fixtures)
    io.seen.extend(report.pop("inputs"))
    lines = [f"{name}: {t['passed']} passed, {t['failed']} failed"
             + (f" ({t['first_failure']})" if t["failed"] else "")
             for name, t in report["invariants"].items()]
    lines.append("PASS" if report["ok"] else "FAIL")
    if not report["ok"]:
        bad = [k for k, t in report["invariants"].items() if t["failed"]]
        raise DomainFailure("selftest failed: " + ", ".join(bad), report)
    return report, lines


# -- argument parsing -------------------------------------------------------------------------


def _env_max_bits():
    raw = os.environ.get("HOMPRES_MAX_BITS")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HOMPRES_MAX_BITS must be an integer, got {raw!r}") from None


def build_parser():
    # SUPPRESS keeps a subcommand's defaults from overwriting flags given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", help="print a machine-readable report")
    common.add_argument("--seed", type=int, help="seed for all randomness (default 0)")
    common.add_argument("--max-bits", type=int,
                        help=f"budget for exhaustive sweeps (default {DEFAULT_MAX_BITS}, "
                             "or HOMPRES_MAX_BITS)")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    p = argparse.ArgumentParser(prog="hompres", parents=[common],
                                description="Homomorphism preservation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_):
        q = sub.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    add("structure", cmd_structure, "summarise a structure file").add_argument("file")
    add("core", cmd_core, "core of a structure").add_argument("file")
    add("mincores", cmd_mincores, "minimal cores of generators").add_argument("files", nargs="+")
    q = add("check-preserved", cmd_check_preserved, "brute-force homomorphism preservation check")
    q.add_argument("file")
    q.add_argument("--max-size", type=int, default=3)
    add("treewidth", cmd_treewidth, "exact tree-width").add_argument("file")
    add("treedepth", cmd_treedepth, "exact tree-depth").add_argument("file")
    add("longestpath", cmd_longestpath, "longest path (vertex count)").add_argument("file")
    q = add("minor", cmd_minor, "minor containment with branch sets")
    q.add_argument("minor")
    q.add_argument("graph")
    q = add("trichotomy", cmd_trichotomy, "which excluded-minor conditions hold")
    q.add_argument("file")
    q.add_argument("--ell", type=int, required=True)
    add("formula", cmd_formula, "parse and measure a formula").add_argument("file")
    q = add("eval", cmd_eval, "evaluate a sentence on a structure")
    q.add_argument("--formula", required=True)
    q.add_argument("--structure", required=True)
    q = add("compile", cmd_compile, "compile a sentence to a circuit netlist")
    q.add_argument("--formula", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--max-fanin", default="auto", help="auto, none, or an integer")
    q.add_argument("--tree", action="store_true", help="unfold into a formula")

    s = sub.add_parser("sub", help="colored subgraph isomorphism").add_subparsers(
        dest="subcommand", required=True, metavar="subcommand")

    def add_sub(name, fn, help_):
        q = s.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    q = add_sub("solve", cmd_sub_solve, "decide an instance")
    q.add_argument("--graph", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--instance", help="bit file; random from --seed when omitted")
    q.add_argument("--solver", choices=("brute", "dp", "formula"), default="brute")
    q = add_sub("reduce-minor", cmd_sub_reduce_minor, "projection from a minor")
    q.add_argument("--graph", required=True)
    q.add_argument("--minor", required=True)
    q.add_argument("--n", type=int, required=True)
    q = add_sub("reduce-path", cmd_sub_reduce_path, "projection from the tree-depth path")
    q.add_argument("--graph", required=True)
    q.add_argument("--n", type=int, required=True)
    q = add_sub("hpt-reduce", cmd_sub_hpt_reduce, "projection into MODEL")
    q.add_argument("--structure", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--formula", help="verify the equivalence for this sentence")

    h = sub.add_parser("hpt", help="preservation pipeline").add_subparsers(
        dest="subcommand", required=True, metavar="subcommand")
    q = h.add_parser("pipeline", parents=[common], help="rebuild a sentence from its minimal cores")
    q.set_defaults(fn=cmd_hpt_pipeline)
    q.add_argument("--formula", required=True)
    q.add_argument("--max-size", type=int, default=3)
    q.add_argument("--verify-size", type=int, default=3)

    q = add("selftest", cmd_selftest, "run the built-in invariant suites")
    q.add_argument("--level", choices=tuple(SELFTEST_BUDGET), default="quick")
    q.add_argument("--fixtures", help="fixture directory (default: the bundled one)")
    return p


def _emit(report, as_json, human, out):
    if as_json:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        for line in human:
            out.write(line + "\n")


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("json", False), ("seed", 0), ("max_bits", None), ("timing", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    io = Inputs()
    command = args.command + (f" {args.subcommand}" if getattr(args, "subcommand", None) else "")
    try:
        env_bits = _env_max_bits()
        args.max_bits_given = args.max_bits is not None or env_bits is not None
        if args.max_bits is None:
            args.max_bits = env_bits if env_bits is not None else DEFAULT_MAX_BITS
        start = time.perf_counter()
        status = 0
        try:
            results, human = args.fn(args, io)
        except DomainFailure as exc:
            status, results, human = 1, exc.results, [f"failure: {exc}"]
        report = {"command": command, "inputs": io.seen, "results": results,
                  "status": "ok" if status == 0 else "failure"}
        if args.timing:
            report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
        _emit(report, args.json, human, out)
        return status
    except UsageError as exc:
        err.write(f"hompres: {exc}\n")
        return 2
    except (BoundExceeded, PreservationFailure) as exc:
        err.write(f"hompres: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
