"""
Unbounded fan-in AND/OR circuits with negations on inputs only.

Nodes are stored in topological order (children before parents).  Depth
counts gates, so literals and constants sit at depth 0.  Constants are
folded away during construction and never count towards size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundExceeded
from .folog import (And, Atom, Eq, Exists, Not, Or, connective_block,
                    free_variables, infer_signature, nnf, walk)
from .structures import tuple_index

TRUTH_TABLE_MAX_BITS = 22


@dataclass(frozen=True)
class Node:
    kind: str  # "lit", "const", "and", "or"
    var: int = -1
    neg: bool = False
    value: int = 0
    children: tuple = ()


@dataclass(frozen=True)
class Circuit:
    n_inputs: int
    nodes: tuple
    output: int

    def __post_init__(self):
        for i, nd in enumerate(self.nodes):
            if nd.kind == "lit" and not (0 <= nd.var < self.n_inputs):
                raise ValueError(f"node {i} reads input {nd.var} of {self.n_inputs}")
            if any(c >= i for c in nd.children):
                raise ValueError(f"node {i} is not in topological order")
        if not (0 <= self.output < len(self.nodes)):
            raise ValueError("output node missing")

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class Measures:
    size: int
    depth: int
    max_fanin: int
    formula_size: int


class CircuitBuilder:
    """Incremental construction with constant folding.

    With share=True structurally equal nodes are created once (hash-consing),
    so the result is a DAG; with share=False every call makes a fresh node and
    the result stays tree-shaped.
    """

    def __init__(self, n_inputs, share=True):
        self.n_inputs = n_inputs
        self.share = share
        self.nodes = []
        self._index = {}

    def _add(self, node):
        if self.share:
            got = self._index.get(node)
            if got is not None:
                return got
        self.nodes.append(node)
        idx = len(self.nodes) - 1
        if self.share:
            self._index[node] = idx
        return idx

    def lit(self, var, neg=False):
        if not (0 <= var < self.n_inputs):
            raise ValueError(f"input {var} out of range")
        return self._add(Node("lit", var=var, neg=bool(neg)))

    def const(self, value):
        return self._add(Node("const", value=int(bool(value))))

    def is_const(self, idx, value=None):
        nd = self.nodes[idx]
        return nd.kind == "const" and (value is None or nd.value == value)

    def gate(self, kind, children, merge_cap=0):
        """AND/OR gate over `children`, folding constants.

        Children that are gates of the same kind are spliced in while the
        resulting fan-in stays within merge_cap (0 disables splicing).
        """
        if kind not in ("and", "or"):
            raise ValueError(kind)
        absorbing = 0 if kind == "and" else 1
        kids = []
        for c in children:
            if self.is_const(c):
                if self.nodes[c].value == absorbing:
                    return self.const(absorbing)
                continue
            kids.append(c)
        if merge_cap:
            out = []
            pending = list(kids)
            total = len(kids)
            for c in pending:
                nd = self.nodes[c]
                if nd.kind == kind and total - 1 + len(nd.children) <= merge_cap:
                    out.extend(nd.children)
                    total += len(nd.children) - 1
                else:
                    out.append(c)
            kids = out
        if self.share:
            kids = sorted(set(kids))
        if not kids:
            return self.const(1 - absorbing)
        if len(kids) == 1:
            return kids[0]
        return self._add(Node(kind, children=tuple(kids)))

    def and_(self, children, merge_cap=0):
        return self.gate("and", children, merge_cap)

    def or_(self, children, merge_cap=0):
        return self.gate("or", children, merge_cap)

    def build(self, output):
        """Circuit of the nodes reachable from `output`, renumbered in order."""
        keep = set()
        stack = [output]
        while stack:
            i = stack.pop()
            if i in keep:
                continue
            keep.add(i)
            stack.extend(self.nodes[i].children)
        order = sorted(keep)
        new = {old: k for k, old in enumerate(order)}
        nodes = []
        for old in order:
            nd = self.nodes[old]
            if nd.children:
                nd = Node(nd.kind, children=tuple(new[c] for c in nd.children))
            nodes.append(nd)
        return Circuit(self.n_inputs, tuple(nodes), new[output])


def const_circuit(n_inputs, value):
    b = CircuitBuilder(n_inputs)
    return b.build(b.const(value))


# -- evaluation and measures -----------------------------------------------------------


def eval_circuit(C, x):
    """Value of C on one assignment (sequence of 0/1 indexed by input)."""
    if len(x) != C.n_inputs:
        raise ValueError(f"circuit has {C.n_inputs} inputs, got {len(x)} bits")
    vals = []
    for nd in C.nodes:
        if nd.kind == "lit":
            v = bool(x[nd.var]) != nd.neg
        elif nd.kind == "const":
            v = bool(nd.value)
        elif nd.kind == "and":
            v = all(vals[c] for c in nd.children)
        else:
            v = any(vals[c] for c in nd.children)
        vals.append(v)
    return int(vals[C.output])


def eval_batch(C, X):
    """Values of C on each row of the boolean matrix X (shape N x n_inputs)."""
    X = np.asarray(X, dtype=bool)
    if X.ndim != 2 or X.shape[1] != C.n_inputs:
        raise ValueError(f"expected an N x {C.n_inputs} matrix")
    N = X.shape[0]
    vals = [None] * len(C.nodes)
    for i, nd in enumerate(C.nodes):
        if nd.kind == "lit":
            vals[i] = ~X[:, nd.var] if nd.neg else X[:, nd.var]
        elif nd.kind == "const":
            vals[i] = np.full(N, bool(nd.value))
        elif nd.kind == "and":
            vals[i] = np.logical_and.reduce([vals[c] for c in nd.children])
        else:
            vals[i] = np.logical_or.reduce([vals[c] for c in nd.children])
    return np.array(vals[C.output], dtype=bool)


def all_assignments(n_bits, start=0, stop=None):
    """Rows are the assignments start..stop-1; bit j of the row index is column j."""
    stop = (1 << n_bits) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n_bits, dtype=np.int64)) & 1).astype(bool)


def truth_table(C, max_bits=TRUTH_TABLE_MAX_BITS):
    if C.n_inputs > max_bits:
        raise BoundExceeded(f"{C.n_inputs} inputs exceed the truth-table budget {max_bits}")
    out = np.empty(1 << C.n_inputs, dtype=bool)
    chunk = 1 << 16
    for start in range(0, 1 << C.n_inputs, chunk):
        stop = min(start + chunk, 1 << C.n_inputs)
        out[start:stop] = eval_batch(C, all_assignments(C.n_inputs, start, stop))
    return out


def measure(C):
    reach = _reachable(C)
    depth = [0] * len(C.nodes)
    leaves = [1] * len(C.nodes)
    size = fanin = 0
    for i in sorted(reach):
        nd = C.nodes[i]
        if nd.children:
            depth[i] = 1 + max(depth[c] for c in nd.children)
            leaves[i] = sum(leaves[c] for c in nd.children)
            size += 1
            fanin = max(fanin, len(nd.children))
    return Measures(size=size, depth=depth[C.output], max_fanin=fanin,
                    formula_size=leaves[C.output])


def _reachable(C):
    seen = set()
    stack = [C.output]
    while stack:
        i = stack.pop()
        if i not in seen:
            seen.add(i)
            stack.extend(C.nodes[i].children)
    return seen


def is_tree(C):
    """True when every node feeds at most one gate."""
    uses = [0] * len(C.nodes)
    for i in _reachable(C):
        for c in C.nodes[i].children:
            uses[c] += 1
    return all(u <= 1 for u in uses)


def circuit_to_formula(C):
    """Unfold shared sub-circuits so that every node has fan-out one."""
    b = CircuitBuilder(C.n_inputs, share=False)

    def copy(i):
        nd = C.nodes[i]
        if nd.kind == "lit":
            return b.lit(nd.var, nd.neg)
        if nd.kind == "const":
            return b.const(nd.value)
        return b.gate(nd.kind, [copy(c) for c in nd.children])

    return b.build(copy(C.output))


# -- netlist ---------------------------------------------------------------------------


def to_netlist(C):
    lines = [f"input {i}" for i in range(C.n_inputs)]
    for i, nd in enumerate(C.nodes):
        if nd.kind == "lit":
            lines.append(f"lit {i} {nd.var}" + (" neg" if nd.neg else ""))
        elif nd.kind == "const":
            lines.append(f"const {i} {nd.value}")
        else:
            lines.append(f"gate {i} {nd.kind.upper()} " + " ".join(map(str, nd.children)))
    lines.append(f"output {C.output}")
    return "\n".join(lines) + "\n"


def parse_netlist(text):
    n_inputs = 0
    nodes = {}
    output = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        p = line.split()
        try:
            if p[0] == "input":
                n_inputs = max(n_inputs, int(p[1]) + 1)
            elif p[0] == "lit":
                nodes[int(p[1])] = Node("lit", var=int(p[2]), neg=len(p) > 3 and p[3] == "neg")
            elif p[0] == "const":
                nodes[int(p[1])] = Node("const", value=int(p[2]))
            elif p[0] == "gate":
                kind = p[2].lower()
                if kind not in ("and", "or"):
                    raise ValueError(f"unknown gate type {p[2]}")
                nodes[int(p[1])] = Node(kind, children=tuple(int(c) for c in p[3:]))
            elif p[0] == "output":
                output = int(p[1])
            else:
                raise ValueError(f"unknown directive {p[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if output is None:
        raise ValueError("netlist has no output line")
    if sorted(nodes) != list(range(len(nodes))):
        raise ValueError("node ids must be 0..N-1")
    return Circuit(n_inputs, tuple(nodes[i] for i in range(len(nodes))), output)


# -- monotone projections -----------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int

    def __repr__(self):
        return "ONE" if self.value else "ZERO"


ZERO = Const(0)
ONE = Const(1)


def _norm_entry(e):
    if isinstance(e, Const):
        return e
    if isinstance(e, (set, frozenset)):
        e = frozenset(int(i) for i in e)
        if not e:
            return ONE
        if len(e) == 1:
            return next(iter(e))
        return e
    if isinstance(e, (int, np.integer)) and not isinstance(e, bool):
        return int(e)
    raise TypeError(f"bad projection entry {e!r}")


@dataclass(frozen=True)
class MonotoneProjection:
    """A reduction rho from a function over I to a function over J.

    entries[j] says where target variable j gets its value: a source index
    i, a constant ZERO/ONE, or (generalised form) a frozenset of source
    indices whose conjunction is taken.
    """

    source_size: int
    entries: tuple

    def __post_init__(self):
        entries = tuple(_norm_entry(e) for e in self.entries)
        for e in entries:
            idxs = e if isinstance(e, frozenset) else ([] if isinstance(e, Const) else [e])
            for i in idxs:
                if not (0 <= i < self.source_size):
                    raise ValueError(f"source index {i} out of range {self.source_size}")
        object.__setattr__(self, "entries", entries)

    @property
    def target_size(self):
        return len(self.entries)

    @property
    def is_plain(self):
        """True when no entry is a conjunction (a monotone projection proper)."""
        return not any(isinstance(e, frozenset) for e in self.entries)

    @classmethod
    def identity(cls, size):
        return cls(size, tuple(range(size)))


def apply_projection(rho, x):
    """rho*(x); x is one assignment or an N x |I| matrix."""
    X = np.asarray(x, dtype=bool)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != rho.source_size:
        raise ValueError(f"projection reads {rho.source_size} bits, got {X.shape[1]}")
    N = X.shape[0]
    Y = np.empty((N, rho.target_size), dtype=bool)
    for j, e in enumerate(rho.entries):
        if isinstance(e, Const):
            Y[:, j] = bool(e.value)
        elif isinstance(e, frozenset):
            Y[:, j] = np.logical_and.reduce([X[:, i] for i in sorted(e)])
        else:
            Y[:, j] = X[:, e]
    return Y[0] if single else Y


def compose_projections(outer, inner):
    """Projection equal to applying `inner` first and then `outer`.

    outer maps its targets into inner's target space; the result maps
    outer's targets straight into inner's source space.
    """
    if outer.source_size != inner.target_size:
        raise ValueError(f"cannot compose: outer reads {outer.source_size} variables, "
                         f"inner produces {inner.target_size}")
    entries = []
    for e in outer.entries:
        if isinstance(e, Const):
            entries.append(e)
            continue
        parts = sorted(e) if isinstance(e, frozenset) else [e]
        acc = set()
        zero = False
        for k in parts:
            f = inner.entries[k]
            if isinstance(f, Const):
                if f.value == 0:
                    zero = True
                    break
            elif isinstance(f, frozenset):
                acc |= f
            else:
                acc.add(f)
        entries.append(ZERO if zero else frozenset(acc))
    return MonotoneProjection(inner.source_size, tuple(entries))


@dataclass(frozen=True)
class ReductionCheck:
    holds: bool
    checked: int
    counterexample: tuple | None = None

    def __bool__(self):
        return self.holds


def _as_function(f):
    if callable(f):
        return f
    table = np.asarray(f, dtype=bool)

    def lookup(X):
        w = X.shape[1]
        if table.shape[0] != 1 << w:
            raise ValueError(f"truth table of length {table.shape[0]} does not match {w} inputs")
        idx = X.astype(np.int64) @ (np.int64(1) << np.arange(w, dtype=np.int64))
        return table[idx]

    return lookup


def verify_reduction(f, g, rho, max_bits=TRUTH_TABLE_MAX_BITS, chunk=1 << 15):
    """Check f(x) == g(rho*(x)) for every x in {0,1}^I.

    f and g are truth tables (indexed by the integer whose bit i is x_i) or
    callables taking an N x width boolean matrix and returning N booleans.
    """
    width = rho.source_size
    if width > max_bits:
        raise BoundExceeded(f"{width} source variables exceed the sweep budget {max_bits}")
    f, g = _as_function(f), _as_function(g)
    total = 1 << width
    for start in range(0, total, chunk):
        X = all_assignments(width, start, min(start + chunk, total))
        lhs = np.asarray(f(X), dtype=bool)
        rhs = np.asarray(g(apply_projection(rho, X)), dtype=bool)
        bad = np.nonzero(lhs != rhs)[0]
        if bad.size:
            x = tuple(int(b) for b in X[bad[0]])
            return ReductionCheck(False, start + int(bad[0]) + 1, x)
    return ReductionCheck(True, total)


def restrict_circuit(C, rho, share=True):
    """Circuit over rho's source variables computing C(rho*(x)).

    Plain entries rename or fix inputs; conjunction entries become one
    AND gate (an OR of negated literals where the input was negated), so
    depth grows by at most one.
    """
    if C.n_inputs != rho.target_size:
        raise ValueError(f"circuit has {C.n_inputs} inputs, projection produces {rho.target_size}")
    b = CircuitBuilder(rho.source_size, share=share)
    mapped = []
    for nd in C.nodes:
        if nd.kind == "const":
            mapped.append(b.const(nd.value))
        elif nd.kind == "lit":
            e = rho.entries[nd.var]
            if isinstance(e, Const):
                mapped.append(b.const(e.value ^ int(nd.neg)))
            elif isinstance(e, frozenset):
                lits = [b.lit(i, nd.neg) for i in sorted(e)]
                mapped.append(b.gate("or" if nd.neg else "and", lits))
            else:
                mapped.append(b.lit(e, nd.neg))
        else:
            mapped.append(b.gate(nd.kind, [mapped[c] for c in nd.children]))
    return b.build(mapped[C.output])


# -- FO compilation ------------------------------------------------------------------------


def fanin_cap(phi, n):
    return max(n, connective_block(phi))


def compile_fo(phi, n, signature=None, max_fanin="auto"):
    """Circuit over Enc bits of size-n structures computing MODEL_{phi,n}.

    Existential quantifiers become OR gates over the n instantiations,
    universal ones AND gates, after negations have been pushed onto atoms.
    Sub-circuits are shared per (sub-formula, values of its free variables).
    Same-type gates are merged while the fan-in stays within max_fanin
    ("auto" = max(n, largest connective block); None = unbounded).
    """
    if free_variables(phi):
        raise ValueError("compile_fo needs a sentence")
    sig = infer_signature(phi, signature)
    cap = fanin_cap(phi, n) if max_fanin == "auto" else (math.inf if max_fanin is None else max_fanin)
    psi = nnf(phi)
    free = {}
    for node in walk(psi):
        free[id(node)] = tuple(sorted(free_variables(node)))
    b = CircuitBuilder(sig.encoding_length(n))
    memo = {}

    def rec(node, env):
        key = (id(node), tuple(env[v] for v in free[id(node)]))
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(node, Atom):
            out = b.lit(tuple_index(sig, n, node.rel, tuple(env[x] for x in node.args)))
        elif isinstance(node, Eq):
            out = b.const(env[node.left] == env[node.right])
        elif isinstance(node, Not):
            a = node.arg
            if isinstance(a, Eq):
                out = b.const(env[a.left] != env[a.right])
            else:
                out = b.lit(tuple_index(sig, n, a.rel, tuple(env[x] for x in a.args)), neg=True)
        elif isinstance(node, (And, Or)):
            kind = "and" if isinstance(node, And) else "or"
            out = b.gate(kind, [rec(a, env) for a in node.args], merge_cap=cap)
        else:
            kind = "or" if isinstance(node, Exists) else "and"
            kids = [rec(node.body, {**env, node.var: a}) for a in range(n)]
            out = b.gate(kind, kids, merge_cap=cap)
        memo[key] = out
        return out

    return b.build(rec(psi, {}))
