"""
Colored subgraph isomorphism on blow-ups, and reductions into it and out of it.

The blow-up of G by n replaces each vertex v with the fibre {(v,a) : a < n}
and each edge {v,w} (v < w) with the complete bipartite graph between the
two fibres.  Instance variables are ordered by base edge (lexicographic),
then by (a, b) where a is the fibre value of the smaller endpoint:

    index = edge_idx * n*n + a*n + b

SUB(G,n)(X) asks whether X contains G^(alpha) for some alpha in [n]^V(G).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuits import (ONE, ZERO, CircuitBuilder, MonotoneProjection, apply_projection,
                       compile_fo, compose_projections, eval_batch, verify_reduction)
from .cores import is_core, is_hom_preserved, min_cores_of_sentence
from .errors import BoundExceeded, PreservationFailure
from .folog import (MODEL_TABLE_MAX_BITS, ep_sentence_of_class, evaluate, infer_signature,
                    model_table, quantifier_rank)
from .graphparams import Graph, find_path, tree_depth
from .structures import (BitEncoding, VertexMap, decode, find_isomorphism, from_graph, gaifman,
                         isomorphic)

BRUTEFORCE_BOUND = 1 << 20
SUB_TABLE_MAX_BITS = 22
REDUCTION_SWEEP_MAX_BITS = 20


@dataclass(frozen=True)
class BlowUp:
    base: Graph
    n: int
    edges: tuple = field(init=False, repr=False)
    _edge_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("blow-up factor must be >= 1")
        edges = tuple(self.base.sorted_edges())
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_edge_index", {e: i for i, e in enumerate(edges)})

    @property
    def num_vars(self):
        return len(self.edges) * self.n * self.n

    def var(self, v, a, w, b):
        """Variable of the blow-up edge {(v,a),(w,b)}."""
        if v > w:
            v, a, w, b = w, b, v, a
        try:
            e = self._edge_index[(v, w)]
        except KeyError:
            raise KeyError(f"{(v, w)} is not an edge of the base graph") from None
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise ValueError("fibre value out of range")
        return (e * self.n + a) * self.n + b

    def label(self, i):
        """((v,a),(w,b)) for variable i."""
        e, rest = divmod(i, self.n * self.n)
        a, b = divmod(rest, self.n)
        v, w = self.edges[e]
        return ((v, a), (w, b))

    def copy_vars(self, alpha):
        """Variables of the copy G^(alpha)."""
        return frozenset(self.var(v, alpha[v], w, alpha[w]) for v, w in self.edges)

    def copy_mask(self, alpha):
        return sum(1 << i for i in self.copy_vars(alpha))


@dataclass(frozen=True)
class SubInstance:
    """A subgraph X of the blow-up, one bit per blow-up edge."""

    blowup: BlowUp
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != self.blowup.num_vars:
            raise ValueError(f"instance needs {self.blowup.num_vars} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("instance bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def full(cls, blowup):
        return cls(blowup, (1,) * blowup.num_vars)

    @classmethod
    def empty(cls, blowup):
        return cls(blowup, (0,) * blowup.num_vars)

    @classmethod
    def from_int(cls, blowup, value):
        return cls(blowup, tuple((value >> i) & 1 for i in range(blowup.num_vars)))

    def as_int(self):
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def to_text(self):
        return "".join(f"{b}\n" for b in self.bits)


def parse_instance(blowup, text):
    bits = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise ValueError(f"line {lineno}: expected 0 or 1, got {line!r}")
        bits.append(int(line))
    return SubInstance(blowup, tuple(bits))


def _bits_of(G, n, X):
    B = BlowUp(G, n)
    if isinstance(X, SubInstance):
        if X.blowup.base != G or X.blowup.n != n:
            raise ValueError("instance belongs to a different blow-up")
        return B, X.bits
    return B, SubInstance(B, tuple(X)).bits


def pattern_copy(G, alpha, n):
    """Blow-up edges of G^(alpha) as pairs ((v, alpha_v), (w, alpha_w))."""
    if len(alpha) != G.order or any(not (0 <= a < n) for a in alpha):
        raise ValueError("alpha must assign a fibre value in [n] to every vertex")
    return frozenset(((v, alpha[v]), (w, alpha[w])) for v, w in G.sorted_edges())


# -- solvers -----------------------------------------------------------------------


def sub_bruteforce(G, n, X, bound=BRUTEFORCE_BOUND):
    """(answer, alpha) by trying every alpha in lexicographic order."""
    if n**G.order > bound:
        raise BoundExceeded(f"{n}^{G.order} assignments exceed the bound {bound}")
    B, bits = _bits_of(G, n, X)
    for alpha in itertools.product(range(n), repeat=G.order):
        if all(bits[i] for i in B.copy_vars(alpha)):
            return True, alpha
    return False, None


def sub_table(G, n, max_bits=SUB_TABLE_MAX_BITS):
    """Truth table of SUB(G,n), indexed by the instance integer."""
    B = BlowUp(G, n)
    if B.num_vars > max_bits:
        raise BoundExceeded(f"{B.num_vars} variables exceed the table budget {max_bits}")
    xs = np.arange(1 << B.num_vars, dtype=np.int64)
    out = np.zeros(xs.shape[0], dtype=bool)
    for mask in sorted({B.copy_mask(alpha) for alpha in itertools.product(range(n), repeat=G.order)}):
        out |= (xs & mask) == mask
    return out


def _nice(td, G):
    """Nice decomposition as a list of (kind, bag, payload, kids), roots listed.

    kinds: leaf (empty bag), introduce v, forget v, join.  Each tree
    component gets its own root with an empty bag.
    """
    nodes = []

    def add(kind, bag, payload, kids):
        nodes.append((kind, bag, payload, tuple(kids)))
        return len(nodes) - 1

    def change(node, frm, to):
        for v in sorted(frm - to):
            frm = frm - {v}
            node = add("forget", frm, v, [node])
        for v in sorted(to - frm):
            frm = frm | {v}
            node = add("introduce", frm, v, [node])
        return node

    adj = td.tree_adjacency()
    bags = [frozenset(b) for b in td.bags]
    seen = set()
    roots = []

    def build(t, parent):
        seen.add(t)
        subs = [change(build(c, t), bags[c], bags[t]) for c in adj[t] if c != parent]
        if not subs:
            return change(add("leaf", frozenset(), None, []), frozenset(), bags[t])
        node = subs[0]
        for other in subs[1:]:
            node = add("join", bags[t], None, [node, other])
        return node

    for t in range(len(bags)):
        if t not in seen:
            roots.append(change(build(t, None), bags[t], frozenset()))
    return nodes, roots


def sub_dp_treewidth(G, td, n, X):
    """Dynamic programme over a (nice) tree decomposition of G.

    Each node keeps the assignments of its bag that extend to a valid
    partial copy below it; edges are checked when their second endpoint is
    introduced.
    """
    td.validate(G)
    B, bits = _bits_of(G, n, X)
    nodes, roots = _nice(td, G)
    adj = G.adjacency
    tables = []
    for kind, bag, payload, kids in nodes:
        order = tuple(sorted(bag))
        if kind == "leaf":
            tab = {()}
        elif kind == "introduce":
            v = payload
            child_order = tuple(sorted(bag - {v}))
            pos = order.index(v)
            nbrs = [(child_order.index(u), u) for u in child_order if u in adj[v]]
            tab = set()
            for assign in tables[kids[0]]:
                for a in range(n):
                    if all(bits[B.var(v, a, u, assign[i])] for i, u in nbrs):
                        tab.add(assign[:pos] + (a,) + assign[pos:])
        elif kind == "forget":
            child_order = tuple(sorted(bag | {payload}))
            pos = child_order.index(payload)
            tab = {assign[:pos] + assign[pos + 1:] for assign in tables[kids[0]]}
        else:
            tab = tables[kids[0]] & tables[kids[1]]
        tables.append(tab)
    return all(tables[r] for r in roots)


def sub_formula_treedepth(G, forest, n, merge_cap=None):
    """Tree-shaped circuit for SUB(G,n) following an elimination forest.

    For vertex v with ancestor values eta: OR over the fibre value a of v of
    the AND of the edge literals from (v,a) to its adjacent ancestors and the
    sub-formulas of v's children.  The output is the AND over the roots.
    Directly nested gates of one kind are spliced together while the fan-in
    stays within merge_cap (None = no limit, 0 = never).
    """
    forest.validate(G)
    B = BlowUp(G, n)
    b = CircuitBuilder(B.num_vars, share=False)
    adj = G.adjacency
    kids = [forest.children(v) for v in G.vertices]
    up = [[u for u in forest.ancestors(v) if u in adj[v]] for v in G.vertices]

    def f(v, eta):
        branches = []
        for a in range(n):
            inner = {**eta, v: a}
            parts = [b.lit(B.var(v, a, u, eta[u])) for u in up[v]]
            parts += [f(c, inner) for c in kids[v]]
            branches.append(b.and_(parts, cap))
        return b.or_(branches, cap)

    cap = 1 << 62 if merge_cap is None else merge_cap
    return b.build(b.and_([f(r, {}) for r in forest.roots()], cap))


# -- reductions into SUB ------------------------------------------------------------


def _normalise_op(op):
    kind = op[0]
    if kind in ("delete", "delete_edge"):
        return ("delete_edge", op[1], op[2])
    if kind == "contract":
        return ("contract", op[1], op[2])
    if kind == "delete_vertex":
        return ("delete_vertex", op[1])
    if kind == "drop_isolated":
        return ("drop_isolated", op[1])
    raise ValueError(f"unknown minor operation {kind!r}")


def _transfer(G, H, n, relabel, fixed=None):
    """Projection sending each G-variable to the H-variable of its relabelled edge.

    `fixed` overrides entries for some G-edges: a function (a, b) -> entry.
    """
    BG, BH = BlowUp(G, n), BlowUp(H, n)
    fixed = fixed or {}
    entries = []
    for (v, w) in BG.edges:
        rule = fixed.get((v, w))
        for a in range(n):
            for bb in range(n):
                if rule is not None:
                    entries.append(rule(a, bb))
                else:
                    entries.append(BH.var(relabel[v], a, relabel[w], bb))
    return MonotoneProjection(BH.num_vars, tuple(entries))


def minor_step(G, op, n):
    """(H, rho) for one minor operation, with SUB(H,n)(x) = SUB(G,n)(rho*(x))."""
    op = _normalise_op(op)
    kind = op[0]
    if kind == "delete_edge":
        u, v = min(op[1], op[2]), max(op[1], op[2])
        if not G.has_edge(u, v):
            raise KeyError(f"edge {(u, v)} not in graph")
        H = G.remove_edge(u, v)
        return H, _transfer(G, H, n, {x: x for x in G.vertices}, {(u, v): lambda a, b: ONE})
    if kind == "contract":
        u, v = min(op[1], op[2]), max(op[1], op[2])
        H, relabel = G.contract(u, v)
        glue = lambda a, b: ONE if a == b else ZERO  # noqa: E731
        return H, _transfer(G, H, n, relabel, {(u, v): glue})
    if kind == "drop_isolated":
        v = op[1]
        if G.degree(v):
            raise ValueError(f"vertex {v} is not isolated")
        H = G.remove_vertex(v)
        relabel = {x: (x if x < v else x - 1) for x in G.vertices if x != v}
        return H, _transfer(G, H, n, relabel)
    # a vertex deletion is its incident edge deletions followed by dropping it
    v = op[1]
    steps = [("delete_edge", v, w) for w in sorted(G.neighbors(v))] + [("drop_isolated", v)]
    return _run_chain(G, steps, n)


def minor_reduction(G, op, n):
    return minor_step(G, op, n)


def _run_chain(G, ops, n):
    rho = MonotoneProjection.identity(BlowUp(G, n).num_vars)
    current = G
    for op in ops:
        current, step = minor_step(current, op, n)
        rho = compose_projections(rho, step)
    return current, rho


def graph_isomorphism(G, H):
    """Permutation p with edge {u,v} of G <-> edge {p[u],p[v]} of H, or None."""
    if G.order != H.order or len(G.edges) != len(H.edges):
        return None
    if G.order == 0:
        return ()
    f = find_isomorphism(from_graph(G), from_graph(H))
    return None if f is None else f.image


def minor_reduction_chain(H, G, ops, n):
    """Composite projection for SUB(H,n) <=mp SUB(G,n) along `ops`.

    Operations use the labels of the graph they act on.  The graph they end
    at must be isomorphic to H; a final renaming lines it up with H.
    """
    end, rho = _run_chain(G, list(ops), n)
    perm = graph_isomorphism(end, H)
    if perm is None:
        raise ValueError("the operations do not produce a graph isomorphic to H")
    rename = _transfer(end, H, n, {x: perm[x] for x in end.vertices})
    return compose_projections(rho, rename)


def ops_from_branch_sets(H, G, branch_sets):
    """Minor operations taking G to a graph isomorphic to H.

    Vertices outside the branch sets are deleted, each branch set is
    contracted along its edges, and surplus edges are removed.
    """
    label = {v: v for v in G.vertices}
    owner = {}
    for i, s in enumerate(branch_sets):
        for v in s:
            owner[v] = i
    current = G
    ops = []
    for v in sorted(set(G.vertices) - set(owner), reverse=True):
        ops.append(("delete_vertex", label[v]))
        current = current.remove_vertex(label[v])
        label = {x: (y if y < label[v] else y - 1) for x, y in label.items() if x != v}
    for s in branch_sets:
        while True:
            inside = {label[x] for x in s}
            e = next(((a, b) for a, b in current.sorted_edges() if a in inside and b in inside), None)
            if e is None:
                break
            ops.append(("contract",) + e)
            current, relabel = current.contract(*e)
            label = {x: relabel[y] for x, y in label.items()}
    rep = [label[next(iter(s))] for s in branch_sets]
    wanted = {(min(rep[i], rep[j]), max(rep[i], rep[j])) for i, j in H.edges}
    for a, b in current.sorted_edges():
        if (a, b) not in wanted:
            ops.append(("delete_edge", a, b))
    return ops


def path_graph(k):
    return Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)])


def path_reduction(G, n):
    """(k, rho): k = td(G) and SUB(P_k,n) <=mp SUB(G,n) via a path of k vertices in G."""
    k, _ = tree_depth(G)
    p = find_path(G, k)
    if p is None:
        raise AssertionError("no path of tree-depth length; tree-depth exceeds longest path")
    ops = ops_from_branch_sets(path_graph(k), G, [frozenset([v]) for v in p])
    return k, minor_reduction_chain(path_graph(k), G, ops, n)


def sub_function(G, n):
    """SUB(G,n) as a batched callable on instance matrices (rows of bits)."""
    B = BlowUp(G, n)
    masks = sorted({B.copy_mask(a) for a in itertools.product(range(n), repeat=G.order)})
    weights = np.int64(1) << np.arange(B.num_vars, dtype=np.int64)

    def f(X):
        xs = np.asarray(X, dtype=np.int64) @ weights
        out = np.zeros(xs.shape[0], dtype=bool)
        for m in masks:
            out |= (xs & m) == m
        return out

    return f


def check_sub_reduction(H, G, n, rho, max_bits=REDUCTION_SWEEP_MAX_BITS):
    """verify_reduction(SUB(H,n), SUB(G,n), rho) over all H-instances."""
    return verify_reduction(sub_function(H, n), sub_function(G, n), rho, max_bits=max_bits)


# -- reduction into MODEL ------------------------------------------------------------


def model_element(v, a, n):
    return v * n + a


def hpt_reduction(M, n):
    """Generalised projection from SUB(Gaif(M), n) into MODEL at size |M|*n.

    Model element (v,a) is numbered v*n + a.  A tuple of relation R over
    model elements maps to the conjunction of the blow-up edges between its
    entries with different pattern vertices when the pattern tuple is in
    R^M, and to 0 otherwise.
    """
    if not is_core(M):
        warnings.warn("hpt_reduction expects a core; the construction still runs", stacklevel=2)
    G = gaifman(M)
    B = BlowUp(G, n)
    sig = M.signature
    N = M.size * n
    entries = []
    for name, arity in sig.relations:
        rel = M.relations[sig.index(name)]
        for t in itertools.product(range(N), repeat=arity):
            pattern = tuple(x // n for x in t)
            if pattern not in rel:
                entries.append(ZERO)
                continue
            conj = set()
            for i in range(arity):
                for j in range(i + 1, arity):
                    (v, a), (w, b) = divmod(t[i], n), divmod(t[j], n)
                    if v != w:
                        conj.add(B.var(v, a, w, b))
            entries.append(frozenset(conj))
    return MonotoneProjection(B.num_vars, tuple(entries))


def structure_of_projection(M, n, rho, x):
    """decode(rho*(x)) as a structure of size |M|*n."""
    y = apply_projection(rho, np.asarray(x, dtype=bool))
    return decode(BitEncoding(M.signature, M.size * n, tuple(int(b) for b in y)))


def fibre_projection(M, n):
    """The map (v,a) -> v from the model universe back to M."""
    return VertexMap(M.size * n, M.size, tuple(x // n for x in range(M.size * n)))


@dataclass(frozen=True)
class HptCheck:
    holds: bool
    instances: int
    preservation_size: int
    mincore: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.holds


def _largest_checkable(sig, limit, max_bits):
    s = 0
    while s < limit and sig.encoding_length(s + 1) <= max_bits:
        s += 1
    return s


def verify_hpt_reduction(phi, M, n, max_bits=MODEL_TABLE_MAX_BITS, route="circuit",
                         sweep_bits=REDUCTION_SWEEP_MAX_BITS):
    """Sweep SUB(G,n)(X) = MODEL(phi, |M|n)(rho*(X)) over every instance X.

    Preconditions are checked first: phi must be preserved under
    homomorphisms up to the largest size whose encodings fit max_bits (that
    size is reported).  Whether M is one of the minimal cores of phi's
    models of size <= |M| is reported, not enforced.  MODEL at size |M|*n is usually too wide to
    tabulate, so it is computed either by the compiled circuit (route
    "circuit") or by evaluating phi on each decoded structure ("evaluate").
    """
    sig = infer_signature(phi, M.signature)
    if sig != M.signature:
        raise ValueError("formula and structure use different signatures")
    G = gaifman(M)
    B = BlowUp(G, n)
    if B.num_vars > sweep_bits:
        raise BoundExceeded(f"{B.num_vars} instance variables exceed the sweep budget {sweep_bits}")
    size = _largest_checkable(sig, M.size * n, max_bits)
    if size < 1:
        raise BoundExceeded("no structure size fits the preservation budget")
    pres = is_hom_preserved(phi, size, sig, max_bits=max_bits)
    if not pres:
        raise PreservationFailure("formula is not preserved under homomorphisms", pres.counterexample)
    cores = min_cores_of_sentence(phi, M.size, sig, max_bits=max_bits)
    mincore = any(isomorphic(M, C) for C in cores)
    rho = hpt_reduction(M, n)
    N = M.size * n
    if route == "circuit":
        C = compile_fo(phi, N, sig)
        g = lambda Y: eval_batch(C, Y)  # noqa: E731
    elif route == "evaluate":
        def g(Y):
            return np.array([evaluate(phi, decode(BitEncoding(sig, N, tuple(int(b) for b in y))))
                             for y in Y], dtype=bool)
    else:
        raise ValueError(f"unknown route {route!r}")
    res = verify_reduction(sub_function(G, n), g, rho, max_bits=sweep_bits)
    return HptCheck(res.holds, res.checked, size, mincore, res.counterexample)


# -- pipeline ------------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineReport:
    preserved_up_to: int
    mincores: tuple
    tree_depths: tuple
    psi: object
    qr_psi: int
    verify_sizes: tuple
    equivalent: bool
    mismatch: tuple | None = None  # (size, encoding) of the first disagreement
    approximate: bool = True  # MinCores only sees models up to the size bound


def hpt_pipeline(phi, size_bound, n_verify, max_bits=MODEL_TABLE_MAX_BITS):
    """Rebuild phi as an existential-positive sentence and compare the two.

    Raises PreservationFailure (with the counterexample) when phi is not
    preserved under homomorphisms up to size_bound.
    """
    sig = infer_signature(phi)
    pres = is_hom_preserved(phi, size_bound, sig, max_bits=max_bits)
    if not pres:
        raise PreservationFailure("formula is not preserved under homomorphisms", pres.counterexample)
    cores = min_cores_of_sentence(phi, size_bound, sig, max_bits=max_bits)
    tds = tuple(tree_depth(gaifman(M))[0] for M in cores)
    psi = ep_sentence_of_class(cores)
    sizes = tuple(range(1, n_verify + 1))
    mismatch = None
    for s in sizes:
        a = model_table(phi, s, sig, max_bits=max_bits)
        b = model_table(psi, s, sig, max_bits=max_bits)
        bad = np.nonzero(a != b)[0]
        if bad.size:
            mismatch = (s, int(bad[0]))
            break
    return PipelineReport(size_bound, tuple(cores), tds, psi, quantifier_rank(psi), sizes,
                          mismatch is None, mismatch)

