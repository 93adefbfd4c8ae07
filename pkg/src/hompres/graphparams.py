"""
Simple graphs and exact structural parameters.

Everything here is exhaustive and meant for small graphs (a dozen or so
vertices): tree-width by dynamic programming over vertex subsets,
tree-depth by its recursive characterization, longest paths by DFS and
minor containment by exploring edge contractions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import BoundExceeded

TREEWIDTH_MAX_ORDER = 12
TREEDEPTH_MAX_ORDER = 14
LONGEST_PATH_MAX_ORDER = 14
MINOR_MAX_ORDER = 10


@dataclass(frozen=True)
class Graph:
    """Finite simple graph on the vertex set {0, ..., order-1}."""

    order: int
    edges: frozenset

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("graph order must be non-negative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < self.order and 0 <= v < self.order):
                raise ValueError(f"edge {e} out of range for order {self.order}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, order, edges=()):
        return cls(order, frozenset(tuple(e) for e in edges))

    @property
    def vertices(self):
        return range(self.order)

    def sorted_edges(self):
        return sorted(self.edges)

    @property
    def adjacency(self):
        return _adjacency(self)

    def neighbors(self, v):
        return self.adjacency[v]

    def degree(self, v):
        return len(self.adjacency[v])

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self.edges

    def induced(self, keep):
        """Induced subgraph on `keep`, relabelled to 0..len(keep)-1 in sorted order."""
        keep = sorted(keep)
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph.from_edges(len(keep), edges)

    def remove_vertex(self, v):
        return self.induced([u for u in self.vertices if u != v])

    def remove_edge(self, u, v):
        e = (min(u, v), max(u, v))
        if e not in self.edges:
            raise KeyError(f"edge {e} not in graph")
        return Graph(self.order, self.edges - {e})

    def contract(self, u, v):
        """Contract edge {u, v}; the merged vertex keeps the smaller label.

        Returns the contracted graph and the vertex map old -> new.
        """
        if not self.has_edge(u, v):
            raise KeyError(f"edge {(u, v)} not in graph")
        keep, gone = min(u, v), max(u, v)
        relabel = {}
        for x in self.vertices:
            if x == gone:
                relabel[x] = keep
            else:
                relabel[x] = x if x < gone else x - 1
        edges = set()
        for a, b in self.edges:
            a2, b2 = relabel[a], relabel[b]
            if a2 != b2:
                edges.add((min(a2, b2), max(a2, b2)))
        return Graph(self.order - 1, frozenset(edges)), relabel

    def relabel(self, perm):
        """Graph with vertex x renamed to perm[x]; perm must be a bijection."""
        if sorted(perm) != list(range(self.order)):
            raise ValueError("relabelling must be a permutation")
        return Graph.from_edges(self.order, [(perm[u], perm[v]) for u, v in self.edges])

    def components(self, within=None):
        """Connected components (as sorted tuples) of the subgraph induced by `within`."""
        within = set(self.vertices if within is None else within)
        adj = self.adjacency
        seen, comps = set(), []
        for s in sorted(within):
            if s in seen:
                continue
            comp, stack = [], [s]
            seen.add(s)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y in within and y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self):
        return self.order <= 1 or len(self.components()) == 1

    def to_text(self):
        lines = [f"n {self.order}"]
        lines += [f"e {u} {v}" for u, v in self.sorted_edges()]
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=4096)
def _adjacency(G):
    adj = [set() for _ in range(G.order)]
    for u, v in G.edges:
        adj[u].add(v)
        adj[v].add(u)
    return tuple(frozenset(s) for s in adj)


def parse_graph(text):
    """Parse the line format `n <order>` followed by `e <u> <v>` lines."""
    order = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                if order is not None:
                    raise ValueError("duplicate order line")
                order = int(parts[1])
            elif parts[0] == "e" and len(parts) == 3:
                if order is None:
                    raise ValueError("edge before order line")
                u, v = int(parts[1]), int(parts[2])
                if not (0 <= u < order and 0 <= v < order):
                    raise ValueError(f"vertex out of range 0..{order - 1}")
                if u == v:
                    raise ValueError("loops are not allowed")
                edges.append((u, v))
            else:
                raise ValueError(f"unrecognised directive {parts[0]!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if order is None:
        raise ValueError("missing `n <order>` line")
    return Graph.from_edges(order, edges)


# -- named families ----------------------------------------------------------


def path(k):
    return Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)])


def clique(k):
    return Graph.from_edges(k, itertools.combinations(range(k), 2))


def cycle(k):
    if k < 3:
        raise ValueError("cycles need at least 3 vertices")
    return Graph.from_edges(k, [(i, (i + 1) % k) for i in range(k)])


def binary_tree(k):
    """Complete binary tree in which every leaf-to-root path has k vertices."""
    order = 2**k - 1
    return Graph.from_edges(order, [(i, (i - 1) // 2) for i in range(1, order)])


def grid(k):
    edges = []
    for r in range(k):
        for c in range(k):
            if c + 1 < k:
                edges.append((r * k + c, r * k + c + 1))
            if r + 1 < k:
                edges.append((r * k + c, (r + 1) * k + c))
    return Graph.from_edges(k * k, edges)


_FAMILIES = {"path": path, "clique": clique, "binary_tree": binary_tree, "grid": grid}


def family(kind, k):
    """P_k, K_k, B_k or Grid_{k x k}; all four are a single vertex at k = 1."""
    if k < 1:
        raise ValueError("family index must be >= 1")
    try:
        return _FAMILIES[kind](k)
    except KeyError:
        raise ValueError(f"unknown family {kind!r}; expected one of {sorted(_FAMILIES)}") from None


# -- witnesses ---------------------------------------------------------------


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags indexed 0..len(bags)-1 and the edges of the tree joining them."""

    bags: tuple
    tree_edges: tuple

    @property
    def width(self):
        return max((len(b) for b in self.bags), default=0) - 1

    def tree_adjacency(self):
        adj = [[] for _ in self.bags]
        for s, t in self.tree_edges:
            adj[s].append(t)
            adj[t].append(s)
        return adj

    def validate(self, G):
        """Raise ValueError unless this is a tree decomposition of G."""
        m = len(self.bags)
        if G.order and not m:
            raise ValueError("no bags")
        if m and len(self.tree_edges) != m - 1:
            raise ValueError("tree must have exactly len(bags)-1 edges")
        adj = self.tree_adjacency()
        if m:
            seen, stack = {0}, [0]
            while stack:
                s = stack.pop()
                for t in adj[s]:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
            if len(seen) != m:
                raise ValueError("bag tree is not connected")
        covered = set().union(*self.bags) if self.bags else set()
        if covered != set(G.vertices):
            raise ValueError("bags do not cover exactly the vertex set")
        for u, v in G.edges:
            if not any(u in b and v in b for b in self.bags):
                raise ValueError(f"edge {(u, v)} not inside any bag")
        # bags containing a given vertex must induce a connected subtree
        for x in G.vertices:
            holders = {i for i, b in enumerate(self.bags) if x in b}
            start = next(iter(holders))
            seen, stack = {start}, [start]
            while stack:
                s = stack.pop()
                for t in adj[s]:
                    if t in holders and t not in seen:
                        seen.add(t)
                        stack.append(t)
            if seen != holders:
                raise ValueError(f"bags holding vertex {x} are not connected in the tree")


@dataclass(frozen=True)
class EliminationForest:
    """Rooted forest given by parent pointers (None marks a root)."""

    parent: tuple

    @property
    def order(self):
        return len(self.parent)

    def depth_of(self, v):
        d = 0
        while v is not None:
            d += 1
            v = self.parent[v]
        return d

    @property
    def height(self):
        return max((self.depth_of(v) for v in range(self.order)), default=0)

    def ancestors(self, v):
        out = []
        v = self.parent[v]
        while v is not None:
            out.append(v)
            v = self.parent[v]
        return out

    def children(self, v):
        return [c for c in range(self.order) if self.parent[c] == v]

    def roots(self):
        return [v for v in range(self.order) if self.parent[v] is None]

    def validate(self, G):
        if self.order != G.order:
            raise ValueError("forest and graph have different vertex counts")
        for v in range(self.order):
            seen = set()
            x = v
            while x is not None:
                if x in seen or not (0 <= x < self.order):
                    raise ValueError("parent pointers do not form a forest")
                seen.add(x)
                x = self.parent[x]
        for u, v in G.edges:
            if u not in self.ancestors(v) and v not in self.ancestors(u):
                raise ValueError(f"edge {(u, v)} joins vertices on different branches")


# -- tree-width --------------------------------------------------------------


def decomposition_from_ordering(G, ordering):
    """Tree decomposition induced by eliminating vertices in the given order."""
    pos = {v: i for i, v in enumerate(ordering)}
    adj = [set(a) for a in G.adjacency]
    bags, higher = [], []
    for v in ordering:
        nb = {u for u in adj[v] if pos[u] > pos[v]}
        for a, b in itertools.combinations(nb, 2):
            adj[a].add(b)
            adj[b].add(a)
        bags.append(frozenset(nb | {v}))
        higher.append(nb)
    edges = []
    last = None
    for i, v in enumerate(ordering):
        if higher[i]:
            nxt = min(higher[i], key=pos.__getitem__)
            edges.append((i, pos[nxt]))
        elif last is not None:
            # separate components get chained; the bags are disjoint so this is safe
            edges.append((last, i))
        if not higher[i]:
            last = i
    return TreeDecomposition(tuple(bags), tuple(edges))


def _min_fill_ordering(G):
    adj = [set(a) for a in G.adjacency]
    alive = set(G.vertices)
    order, width = [], -1
    while alive:
        def fill(v):
            nb = adj[v] & alive
            return sum(1 for a, b in itertools.combinations(nb, 2) if b not in adj[a])
        v = min(sorted(alive), key=lambda x: (fill(x), len(adj[x] & alive)))
        nb = adj[v] & alive
        width = max(width, len(nb))
        for a, b in itertools.combinations(nb, 2):
            adj[a].add(b)
            adj[b].add(a)
        alive.discard(v)
        order.append(v)
    return width, order


def _minor_min_width(G):
    """Lower bound on tree-width (contract a min-degree vertex into a neighbour)."""
    adj = {v: set(a) for v, a in enumerate(G.adjacency)}
    lb = 0
    while len(adj) > 1:
        v = min(sorted(adj), key=lambda x: len(adj[x]))
        lb = max(lb, len(adj[v]))
        if not adj[v]:
            del adj[v]
            continue
        u = min(sorted(adj[v]), key=lambda x: len(adj[x] & adj[v]))
        for w in adj[v]:
            adj[w].discard(v)
            if w != u:
                adj[w].add(u)
                adj[u].add(w)
        adj[u].discard(u)
        del adj[v]
    return lb


def tree_width(G, max_order=TREEWIDTH_MAX_ORDER):
    """Exact tree-width and a witnessing decomposition.

    A min-fill ordering gives an upper bound and minor-min-width a lower
    bound; when they differ, a dynamic program over eliminated vertex sets
    searches for a strictly better ordering, discarding prefixes whose
    cost already reaches the upper bound.
    """
    if G.order == 0:
        return -1, TreeDecomposition((), ())
    if G.order > max_order:
        raise BoundExceeded(f"tree_width limited to {max_order} vertices, got {G.order}")
    ub, ub_order = _min_fill_ordering(G)
    lb = _minor_min_width(G)
    if lb >= ub:
        return ub, decomposition_from_ordering(G, ub_order)
    n = G.order
    nbr = [sum(1 << u for u in G.adjacency[v]) for v in range(n)]

    def reach(S, v):
        seen = 1 << v
        frontier = nbr[v]
        out = 0
        while frontier:
            seen |= frontier
            out |= frontier & ~S
            inner = frontier & S
            nxt = 0
            while inner:
                low = inner & -inner
                nxt |= nbr[low.bit_length() - 1]
                inner ^= low
            frontier = nxt & ~seen
        return out & ~(1 << v)

    full = (1 << n) - 1
    layer = {0: -1}
    back = {}
    for _ in range(n):
        nxt = {}
        for S, c in layer.items():
            for v in range(n):
                if S >> v & 1:
                    continue
                cost = max(c, bin(reach(S, v)).count("1"))
                if cost >= ub:
                    continue
                S2 = S | 1 << v
                if S2 not in nxt or cost < nxt[S2]:
                    nxt[S2] = cost
                    back[S2] = (S, v)
        layer = nxt
    if full not in layer:
        return ub, decomposition_from_ordering(G, ub_order)
    ordering = []
    S = full
    while S:
        S, v = back[S]
        ordering.append(v)
    ordering.reverse()
    dec = decomposition_from_ordering(G, ordering)
    assert dec.width == layer[full]
    return layer[full], dec


# -- tree-depth --------------------------------------------------------------


def tree_depth(G, max_order=TREEDEPTH_MAX_ORDER):
    """Exact tree-depth and a minimum-height elimination forest."""
    if G.order > max_order:
        raise BoundExceeded(f"tree_depth limited to {max_order} vertices, got {G.order}")
    adj = G.adjacency
    memo = {}

    def td_connected(S):
        # S is a connected vertex set
        if S in memo:
            return memo[S]
        if len(S) == 1:
            memo[S] = (1, next(iter(S)))
            return memo[S]
        best = None
        for v in sorted(S):
            rest = S - {v}
            h = max(td_connected(c)[0] for c in _components(adj, rest))
            if best is None or h < best[0]:
                best = (h, v)
        memo[S] = (1 + best[0], best[1])
        return memo[S]

    parent = [None] * G.order

    def build(S, above):
        root = td_connected(S)[1]
        parent[root] = above
        for c in _components(adj, S - {root}):
            build(c, root)

    k = 0
    for comp in _components(adj, frozenset(G.vertices)):
        k = max(k, td_connected(comp)[0])
        build(comp, None)
    forest = EliminationForest(tuple(parent))
    assert forest.height == k
    return k, forest


def _components(adj, S):
    seen, out = set(), []
    for s in sorted(S):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in S and y not in seen:
                    seen.add(y)
                    comp.add(y)
                    stack.append(y)
        out.append(frozenset(comp))
    return out


# -- longest path ------------------------------------------------------------


def longest_path(G, max_order=LONGEST_PATH_MAX_ORDER):
    """Number of vertices on a longest simple path."""
    return len(longest_path_witness(G, max_order))


def longest_path_witness(G, max_order=LONGEST_PATH_MAX_ORDER):
    if G.order > max_order:
        raise BoundExceeded(f"longest_path limited to {max_order} vertices, got {G.order}")
    adj = G.adjacency
    best = []
    cur = []
    on = [False] * G.order

    def dfs(v):
        nonlocal best
        cur.append(v)
        on[v] = True
        if len(cur) > len(best):
            best = list(cur)
        if len(best) < G.order:
            for w in sorted(adj[v]):
                if not on[w]:
                    dfs(w)
        cur.pop()
        on[v] = False

    for s in G.vertices:
        if len(best) == G.order:
            break
        dfs(s)
    return tuple(best)


def find_path(G, k):
    """Some simple path with exactly k vertices, or None."""
    adj = G.adjacency
    cur = []
    on = [False] * G.order

    def dfs(v):
        cur.append(v)
        on[v] = True
        if len(cur) == k:
            return True
        for w in sorted(adj[v]):
            if not on[w] and dfs(w):
                return True
        cur.pop()
        on[v] = False
        return False

    for s in G.vertices:
        if dfs(s):
            return tuple(cur)
    return None


# -- minors ------------------------------------------------------------------


def _find_subgraph(H, G):
    """Injective map V(H) -> V(G) sending edges to edges, or None."""
    hadj, gadj = H.adjacency, G.adjacency
    order = sorted(H.vertices, key=lambda v: -len(hadj[v]))
    assign = {}
    used = set()

    def rec(i):
        if i == len(order):
            return True
        v = order[i]
        for c in G.vertices:
            if c in used or len(gadj[c]) < len(hadj[v]):
                continue
            if all(assign[u] in gadj[c] for u in hadj[v] if u in assign):
                assign[v] = c
                used.add(c)
                if rec(i + 1):
                    return True
                del assign[v]
                used.discard(c)
        return False

    if rec(0):
        return tuple(assign[v] for v in H.vertices)
    return None


def minor_contains(H, G, max_order=MINOR_MAX_ORDER):
    """Branch sets witnessing H as a minor of G, or None if H is not a minor.

    The witness is a tuple indexed by V(H) of disjoint, connected vertex sets
    of G, with an edge of G between the sets of every edge of H.
    """
    if G.order > max_order:
        raise BoundExceeded(f"minor_contains limited to {max_order} vertices, got {G.order}")
    if H.order > G.order or len(H.edges) > len(G.edges):
        return None
    # explore quotients of G by connected partitions, reached one contraction at a time
    start = tuple(frozenset([v]) for v in G.vertices)
    seen = {frozenset(start)}
    stack = [start]
    while stack:
        parts = stack.pop()
        Q = _quotient(G, parts)
        if len(Q.edges) < len(H.edges) or Q.order < H.order:
            continue
        emb = _find_subgraph(H, Q)
        if emb is not None:
            return tuple(parts[i] for i in emb)
        if Q.order == H.order:
            continue
        for a, b in sorted(Q.edges, reverse=True):
            merged = parts[a] | parts[b]
            nxt = tuple(sorted((p for i, p in enumerate(parts) if i not in (a, b)), key=min))
            nxt = tuple(sorted(nxt + (merged,), key=min))
            key = frozenset(nxt)
            if key not in seen:
                seen.add(key)
                stack.append(nxt)
    return None


def _quotient(G, parts):
    where = {}
    for i, p in enumerate(parts):
        for v in p:
            where[v] = i
    edges = {(min(where[u], where[v]), max(where[u], where[v]))
             for u, v in G.edges if where[u] != where[v]}
    return Graph(len(parts), frozenset(edges))


def check_branch_sets(H, G, branch_sets):
    """True iff the given sets witness H as a minor of G."""
    if len(branch_sets) != H.order:
        return False
    flat = [v for s in branch_sets for v in s]
    if len(flat) != len(set(flat)) or any(not s for s in branch_sets):
        return False
    for s in branch_sets:
        if len(G.components(s)) != 1:
            return False
    for u, v in H.edges:
        if not any(G.has_edge(a, b) for a in branch_sets[u] for b in branch_sets[v]):
            return False
    return True


# -- excluded-minor conditions ----------------------------------------------


def trichotomy_check(G, ell):
    """Which of tw(G) >= ell, lp(G) >= 2**ell, B_ell minor of G hold.

    Path length is read as a vertex count.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    out = set()
    if tree_width(G)[0] >= ell:
        out.add("high_treewidth")
    if longest_path(G) >= 2**ell:
        out.add("long_path")
    B = binary_tree(ell)
    if B.order <= G.order and minor_contains(B, G, max_order=max(G.order, MINOR_MAX_ORDER)) is not None:
        out.add("btree_minor")
    return frozenset(out)
