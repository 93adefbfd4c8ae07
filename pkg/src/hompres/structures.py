"""
Finite relational structures, homomorphisms and the bit-string encoding.

A structure always has universe {0, ..., n-1}.  Relations are stored as
frozensets of tuples in the order fixed by the signature, which is also the
order used by :func:`encode`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BoundExceeded, SignatureMismatch
from .graphparams import Graph

ENUMERATION_BOUND = 1 << 16


@dataclass(frozen=True)
class Signature:
    relations: tuple  # ((name, arity), ...)

    def __post_init__(self):
        rels = tuple((str(name), int(arity)) for name, arity in self.relations)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in {names}")
        for name, arity in rels:
            if arity < 1:
                raise ValueError(f"relation {name} must have arity >= 1")
            if not name.isidentifier():
                raise ValueError(f"bad relation name {name!r}")
        object.__setattr__(self, "relations", rels)

    @classmethod
    def of(cls, *specs):
        """Signature.of("R/2", "P/1") or Signature.of(("R", 2))."""
        rels = []
        for s in specs:
            if isinstance(s, str):
                name, arity = s.split("/")
                rels.append((name, int(arity)))
            else:
                rels.append(tuple(s))
        return cls(tuple(rels))

    @property
    def names(self):
        return tuple(n for n, _ in self.relations)

    def arity(self, name):
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(f"relation {name!r} not in signature")

    def index(self, name):
        return self.names.index(name)

    def encoding_length(self, n):
        return sum(n**a for _, a in self.relations)

    def __str__(self):
        return " ".join(f"{n}/{a}" for n, a in self.relations)


BINARY = Signature((("R", 2),))


@dataclass(frozen=True)
class Structure:
    signature: Signature
    size: int
    relations: tuple  # frozenset of tuples per relation, in signature order

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("structures need a non-empty universe")
        if len(self.relations) != len(self.signature.relations):
            raise ValueError("one tuple set per relation expected")
        rels = []
        for (name, arity), ts in zip(self.signature.relations, self.relations):
            ts = frozenset(tuple(t) for t in ts)
            for t in ts:
                if len(t) != arity:
                    raise ValueError(f"{name} tuple {t} does not have arity {arity}")
                if any(not (0 <= x < self.size) for x in t):
                    raise ValueError(f"{name} tuple {t} leaves universe of size {self.size}")
            rels.append(ts)
        object.__setattr__(self, "relations", tuple(rels))

    @classmethod
    def build(cls, signature, size, tuples=None):
        tuples = tuples or {}
        unknown = set(tuples) - set(signature.names)
        if unknown:
            raise ValueError(f"relations {sorted(unknown)} not in signature")
        return cls(signature, size, tuple(frozenset(tuples.get(n, ())) for n in signature.names))

    def tuples(self, name):
        return self.relations[self.signature.index(name)]

    @property
    def universe(self):
        return range(self.size)

    def num_tuples(self):
        return sum(len(ts) for ts in self.relations)

    def rename(self, perm):
        """Isomorphic copy with element x renamed to perm[x]."""
        return Structure(self.signature, self.size,
                         tuple(frozenset(tuple(perm[x] for x in t) for t in ts) for ts in self.relations))

    def induced(self, kept):
        """Substructure induced on `kept`, relabelled to 0..len(kept)-1 in sorted order."""
        return SubstructureView(self, frozenset(kept)).structure()

    def disjoint_union(self, other):
        _same_signature(self, other)
        shift = self.size
        rels = tuple(a | frozenset(tuple(x + shift for x in t) for t in b)
                     for a, b in zip(self.relations, other.relations))
        return Structure(self.signature, self.size + other.size, rels)

    def to_text(self):
        lines = ["signature " + str(self.signature), f"universe {self.size}"]
        for name, ts in zip(self.signature.names, self.relations):
            for t in sorted(ts):
                lines.append(" ".join([name, *map(str, t)]))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        body = ", ".join(f"{n}={sorted(ts)}" for n, ts in zip(self.signature.names, self.relations))
        return f"Structure(n={self.size}, {body})"


@dataclass(frozen=True)
class SubstructureView:
    parent: Structure
    kept: frozenset

    def __post_init__(self):
        if not self.kept:
            raise ValueError("a substructure needs at least one element")
        if any(not (0 <= x < self.parent.size) for x in self.kept):
            raise ValueError("kept set leaves the parent universe")

    @property
    def order(self):
        return tuple(sorted(self.kept))

    def index(self):
        return {x: i for i, x in enumerate(self.order)}

    def structure(self):
        idx = self.index()
        rels = tuple(frozenset(tuple(idx[x] for x in t) for t in ts if all(x in idx for x in t))
                     for ts in self.parent.relations)
        return Structure(self.parent.signature, len(self.kept), rels)


@dataclass(frozen=True)
class VertexMap:
    source_size: int
    target_size: int
    image: tuple

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if len(image) != self.source_size:
            raise ValueError("image length must equal the source size")
        if any(not (0 <= x < self.target_size) for x in image):
            raise ValueError("image value outside the target universe")
        object.__setattr__(self, "image", image)

    def __call__(self, x):
        return self.image[x]

    def compose(self, inner):
        """self after inner."""
        if inner.target_size != self.source_size:
            raise ValueError("maps do not compose")
        return VertexMap(inner.source_size, self.target_size, tuple(self.image[x] for x in inner.image))

    def is_injective(self):
        return len(set(self.image)) == len(self.image)


@dataclass(frozen=True)
class BitEncoding:
    signature: Signature
    n: int
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        expected = self.signature.encoding_length(self.n)
        if len(bits) != expected:
            raise ValueError(f"encoding of size {self.n} needs {expected} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def as_int(self):
        """Integer whose bit i is bits[i]."""
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    @classmethod
    def from_int(cls, signature, n, value):
        length = signature.encoding_length(n)
        return cls(signature, n, tuple((value >> i) & 1 for i in range(length)))


def _same_signature(A, B):
    if A.signature != B.signature:
        raise SignatureMismatch(f"signatures differ: {A.signature} vs {B.signature}")


def _as_map(f, A, B):
    if not isinstance(f, VertexMap):
        f = VertexMap(A.size, B.size, tuple(f))
    if f.source_size != A.size or f.target_size != B.size:
        raise ValueError(f"map {f.source_size}->{f.target_size} does not fit structures "
                         f"of sizes {A.size}->{B.size}")
    return f


# -- encoding ------------------------------------------------------------------


def tuple_index(signature, n, name, t):
    """Position of the bit for tuple t of relation `name` in Enc."""
    offset = 0
    for rel, arity in signature.relations:
        if rel == name:
            pos = 0
            for x in t:
                pos = pos * n + x
            return offset + pos
        offset += n**arity
    raise KeyError(name)


def bit_labels(signature, n):
    """(relation, tuple) for every bit position, in encoding order."""
    out = []
    for name, arity in signature.relations:
        out.extend((name, t) for t in itertools.product(range(n), repeat=arity))
    return out


def encode(A):
    bits = []
    for ts, (_, arity) in zip(A.relations, A.signature.relations):
        bits.extend(1 if t in ts else 0 for t in itertools.product(range(A.size), repeat=arity))
    return BitEncoding(A.signature, A.size, tuple(bits))


def decode(e):
    n = e.n
    rels = []
    pos = 0
    for _, arity in e.signature.relations:
        ts = []
        for t in itertools.product(range(n), repeat=arity):
            if e.bits[pos]:
                ts.append(t)
            pos += 1
        rels.append(frozenset(ts))
    return Structure(e.signature, n, tuple(rels))


def all_structures(signature, n):
    """Every structure with universe {0..n-1}, in order of the encoding integer."""
    length = signature.encoding_length(n)
    for value in range(1 << length):
        yield decode(BitEncoding.from_int(signature, n, value))


# -- text format -----------------------------------------------------------------


def parse_structure(text):
    signature = None
    size = None
    tuples = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "signature":
                if signature is not None:
                    raise ValueError("duplicate signature line")
                signature = Signature.of(*parts[1:])
                tuples = {n: [] for n in signature.names}
            elif parts[0] == "universe":
                if size is not None:
                    raise ValueError("duplicate universe line")
                size = int(parts[1])
                if size < 1:
                    raise ValueError("universe must be non-empty")
            else:
                if signature is None or size is None:
                    raise ValueError("tuple before signature/universe lines")
                name = parts[0]
                if name not in tuples:
                    raise ValueError(f"unknown relation {name!r}")
                t = tuple(int(x) for x in parts[1:])
                if len(t) != signature.arity(name):
                    raise ValueError(f"{name} expects {signature.arity(name)} entries, got {len(t)}")
                bad = [x for x in t if not (0 <= x < size)]
                if bad:
                    raise ValueError(f"index {bad[0]} out of range 0..{size - 1}")
                tuples[name].append(t)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if signature is None or size is None:
        raise ValueError("structure file needs `signature` and `universe` lines")
    return Structure.build(signature, size, tuples)


# -- constructors --------------------------------------------------------------


def from_graph(G, signature=BINARY):
    """Symmetric binary structure with both orientations of every edge."""
    if len(signature.relations) != 1 or signature.relations[0][1] != 2:
        raise ValueError("graph structures need a single binary relation")
    ts = set()
    for u, v in G.edges:
        ts.add((u, v))
        ts.add((v, u))
    return Structure(signature, max(G.order, 1), (frozenset(ts),))


def binary_structure(n, pairs, name="R"):
    sig = Signature(((name, 2),))
    return Structure(sig, n, (frozenset(tuple(p) for p in pairs),))


# -- homomorphisms -------------------------------------------------------------


def check_homomorphism(f, A, B):
    _same_signature(A, B)
    f = _as_map(f, A, B)
    img = f.image
    for ta, tb in zip(A.relations, B.relations):
        for t in ta:
            if tuple(img[x] for x in t) not in tb:
                return False
    return True


def is_embedding(f, A, B):
    _same_signature(A, B)
    f = _as_map(f, A, B)
    if not f.is_injective():
        return False
    img = f.image
    for ta, tb in zip(A.relations, B.relations):
        mapped = {tuple(img[x] for x in t) for t in ta}
        if not mapped <= tb:
            return False
        # reflection: every B-tuple inside the image must come from A
        inside = set(img)
        if any(all(x in inside for x in s) for s in tb - mapped):
            return False
    return True


def _search(A, B, domains=None, injective=False):
    """Yield homomorphisms A -> B (as image tuples) in lexicographic order.

    Vertices are assigned in ascending order, candidates tried in ascending
    order, and every tuple touching the assigned vertex prunes the domains of
    its still-unassigned entries (forward checking).
    """
    _same_signature(A, B)
    n = A.size
    doms = [set(range(B.size)) if domains is None else set(domains[v]) for v in range(n)]
    cons = []
    for ta, tb in zip(A.relations, B.relations):
        listed = sorted(tb)
        cons.extend((t, listed, tb) for t in ta)
    touching = [[] for _ in range(n)]
    for ci, (t, _, _) in enumerate(cons):
        for x in set(t):
            touching[x].append(ci)
    assign = [-1] * n

    def prune(v, doms):
        for ci in touching[v]:
            t, listed, tbset = cons[ci]
            open_vars = {x for x in t if assign[x] < 0}
            if not open_vars:
                if tuple(assign[x] for x in t) not in tbset:
                    return False
                continue
            support = {x: set() for x in open_vars}
            for s in listed:
                local = {}
                for x, y in zip(t, s):
                    if assign[x] >= 0:
                        if assign[x] != y:
                            break
                    elif y not in doms[x] or local.setdefault(x, y) != y:
                        break
                else:
                    for x, y in local.items():
                        support[x].add(y)
            for x in open_vars:
                doms[x] &= support[x]
                if not doms[x]:
                    return False
        return True

    used = set()

    def rec(v, doms):
        if v == n:
            yield tuple(assign)
            return
        for b in sorted(doms[v]):
            if injective and b in used:
                continue
            assign[v] = b
            used.add(b)
            new = [set(d) for d in doms]
            new[v] = {b}
            if prune(v, new):
                yield from rec(v + 1, new)
            assign[v] = -1
            used.discard(b)

    yield from rec(0, doms)


def find_homomorphism(A, B, fixed=None, allowed=None):
    """First homomorphism A -> B in the canonical search order, or None.

    `fixed` pins images of some elements; `allowed` restricts every image to
    a subset of B's universe.
    """
    domains = None
    if fixed or allowed is not None:
        base = set(range(B.size)) if allowed is None else set(allowed)
        domains = [set(base) for _ in range(A.size)]
        for x, y in (fixed or {}).items():
            domains[x] = {y} & base
    for img in _search(A, B, domains):
        return VertexMap(A.size, B.size, img)
    return None


def homomorphic(A, B):
    return find_homomorphism(A, B) is not None


def enumerate_homomorphisms(A, B, bound=ENUMERATION_BOUND):
    """All homomorphisms A -> B by exhaustive enumeration (lexicographic order)."""
    _same_signature(A, B)
    if B.size**A.size > bound:
        raise BoundExceeded(f"{B.size}^{A.size} maps exceed bound {bound}")
    out = []
    for img in itertools.product(range(B.size), repeat=A.size):
        f = VertexMap(A.size, B.size, img)
        if check_homomorphism(f, A, B):
            out.append(f)
    return out


def hom_equivalent(A, B):
    return homomorphic(A, B) and homomorphic(B, A)


def _degree_profile(A, x):
    prof = []
    for ts, (_, arity) in zip(A.relations, A.signature.relations):
        for p in range(arity):
            prof.append(sum(1 for t in ts if t[p] == x))
        prof.append(sum(1 for t in ts if t.count(x) == len(t)))
    return tuple(prof)


def find_isomorphism(A, B):
    """A bijection that is an embedding of A onto B, or None."""
    _same_signature(A, B)
    if A.size != B.size:
        return None
    if any(len(a) != len(b) for a, b in zip(A.relations, B.relations)):
        return None
    pa = [_degree_profile(A, x) for x in A.universe]
    pb = [_degree_profile(B, y) for y in B.universe]
    if sorted(pa) != sorted(pb):
        return None
    domains = [{y for y in B.universe if pb[y] == pa[x]} for x in A.universe]
    # an injective homomorphism between equal-size structures with equal tuple
    # counts maps each relation bijectively, hence is an isomorphism
    for img in _search(A, B, domains, injective=True):
        return VertexMap(A.size, B.size, img)
    return None


def isomorphic(A, B):
    return find_isomorphism(A, B) is not None


def automorphisms(A):
    pa = [_degree_profile(A, x) for x in A.universe]
    domains = [{y for y in A.universe if pa[y] == pa[x]} for x in A.universe]
    return [VertexMap(A.size, A.size, img) for img in _search(A, A, domains, injective=True)]


def gaifman(A):
    edges = set()
    for ts in A.relations:
        for t in ts:
            for u, v in itertools.combinations(set(t), 2):
                edges.add((min(u, v), max(u, v)))
    return Graph(A.size, frozenset(edges))
