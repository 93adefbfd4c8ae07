"""
Retractions, cores and the homomorphism preorder.

compute_core works on the universe labels of the input: it shrinks a kept
set while the structure still maps into what is left, so the core it returns
is an induced substructure and the retraction onto it is explicit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BoundExceeded, SignatureMismatch
from .folog import (MODEL_TABLE_MAX_BITS, free_variables, infer_signature,
                    model_table)
from .structures import (Structure, VertexMap, decode, find_homomorphism,
                         homomorphic, isomorphic, tuple_index, BitEncoding)

__all__ = ["GeneratedClass", "CoreResult", "PreservationResult", "find_retraction",
           "compute_core", "core", "is_core", "isomorphic", "min_cores",
           "models_up_to", "min_cores_of_sentence", "is_hom_preserved"]


@dataclass(frozen=True)
class GeneratedClass:
    """Structures receiving a homomorphism from at least one generator."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a generated class needs at least one generator")
        sig = gens[0].signature
        for g in gens[1:]:
            if g.signature != sig:
                raise SignatureMismatch("generators must share one signature")
        object.__setattr__(self, "generators", gens)

    @property
    def signature(self):
        return self.generators[0].signature

    def contains(self, B):
        return any(homomorphic(A, B) for A in self.generators)


def _index_map(kept):
    return {x: i for i, x in enumerate(kept)}


def find_retraction(A, kept):
    """Homomorphism A -> A[kept] fixing kept pointwise, or None.

    The target is relabelled 0..len(kept)-1 in sorted order, as by
    Structure.induced.
    """
    kept = sorted(set(kept))
    if not kept:
        raise ValueError("a retraction needs a non-empty kept set")
    if kept[0] < 0 or kept[-1] >= A.size:
        raise ValueError("kept set leaves the universe")
    h = find_homomorphism(A, A, fixed={x: x for x in kept}, allowed=kept)
    if h is None:
        return None
    idx = _index_map(kept)
    return VertexMap(A.size, len(kept), tuple(idx[y] for y in h.image))


@dataclass(frozen=True)
class CoreResult:
    core: Structure
    kept: tuple          # labels in the input universe, sorted
    retraction: VertexMap  # input -> core, identity on kept
    removed: tuple       # vertices dropped, in removal order


def compute_core(A):
    kept = list(range(A.size))
    g = list(range(A.size))   # hom A -> A with image inside kept
    removed = []
    progress = True
    while progress and len(kept) > 1:
        progress = False
        current = A.induced(kept)
        for pos, v in enumerate(kept):
            allowed = [i for i in range(len(kept)) if i != pos]
            h = find_homomorphism(current, current, allowed=allowed)
            if h is None:
                continue
            idx = _index_map(kept)
            g = [kept[h(idx[y])] for y in g]
            kept = [x for x in kept if x != v]
            removed.append(v)
            progress = True
            break
    C = A.induced(kept)
    idx = _index_map(kept)
    # g restricted to the core is an automorphism of it; undo it on the kept part
    auto = [idx[g[x]] for x in kept]
    inv = [0] * len(kept)
    for i, j in enumerate(auto):
        inv[j] = i
    r = VertexMap(A.size, len(kept), tuple(inv[idx[g[x]]] for x in range(A.size)))
    return CoreResult(C, tuple(kept), r, tuple(removed))


def core(A):
    return compute_core(A).core


def is_core(A):
    """No endomorphism misses a vertex (equivalently, no proper retract)."""
    if A.size == 1:
        return True
    for v in range(A.size):
        allowed = [x for x in range(A.size) if x != v]
        if find_homomorphism(A, A, allowed=allowed) is not None:
            return False
    return True


def _dedupe(structs):
    out = []
    for S in structs:
        if not any(isomorphic(S, T) for T in out):
            out.append(S)
    return out


def min_cores(generators):
    """Hom-minimal cores among the generators, one per isomorphism type."""
    gens = generators.generators if isinstance(generators, GeneratedClass) \
        else GeneratedClass(tuple(generators)).generators
    cores = _dedupe([core(A) for A in gens])
    return [M for M in cores
            if not any(N is not M and homomorphic(N, M) for N in cores)]


def models_up_to(phi, size, signature=None, max_bits=MODEL_TABLE_MAX_BITS):
    """All models of phi with universe [n] for 1 <= n <= size, in encoding order."""
    sig = infer_signature(phi, signature)
    out = []
    for n in range(1, size + 1):
        table = model_table(phi, n, sig, max_bits=max_bits)
        for e in np.nonzero(table)[0]:
            out.append(decode(BitEncoding.from_int(sig, n, int(e))))
    return out


def min_cores_of_sentence(phi, size, signature=None, max_bits=MODEL_TABLE_MAX_BITS):
    """MinCores of the models of phi up to `size`.

    Only models up to the bound are seen, so this under-approximates the
    class; for preserved sentences whose minimal models fit the bound it is
    exact.
    """
    sig = infer_signature(phi, signature)
    cores = []
    for A in models_up_to(phi, size, sig, max_bits):
        C = core(A)
        if not any(isomorphic(C, T) for T in cores):
            cores.append(C)
    return [M for M in cores
            if not any(N is not M and homomorphic(N, M) for N in cores)]


# -- brute-force preservation check ---------------------------------------------


@dataclass(frozen=True)
class PreservationResult:
    preserved: bool
    size: int
    counterexample: tuple | None = None  # (A, B, f) with A |= phi, f: A -> B, B |/= phi

    def __bool__(self):
        return self.preserved


def _superset_closed(table):
    """out[m] is True iff table[m'] for every m' containing the bits of m."""
    out = table.copy()
    width = out.shape[0].bit_length() - 1
    for i in range(width):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 0, :] &= v[:, 1, :]
    return out


def _bit_positions(sig, n):
    """Per bit index of size-n encodings, its (relation, tuple)."""
    return [(name, t) for name, k in sig.relations
            for t in itertools.product(range(n), repeat=k)]


def is_hom_preserved(phi, n, signature=None, max_bits=MODEL_TABLE_MAX_BITS):
    """Exhaustive check that models of phi stay models under homomorphisms.

    Covers all A, B with universes of size 1..n.  A homomorphism f from A into
    some B on [b] exists iff B contains the image f(A), so it is enough to
    ask whether every superset of f(A) is a model.
    """
    if free_variables(phi):
        raise ValueError("preservation is defined for sentences")
    sig = infer_signature(phi, signature)
    if sig.encoding_length(n) > max_bits:
        raise BoundExceeded(f"size {n} needs {sig.encoding_length(n)} bits, budget is {max_bits}")
    tables = {b: model_table(phi, b, sig, max_bits=max_bits) for b in range(1, n + 1)}
    closed = {b: _superset_closed(t) for b, t in tables.items()}
    for a in range(1, n + 1):
        models = np.nonzero(tables[a])[0].astype(np.int64)
        if models.size == 0:
            continue
        positions = _bit_positions(sig, a)
        bits = ((models[:, None] >> np.arange(len(positions), dtype=np.int64)) & 1).astype(bool)
        for b in range(1, n + 1):
            for f in itertools.product(range(b), repeat=a):
                weights = np.array([1 << tuple_index(sig, b, name, tuple(f[x] for x in t))
                                    for name, t in positions], dtype=np.int64)
                image = np.bitwise_or.reduce(np.where(bits, weights, 0), axis=1) \
                    if positions else np.zeros(models.size, dtype=np.int64)
                bad = np.nonzero(~closed[b][image])[0]
                if bad.size:
                    m, img = int(models[bad[0]]), int(image[bad[0]])
                    idx = np.arange(tables[b].shape[0], dtype=np.int64)
                    witness = int(np.nonzero(~tables[b] & ((idx & img) == img))[0][0])
                    A = decode(BitEncoding.from_int(sig, a, m))
                    B = decode(BitEncoding.from_int(sig, b, witness))
                    return PreservationResult(False, n, (A, B, VertexMap(a, b, f)))
    return PreservationResult(True, n)
