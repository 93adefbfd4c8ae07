import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hompres.cores import (GeneratedClass, compute_core, core, find_retraction, is_core,
                           is_hom_preserved, min_cores, min_cores_of_sentence, models_up_to)
from hompres.errors import BoundExceeded, SignatureMismatch
from hompres.folog import evaluate, parse_formula, parse_sentence
from hompres.graphparams import clique, cycle, path
from hompres.structures import (BINARY, Signature, all_structures, binary_structure,
                                check_homomorphism, from_graph, hom_equivalent,
                                isomorphic)

from oracles import core_size_oracle, has_hom, homs, iso_oracle
from strategies import binary_structures

K2, K3, C4, P3 = (from_graph(g) for g in (clique(2), clique(3), cycle(4), path(3)))
LOOP = binary_structure(1, [(0, 0)])
DC3 = binary_structure(3, [(0, 1), (1, 2), (2, 0)])
TRIANGLE = "EX x. EX y. EX z. (R(x,y) & R(y,z) & R(z,x))"


def test_retraction_examples():
    r = find_retraction(C4, range(4))
    assert r.image == (0, 1, 2, 3)
    r = find_retraction(C4, [0, 1])
    assert r is not None and r.image == (0, 1, 0, 1)
    assert check_homomorphism(r.image, C4, C4.induced([0, 1]))
    assert find_retraction(K3, [0, 1]) is None
    with pytest.raises(ValueError):
        find_retraction(K3, [])
    with pytest.raises(ValueError):
        find_retraction(K3, [5])


@settings(max_examples=40)
@given(binary_structures(max_n=4), st.data())
def test_retraction_fixes_kept_and_is_a_homomorphism(A, data):
    kept = sorted(data.draw(st.sets(st.integers(0, A.size - 1), min_size=1)))
    r = find_retraction(A, kept)
    sub = A.induced(kept)
    exists = any(all(f[x] == x for x in kept) and all(f[x] in kept for x in range(A.size))
                 for f in homs(A, A))
    assert (r is not None) == exists
    if r is not None:
        assert check_homomorphism(r.image, A, sub)
        assert all(r.image[x] == i for i, x in enumerate(kept))


def test_core_examples():
    assert compute_core(K3).core == K3
    assert isomorphic(core(C4), K2)
    assert isomorphic(core(K2.disjoint_union(K3)), K3)
    assert core_size_oracle(from_graph(cycle(6))) == core(from_graph(cycle(6))).size == 2
    assert core(from_graph(cycle(5))).size == 5
    assert core(binary_structure(3, [(0, 1), (1, 2)])).size == 3


def test_core_result_records_removal_and_retraction():
    res = compute_core(from_graph(cycle(6)))
    assert len(res.kept) == 2 and len(res.removed) == 4
    assert set(res.kept) | set(res.removed) == set(range(6))
    assert all(res.retraction.image[x] == i for i, x in enumerate(res.kept))
    assert check_homomorphism(res.retraction.image, from_graph(cycle(6)), res.core)


def test_is_core_examples():
    assert is_core(K3) and not is_core(C4)
    assert is_core(binary_structure(1, []))
    assert not is_core(binary_structure(2, []))


@settings(max_examples=60)
@given(binary_structures(max_n=4))
def test_core_invariants(A):
    res = compute_core(A)
    C = res.core
    assert hom_equivalent(A, C) and is_core(C)
    assert C.size == core_size_oracle(A)
    assert C == A.induced(res.kept)
    assert check_homomorphism(res.retraction.image, A, C)


def test_core_invariants_exhaustive_at_three():
    for A in all_structures(BINARY, 3):
        C = core(A)
        assert is_core(C) and has_hom(A, C) and has_hom(C, A)


@st.composite
def hom_equivalent_pairs(draw):
    A = draw(binary_structures(max_n=3))
    extra = draw(binary_structures(max_n=2))
    B = A.disjoint_union(extra) if has_hom(extra, A) else A
    perm = draw(st.permutations(range(B.size)))
    return A, B.rename(perm)


@settings(max_examples=60)
@given(hom_equivalent_pairs())
def test_core_uniqueness(pair):
    A, B = pair
    assert hom_equivalent(A, B)
    assert iso_oracle(core(A), core(B))


def test_min_cores_examples():
    assert min_cores([K3]) == [K3]
    (m,) = min_cores([C4, K2])
    assert isomorphic(m, K2)
    (m,) = min_cores(GeneratedClass((K2, K3)))
    assert isomorphic(m, K2)
    both = min_cores([LOOP.disjoint_union(LOOP), binary_structure(2, [(0, 1)])])
    assert len(both) == 1
    with pytest.raises(ValueError):
        GeneratedClass(())
    with pytest.raises(SignatureMismatch):
        GeneratedClass((K2, binary_structure(1, [], name="E")))


GENERATOR_SETS = [
    [K3], [C4, K2], [K2, K3], [DC3, LOOP], [DC3, binary_structure(2, [(0, 1), (1, 0)])],
    [P3, binary_structure(1, [])], [binary_structure(2, [(0, 1)]), binary_structure(2, [(0, 0), (1, 1)])],
]


@pytest.mark.parametrize("gens", GENERATOR_SETS)
def test_min_cores_laws(gens):
    cls = GeneratedClass(tuple(gens))
    ms = min_cores(cls)
    for M, N in itertools.permutations(ms, 2):
        # maps between distinct members would be isomorphisms; none exist after dedupe
        assert not has_hom(M, N)
    for M in ms:
        assert is_core(M)
        for A in gens:
            if has_hom(A, M):
                kept_sets = (k for r in range(1, A.size + 1)
                             for k in itertools.combinations(range(A.size), r))
                assert any(find_retraction(A, k) is not None and iso_oracle(A.induced(k), M)
                           for k in kept_sets)
    for n in (1, 2, 3):
        for B in all_structures(BINARY, n):
            assert cls.contains(B) == any(has_hom(M, B) for M in ms)


def test_models_up_to_and_sentence_mincores():
    phi = parse_sentence("EX x. R(x,x)")
    models = models_up_to(phi, 2)
    assert len(models) == 1 + 12
    assert all(evaluate(phi, A) for A in models)
    (m,) = min_cores_of_sentence(phi, 2)
    assert m == LOOP
    (m,) = min_cores_of_sentence(parse_sentence(TRIANGLE), 3)
    assert isomorphic(m, DC3)
    assert min_cores_of_sentence(parse_sentence("EX x. ~x = x"), 3) == []


def test_preservation_examples():
    assert is_hom_preserved(parse_sentence("EX x. EX y. R(x,y)"), 2)
    res = is_hom_preserved(parse_sentence("ALL x. ALL y. ~R(x,y)"), 2)
    assert not res
    A, B, f = res.counterexample
    assert A.num_tuples() == 0 and B.num_tuples() > 0
    assert check_homomorphism(f.image, A, B)
    assert is_hom_preserved(parse_sentence(TRIANGLE), 3)


def test_preservation_errors():
    with pytest.raises(ValueError):
        is_hom_preserved(parse_formula("R(x,y)"), 2)
    with pytest.raises(BoundExceeded):
        is_hom_preserved(parse_sentence("EX x. R(x,x)"), 5)


def _preserved_oracle(phi, n, sig):
    structs = [A for m in range(1, n + 1) for A in all_structures(sig, m)]
    sat = {id(A): evaluate(phi, A) for A in structs}
    for A in structs:
        if not sat[id(A)]:
            continue
        for B in structs:
            if not sat[id(B)] and has_hom(A, B):
                return False
    return True


@pytest.mark.parametrize("text", [
    "EX x. EX y. R(x,y)",
    "ALL x. ALL y. ~R(x,y)",
    "ALL x. R(x,x)",
    "EX x. ~R(x,x)",
    "EX x. EX y. (R(x,y) & ~x = y)",
    "EX x. EX y. (R(x,y) & x = y)",
    "ALL x. EX y. R(x,y)",
    "(EX x. R(x,x)) | (ALL x. ALL y. R(x,y))",
])
def test_preservation_matches_pairwise_oracle(text):
    phi = parse_sentence(text)
    for n in (1, 2):
        assert bool(is_hom_preserved(phi, n, BINARY)) == _preserved_oracle(phi, n, BINARY)


def test_preservation_with_unary_relations():
    sig = Signature.of("P/1", "Q/1")
    phi = parse_sentence("(EX x. P(x)) | (EX y. ~Q(y))", sig)
    assert bool(is_hom_preserved(phi, 3, sig)) == _preserved_oracle(phi, 3, sig)
