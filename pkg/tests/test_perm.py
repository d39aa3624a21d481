import itertools

import numpy as np
import pytest

from qapfacets.perm import (
    Permutation,
    SizeError,
    apply_transposition,
    canonical_index,
    canonical_pairs,
    enumerate_permutations,
    flat,
    is_pinned,
    live_pairs,
    num_canonical,
    parity,
    unflat,
    vertex,
)


def test_enumeration_sizes_and_order():
    assert [p.image for p in enumerate_permutations(1)] == [(0,)]
    perms = list(enumerate_permutations(3))
    assert len(perms) == 6
    assert str(perms[0]) == "(1,2,3)"
    assert str(perms[-1]) == "(3,2,1)"
    assert sum(1 for _ in enumerate_permutations(6)) == 720


@pytest.mark.parametrize("n", [0, 11])
def test_enumeration_guard(n):
    with pytest.raises(SizeError):
        list(enumerate_permutations(n))


def test_invalid_image_rejected():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_flat_roundtrip():
    n = 5
    for i, j in itertools.product(range(n), repeat=2):
        assert unflat(flat(i, j, n), n) == (i, j)
    assert flat(1, 2, 4) == 6


def test_canonical_index_matches_triu_order():
    n = 3
    iu = np.triu_indices(n * n)
    for t, (p, q) in enumerate(zip(*iu)):
        assert canonical_index(int(p), int(q), n) == t
    assert len(canonical_pairs(n)) == num_canonical(n) == 45


def test_live_pairs_count_n6():
    assert len(live_pairs(6)) == 36 + 450
    assert not any(is_pinned(p, q, 6) for p, q in live_pairs(6))


def test_vertex_n2_identity_and_swap():
    full = vertex(Permutation.identity(2)).full_matrix()
    ones = sorted(zip(*np.nonzero(full)))
    assert [(int(a), int(b)) for a, b in ones] == [(0, 0), (0, 3), (3, 0), (3, 3)]
    full = vertex(Permutation((1, 0))).full_matrix()
    ones = {(int(a), int(b)) for a, b in zip(*np.nonzero(full))}
    assert ones == {(1, 1), (1, 2), (2, 1), (2, 2)}


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_vertex_structure(n):
    seen = set()
    for sigma in enumerate_permutations(n):
        v = vertex(sigma)
        full = v.full_matrix()
        assert full.sum() == n * n
        assert (full == full.T).all()
        assert len(v.entries) == n * (n + 1) // 2
        diag = np.diag(full).reshape(n, n)
        assert (diag == sigma.matrix()).all()
        seen.add(v.entries)
    assert len(seen) == len(list(enumerate_permutations(n)))


def test_vertex_zero_blocks():
    n = 4
    sigma = Permutation((2, 0, 3, 1))
    v = vertex(sigma)
    for i, j, l in itertools.product(range(n), repeat=3):
        if j != l:
            assert v.value(flat(i, j, n), flat(i, l, n)) == 0
            assert v.value(flat(j, i, n), flat(l, i, n)) == 0


def test_transposition():
    ident = Permutation.identity(3)
    t = apply_transposition(ident, 0, 1)
    assert str(t) == "(2,1,3)"
    assert apply_transposition(t, 0, 1) == ident
    with pytest.raises(ValueError):
        apply_transposition(ident, 2, 2)


def test_parity():
    assert parity(Permutation.identity(4)) == 1
    assert parity(apply_transposition(Permutation.identity(4), 1, 3)) == -1
    assert parity(Permutation((1, 2, 0))) == 1
    for sigma in enumerate_permutations(4):
        assert parity(apply_transposition(sigma, 0, 2)) == -parity(sigma)
