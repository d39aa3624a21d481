from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qapfacets import linalg
from qapfacets.perm import enumerate_permutations


def test_rank_small_examples():
    assert linalg.rank(np.eye(3, dtype=np.int64), mode="exact") == 3
    assert linalg.rank(np.zeros((4, 5), dtype=np.int64), mode="exact") == 0
    assert linalg.rank(np.zeros((4, 5), dtype=np.int64), mode="modp") == 0


def test_birkhoff_rank_n4():
    # 24 vectorized 4x4 permutation matrices span (n-1)^2 + 1 = 10 dimensions
    M = np.array([p.matrix().reshape(-1) for p in enumerate_permutations(4)], dtype=np.int64)
    assert M.shape == (24, 16)
    assert linalg.rank(M, mode="exact") == 10
    assert linalg.rank(M, mode="modp") == 10


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        linalg.rank(np.zeros((0, 3), dtype=np.int64))
    with pytest.raises(ValueError):
        linalg.affine_rank(np.zeros((0, 3), dtype=np.int64))


def test_primes_distinct_and_seeded():
    ps = linalg.random_primes(3, seed=5)
    assert len(set(ps)) == 3
    assert all(2**30 <= p < 2**31 for p in ps)
    assert ps == linalg.random_primes(3, seed=5)
    with pytest.raises(ValueError):
        linalg.random_primes(1)


def test_rational_input():
    M = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 1]]
    assert linalg.rank(M, mode="exact") == 1


def test_affine_rank_examples():
    assert linalg.affine_rank(np.array([[1, 2, 3]])) == 0
    assert linalg.affine_rank(np.array([[1, 2, 3], [0, 0, 1]])) == 1
    # three collinear points
    assert linalg.affine_rank(np.array([[0, 0], [1, 1], [2, 2]])) == 1


def test_nullspace_examples():
    assert linalg.nullspace_vector(np.eye(3, dtype=np.int64)) is None
    v = linalg.nullspace_vector(np.array([[1, 1]]))
    assert v is not None and v[0] == -v[1] and v[0] != 0


def test_nullspace_large_path():
    # above the small-size threshold, so the mod-p route is taken
    rng = np.random.default_rng(0)
    B = rng.integers(-3, 4, size=(250, 200))
    M = np.hstack([B[:, :2], B[:, :1] + 2 * B[:, 1:2], B[:, 2:]])
    v = linalg.nullspace_vector(M)
    assert v is not None
    assert v[:3] == [-1, -2, 1] or v[:3] == [1, 2, -1]
    assert all(x == 0 for x in linalg.matvec_exact(M, v))


def test_solve_examples():
    assert linalg.solve([[1, 0], [0, 1]], [3, 4]) == [3, 4]
    assert linalg.solve([[0, 0], [0, 0]], [1, 0]) is None
    x = linalg.solve([[1, 1], [2, 2]], [1, 2])
    assert x[0] + x[1] == 1
    with pytest.raises(ValueError):
        linalg.solve([[1, 2]], [1, 2])


def test_modp_matches_exact_monte_carlo():
    rng = np.random.default_rng(1)
    agree = 0
    trials = 300
    for _ in range(trials):
        r, c = rng.integers(1, 9, size=2)
        k = int(rng.integers(1, min(r, c) + 1))
        M = rng.integers(-5, 6, size=(r, k)) @ rng.integers(-5, 6, size=(k, c))
        agree += linalg.rank(M, mode="exact") == linalg.rank(M, mode="modp")
    assert agree / trials >= 0.999


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=6),
       st.integers(1, 5))
def test_rank_invariances(rows, scale):
    M = np.array(rows, dtype=np.int64)
    r = linalg.rank_exact(M)
    assert r == linalg.rank_exact(M.T)
    assert r == linalg.rank_exact(M[::-1])
    scaled = M.copy()
    scaled[0] *= scale
    assert r == linalg.rank_exact(scaled)
    assert linalg.rank_modp(M) <= r


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=5, max_size=5), min_size=1, max_size=4))
def test_nullspace_always_verified(rows):
    M = np.array(rows, dtype=np.int64)
    v = linalg.nullspace_vector(M)
    if linalg.rank_exact(M) == 5:
        assert v is None
    else:
        assert any(v) and all(x == 0 for x in linalg.matvec_exact(M, v))
