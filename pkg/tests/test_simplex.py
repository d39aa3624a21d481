from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from qapfacets import simplex

# Beale's degenerate example, written with explicit slack columns
BEALE_C = [0, 0, 0, Fraction(-3, 4), 20, Fraction(-1, 2), 6]
BEALE_A = [[1, 0, 0, Fraction(1, 4), -8, -1, 9],
           [0, 1, 0, Fraction(1, 2), -12, Fraction(-1, 2), 3],
           [0, 0, 1, 0, 0, 1, 0]]
BEALE_B = [0, 0, 1]


@pytest.mark.parametrize("pricing", simplex.PRICING)
@pytest.mark.parametrize("exact", [False, True])
def test_beale(pricing, exact):
    res = simplex.solve(BEALE_C, BEALE_A, BEALE_B, exact=exact, pricing=pricing)
    assert res.status == "optimal"
    if exact:
        assert res.objective == Fraction(-5, 4)
    else:
        assert abs(res.objective + 1.25) < 1e-9


def test_statuses():
    assert simplex.solve([1, 1], [[1, 1]], [-1]).status == "infeasible"
    assert simplex.solve([-1, 0], [[1, -1]], [0]).status == "unbounded"
    assert simplex.solve([1, 1], [[1, 1]], [-1], exact=True).status == "infeasible"


def test_redundant_rows():
    res = simplex.solve([1, 2, 0], [[1, 1, 1], [2, 2, 2], [1, 0, 0]], [3, 6, 1], exact=True)
    assert res.status == "optimal" and res.objective == 1
    assert list(res.x) == [1, 0, 2]


def test_unknown_pricing():
    with pytest.raises(ValueError):
        simplex.solve([1], [[1]], [1], pricing="random")


def test_random_lps_match_highs():
    rng = np.random.default_rng(7)
    for _ in range(40):
        m, n = int(rng.integers(2, 6)), int(rng.integers(4, 10))
        A = rng.integers(-3, 4, size=(m, n)).astype(float)
        x0 = rng.integers(0, 3, size=n).astype(float)
        b = A @ x0
        c = rng.integers(0, 6, size=n).astype(float)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        got = simplex.solve(c, A, b)
        assert got.status == "optimal"
        assert abs(got.objective - ref.fun) < 1e-7
        assert np.abs(A @ got.x - b).max() < 1e-7 and got.x.min() >= -1e-9
