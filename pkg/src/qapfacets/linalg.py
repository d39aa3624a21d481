"""Exact rational and mod-p dense linear algebra.

Ranks are computed either exactly (fraction-free Bareiss elimination on
integers) or over a few random ~31-bit prime fields.  A mod-p rank never
exceeds the rational rank, so taking the maximum over several primes gives a
Monte Carlo estimate that is wrong only if every prime divides all maximal
minors.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

AUTO_MODP_ROWS = 500
DEFAULT_PRIMES = 3
DEFAULT_SEED = 20240229

# products of two residues must fit in int64
_PRIME_LO = 2**30
_PRIME_HI = 2**31 - 2**16


def random_primes(k: int = DEFAULT_PRIMES, seed: int = DEFAULT_SEED) -> list[int]:
    """``k`` distinct primes in ``[2^30, 2^31)`` drawn from a seeded generator."""
    if k < 2:
        raise ValueError("modp mode needs at least two primes")
    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < k:
        p = int(sympy.nextprime(rng.randrange(_PRIME_LO, _PRIME_HI)))
        if p not in out:
            out.append(p)
    return out


def _to_fraction_rows(M) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in M]


def to_integer_matrix(M) -> np.ndarray:
    """Scale each row by the lcm of its denominators.  Rank and kernel are kept.

    Returns an object array of Python ints.
    """
    rows = []
    for row in M:
        fr = [Fraction(x) for x in row]
        den = 1
        for f in fr:
            den = den * f.denominator // math.gcd(den, f.denominator)
        rows.append([int(f * den) for f in fr])
    if not rows:
        raise ValueError("empty matrix")
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        out[i, :] = row
    return out


def _as_int_array(M) -> np.ndarray:
    if isinstance(M, np.ndarray) and M.dtype.kind in "iub":
        return M.astype(object)
    return to_integer_matrix(M)


def _drop_zero_columns(A: np.ndarray) -> np.ndarray:
    keep = [c for c in range(A.shape[1]) if any(A[:, c])]
    return A[:, keep]


def rank_exact(M) -> int:
    """Rank by fraction-free (Bareiss) elimination over the integers."""
    A = _as_int_array(M)
    if A.size == 0:
        return 0
    A = _drop_zero_columns(A.copy())
    m, ncol = A.shape
    prev = 1
    r = 0
    for c in range(ncol):
        if r == m:
            break
        col = A[r:, c]
        nz = [i for i in range(m - r) if col[i] != 0]
        if not nz:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        pv = A[r, c]
        if r + 1 < m:
            f = A[r + 1:, c].copy()
            A[r + 1:, c + 1:] = (pv * A[r + 1:, c + 1:] - np.outer(f, A[r, c + 1:])) // prev
            A[r + 1:, c] = 0
        prev = pv
        r += 1
    return r


def _echelon_modp(A: np.ndarray, p: int) -> tuple[int, list[int]]:
    """In-place row echelon form mod ``p``; returns rank and pivot columns.

    Pivot choice: first nonzero entry scanning columns left to right, so the
    pivot columns are the greedy (lexicographically first) column basis.
    """
    m, ncol = A.shape
    r = 0
    pivcols: list[int] = []
    for c in range(ncol):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r, c:] = (A[r, c:] * inv) % p
        below = np.flatnonzero(A[r + 1:, c])
        if below.size:
            rows = r + 1 + below
            f = A[rows, c].copy()
            A[np.ix_(rows, np.arange(c, ncol))] = (
                A[np.ix_(rows, np.arange(c, ncol))] - f[:, None] * A[r, c:][None, :]
            ) % p
        pivcols.append(c)
        r += 1
    return r, pivcols


def _reduce_mod(M, p: int) -> np.ndarray:
    if isinstance(M, np.ndarray) and M.dtype.kind in "iu":
        return np.mod(M.astype(np.int64), p)
    A = _as_int_array(M)
    return np.array([[int(x) % p for x in row] for row in A], dtype=np.int64)


def rank_modp_single(M, p: int) -> int:
    return _echelon_modp(_reduce_mod(M, p), p)[0]


def rank_modp(M, primes: Sequence[int] | None = None, jobs: int = 1) -> int:
    if primes is None:
        primes = random_primes()
    if len(primes) < 2:
        raise ValueError("modp mode needs at least two primes")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            ranks = list(pool.map(lambda p: rank_modp_single(M, p), primes))
    else:
        ranks = [rank_modp_single(M, p) for p in primes]
    return max(ranks)


def _nrows(M) -> int:
    return M.shape[0] if isinstance(M, np.ndarray) else len(M)


def resolve_mode(mode: str, nrows: int) -> str:
    if mode == "auto":
        return "modp" if nrows > AUTO_MODP_ROWS else "exact"
    if mode not in ("exact", "modp"):
        raise ValueError(f"unknown rank mode {mode!r}")
    return mode


def rank(M, mode: str = "auto", primes: Sequence[int] | None = None,
         seed: int = DEFAULT_SEED, jobs: int = 1) -> int:
    """Rank of ``M``.

    Args:
        M: 2-D array or nested sequence of ints / Fractions.
        mode: ``"exact"``, ``"modp"`` or ``"auto"`` (modp above 500 rows).
        primes: explicit primes for modp mode; drawn from ``seed`` otherwise.
    """
    if _nrows(M) == 0:
        raise ValueError("empty matrix")
    mode = resolve_mode(mode, _nrows(M))
    if mode == "exact":
        return rank_exact(M)
    return rank_modp(M, primes if primes is not None else random_primes(seed=seed), jobs=jobs)


def augment_ones(rows) -> np.ndarray:
    A = _as_int_array(rows) if not (isinstance(rows, np.ndarray) and rows.dtype.kind in "iu") else rows
    ones = np.ones((A.shape[0], 1), dtype=A.dtype)
    return np.hstack([A, ones])


def affine_rank(rows, mode: str = "auto", primes: Sequence[int] | None = None,
                seed: int = DEFAULT_SEED, jobs: int = 1) -> int:
    """Affine dimension of a point set (rank of rows augmented with 1, minus 1)."""
    if _nrows(rows) == 0:
        raise ValueError("affine_rank of an empty set")
    return rank(augment_ones(rows), mode=mode, primes=primes, seed=seed, jobs=jobs) - 1


def rref_exact(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals."""
    A = _to_fraction_rows(M)
    if not A:
        return A, []
    m, ncol = len(A), len(A[0])
    pivcols: list[int] = []
    r = 0
    for c in range(ncol):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pv = A[r][c]
        if pv != 1:
            A[r] = [x / pv for x in A[r]]
        prow = A[r]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], prow)]
        pivcols.append(c)
        r += 1
    return A, pivcols


def matvec_exact(M, v: Sequence) -> list[Fraction]:
    nz = [(t, x) for t, x in enumerate(v) if x != 0]
    return [sum((Fraction(row[t]) * x for t, x in nz), Fraction(0)) for row in M]


def _kernel_from_rref(R: list[list[Fraction]], pivcols: list[int], ncol: int,
                      free: int) -> list[Fraction]:
    v = [Fraction(0)] * ncol
    v[free] = Fraction(1)
    for r, c in enumerate(pivcols):
        v[c] = -R[r][free]
    return v


def _solve_square_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    R, piv = rref_exact([row + [bb] for row, bb in zip(A, b)])
    ncol = len(A[0])
    if ncol in piv:
        return None
    x = [Fraction(0)] * ncol
    for r, c in enumerate(piv):
        x[c] = R[r][ncol]
    return x


_SMALL = 40_000


def nullspace_vector(M, prime: int | None = None) -> list[Fraction] | None:
    """A nonzero ``v`` with ``M v = 0``, or ``None`` for full column rank.

    Small inputs use exact RREF.  Larger ones locate the first dependent column
    mod p, then solve exactly for its coefficients on the earlier pivot columns;
    the result is always checked by exact multiplication.
    """
    A = _as_int_array(M)
    m, ncol = A.shape
    if m * ncol <= _SMALL:
        R, piv = rref_exact(A.tolist())
        free = next((c for c in range(ncol) if c not in set(piv)), None)
        if free is None:
            return None
        v = _kernel_from_rref(R, piv, ncol, free)
    else:
        p = prime if prime is not None else random_primes(2)[0]
        work = _reduce_mod(A, p)
        r, piv = _echelon_modp(work, p)
        if r == ncol:
            # mod-p rank is a lower bound, so full column rank is certain
            return None
        pivset = set(piv)
        free = next(c for c in range(ncol) if c not in pivset)
        before = [c for c in piv if c < free]
        v = _restricted_kernel(A, before, free, p)
        if v is None:
            R, piv = rref_exact(A.tolist())
            free = next((c for c in range(ncol) if c not in set(piv)), None)
            if free is None:
                return None
            v = _kernel_from_rref(R, piv, ncol, free)
    if any(x != 0 for x in matvec_exact(A, v)):
        raise ArithmeticError("nullspace vector failed exact verification")
    return v


def _restricted_kernel(A: np.ndarray, cols: list[int], free: int, p: int) -> list[Fraction] | None:
    ncol = A.shape[1]
    v = [Fraction(0)] * ncol
    v[free] = Fraction(1)
    if not cols:
        return v if not any(A[:, free]) else None
    sub = A[:, cols]
    # independent rows of the restricted system, found mod p
    _, rows = _echelon_modp(_reduce_mod(sub.T, p), p)
    if len(rows) != len(cols):
        return None
    square = [[Fraction(int(x)) for x in A[i, cols]] for i in rows]
    rhs = [Fraction(-int(A[i, free])) for i in rows]
    w = _solve_square_exact(square, rhs)
    if w is None:
        return None
    for c, val in zip(cols, w):
        v[c] = val
    if any(x != 0 for x in matvec_exact(A, v)):
        return None
    return v


def solve(A, b: Sequence) -> list[Fraction] | None:
    """Some exact solution of ``A x = b`` or ``None`` if inconsistent."""
    rows = _to_fraction_rows(A)
    if len(rows) != len(b):
        raise ValueError(f"dimension mismatch: {len(rows)} rows vs rhs of length {len(b)}")
    if not rows:
        raise ValueError("empty system")
    ncol = len(rows[0])
    R, piv = rref_exact([row + [Fraction(bb)] for row, bb in zip(rows, b)])
    if ncol in piv:
        return None
    x = [Fraction(0)] * ncol
    for r, c in enumerate(piv):
        x[c] = R[r][ncol]
    return x


def row_basis_modp(M, p: int) -> list[int]:
    """Indices of a maximal set of independent rows (mod ``p``), greedy in order."""
    return _echelon_modp(_reduce_mod(M, p).T.copy(), p)[1]


def lcm_denominators(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        d = Fraction(v).denominator
        den = den * d // math.gcd(den, d)
    return den
