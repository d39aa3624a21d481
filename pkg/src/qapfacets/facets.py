"""Generic quadratic-form inequalities, facet families and rank certification.

An inequality is given by integer weights ``n_ij`` on the pair indices and an
integer ``beta``.  At a vertex ``sigma`` it evaluates to ``(s - beta)(s - beta + 1)``
with ``s = sum_i n_{i, sigma(i)}``, which is a product of consecutive integers
and so never negative.  Expanded over the matrix coordinates it reads

    sum_ij (n_ij^2 - (2 beta - 1) n_ij) Y[ij,ij]
        + sum_{ij != kl} n_ij n_kl Y[ij,kl] + beta^2 - beta >= 0.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import linalg
from .hull import affine_dimension, dimension_formula
from .perm import (
    Permutation,
    SecondOrderVertex,
    canonical_index,
    enumerate_permutations,
    num_canonical,
    pair_label,
    vertex_matrix,
)

MAX_CERTIFY_N = 7
FAMILIES = ("nonneg", "triple", "mterm", "box-samples")


class FamilyError(ValueError):
    """A family generator was called with indices that break its side conditions."""


@dataclass(frozen=True, init=False)
class GenericInequality:
    n: int
    coeffs: tuple  # sorted ((i, j), value) with value != 0
    beta: int

    def __init__(self, n: int, coeffs, beta: int):
        items = dict(coeffs).items() if not isinstance(coeffs, dict) else coeffs.items()
        clean = {}
        for (i, j), v in items:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair ({i + 1},{j + 1}) outside 1..{n}")
            if int(v) != v:
                raise ValueError("coefficients must be integers")
            if v:
                clean[(int(i), int(j))] = int(v)
        if not clean:
            raise ValueError("inequality needs at least one nonzero coefficient")
        if int(beta) != beta:
            raise ValueError("beta must be an integer")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "coeffs", tuple(sorted(clean.items())))
        object.__setattr__(self, "beta", int(beta))

    @property
    def weights(self) -> dict[tuple[int, int], int]:
        return dict(self.coeffs)

    def key(self):
        return (self.coeffs, self.beta)

    def __str__(self) -> str:
        terms = " ".join(f"{v:+d}*u{pair_label(i * self.n + j, self.n)}" for (i, j), v in self.coeffs)
        return f"({terms} - ({self.beta} - 1/2) w)^2 >= 1/4"


@dataclass(frozen=True)
class LinearInequality:
    """``sum diag[ij] Y[ij,ij] + sum off[p,q] Y[p,q] + constant >= 0`` (``p < q``)."""

    n: int
    diag: dict = field(default_factory=dict)
    off: dict = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        for p, q in self.off:
            if not p < q:
                raise ValueError(f"off-diagonal key ({p},{q}) is not canonical")

    def coefficient(self, p: int, q: int) -> Fraction:
        if p == q:
            i, j = divmod(p, self.n)
            return self.diag.get((i, j), Fraction(0))
        if p > q:
            p, q = q, p
        return self.off.get((p, q), Fraction(0))

    def items(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        """Nonzero coefficients keyed by canonical flat pairs."""
        n = self.n
        for (i, j), c in self.diag.items():
            if c:
                yield (i * n + j, i * n + j), c
        for pq, c in self.off.items():
            if c:
                yield pq, c

    def evaluate(self, v: SecondOrderVertex) -> Fraction:
        return self.constant + sum((self.coefficient(p, q) for p, q in v.entries), Fraction(0))

    def evaluate_point(self, value) -> float:
        """Float value at a point given as ``value(p, q)``."""
        return float(self.constant) + sum(float(c) * value(p, q) for (p, q), c in self.items())

    def canonical_vector(self) -> list[Fraction]:
        out = [Fraction(0)] * num_canonical(self.n)
        for (p, q), c in self.items():
            out[canonical_index(p, q, self.n)] = Fraction(c)
        return out

    def is_trivial(self) -> bool:
        return not any(c for _, c in self.items())

    def __str__(self) -> str:
        n = self.n
        terms = [f"{_signed(c)}*Y[{pair_label(p, n)},{pair_label(q, n)}]"
                 for (p, q), c in sorted(self.items())]
        if self.constant or not terms:
            terms.append(_signed(self.constant))
        return " ".join(terms) + " >= 0"


def _signed(c: Fraction) -> str:
    return ("+" if c >= 0 else "-") + str(abs(c))


def expand_generic(g: GenericInequality) -> LinearInequality:
    n = g.n
    w = g.weights
    diag = {}
    for (i, j), v in w.items():
        c = v * v - (2 * g.beta - 1) * v
        if c:
            diag[(i, j)] = Fraction(c)
    off = {}
    flat = sorted((i * n + j, v) for (i, j), v in w.items())
    # ordered double sum folded onto p < q
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            (p, vp), (q, vq) = flat[a], flat[b]
            off[(p, q)] = Fraction(2 * vp * vq)
    return LinearInequality(n, diag, off, Fraction(g.beta * g.beta - g.beta))


def vertex_sum(g: GenericInequality, sigma: Permutation) -> int:
    w = g.weights
    return sum(w.get((i, sigma.image[i]), 0) for i in range(sigma.n))


def evaluate_at_vertex(g: GenericInequality, sigma: Permutation) -> int:
    if sigma.n != g.n:
        raise ValueError("size mismatch")
    t = vertex_sum(g, sigma) - g.beta
    return t * (t + 1)


# --- families -----------------------------------------------------------------

def _check_range(n: int, *idx: int):
    for x in idx:
        if not 0 <= x < n:
            raise FamilyError(f"index {x + 1} outside 1..{n}")


def make_nonneg(n: int, i: int, j: int, k: int, l: int) -> GenericInequality:
    """``Y[ij,kl] >= 0`` as weights +1 on (i,j) and (k,l), beta 1."""
    _check_range(n, i, j, k, l)
    if i == k:
        raise FamilyError(f"nonneg needs i != k (both are {i + 1})")
    if j == l:
        raise FamilyError(f"nonneg needs j != l (both are {j + 1})")
    return GenericInequality(n, {(i, j): 1, (k, l): 1}, 1)


def make_triple(n: int, p1: int, q1: int, p2: int, q2: int, k: int, l: int) -> GenericInequality:
    _check_range(n, p1, q1, p2, q2, k, l)
    if len({p1, p2, k}) < 3:
        raise FamilyError(f"triple needs p1, p2, k distinct, got {p1 + 1},{p2 + 1},{k + 1}")
    if len({q1, q2, l}) < 3:
        raise FamilyError(f"triple needs q1, q2, l distinct, got {q1 + 1},{q2 + 1},{l + 1}")
    return GenericInequality(n, {(p1, q1): 1, (p2, q2): 1, (p1, q2): 1, (k, l): -1}, 1)


def make_mterm(n: int, pairs: Sequence[tuple[int, int]], k: int, l: int,
               strict: bool = True) -> GenericInequality:
    """Weights +1 on each pair, -1 on (k, l), beta 1.

    With ``strict`` the pair count must lie in ``3..n-3``; validity does not
    depend on that range, so separation builds instances with ``strict=False``.
    """
    m = len(pairs)
    _check_range(n, k, l, *itertools.chain.from_iterable(pairs))
    if strict and not 3 <= m <= n - 3:
        raise FamilyError(f"mterm needs 3 <= m <= n-3, got m={m}, n={n}")
    if m < 1:
        raise FamilyError("mterm needs at least one pair")
    rows = [i for i, _ in pairs] + [k]
    cols = [j for _, j in pairs] + [l]
    if len(set(rows)) != len(rows):
        raise FamilyError(f"mterm row indices clash: {[r + 1 for r in rows]}")
    if len(set(cols)) != len(cols):
        raise FamilyError(f"mterm column indices clash: {[c + 1 for c in cols]}")
    w = {(i, j): 1 for i, j in pairs}
    w[(k, l)] = -1
    return GenericInequality(n, w, 1)


def make_box(n: int, P1: Iterable[int], P2: Iterable[int], Q1: Iterable[int],
             Q2: Iterable[int], beta: int) -> GenericInequality:
    """-1 on P1xQ1 and P2xQ2, +1 on P1xQ2 and P2xQ1."""
    P1, P2, Q1, Q2 = set(P1), set(P2), set(Q1), set(Q2)
    _check_range(n, *P1, *P2, *Q1, *Q2)
    if P1 & P2:
        raise FamilyError(f"P1 and P2 overlap on {sorted(x + 1 for x in P1 & P2)}")
    if Q1 & Q2:
        raise FamilyError(f"Q1 and Q2 overlap on {sorted(x + 1 for x in Q1 & Q2)}")
    w = {}
    for P, Q, v in ((P1, Q1, -1), (P2, Q2, -1), (P1, Q2, 1), (P2, Q1, 1)):
        for i in P:
            for j in Q:
                w[(i, j)] = v
    if not any(w.values()):
        raise FamilyError("box inequality with empty support")
    return GenericInequality(n, w, beta)


def _nonneg_stream(n):
    big = n * n
    for p in range(big):
        i, j = divmod(p, n)
        for q in range(p + 1, big):
            k, l = divmod(q, n)
            if i != k and j != l:
                yield make_nonneg(n, i, j, k, l)


def _triple_stream(n):
    for k, l in itertools.product(range(n), repeat=2):
        rows = [x for x in range(n) if x != k]
        cols = [x for x in range(n) if x != l]
        for p1, p2 in itertools.permutations(rows, 2):
            for q1, q2 in itertools.permutations(cols, 2):
                yield make_triple(n, p1, q1, p2, q2, k, l)


def _mterm_stream(n, m):
    for k, l in itertools.product(range(n), repeat=2):
        rows = [x for x in range(n) if x != k]
        cols = [x for x in range(n) if x != l]
        for rsel in itertools.combinations(rows, m):
            for csel in itertools.permutations(cols, m):
                yield make_mterm(n, list(zip(rsel, csel)), k, l)


def _box_stream(n, samples, seed):
    rng = random.Random(seed)
    produced = 0
    while produced < samples:
        labels = [rng.randrange(3) for _ in range(n)]
        P1 = [i for i, t in enumerate(labels) if t == 1]
        P2 = [i for i, t in enumerate(labels) if t == 2]
        labels = [rng.randrange(3) for _ in range(n)]
        Q1 = [i for i, t in enumerate(labels) if t == 1]
        Q2 = [i for i, t in enumerate(labels) if t == 2]
        beta = rng.randint(-2, 3)
        try:
            g = make_box(n, P1, P2, Q1, Q2, beta)
        except FamilyError:
            continue
        produced += 1
        yield g


def family_minimum_n(family: str, m: int | None = None) -> int:
    if family == "nonneg":
        return 2
    if family == "triple":
        return 6
    if family == "mterm":
        return max(6, (m or 3) + 3)
    if family == "box-samples":
        return 2
    raise FamilyError(f"unknown family {family!r}")


def enumerate_family(family: str, n: int, m: int | None = None, samples: int = 100,
                     seed: int = 0, allow_small: bool = False) -> Iterator[GenericInequality]:
    """Stream the distinct members of a family in a fixed order.

    Duplicates (equal weight maps and beta) are skipped.  Triple and mterm are
    only facets from n = 6 on; ``allow_small`` lifts that guard for validity work.
    """
    if family not in FAMILIES:
        raise FamilyError(f"unknown family {family!r}")
    if family == "mterm":
        m = 3 if m is None else m
        if not 3 <= m <= n - 3 and not allow_small:
            raise FamilyError(f"mterm needs 3 <= m <= n-3, got m={m}, n={n}")
    if n < family_minimum_n(family, m) and not allow_small:
        raise FamilyError(f"family {family} unsupported at n={n}")
    if family == "nonneg":
        stream = _nonneg_stream(n)
    elif family == "triple":
        stream = _triple_stream(n)
    elif family == "mterm":
        stream = _mterm_stream(n, m)
    else:
        stream = _box_stream(n, samples, seed)
    seen = set()
    for g in stream:
        if g.key() in seen:
            continue
        seen.add(g.key())
        yield g


def count_family(family: str, n: int, m: int | None = None, **kw) -> int:
    return sum(1 for _ in enumerate_family(family, n, m, **kw))


def family_formula_term(n: int, i: int) -> int:
    """Term of the facet-count formula: ``n^2 (n-1)^2 ... (n-i)^2 / i!``.

    ``i = 1`` gives the non-negativity count ``n^2 (n-1)^2 / 2`` up to the 1/2,
    so that term is handled by :func:`nonneg_formula`.
    """
    prod = 1
    for t in range(i + 1):
        prod *= (n - t) ** 2
    return prod // math.factorial(i)


def nonneg_formula(n: int) -> int:
    return n * n * (n - 1) ** 2 // 2


def total_formula(n: int) -> int:
    return nonneg_formula(n) + sum(family_formula_term(n, i) for i in range(2, n - 2))


# --- certification ------------------------------------------------------------

@lru_cache(maxsize=4)
def _vertices(n: int) -> tuple[tuple[Permutation, ...], np.ndarray]:
    perms = tuple(enumerate_permutations(n))
    V = vertex_matrix(n, perms)
    V.setflags(write=False)
    return perms, V


@lru_cache(maxsize=8)
def polytope_dimension(n: int) -> int:
    return dimension_formula(n) if n >= 4 else affine_dimension(n, mode="exact")


@dataclass
class FacetCertificate:
    inequality: LinearInequality
    n: int
    valid: bool
    tight_count: int
    tight_affine_dim: int
    polytope_dim: int
    verdict: str
    mode: str
    min_value: Fraction
    degenerate: bool = False

    def summary(self) -> str:
        return (f"n={self.n} verdict={self.verdict} tight={self.tight_count} "
                f"tight_dim={self.tight_affine_dim} polytope_dim={self.polytope_dim}")


def values_at_vertices(ineq: LinearInequality, n: int) -> list[Fraction]:
    """Exact value of ``ineq`` at every vertex, in enumeration order."""
    _, V = _vertices(n)
    vec = ineq.canonical_vector()
    den = linalg.lcm_denominators(vec + [ineq.constant])
    ints = np.array([int(c * den) for c in vec], dtype=object)
    cols = np.flatnonzero(ints != 0)
    raw = V[:, cols].astype(object) @ ints[cols] if cols.size else np.zeros(V.shape[0], dtype=object)
    const = int(ineq.constant * den)
    return [Fraction(int(x) + const, den) for x in raw]


def certify(ineq: LinearInequality | GenericInequality, n: int | None = None,
            mode: str = "auto", seed: int = linalg.DEFAULT_SEED, jobs: int = 1) -> FacetCertificate:
    """Validity, tight set and facet verdict by exhaustive evaluation and rank."""
    if isinstance(ineq, GenericInequality):
        ineq = expand_generic(ineq)
    n = ineq.n if n is None else n
    if n != ineq.n:
        raise ValueError("size mismatch")
    if not 1 <= n <= MAX_CERTIFY_N:
        raise ValueError(f"certify guard: n={n} not in 1..{MAX_CERTIFY_N}")
    perms, V = _vertices(n)
    values = values_at_vertices(ineq, n)
    valid = all(v >= 0 for v in values)
    tight = [r for r, v in enumerate(values) if v == 0]
    dim = polytope_dimension(n)
    used = linalg.resolve_mode(mode, len(tight) if tight else 1)
    if tight:
        T = V[tight]
        T = T[:, T.any(axis=0)]
        tight_dim = linalg.affine_rank(T, mode=used, seed=seed, jobs=jobs)
    else:
        tight_dim = -1
    degenerate = len(tight) == len(perms)
    if not valid:
        verdict = "invalid"
    elif not tight or degenerate:
        verdict = "valid-not-supporting"
    elif tight_dim == dim - 1:
        verdict = "facet"
    else:
        verdict = "face"
    return FacetCertificate(ineq, n, valid, len(tight), tight_dim, dim, verdict, used,
                            min(values), degenerate)


def mterm_parts(g: GenericInequality) -> tuple[list[tuple[int, int]], tuple[int, int]]:
    w = g.weights
    neg = [ij for ij, v in w.items() if v == -1]
    pos = [ij for ij, v in w.items() if v == 1]
    if len(neg) != 1 or len(pos) + 1 != len(w) or g.beta != 1:
        raise FamilyError("not an mterm-shaped inequality")
    return pos, neg[0]


def classify_vertex(g: GenericInequality, sigma: Permutation) -> str:
    """Class of a vertex for an mterm instance: S, T1, T2,x or T3,x."""
    pairs, (k, l) = mterm_parts(g)
    if evaluate_at_vertex(g, sigma) == 0:
        return "S"
    hits = sum(1 for i, j in pairs if sigma.image[i] == j)
    if sigma.image[k] == l:
        if hits == 0:
            return "T1"
        if hits >= 3:
            return f"T2,{hits}"
    elif hits >= 2:
        return f"T3,{hits}"
    raise AssertionError(f"unclassifiable vertex {sigma} (hits={hits})")
