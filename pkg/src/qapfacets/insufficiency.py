"""Linear dependence of the polynomials ``y_sigma^2 - y_sigma``.

Here ``y_sigma = sum_i x[i, sigma(i)] + z``.  Each polynomial is stored as its
coefficient vector over all monomials of degree one and two in the ``n^2 + 1``
variables.  Once those vectors are dependent, some valid point outside the
polytope satisfies every quadratic-form inequality, so more facets must exist.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import linalg
from .lemmas import random_config, build_sigma_set
from .perm import Permutation, enumerate_permutations


class DependenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MonomialBasis:
    """Degree-1 monomials (``x_ij`` row-major, then ``z``) followed by degree-2
    monomials ``v_a * v_b`` (``a <= b``) in lexicographic order."""

    n: int

    @property
    def num_vars(self) -> int:
        return self.n * self.n + 1

    @property
    def z(self) -> int:
        return self.n * self.n

    @cached_property
    def monomials(self) -> tuple[tuple[int, ...], ...]:
        nv = self.num_vars
        deg1 = [(a,) for a in range(nv)]
        deg2 = [(a, b) for a in range(nv) for b in range(a, nv)]
        return tuple(deg1 + deg2)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {m: t for t, m in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def name(self, t: int) -> str:
        def var(a):
            if a == self.z:
                return "z"
            i, j = divmod(a, self.n)
            return f"x{i + 1}{j + 1}"
        return "*".join(var(a) for a in self.monomials[t])

    def evaluate(self, x: np.ndarray, z: int) -> list[int]:
        """Values of all monomials at integer point ``(x, z)``, ``x`` row-major."""
        vals = [int(v) for v in np.asarray(x).reshape(-1)] + [int(z)]
        return [vals[m[0]] if len(m) == 1 else vals[m[0]] * vals[m[1]] for m in self.monomials]


def _support_vars(sigma: Permutation) -> list[int]:
    n = sigma.n
    return [i * n + sigma.image[i] for i in range(n)] + [n * n]


def moment_vector(sigma: Permutation, basis: MonomialBasis, linear: bool = True) -> np.ndarray:
    """Coefficients of ``y^2 - y`` (or ``y^2`` with ``linear=False``)."""
    if sigma.n != basis.n:
        raise ValueError("size mismatch")
    out = np.zeros(len(basis), dtype=np.int64)
    idx = basis.index
    vs = _support_vars(sigma)
    for a_pos, a in enumerate(vs):
        out[idx[(a, a)]] += 1
        for b in vs[a_pos + 1:]:
            out[idx[(a, b) if a <= b else (b, a)]] += 2
        if linear:
            out[idx[(a,)]] -= 1
    return out


def moment_matrix(n: int, perms: Sequence[Permutation] | None = None,
                  linear: bool = True) -> np.ndarray:
    basis = MonomialBasis(n)
    if perms is None:
        perms = list(enumerate_permutations(n))
    return np.array([moment_vector(s, basis, linear) for s in perms], dtype=np.int64)


def lifted_vertex_matrix(n: int, perms: Sequence[Permutation] | None = None) -> np.ndarray:
    """Rows are the upper triangles of ``p p^T`` with ``p`` = vec(P_sigma) plus a 1."""
    if perms is None:
        perms = list(enumerate_permutations(n))
    nv = n * n + 1
    iu = np.triu_indices(nv)
    rows = []
    for s in perms:
        p = np.zeros(nv, dtype=np.int64)
        p[_support_vars(s)] = 1
        rows.append(np.outer(p, p)[iu])
    return np.array(rows, dtype=np.int64)


def span_dimension_bound(n: int) -> int:
    """``1 + (n^2 + 1) + (n^4 + n^2) / 2``."""
    if n < 2:
        raise ValueError("n >= 2 required")
    return 1 + (n * n + 1) + (n ** 4 + n * n) // 2


@dataclass
class DependenceCertificate:
    n: int
    support: list[Permutation]
    alpha: list[Fraction]
    residual_checked: bool = False
    points_checked: int = 0
    matrix_rank: int | None = None
    basis_size: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def mixed_signs(self) -> bool:
        return any(a > 0 for a in self.alpha) and any(a < 0 for a in self.alpha)

    def integer_alpha(self) -> list[int]:
        den = linalg.lcm_denominators(self.alpha)
        ints = [int(a * den) for a in self.alpha]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        return [v // g for v in ints] if g else ints


def symbolic_residual(n: int, support: Sequence[Permutation], alpha: Sequence[Fraction],
                      linear: bool = True) -> list[Fraction]:
    basis = MonomialBasis(n)
    total = [Fraction(0)] * len(basis)
    for s, a in zip(support, alpha):
        vec = moment_vector(s, basis, linear)
        for t in np.flatnonzero(vec):
            total[t] += a * int(vec[t])
    return total


def pointwise_residual(support: Sequence[Permutation], alpha: Sequence[Fraction],
                       x: np.ndarray, z: int) -> Fraction:
    """``sum alpha_sigma (y_sigma^2 - y_sigma)`` at one integer point."""
    total = Fraction(0)
    for s, a in zip(support, alpha):
        y = sum(int(x[i, s.image[i]]) for i in range(s.n)) + int(z)
        total += a * (y * y - y)
    return total


def dependence_certificate(n: int = 6, points: int = 1000, seed: int = 0,
                           allow_large: bool = False, with_rank: bool = True) -> DependenceCertificate:
    """Find and verify an exact linear dependence among the moment vectors.

    The candidate support comes from a mod-p elimination (the first permutation,
    in lexicographic order, whose vector depends on the earlier ones); the
    coefficients are then solved exactly and checked symbolically and at
    ``points`` random integer points with entries in ``[-10, 10]``.
    """
    if n != 6 and not (allow_large and n >= 2):
        raise ValueError("dependence_certificate runs at n = 6 (others need allow_large)")
    perms = list(enumerate_permutations(n))
    M = moment_matrix(n, perms)
    rk = linalg.rank_modp(M) if with_rank else None
    v = linalg.nullspace_vector(M.T)
    if v is None:
        raise DependenceError(f"no dependence found at n={n}: moment matrix rank {rk} = {len(perms)}")
    idx = [t for t, a in enumerate(v) if a != 0]
    support = [perms[t] for t in idx]
    alpha = [v[t] for t in idx]
    cert = DependenceCertificate(n, support, alpha, matrix_rank=rk, basis_size=M.shape[1])
    if len(support) < 3:
        raise DependenceError(f"dependence with only {len(support)} terms")
    if any(symbolic_residual(n, support, alpha)):
        raise DependenceError("symbolic residual is not zero")
    cert.residual_checked = True
    rng = np.random.default_rng(seed)
    for _ in range(points):
        x = rng.integers(-10, 11, size=(n, n))
        z = int(rng.integers(-10, 11))
        if pointwise_residual(support, alpha, x, z) != 0:
            raise DependenceError("pointwise residual is not zero")
        cert.points_checked += 1
    return cert


def _column_space_equal(M1: np.ndarray, M2: np.ndarray, mode: str) -> tuple[bool, int, int, int]:
    r1 = linalg.rank(M1, mode=mode)
    r2 = linalg.rank(M2, mode=mode)
    r12 = linalg.rank(np.hstack([M1, M2]), mode=mode)
    return r1 == r2 == r12, r1, r2, r12


@dataclass
class SssReport:
    n: int
    equal: bool
    rank_linear: int
    rank_square: int
    rank_joint: int
    spot_vectors: int
    spot_ok: bool
    mode: str


def check_sss_equivalence(n: int, trials: int = 10, seed: int = 0, mode: str = "auto") -> SssReport:
    """Compare the dependences of ``{y^2 - y}`` with those of ``{y^2}``.

    The left null spaces agree iff both matrices have the same column space,
    which is tested by ranks.  In addition ``trials`` explicit kernel vectors of
    the first matrix are checked exactly against the second.
    """
    if not 2 <= n <= 6:
        raise ValueError("check_sss_equivalence needs 2 <= n <= 6")
    perms = list(enumerate_permutations(n))
    M1 = moment_matrix(n, perms, linear=True)
    M2 = moment_matrix(n, perms, linear=False)
    used = linalg.resolve_mode(mode, len(perms))
    equal, r1, r2, r12 = _column_space_equal(M1, M2, used)
    lookup = {s.image: t for t, s in enumerate(perms)}
    vectors: list[list[Fraction]] = []
    if n >= 5:
        rng = random.Random(seed)
        for _ in range(trials):
            alpha = [Fraction(0)] * len(perms)
            for sign, s in build_sigma_set(random_config(n, rng)):
                alpha[lookup[s.image]] += sign
            vectors.append(alpha)
    else:
        rng = random.Random(seed)
        for _ in range(trials):
            order = list(range(len(perms)))
            rng.shuffle(order)
            v = linalg.nullspace_vector(M1[order].T)
            if v is None:
                break
            alpha = [Fraction(0)] * len(perms)
            for pos, t in enumerate(order):
                alpha[t] = v[pos]
            vectors.append(alpha)
    spot_ok = True
    for alpha in vectors:
        nz = [t for t, a in enumerate(alpha) if a]
        sup = [perms[t] for t in nz]
        al = [alpha[t] for t in nz]
        if any(symbolic_residual(n, sup, al, linear=True)):
            raise DependenceError("spot vector is not in the kernel of the first matrix")
        if any(symbolic_residual(n, sup, al, linear=False)):
            spot_ok = False
    return SssReport(n, equal and spot_ok, r1, r2, r12, len(vectors), spot_ok, used)
