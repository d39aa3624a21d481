"""Equation system of the affine hull, its dimension, and 0/1 decoding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg
from .perm import (
    Permutation,
    SecondOrderVertex,
    canonical,
    canonical_index,
    enumerate_permutations,
    num_canonical,
    pair_label,
    vertex,
    vertex_matrix,
)

MAX_HULL_N = 7
TAGS = ("symmetry", "zero-block", "row-sum", "diag-sum")


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Equation:
    coeffs: dict  # (p, q) -> int
    rhs: int
    tag: str

    def evaluate(self, value):
        """Left-hand side minus rhs, with ``value(p, q)`` giving coordinates."""
        return sum(c * value(p, q) for (p, q), c in self.coeffs.items()) - self.rhs

    def describe(self, n: int) -> str:
        terms = []
        for (p, q), c in sorted(self.coeffs.items()):
            name = f"Y[{pair_label(p, n)},{pair_label(q, n)}]"
            terms.append(f"{c:+d}*{name}")
        return f"[{self.tag}] " + " ".join(terms) + f" = {self.rhs}"


@dataclass
class ConstraintSystem:
    n: int
    mode: str
    equations: list[Equation] = field(default_factory=list)

    def by_tag(self) -> dict[str, int]:
        counts = {t: 0 for t in TAGS}
        for eq in self.equations:
            counts[eq.tag] += 1
        return counts

    def num_coordinates(self) -> int:
        big = self.n * self.n
        return num_canonical(self.n) if self.mode == "canonical" else big * big

    def column(self, p: int, q: int) -> int:
        if self.mode == "canonical":
            return canonical_index(p, q, self.n)
        return p * self.n * self.n + q

    def coefficient_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.zeros((len(self.equations), self.num_coordinates()), dtype=np.int64)
        b = np.zeros(len(self.equations), dtype=np.int64)
        for r, eq in enumerate(self.equations):
            for (p, q), c in eq.coeffs.items():
                A[r, self.column(p, q)] += c
            b[r] = eq.rhs
        return A, b

    def first_violation(self, value) -> Equation | None:
        for eq in self.equations:
            if eq.evaluate(value) != 0:
                return eq
        return None

    def satisfied_by(self, v: SecondOrderVertex) -> bool:
        if self.mode == "canonical":
            return self.first_violation(v.value) is None
        full = v.full_matrix()
        return self.first_violation(lambda p, q: int(full[p, q])) is None


def build_equation_system(n: int, mode: str = "canonical") -> ConstraintSystem:
    """All instances of the symmetry, zero-block, row-sum and diagonal-sum equations.

    In canonical mode symmetry is structural and no symmetry rows are emitted.
    """
    if n < 2:
        raise ValueError("equation system needs n >= 2")
    if mode not in ("canonical", "full"):
        raise ValueError(f"unknown coordinate mode {mode!r}")
    key = canonical if mode == "canonical" else (lambda p, q: (p, q))
    eqs: list[Equation] = []
    big = n * n

    def add(terms, rhs, tag):
        coeffs: dict = {}
        for (p, q), c in terms:
            k = key(p, q)
            coeffs[k] = coeffs.get(k, 0) + c
        coeffs = {k: c for k, c in coeffs.items() if c != 0}
        eqs.append(Equation(coeffs, rhs, tag))

    if mode == "full":
        for p in range(big):
            for q in range(p + 1, big):
                add([((p, q), 1), ((q, p), -1)], 0, "symmetry")

    pinned = []
    seen = set()
    for i in range(n):
        for j in range(n):
            for l in range(n):
                if j == l:
                    continue
                for p, q in ((i * n + j, i * n + l), (j * n + i, l * n + i)):
                    k = key(p, q)
                    if k not in seen:
                        seen.add(k)
                        pinned.append(k)
    for k in pinned:
        add([(k, 1)], 0, "zero-block")

    for i in range(n):
        for j in range(n):
            d = i * n + j
            for l in range(n):
                rows = [((d, k * n + l), 1) for k in range(n)]
                add(rows + [((d, d), -1)], 0, "row-sum")
                cols = [((d, l * n + k), 1) for k in range(n)]
                add(cols + [((d, d), -1)], 0, "row-sum")

    for i in range(n):
        add([((i * n + j, i * n + j), 1) for j in range(n)], 1, "diag-sum")
        add([((j * n + i, j * n + i), 1) for j in range(n)], 1, "diag-sum")
    return ConstraintSystem(n, mode, eqs)


def dimension_formula(n: int) -> int:
    """Known dimension of the QAP polytope, ``n!/(2(n-4)!) + (n-1)^2 + 1``."""
    if n < 4:
        raise ValueError("dimension formula needs n >= 4")
    return math.factorial(n) // (2 * math.factorial(n - 4)) + (n - 1) ** 2 + 1


def affine_dimension(n: int, mode: str = "auto", seed: int = linalg.DEFAULT_SEED,
                     jobs: int = 1, allow_large: bool = False) -> int:
    """Affine dimension of the vertex set, by rank."""
    if n < 1 or (n > MAX_HULL_N and not allow_large):
        raise ValueError(f"affine_dimension guard: n={n} not in 1..{MAX_HULL_N}")
    V = vertex_matrix(n)
    V = V[:, V.any(axis=0)]
    return linalg.affine_rank(V, mode=mode, seed=seed, jobs=jobs)


def solution_space_dimension(n: int, mode: str = "auto", coords: str = "canonical",
                             seed: int = linalg.DEFAULT_SEED) -> int:
    """Dimension of the solution set of the equation system (it is consistent)."""
    system = build_equation_system(n, coords)
    A, b = system.coefficient_matrix()
    rk = linalg.rank(A, mode=mode, seed=seed)
    rk_aug = linalg.rank(np.hstack([A, b[:, None]]), mode=mode, seed=seed)
    if rk_aug != rk:
        raise ArithmeticError("equation system is inconsistent")
    return A.shape[1] - rk


@lru_cache(maxsize=8)
def _canonical_system(n: int) -> tuple[ConstraintSystem, np.ndarray, np.ndarray]:
    system = build_equation_system(n, "canonical")
    A, b = system.coefficient_matrix()
    return system, A, b


def decode_01(M, n: int | None = None) -> Permutation:
    """Recover ``sigma`` from a full 0/1 matrix equal to some vertex.

    Raises:
        DecodeError: if the diagonal is not a permutation matrix, an equation
            is violated, or the matrix differs from the vertex built from it.
    """
    M = np.asarray(M)
    if n is None:
        n = math.isqrt(M.shape[0])
    big = n * n
    if M.shape != (big, big):
        raise DecodeError(f"expected a {big}x{big} matrix, got {M.shape}")
    if not np.isin(M, (0, 1)).all():
        raise DecodeError("matrix is not 0/1")
    system, A, b = _canonical_system(n)
    # diagonal-sum rows first: they decide whether a permutation can be read off
    upper = M[np.triu_indices(big)].astype(np.int64)
    residual = A @ upper - b
    order = [r for r, eq in enumerate(system.equations) if eq.tag == "diag-sum"]
    for r in order:
        if residual[r]:
            raise DecodeError(
                "diagonal is not a permutation matrix: violates "
                + system.equations[r].describe(n)
            )
    asym = np.argwhere(M != M.T)
    if asym.size:
        p, q = (int(x) for x in asym[0])
        raise DecodeError(f"violates [symmetry] Y[{pair_label(p, n)},{pair_label(q, n)}]"
                          f" = Y[{pair_label(q, n)},{pair_label(p, n)}]")
    bad = np.flatnonzero(residual)
    if bad.size:
        raise DecodeError(f"violates {system.equations[int(bad[0])].describe(n)}")
    diag = np.diag(M).reshape(n, n)
    sigma = Permutation(tuple(int(np.flatnonzero(diag[i])[0]) for i in range(n)))
    expect = vertex(sigma).full_matrix()
    diff = np.argwhere(expect != M)
    if diff.size:
        p, q = (int(x) for x in diff[0])
        raise DecodeError(
            f"entry Y[{pair_label(p, n)},{pair_label(q, n)}] = {int(M[p, q])}, "
            f"vertex of {sigma} has {int(expect[p, q])}"
        )
    return sigma


def check_all_vertices(n: int, mode: str = "canonical") -> tuple[int, list[str]]:
    """Count vertices checked and describe any violated equations."""
    system = build_equation_system(n, mode)
    if mode == "canonical":
        perms = list(enumerate_permutations(n))
        A, b = system.coefficient_matrix()
        residual = A @ vertex_matrix(n, perms).T - b[:, None]
        failures = []
        for col in np.flatnonzero(residual.any(axis=0)):
            row = int(np.flatnonzero(residual[:, col])[0])
            failures.append(f"{perms[col]}: {system.equations[row].describe(n)}")
        return len(perms), failures
    failures = []
    count = 0
    for sigma in enumerate_permutations(n):
        count += 1
        v = vertex(sigma)
        if mode == "canonical":
            bad = system.first_violation(v.value)
        else:
            full = v.full_matrix()
            bad = system.first_violation(lambda p, q: int(full[p, q]))
        if bad is not None:
            failures.append(f"{sigma}: {bad.describe(n)}")
    return count, failures
