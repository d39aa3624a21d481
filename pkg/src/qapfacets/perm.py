"""Permutations, second-order permutation matrices and coordinate conventions.

A pair index ``(i, j)`` is flattened row-major as ``p = i * n + j``.  A point of
the polytope is a symmetric ``n^2 x n^2`` matrix; we store only the canonical
upper triangle ``(p, q)`` with ``p <= q``.  Everything is 0-based internally and
rendered 1-based for humans.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

MAX_ENUM_N = 10


class SizeError(ValueError):
    """Raised when a brute-force enumeration would be too large."""


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``{0..n-1}`` with ``image[i] = sigma(i)``."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(v) for v in self.image)
        if sorted(image) != list(range(len(image))) or not image:
            raise ValueError(f"not a permutation: {self.image!r}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, image: Sequence[int]) -> "Permutation":
        return cls(tuple(int(v) - 1 for v in image))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __len__(self) -> int:
        return len(self.image)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def one_based(self) -> tuple[int, ...]:
        return tuple(v + 1 for v in self.image)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.one_based()) + ")"

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=np.int64)
        m[np.arange(self.n), self.image] = 1
        return m


def flat(i: int, j: int, n: int) -> int:
    return i * n + j


def unflat(p: int, n: int) -> tuple[int, int]:
    return divmod(p, n)


def pair_label(p: int, n: int) -> str:
    """1-based ``"ij"`` label of a flat pair index, e.g. ``"12"``."""
    i, j = divmod(p, n)
    if n < 10:
        return f"{i + 1}{j + 1}"
    return f"{i + 1},{j + 1}"


def canonical(p: int, q: int) -> tuple[int, int]:
    return (p, q) if p <= q else (q, p)


def num_canonical(n: int) -> int:
    big = n * n
    return big * (big + 1) // 2


def canonical_index(p: int, q: int, n: int) -> int:
    """Position of canonical pair ``(p, q)`` (``p <= q``) in the upper triangle."""
    if p > q:
        p, q = q, p
    big = n * n
    return p * big - p * (p - 1) // 2 + (q - p)


def canonical_pairs(n: int) -> list[tuple[int, int]]:
    big = n * n
    return [(p, q) for p in range(big) for q in range(p, big)]


def is_pinned(p: int, q: int, n: int) -> bool:
    """True if the coordinate is forced to zero on the polytope.

    Those are the entries sharing a row index with different columns, or a column
    index with different rows.
    """
    i, j = divmod(p, n)
    k, l = divmod(q, n)
    return (i == k) != (j == l)


def live_pairs(n: int) -> list[tuple[int, int]]:
    """Canonical coordinates not pinned to zero, in canonical order."""
    return [(p, q) for p, q in canonical_pairs(n) if not is_pinned(p, q, n)]


def enumerate_permutations(n: int, allow_large: bool = False) -> Iterator[Permutation]:
    """Yield all ``n!`` permutations in lexicographic order of their images."""
    if n < 1 or (n > MAX_ENUM_N and not allow_large):
        raise SizeError(f"n={n} outside enumeration guard 1..{MAX_ENUM_N}")
    for image in itertools.permutations(range(n)):
        yield Permutation(image)


def apply_transposition(sigma: Permutation, x: int, y: int) -> Permutation:
    """Swap the images of positions ``x`` and ``y``."""
    if x == y:
        raise ValueError("transposition needs two distinct indices")
    image = list(sigma.image)
    image[x], image[y] = image[y], image[x]
    return Permutation(tuple(image))


def parity(sigma: Permutation) -> int:
    """+1 for even permutations, -1 for odd ones (cycle decomposition)."""
    seen = [False] * sigma.n
    sign = 1
    for start in range(sigma.n):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = sigma.image[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class SecondOrderVertex:
    """The 0/1 matrix ``P2[ij, kl] = P[i, j] * P[k, l]`` in canonical storage."""

    sigma: Permutation

    @property
    def n(self) -> int:
        return self.sigma.n

    @cached_property
    def support(self) -> tuple[int, ...]:
        """Sorted flat indices ``flat(i, sigma(i))``."""
        n = self.n
        return tuple(i * n + self.sigma.image[i] for i in range(n))

    @cached_property
    def entries(self) -> frozenset[tuple[int, int]]:
        s = self.support
        return frozenset((s[a], s[b]) for a in range(len(s)) for b in range(a, len(s)))

    def value(self, p: int, q: int) -> int:
        return 1 if canonical(p, q) in self.entries else 0

    def full_matrix(self) -> np.ndarray:
        vec = self.sigma.matrix().reshape(-1)
        return np.outer(vec, vec)

    def canonical_vector(self) -> np.ndarray:
        out = np.zeros(num_canonical(self.n), dtype=np.int64)
        n = self.n
        for p, q in self.entries:
            out[canonical_index(p, q, n)] = 1
        return out

    def __eq__(self, other):
        return isinstance(other, SecondOrderVertex) and self.sigma == other.sigma

    def __hash__(self):
        return hash(("P2", self.sigma.image))


def vertex(sigma: Permutation) -> SecondOrderVertex:
    return SecondOrderVertex(sigma)


def vertex_matrix(n: int, perms: Sequence[Permutation] | None = None,
                  live_only: bool = False) -> np.ndarray:
    """Rows are canonical vectors of the vertices (all of ``S_n`` by default)."""
    if perms is None:
        perms = list(enumerate_permutations(n))
    big = n * n
    # column lookup for canonical pairs
    if live_only:
        cols = {pq: c for c, pq in enumerate(live_pairs(n))}
        width = len(cols)
    else:
        cols = None
        width = num_canonical(n)
    out = np.zeros((len(perms), width), dtype=np.int64)
    for r, sigma in enumerate(perms):
        s = [i * n + sigma.image[i] for i in range(n)]
        for a in range(n):
            for b in range(a, n):
                p, q = s[a], s[b]
                if p > q:
                    p, q = q, p
                c = cols[(p, q)] if cols is not None else p * big - p * (p - 1) // 2 + (q - p)
                out[r, c] = 1
    return out
