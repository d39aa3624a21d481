"""Executable structural checks: the signed twelve-vertex cancellation and
connectivity of transposition graphs over constrained permutation sets."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .perm import (
    Permutation,
    apply_transposition,
    enumerate_permutations,
    parity,
    vertex,
)

MAX_GRAPH_N = 8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SigmaConfig:
    """Base permutation, three shuffled positions and a swapped pair."""

    base: Permutation
    k: tuple[int, int, int]
    x: int
    y: int

    def __post_init__(self):
        n = self.base.n
        idx = (*self.k, self.x, self.y)
        if n < 5:
            raise ConfigError("the twelve-permutation configuration needs n >= 5")
        if any(not 0 <= t < n for t in idx):
            raise ConfigError(f"index out of range 1..{n}: {[t + 1 for t in idx]}")
        if len(set(idx)) != 5:
            raise ConfigError(f"k1,k2,k3,x,y must be five distinct indices, got {[t + 1 for t in idx]}")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def images(self) -> tuple[int, int, int]:
        return tuple(self.base.image[t] for t in self.k)


def _arrangements(a, b, c):
    # fixed order: (a,b,c) (a,c,b) (b,a,c) (b,c,a) (c,a,b) (c,b,a)
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def build_sigma_set(cfg: SigmaConfig) -> list[tuple[int, Permutation]]:
    """sigma_1..sigma_6 then their (x y)-swapped partners, each with its sign."""
    firsts = []
    for arr in _arrangements(*cfg.images):
        image = list(cfg.base.image)
        for pos, val in zip(cfg.k, arr):
            image[pos] = val
        firsts.append(Permutation(tuple(image)))
    seconds = [apply_transposition(s, cfg.x, cfg.y) for s in firsts]
    return [(parity(s), s) for s in firsts + seconds]


def signed_sum(terms: Iterable[tuple[int, Permutation]]) -> np.ndarray:
    total = None
    for sign, sigma in terms:
        m = sign * vertex(sigma).full_matrix()
        total = m if total is None else total + m
    return total


def verify_zero_identity(cfg: SigmaConfig, flip: int | None = None) -> tuple[bool, np.ndarray]:
    """Exact signed sum of the twelve vertices; ``flip`` negates one sign (control)."""
    terms = build_sigma_set(cfg)
    if flip is not None:
        s, sigma = terms[flip]
        terms[flip] = (-s, sigma)
    residual = signed_sum(terms)
    return not residual.any(), residual


def random_config(n: int, rng: random.Random) -> SigmaConfig:
    base = list(range(n))
    rng.shuffle(base)
    idx = rng.sample(range(n), 5)
    return SigmaConfig(Permutation(tuple(base)), tuple(idx[:3]), idx[3], idx[4])


def zero_identity_sweep(n: int, trials: int, seed: int) -> tuple[int, list[SigmaConfig]]:
    """Number of configurations verified and the list of failing ones."""
    rng = random.Random(seed)
    failures = []
    ok = 0
    for _ in range(trials):
        cfg = random_config(n, rng)
        if verify_zero_identity(cfg)[0]:
            ok += 1
        else:
            failures.append(cfg)
    return ok, failures


# --- transposition graphs -----------------------------------------------------

@dataclass(frozen=True)
class TranspositionGraphSpec:
    """Permutations with forced images and forbidden image sets.

    ``mode`` selects which side conditions are enforced: ``lemma1`` (set-valued
    forbids whose union has at most ``n - a - b`` values), ``lemma2`` (one forbidden
    value per position, all distinct, ``a + b < n``) or ``free`` (none).
    """

    n: int
    fixed: tuple[tuple[int, int], ...] = ()
    forbidden: tuple[tuple[int, frozenset], ...] = ()
    mode: str = "free"

    def __post_init__(self):
        object.__setattr__(self, "fixed", tuple((int(i), int(v)) for i, v in self.fixed))
        object.__setattr__(self, "forbidden",
                           tuple((int(i), frozenset(int(v) for v in s)) for i, s in self.forbidden))
        self.validate()

    @property
    def a(self) -> int:
        return len(self.fixed)

    @property
    def b(self) -> int:
        return len(self.forbidden)

    def validate(self):
        n = self.n
        if self.mode not in ("lemma1", "lemma2", "free"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        pos = [i for i, _ in self.fixed] + [i for i, _ in self.forbidden]
        vals = [v for _, v in self.fixed] + [v for _, s in self.forbidden for v in s]
        if any(not 0 <= t < n for t in pos + vals):
            raise ConfigError(f"index outside 1..{n}")
        if len(set(pos)) != len(pos):
            raise ConfigError("a position is constrained twice")
        fixed_vals = [v for _, v in self.fixed]
        if len(set(fixed_vals)) != len(fixed_vals):
            raise ConfigError("two positions forced to the same image")
        if self.mode == "lemma1":
            union = set().union(*(s for _, s in self.forbidden)) - set(fixed_vals)
            if len(union) > n - self.a - self.b:
                raise ConfigError(f"|union of forbidden sets| = {len(union)} > n-a-b = {n - self.a - self.b}")
        elif self.mode == "lemma2":
            if self.a + self.b >= n:
                raise ConfigError("lemma2 needs a + b < n")
            singles = []
            for _, s in self.forbidden:
                if len(s) != 1:
                    raise ConfigError("lemma2 forbids exactly one image per position")
                singles.extend(s)
            if len(set(singles)) != len(singles):
                raise ConfigError("lemma2 forbidden images must be distinct")
            if set(singles) & set(fixed_vals):
                raise ConfigError("lemma2 forbidden images must avoid the forced images")

    def admits(self, sigma: Permutation) -> bool:
        img = sigma.image
        return (all(img[i] == v for i, v in self.fixed)
                and all(img[i] not in s for i, s in self.forbidden))

    def relabel(self, positions: Sequence[int], values: Sequence[int]) -> "TranspositionGraphSpec":
        """Rename position ``t`` to ``positions[t]`` and value ``v`` to ``values[v]``."""
        return TranspositionGraphSpec(
            self.n,
            tuple((positions[i], values[v]) for i, v in self.fixed),
            tuple((positions[i], frozenset(values[v] for v in s)) for i, s in self.forbidden),
            self.mode,
        )

    def normalized(self) -> tuple["TranspositionGraphSpec", list[int], list[int]]:
        """Relabel so that the identity is admitted.

        Forced positions become ``0..a-1`` with images ``0..a-1``; forbidden positions
        become ``a..a+b-1``.  For ``lemma1`` the forbidden values move to the top of
        the range; for ``lemma2`` values are shuffled so no ``a+i`` is forbidden at
        ``a+i``.  Relabelings are graph isomorphisms, so connectivity is unchanged.
        """
        n, a = self.n, self.a
        order = [i for i, _ in self.fixed] + [i for i, _ in self.forbidden]
        rest = [i for i in range(n) if i not in order]
        positions = [0] * n
        for new, old in enumerate(order + rest):
            positions[old] = new
        fixed_vals = [v for _, v in self.fixed]
        values = [-1] * n
        for t, v in enumerate(fixed_vals):
            values[v] = t
        free_vals = [v for v in range(n) if values[v] < 0]
        if self.mode == "lemma1":
            union = sorted(set().union(*(s for _, s in self.forbidden)) - set(fixed_vals))
            others = [v for v in free_vals if v not in union]
            for new, v in zip(range(a, n), others + union):
                values[v] = new
        elif self.mode == "lemma2":
            values = _lemma2_values(self, positions, values, free_vals)
        else:
            for new, v in zip(range(a, n), free_vals):
                values[v] = new
        return self.relabel(positions, values), positions, values

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "fixed": [[i + 1, v + 1] for i, v in self.fixed],
            "forbidden": [[i + 1, sorted(v + 1 for v in s)] for i, s in self.forbidden],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TranspositionGraphSpec":
        return cls(
            int(rec["n"]),
            tuple((int(i) - 1, int(v) - 1) for i, v in rec.get("fixed", [])),
            tuple((int(i) - 1, frozenset(int(v) - 1 for v in s)) for i, s in rec.get("forbidden", [])),
            rec.get("mode", "free"),
        )


def _lemma2_values(spec, positions, values, free_vals):
    n, a = spec.n, spec.a
    # forbidden value x_i sits at new position a+i; it must not be renamed to a+i
    bad = {}
    for i, s in spec.forbidden:
        (x,) = tuple(s)
        bad[x] = positions[i]
    targets = list(range(a, n))
    for perm in itertools.permutations(targets):
        if all(bad.get(v) != t for v, t in zip(free_vals, perm)):
            out = list(values)
            for v, t in zip(free_vals, perm):
                out[v] = t
            return out
    raise ConfigError("no relabeling admits the identity")


def transposition_graph(perms: Iterable[Permutation]) -> nx.Graph:
    """Nodes are image tuples; edges join permutations one transposition apart."""
    nodes = {p.image for p in perms}
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for img in nodes:
        n = len(img)
        for x, y in itertools.combinations(range(n), 2):
            other = list(img)
            other[x], other[y] = other[y], other[x]
            other = tuple(other)
            if other in nodes and img < other:
                g.add_edge(img, other)
    return g


def build_transposition_graph(spec: TranspositionGraphSpec, normalize: bool = True) -> nx.Graph:
    if spec.n > MAX_GRAPH_N:
        raise ConfigError(f"graph guard: n={spec.n} > {MAX_GRAPH_N}")
    if normalize:
        spec = spec.normalized()[0]
    return transposition_graph(s for s in enumerate_permutations(spec.n) if spec.admits(s))


def is_connected(graph: nx.Graph) -> tuple[bool, int]:
    """Connectivity and component count; the empty graph counts as connected."""
    if graph.number_of_nodes() == 0:
        return True, 0
    k = nx.number_connected_components(graph)
    return k == 1, k


def identity_eccentricity(graph: nx.Graph, n: int) -> int:
    """Largest transposition distance from the identity within the graph."""
    dist = nx.single_source_shortest_path_length(graph, tuple(range(n)))
    if len(dist) != graph.number_of_nodes():
        raise ValueError("graph is not connected")
    return max(dist.values())


def lemma2_path_bound(spec: TranspositionGraphSpec) -> int:
    """Length of the constructive path: two moves per forbidden position, then
    one per remaining unsorted position."""
    return 2 * spec.b + max(0, spec.n - spec.a - spec.b - 1)


def _scramble(spec: TranspositionGraphSpec, rng: random.Random) -> TranspositionGraphSpec:
    positions = list(range(spec.n))
    values = list(range(spec.n))
    rng.shuffle(positions)
    rng.shuffle(values)
    return spec.relabel(positions, values)


def random_lemma1_spec(n: int, rng: random.Random, scramble: bool = True) -> TranspositionGraphSpec:
    a = rng.randint(0, n - 2)
    b = rng.randint(1, n - a - 1)
    room = n - a - b
    union = rng.sample(range(a, n), rng.randint(1, room))
    forbidden = []
    for i in range(b):
        size = rng.randint(1, len(union))
        forbidden.append((a + i, frozenset(rng.sample(union, size))))
    spec = TranspositionGraphSpec(n, tuple((t, t) for t in range(a)), tuple(forbidden), "lemma1")
    return _scramble(spec, rng) if scramble else spec


def random_lemma2_spec(n: int, rng: random.Random, scramble: bool = True) -> TranspositionGraphSpec:
    a = rng.randint(0, n - 2)
    b = rng.randint(1, n - a - 1)
    xs = rng.sample(range(a, n), b)
    spec = TranspositionGraphSpec(
        n, tuple((t, t) for t in range(a)),
        tuple((a + i, frozenset([x])) for i, x in enumerate(xs)), "lemma2")
    return _scramble(spec, rng) if scramble else spec


def connectivity_sweep(n: int, mode: str, trials: int, seed: int) -> list[dict]:
    rng = random.Random(seed)
    make = random_lemma1_spec if mode == "lemma1" else random_lemma2_spec
    out = []
    for _ in range(trials):
        spec = make(n, rng)
        g = build_transposition_graph(spec)
        ok, comps = is_connected(g)
        row = {"spec": spec, "nodes": g.number_of_nodes(), "connected": ok, "components": comps}
        if mode == "lemma2" and ok and comps:
            row["eccentricity"] = identity_eccentricity(g, n)
            row["bound"] = lemma2_path_bound(spec)
        out.append(row)
    return out


# --- the two-component witness from the triple-facet argument -----------------

def secondset_parts(n: int, p1: int, q1: int, p2: int, q2: int, k: int, l: int):
    """Vertices strictly inside the triple inequality, split as X1 and X2."""
    X1, X2 = [], []
    for s in enumerate_permutations(n):
        img = s.image
        if img[p1] == q1 and img[p2] == q2 and img[k] != l:
            X1.append(s)
        elif img[p1] not in (q1, q2) and img[p2] != q2 and img[k] == l:
            X2.append(s)
    return X1, X2


def secondset_special_edge(alpha1: Permutation, p1: int, q1: int, p2: int, q2: int,
                           k: int, l: int) -> tuple[Permutation, Permutation, SigmaConfig]:
    """Bridge from ``alpha1`` in X1 to a partner in X2, plus the configuration whose
    cancellation identity expresses their difference through tight vertices."""
    n = alpha1.n
    inv = alpha1.inverse()
    i2 = inv.image[l]
    r = next(t for t in range(n) if t not in (p1, p2, k, i2))
    a = alpha1.image[r]
    b = alpha1.image[k]
    image = list(alpha1.image)
    image[p1], image[p2], image[k], image[i2], image[r] = a, q1, l, b, q2
    alpha2 = Permutation(tuple(image))
    cfg = SigmaConfig(alpha1, (p1, p2, r), k, i2)
    return alpha1, alpha2, cfg
