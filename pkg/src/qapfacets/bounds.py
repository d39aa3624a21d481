"""QAP instances, an LP relaxation over the affine hull, and a cutting-plane loop.

The LP lives on the canonical coordinates ``Y[p,q]`` (``p <= q``) that are not
forced to zero.  Its equalities are the row-sum and diagonal-sum equations of
the affine hull; facet families from :mod:`qapfacets.facets` are added as cuts.
The objective follows the QAPLIB convention ``sum_ik A_ik B_{s(i)s(k)}`` plus an
optional linear term ``sum_i D_{i,s(i)}`` carried on the diagonal coordinates.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg, simplex
from .facets import GenericInequality, LinearInequality, expand_generic, make_mterm, make_nonneg, make_triple
from .hull import _canonical_system
from .perm import Permutation, canonical_index, enumerate_permutations, is_pinned, live_pairs, vertex

MAX_BRUTE_N = 10
MAX_EXACT_LP_N = 4
VIOLATION_TOL = 1e-7
SOUNDNESS_SLACK = 1e-6
SEPARATION_FAMILIES = ("nonneg", "triple", "mterm")
BACKENDS = ("dense", "exact", "highs")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, token: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if token is not None:
            where.append(f"token {token}")
        super().__init__((", ".join(where) + ": " if where else "") + message)
        self.line = line
        self.token = token


class SoundnessError(AssertionError):
    """A relaxation bound exceeded the known optimum."""


def _frac_matrix(M, n: int, name: str) -> tuple[tuple[Fraction, ...], ...]:
    rows = [tuple(Fraction(x) for x in row) for row in M]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{name} must be {n}x{n}")
    return tuple(rows)


@dataclass(frozen=True)
class QapInstance:
    """Flow matrix ``A``, distance matrix ``B`` and an optional linear term ``D``.

    ``D[i][j]`` is the cost of assigning facility ``i`` to location ``j``.
    """

    A: tuple
    B: tuple
    D: tuple | None = None
    name: str = "instance"

    def __init__(self, A, B, D=None, name: str = "instance"):
        n = len(A)
        object.__setattr__(self, "A", _frac_matrix(A, n, "A"))
        object.__setattr__(self, "B", _frac_matrix(B, n, "B"))
        if D is not None:
            D = _frac_matrix(D, n, "D")
            if not any(any(r) for r in D):
                D = None
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "name", name)

    @property
    def n(self) -> int:
        return len(self.A)

    def linear(self, i: int, j: int) -> Fraction:
        return self.D[i][j] if self.D is not None else Fraction(0)

    @classmethod
    def zero(cls, n: int) -> "QapInstance":
        z = [[0] * n for _ in range(n)]
        return cls(z, z, name=f"zero{n}")

    @classmethod
    def random(cls, n: int, seed: int, low: int = 0, high: int = 9) -> "QapInstance":
        """Integer entries drawn uniformly from ``[low, high]``."""
        rng = np.random.default_rng(seed)
        A = rng.integers(low, high + 1, size=(n, n)).tolist()
        B = rng.integers(low, high + 1, size=(n, n)).tolist()
        return cls(A, B, name=f"rand{n}-s{seed}")


def _tokens(text: str):
    count = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            count += 1
            yield lineno, count, tok


def _number(tok: str, line: int, pos: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a number: {tok!r}", line, pos) from None


def parse_qaplib(text: str, name: str = "instance") -> QapInstance:
    """Parse ``n`` followed by the ``n x n`` matrices A and B.

    A third matrix, if present, is read as the linear term ``D``.
    """
    toks = list(_tokens(text))
    if not toks:
        raise ParseError("empty input", 1, 0)
    line, pos, tok = toks[0]
    try:
        n = int(tok)
    except ValueError:
        raise ParseError(f"size must be an integer, got {tok!r}", line, pos) from None
    if n < 1:
        raise ParseError(f"size must be positive, got {n}", line, pos)
    body = toks[1:]
    nn = n * n
    if len(body) not in (2 * nn, 3 * nn):
        if len(body) < 2 * nn:
            last = toks[-1]
            which = "A" if len(body) < nn else "B"
            raise ParseError(f"truncated input: matrix {which} incomplete, "
                             f"expected {2 * nn} entries after n, got {len(body)}", last[0], last[1])
        extra = body[2 * nn] if len(body) < 3 * nn else body[3 * nn]
        raise ParseError(f"unexpected token {extra[2]!r}: expected {2 * nn} or {3 * nn} entries, "
                         f"got {len(body)}", extra[0], extra[1])
    vals = [_number(t, l, p) for l, p, t in body]
    mats = [[vals[s + r * n: s + (r + 1) * n] for r in range(n)] for s in range(0, len(vals), nn)]
    return QapInstance(mats[0], mats[1], mats[2] if len(mats) == 3 else None, name=name)


def serialize_qaplib(inst: QapInstance) -> str:
    def block(M):
        return "\n".join(" ".join(str(x) for x in row) for row in M)
    parts = [str(inst.n), block(inst.A), block(inst.B)]
    if inst.D is not None:
        parts.append(block(inst.D))
    return "\n\n".join(parts) + "\n"


def permutation_cost(inst: QapInstance, sigma: Permutation) -> Fraction:
    if sigma.n != inst.n:
        raise ValueError(f"permutation of size {sigma.n} for instance of size {inst.n}")
    s = sigma.image
    A, B = inst.A, inst.B
    n = inst.n
    total = sum((A[i][k] * B[s[i]][s[k]] for i in range(n) for k in range(n)), Fraction(0))
    return total + sum((inst.linear(i, s[i]) for i in range(n)), Fraction(0))


def _integer_scaled(inst: QapInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, int]:
    """Integer copies of A, B, D and the denominators that undo the scaling."""
    da = linalg.lcm_denominators(x for r in inst.A for x in r)
    db = linalg.lcm_denominators(x for r in inst.B for x in r)
    dd = linalg.lcm_denominators(inst.linear(i, j) for i in range(inst.n) for j in range(inst.n))
    scale = da * db
    den = scale * dd
    A = np.array([[int(x * da) for x in r] for r in inst.A], dtype=object)
    B = np.array([[int(x * db) for x in r] for r in inst.B], dtype=object)
    D = np.array([[int(inst.linear(i, j) * den) for j in range(inst.n)] for i in range(inst.n)],
                 dtype=object)
    return A, B, D, dd, den


def brute_force_optimum(inst: QapInstance, chunk: int = 20000) -> tuple[Fraction, Permutation]:
    """Exact minimum over all permutations; the lexicographically first argmin on ties."""
    n = inst.n
    if n > MAX_BRUTE_N:
        raise ValueError(f"brute force is limited to n <= {MAX_BRUTE_N}, got n={n}")
    A, B, D, dd, den = _integer_scaled(inst)
    big = max([abs(int(x)) for x in A.ravel()] + [abs(int(x)) for x in B.ravel()] + [1])
    small = big * big * n * n * dd < 2**62 and max(abs(int(x)) for x in D.ravel()) < 2**60
    dtype = np.int64 if small else object
    A = A.astype(dtype)
    B = B.astype(dtype)
    D = D.astype(dtype)
    rows = np.arange(n)
    best_val, best_perm = None, None
    it = itertools.permutations(range(n))
    while True:
        batch = list(itertools.islice(it, chunk))
        if not batch:
            break
        P = np.array(batch, dtype=np.int64)
        quad = (A[None, :, :] * B[P[:, :, None], P[:, None, :]]).sum(axis=(1, 2))
        costs = quad * dd + D[rows[None, :], P].sum(axis=1)
        t = int(np.argmin(costs)) if small else min(range(len(costs)), key=lambda i: costs[i])
        if best_val is None or costs[t] < best_val:
            best_val, best_perm = costs[t], batch[t]
    return Fraction(int(best_val), den), Permutation(tuple(best_perm))


# --- LP model -----------------------------------------------------------------

@lru_cache(maxsize=None)
def _base_rows(n: int) -> tuple[tuple[tuple[int, int], ...], np.ndarray, np.ndarray]:
    """Live variables and an independent set of equality rows restricted to them."""
    live = tuple(live_pairs(n))
    _, A, b = _canonical_system(n)
    cols = [canonical_index(p, q, n) for p, q in live]
    A = A[:, cols]
    nz = np.flatnonzero(np.abs(A).sum(axis=1) > 0)
    A, b = A[nz], b[nz]
    keep = linalg.row_basis_modp(A, linalg.random_primes(2)[0])
    return live, A[keep], b[keep]


def restrict_to_live(ineq: LinearInequality) -> LinearInequality:
    """Drop terms on coordinates that every feasible point has equal to zero."""
    n = ineq.n
    diag = dict(ineq.diag)
    off = {pq: c for pq, c in ineq.off.items() if c and not is_pinned(pq[0], pq[1], n)}
    return LinearInequality(n, diag, off, ineq.constant)


def _as_linear(cut) -> LinearInequality:
    return expand_generic(cut) if isinstance(cut, GenericInequality) else cut


@dataclass
class LpModel:
    n: int
    variables: tuple
    A_eq: np.ndarray
    b_eq: np.ndarray
    cuts: list = field(default_factory=list)

    def __post_init__(self):
        self.index = {pq: t for t, pq in enumerate(self.variables)}

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def add_cut(self, cut) -> LinearInequality:
        lin = restrict_to_live(_as_linear(cut))
        if lin.n != self.n:
            raise ValueError(f"cut for n={lin.n} added to a model with n={self.n}")
        for pq, _ in lin.items():
            if pq not in self.index:
                raise ValueError(f"cut references a pinned coordinate {pq}")
        self.cuts.append(lin)
        return lin

    def cut_row(self, lin: LinearInequality) -> tuple[list[Fraction], Fraction]:
        row = [Fraction(0)] * self.num_vars
        for pq, c in lin.items():
            row[self.index[pq]] = Fraction(c)
        return row, Fraction(lin.constant)

    def point_vector(self, sigma: Permutation) -> np.ndarray:
        x = np.zeros(self.num_vars, dtype=np.int64)
        for pq in vertex(sigma).entries:
            x[self.index[pq]] = 1
        return x

    def is_feasible(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x)
        if (x < -tol).any():
            return False
        if np.abs(self.A_eq @ x - self.b_eq).max(initial=0) > tol:
            return False
        for lin in self.cuts:
            row, const = self.cut_row(lin)
            val = sum(float(c) * float(x[t]) for t, c in enumerate(row) if c) + float(const)
            if val < -tol:
                return False
        return True


def build_lp(n: int, cuts: Sequence = ()) -> LpModel:
    if n < 2:
        raise ValueError("LP needs n >= 2")
    live, A, b = _base_rows(n)
    model = LpModel(n, live, A.copy(), b.copy())
    for c in cuts:
        model.add_cut(c)
    return model


def objective_vector(inst: QapInstance, variables: Sequence[tuple[int, int]] | None = None) -> list[Fraction]:
    """Cost coefficient of each canonical variable.

    Diagonal ``Y[ij,ij]`` carries ``A_ii B_jj + D_ij``; an off-diagonal
    ``Y[ij,kl]`` stands for both ``Y[ij,kl]`` and ``Y[kl,ij]`` and so carries
    ``A_ik B_jl + A_ki B_lj``.
    """
    n = inst.n
    if variables is None:
        variables = live_pairs(n)
    A, B = inst.A, inst.B
    out = []
    for p, q in variables:
        i, j = divmod(p, n)
        k, l = divmod(q, n)
        if p == q:
            out.append(A[i][i] * B[j][j] + inst.linear(i, j))
        else:
            out.append(A[i][k] * B[j][l] + A[k][i] * B[l][j])
    return out


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    values: np.ndarray | None
    objective: float | Fraction | None
    backend: str
    iterations: int = 0


def _standard_form(model: LpModel, exact: bool):
    """Rows ``[A_eq 0; C -I] [y; s] = [b; -const]`` for cuts ``C y + const >= 0``."""
    nv, k = model.num_vars, len(model.cuts)
    m = model.A_eq.shape[0]
    dtype = object if exact else float
    A = np.zeros((m + k, nv + k), dtype=dtype)
    b = np.zeros(m + k, dtype=dtype)
    A[:m, :nv] = model.A_eq
    b[:m] = model.b_eq
    for r, lin in enumerate(model.cuts):
        row, const = model.cut_row(lin)
        for t, c in enumerate(row):
            if c:
                A[m + r, t] = c if exact else float(c)
        A[m + r, nv + r] = -1
        b[m + r] = -const if exact else -float(const)
    return A, b


def solve_lp(model: LpModel, objective: Sequence, backend: str = "dense",
             tol: float = simplex.FLOAT_TOL) -> LpSolution:
    """Minimize ``objective . y`` over the model.

    Backends: ``dense`` (float two-phase simplex), ``exact`` (the same simplex
    on rationals, n <= 4) and ``highs`` (scipy's HiGHS, used as a cross-check).
    """
    if len(objective) != model.num_vars:
        raise ValueError(f"objective has {len(objective)} entries, model has {model.num_vars} variables")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    k = len(model.cuts)
    if backend == "highs":
        return _solve_highs(model, objective)
    exact = backend == "exact"
    if exact and model.n > MAX_EXACT_LP_N:
        raise ValueError(f"exact LP is limited to n <= {MAX_EXACT_LP_N}")
    A, b = _standard_form(model, exact)
    if exact:
        c = [Fraction(x) for x in objective] + [Fraction(0)] * k
    else:
        c = np.concatenate([np.array([float(x) for x in objective]), np.zeros(k)])
    res = simplex.solve(c, A, b, exact=exact, tol=tol)
    vals = None if res.x is None else res.x[:model.num_vars]
    return LpSolution(res.status, vals, res.objective, backend, res.iterations)


def _solve_highs(model: LpModel, objective) -> LpSolution:
    from scipy.optimize import linprog

    c = np.array([float(x) for x in objective])
    A_ub = b_ub = None
    if model.cuts:
        rows = []
        rhs = []
        for lin in model.cuts:
            row, const = model.cut_row(lin)
            rows.append([-float(x) for x in row])
            rhs.append(float(const))
        A_ub, b_ub = np.array(rows), np.array(rhs)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=model.A_eq.astype(float), b_eq=model.b_eq.astype(float),
                  bounds=(0, None), method="highs")
    status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    if status != "optimal":
        return LpSolution(status, None, None, "highs", int(getattr(res, "nit", 0)))
    return LpSolution(status, np.asarray(res.x), float(res.fun), "highs", int(res.nit))


# --- separation -----------------------------------------------------------------

@dataclass(frozen=True)
class Cut:
    inequality: GenericInequality
    violation: float
    family: str


def point_matrix(n: int, values, variables: Sequence[tuple[int, int]] | None = None) -> np.ndarray:
    """Full symmetric ``n^2 x n^2`` float matrix from values on the live variables."""
    values = np.asarray(values, dtype=float)
    big = n * n
    if values.shape == (big, big):
        return values
    if variables is None:
        variables = live_pairs(n)
    if values.shape != (len(variables),):
        raise ValueError(f"point has shape {values.shape}, expected ({len(variables)},)")
    Y = np.zeros((big, big))
    for (p, q), v in zip(variables, values):
        Y[p, q] = v
        Y[q, p] = v
    return Y


def content(lin: LinearInequality) -> Fraction:
    """gcd of all coefficients and the constant; violations are reported in these units."""
    vals = [c for _, c in lin.items()] + [lin.constant]
    den = linalg.lcm_denominators(vals)
    g = 0
    for v in vals:
        g = math.gcd(g, int(v * den))
    return Fraction(g, den) if g else Fraction(1)


def violation(g: GenericInequality, Y: np.ndarray) -> float:
    lin = expand_generic(g)
    val = lin.evaluate_point(lambda p, q: Y[p, q])
    return -val / float(content(lin))


def _separate_nonneg(Y: np.ndarray, n: int) -> list[Cut]:
    out = []
    for p, q in live_pairs(n):
        if p != q and Y[p, q] < -VIOLATION_TOL:
            i, j = divmod(p, n)
            k, l = divmod(q, n)
            out.append(Cut(make_nonneg(n, i, j, k, l), float(-Y[p, q]), "nonneg"))
    return out


def _separate_triple(Y: np.ndarray, n: int) -> list[Cut]:
    """Exhaustive scan of the triple family, vectorized over all index tuples."""
    if n < 3:
        return []
    Y4 = Y.reshape(n, n, n, n)
    p1, q1, p2, q2, k, l = np.ogrid[:n, :n, :n, :n, :n, :n]
    ykk = np.einsum("klkl->kl", Y4)[None, None, None, None, :, :]
    v = -(ykk + Y4[p1, q1, p2, q2] - Y4[p1, q1, k, l] - Y4[p2, q2, k, l] - Y4[p1, q2, k, l])
    ok = ((p1 != p2) & (p1 != k) & (p2 != k) & (q1 != q2) & (q1 != l) & (q2 != l))
    v = np.where(ok, v, -np.inf)
    out = []
    for idx in zip(*np.nonzero(v > VIOLATION_TOL)):
        a, b, c, d, e, f = (int(x) for x in idx)
        out.append(Cut(make_triple(n, a, b, c, d, e, f), float(v[idx]), "triple"))
    return out


def _greedy_mterm(Y4: np.ndarray, n: int, k: int, l: int) -> Cut | None:
    """Grow a pair set for the ``(k, l)`` term while the violation increases."""
    chosen: list[tuple[int, int]] = []
    rows, cols = {k}, {l}
    viol = -Y4[k, l, k, l]
    while True:
        best, best_gain = None, 0.0
        for i in range(n):
            if i in rows:
                continue
            for j in range(n):
                if j in cols:
                    continue
                gain = Y4[i, j, k, l] - sum(Y4[i, j, r, s] for r, s in chosen)
                if gain > best_gain + 1e-15:
                    best, best_gain = (i, j), gain
        if best is None:
            break
        chosen.append(best)
        rows.add(best[0])
        cols.add(best[1])
        viol += best_gain
    if len(chosen) >= 3 and viol > VIOLATION_TOL:
        return Cut(make_mterm(n, sorted(chosen), k, l, strict=False), float(viol), "mterm")
    return None


def _separate_mterm(Y: np.ndarray, n: int, jobs: int = 1) -> list[Cut]:
    if n < 4:
        return []
    Y4 = Y.reshape(n, n, n, n)
    kls = [(k, l) for k in range(n) for l in range(n)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(lambda kl: _greedy_mterm(Y4, n, *kl), kls))
    else:
        found = [_greedy_mterm(Y4, n, k, l) for k, l in kls]
    return [c for c in found if c is not None]


def separate(point, families: Sequence[str], n: int, budget: int = 50, jobs: int = 1,
             exclude: set | None = None) -> list[Cut]:
    """Violated family members, most violated first, at most ``budget`` of them.

    ``nonneg`` and ``triple`` are scanned exhaustively; ``mterm`` uses a greedy
    set-growing heuristic per ``(k, l)`` and may miss violated members.
    Violations are measured in units of the expanded inequality's content.
    """
    for f in families:
        if f not in SEPARATION_FAMILIES:
            raise ValueError(f"unknown family {f!r}; choose from {SEPARATION_FAMILIES}")
    Y = point_matrix(n, point)
    found: list[Cut] = []
    if "nonneg" in families:
        found += _separate_nonneg(Y, n)
    if "triple" in families:
        found += _separate_triple(Y, n)
    if "mterm" in families:
        found += _separate_mterm(Y, n, jobs)
    seen = set(exclude or ())
    out = []
    for c in sorted(found, key=lambda c: (-c.violation, c.family, c.inequality.key())):
        key = c.inequality.key()
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
        if len(out) >= budget:
            break
    return out


# --- cutting-plane loop -----------------------------------------------------------

@dataclass
class RoundRecord:
    bound: float
    cuts_added: int
    max_violation: float


@dataclass
class BoundReport:
    instance: str
    n: int
    families: tuple
    rounds: list[RoundRecord] = field(default_factory=list)
    final_bound: float | None = None
    optimum: Fraction | None = None
    optimum_perm: Permutation | None = None
    status: str = "optimal"
    cuts: list[Cut] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def gap(self) -> float | None:
        if self.optimum is None or self.final_bound is None:
            return None
        return float(self.optimum) - self.final_bound

    def is_monotone(self, slack: float = 1e-9) -> bool:
        b = [r.bound for r in self.rounds]
        return all(y >= x - slack for x, y in zip(b, b[1:]))


def cutting_plane_bound(inst: QapInstance, families: Sequence[str] = SEPARATION_FAMILIES,
                        max_rounds: int = 20, budget: int = 50, brute_force: bool = False,
                        backend: str = "dense", jobs: int = 1, max_n: int = 6) -> BoundReport:
    """Alternate LP solves and separation until no cut is found or rounds run out."""
    n = inst.n
    if n > max_n:
        raise ValueError(f"cutting_plane_bound is guarded to n <= {max_n}, got n={n}")
    t0 = time.perf_counter()
    report = BoundReport(inst.name, n, tuple(families))
    if brute_force:
        report.optimum, report.optimum_perm = brute_force_optimum(inst)
    model = build_lp(n)
    obj = objective_vector(inst, model.variables)
    keys: set = set()
    for rnd in range(max_rounds + 1):
        sol = solve_lp(model, obj, backend=backend)
        if sol.status != "optimal":
            report.status = sol.status
            break
        bound = float(sol.objective)
        if report.optimum is not None and bound > float(report.optimum) + SOUNDNESS_SLACK:
            raise SoundnessError(f"round {rnd}: bound {bound} exceeds optimum {report.optimum}")
        cuts = separate(sol.values, families, n, budget, jobs, exclude=keys) if rnd < max_rounds else []
        report.rounds.append(RoundRecord(bound, len(cuts), max((c.violation for c in cuts), default=0.0)))
        report.final_bound = bound
        if not cuts:
            break
        for c in cuts:
            keys.add(c.inequality.key())
            model.add_cut(c.inequality)
            report.cuts.append(c)
    report.seconds = time.perf_counter() - t0
    return report


def solve_exact(inst: QapInstance) -> dict:
    """Brute-force optimum, plus the exact base LP bound when ``n <= 4``."""
    cost, perm = brute_force_optimum(inst)
    out = {"optimum": cost, "permutation": perm, "lp_bound": None}
    if inst.n <= MAX_EXACT_LP_N:
        model = build_lp(inst.n)
        sol = solve_lp(model, objective_vector(inst, model.variables), backend="exact")
        out["lp_bound"] = sol.objective
        out["lp_status"] = sol.status
    return out
