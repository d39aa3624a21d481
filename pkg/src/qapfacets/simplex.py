"""Dense two-phase tableau simplex over floats or exact rationals.

Solves ``min c.x  s.t.  A x = b,  x >= 0``.  Entering columns are priced by
steepest edge, which the full tableau makes exact and cheap: the edge
direction of column ``j`` is ``B^-1 a_j``, already stored in the tableau.  After
a basis repeats during a run of degenerate pivots (a cycle) the rule falls
back to Bland's smallest-index choice, which cannot cycle, until the
objective moves again.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

FLOAT_TOL = 1e-9


@dataclass
class SimplexResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray | None
    objective: float | Fraction | None
    iterations: int
    basis: list[int] | None = None


class _Tableau:
    def __init__(self, T, basis, exact: bool, tol: float, pricing: str = "steepest"):
        self.pricing = pricing
        self.T = T
        self.basis = basis
        self.exact = exact
        self.tol = 0 if exact else tol

    def pivot(self, r: int, c: int):
        T = self.T
        T[r] = T[r] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        nz = np.flatnonzero(col != 0) if self.exact else np.flatnonzero(np.abs(col) > 0)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        if not self.exact:
            T[:, c] = 0
            T[r, c] = 1
        self.basis[r] = c

    def run(self, allowed: np.ndarray, max_iter: int) -> tuple[str, int]:
        """Iterate on objective row -1 until optimal; rhs is column -1."""
        T = self.T
        m = T.shape[0] - 1
        seen: set = set()
        bland = self.pricing == "bland"
        it = 0
        while it < max_iter:
            red = T[-1, :-1]
            cand = np.flatnonzero((red < -self.tol) & allowed)
            if cand.size == 0:
                return "optimal", it
            if bland:
                c = int(cand[0])
            elif self.pricing == "dantzig":
                c = int(cand[np.argmin(np.asarray(red[cand], dtype=float))])
            else:
                sub = np.asarray(T[:m, cand], dtype=float)
                norms = np.sqrt(1.0 + np.einsum("ij,ij->j", sub, sub))
                c = int(cand[np.argmin(np.asarray(red[cand], dtype=float) / norms)])
            colv = T[:m, c]
            rows = np.flatnonzero(np.array(colv > self.tol, dtype=bool))
            if rows.size == 0:
                return "unbounded", it
            ratios = T[rows, -1] / colv[rows]
            best = min(ratios)
            if self.exact:
                ties = rows[np.array([x == best for x in ratios], dtype=bool)]
            else:
                ties = rows[np.asarray(ratios, dtype=float) <= float(best) + self.tol]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # largest pivot among ties, for stability
                r = int(ties[np.argmax(np.abs(np.asarray(colv[ties], dtype=float)))])
            self.pivot(r, c)
            if best <= self.tol:
                key = frozenset(self.basis)
                if key in seen:
                    bland = True
                seen.add(key)
            else:
                seen.clear()
                bland = self.pricing == "bland"
            it += 1
        return "iteration_limit", it


PRICING = ("steepest", "dantzig", "bland")


def solve(c, A, b, exact: bool = False, tol: float = FLOAT_TOL,
          max_iter: int = 50_000, pricing: str = "steepest") -> SimplexResult:
    """Two-phase simplex for ``min c.x, A x = b, x >= 0``.

    Args:
        exact: run on Fractions with zero tolerance instead of floats.
        tol: feasibility and optimality tolerance in float mode.
        pricing: entering rule; ``bland`` uses the smallest-index rule throughout.
    """
    if pricing not in PRICING:
        raise ValueError(f"unknown pricing rule {pricing!r}")
    if exact:
        conv = np.vectorize(Fraction, otypes=[object])
        A = conv(np.asarray(A, dtype=object)) if np.size(A) else np.zeros((0, len(c)), dtype=object)
        b = conv(np.asarray(b, dtype=object)) if np.size(b) else np.zeros(0, dtype=object)
        c = conv(np.asarray(c, dtype=object))
        zero, one = Fraction(0), Fraction(1)
        dtype = object
    else:
        A = np.asarray(A, dtype=float).reshape(-1, len(c))
        b = np.asarray(b, dtype=float)
        c = np.asarray(c, dtype=float)
        zero, one = 0.0, 1.0
        dtype = float
    m, nvar = A.shape
    A = A.copy()
    b = b.copy()
    neg = np.array([bool(v < 0) for v in b], dtype=bool)
    A[neg] = -A[neg]
    b[neg] = -b[neg]

    # phase 1: columns [x | artificials | rhs], last row minimizes sum of artificials
    T = np.empty((m + 1, nvar + m + 1), dtype=dtype)
    T[...] = zero
    T[:m, :nvar] = A
    for i in range(m):
        T[i, nvar + i] = one
    T[:m, -1] = b
    T[-1, :] = zero
    for i in range(m):
        T[-1, :nvar] -= T[i, :nvar]
        T[-1, -1] -= T[i, -1]
    tab = _Tableau(T, list(range(nvar, nvar + m)), exact, tol, pricing)
    allowed = np.ones(nvar + m, dtype=bool)
    status, it1 = tab.run(allowed, max_iter)
    if status != "optimal":
        return SimplexResult(status, None, None, it1)
    if -tab.T[-1, -1] > (0 if exact else tol * max(1.0, float(np.abs(b).max(initial=0)))):
        return SimplexResult("infeasible", None, None, it1)

    # drive artificials out of the basis; rows where that fails are redundant
    keep = []
    for r in range(m):
        if tab.basis[r] < nvar:
            keep.append(r)
            continue
        row = tab.T[r, :nvar]
        mags = np.abs(np.array(row, dtype=float))
        j = int(np.argmax(mags))
        if mags[j] > (0 if exact else tol):
            tab.pivot(r, j)
            keep.append(r)
    T2 = np.empty((len(keep) + 1, nvar + 1), dtype=dtype)
    T2[:-1, :nvar] = tab.T[keep, :nvar]
    T2[:-1, -1] = tab.T[keep, -1]
    basis = [tab.basis[r] for r in keep]
    # phase 2 objective row: c - c_B B^-1 A
    T2[-1, :nvar] = c
    T2[-1, -1] = zero
    for r, j in enumerate(basis):
        if c[j] != 0:
            T2[-1] -= c[j] * T2[r]
    tab2 = _Tableau(T2, basis, exact, tol, pricing)
    status, it2 = tab2.run(np.ones(nvar, dtype=bool), max_iter)
    its = it1 + it2
    if status != "optimal":
        return SimplexResult(status, None, None, its)
    x = np.empty(nvar, dtype=dtype)
    x[...] = zero
    if exact:
        for r, j in enumerate(tab2.basis):
            x[j] = tab2.T[r, -1]
        obj = sum((c[j] * x[j] for j in range(nvar) if x[j] != 0), Fraction(0))
    else:
        # re-solve the final basis against the original rows to shed pivot drift
        B = A[:, tab2.basis]
        try:
            xb, *_ = np.linalg.lstsq(B, b, rcond=None)
        except np.linalg.LinAlgError:
            xb = np.array([tab2.T[r, -1] for r in range(len(tab2.basis))])
        x[tab2.basis] = xb
        x[np.abs(x) < tol] = 0.0
        obj = float(c @ x)
    return SimplexResult("optimal", x, obj, its, list(tab2.basis))
