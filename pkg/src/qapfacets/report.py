"""JSON run reports and the inequality interchange format.

Rationals are written as ``"num/den"`` strings so that no value passes through
a float.  Every index in a report is 1-based.
"""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .facets import GenericInequality, LinearInequality, expand_generic
from .perm import Permutation

SCHEMA_VERSION = 1


def rational(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise ValueError(f"float {s!r} where a rational string was expected")
    return Fraction(str(s))


def encode(obj: Any) -> Any:
    """Convert results into plain JSON types."""
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, Permutation):
        return list(obj.one_based())
    if isinstance(obj, GenericInequality):
        return inequality_record(obj)
    if isinstance(obj, LinearInequality):
        return linear_record(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    return obj


@dataclass
class RunReport:
    command: str
    parameters: dict
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    mode: str = "exact"
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "parameters": encode(self.parameters),
            "mode": self.mode,
            "seed": self.seed,
            "results": encode(self.results),
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
            "platform": {"python": platform.python_version()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --- inequality interchange ---------------------------------------------------

def inequality_record(g: GenericInequality, with_linear: bool = False) -> dict:
    rec = {
        "n": g.n,
        "beta": g.beta,
        "coeffs": [[i + 1, j + 1, v] for (i, j), v in g.coeffs],
    }
    if with_linear:
        rec["linear"] = linear_record(expand_generic(g))
    return rec


def linear_record(lin: LinearInequality) -> dict:
    n = lin.n
    diag = [[i + 1, j + 1, rational(c)] for (i, j), c in sorted(lin.diag.items()) if c]
    off = []
    for (p, q), c in sorted(lin.off.items()):
        if c:
            i, j = divmod(p, n)
            k, l = divmod(q, n)
            off.append([i + 1, j + 1, k + 1, l + 1, rational(c)])
    return {"n": n, "diag": diag, "off": off, "constant": rational(lin.constant)}


def inequality_from_record(rec: dict) -> GenericInequality | LinearInequality:
    """Read either the weight form (``coeffs`` + ``beta``) or a bare linear form."""
    n = int(rec["n"])
    if "coeffs" in rec:
        coeffs = {}
        for entry in rec["coeffs"]:
            i, j, v = entry
            coeffs[(int(i) - 1, int(j) - 1)] = int(v)
        return GenericInequality(n, coeffs, int(rec["beta"]))
    if "linear" in rec:
        rec = rec["linear"]
    diag = {(int(i) - 1, int(j) - 1): parse_rational(c) for i, j, c in rec.get("diag", [])}
    off = {}
    for i, j, k, l, c in rec.get("off", []):
        p = (int(i) - 1) * n + int(j) - 1
        q = (int(k) - 1) * n + int(l) - 1
        if p == q:
            raise ValueError("off-diagonal entry on the diagonal")
        if p > q:
            p, q = q, p
        off[(p, q)] = off.get((p, q), Fraction(0)) + parse_rational(c)
    return LinearInequality(n, diag, off, parse_rational(rec.get("constant", 0)))
