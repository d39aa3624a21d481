"""Command-line entry point: ``qapfacets <subcommand> [options]``.

Each subcommand prints a JSON report; ``--out FILE`` also writes it to disk.
Exit codes: 0 success, 1 a verification failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
from pathlib import Path

from . import bounds, facets, hull, insufficiency, lemmas, linalg
from .perm import SizeError, enumerate_permutations, pair_label, vertex
from .report import RunReport, inequality_from_record, inequality_record

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None


def _read_instance(path: str) -> bounds.QapInstance:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return bounds.parse_qaplib(text, name=Path(path).stem)
    except bounds.ParseError as e:
        raise UsageError(f"{path}: {e}") from None


# --- subcommands ----------------------------------------------------------------
# each returns (report, ok)

def cmd_vertices(args) -> tuple[RunReport, bool]:
    n = args.n
    rows = []
    count = 0
    for sigma in enumerate_permutations(n):
        count += 1
        if args.limit is None or len(rows) < args.limit:
            ent = sorted(vertex(sigma).entries)
            rows.append({
                "permutation": sigma,
                "support": [f"{pair_label(p, n)},{pair_label(q, n)}" for p, q in ent],
            })
    rep = RunReport("vertices", {"n": n, "limit": args.limit}, {"count": count, "vertices": rows},
                    mode="exact", seed=None)
    return rep, True


def cmd_affine_dim(args) -> tuple[RunReport, bool]:
    n = args.n
    used = linalg.resolve_mode(args.mode, math.factorial(n))
    dim = hull.affine_dimension(n, mode=used, seed=args.seed, jobs=args.jobs)
    res = {"dimension": dim}
    ok = True
    if n >= 4:
        res["formula"] = hull.dimension_formula(n)
        res["matches_formula"] = dim == res["formula"]
        ok = res["matches_formula"]
    rep = RunReport("affine-dim", {"n": n, "mode": args.mode}, res, mode=used, seed=args.seed)
    return rep, ok


def cmd_check_equations(args) -> tuple[RunReport, bool]:
    n = args.n
    system = hull.build_equation_system(n, "canonical")
    checked, failures = hull.check_all_vertices(n, "canonical")
    decoded = 0
    decode_fail = []
    if n <= 5:
        for sigma in enumerate_permutations(n):
            got = hull.decode_01(vertex(sigma).full_matrix(), n)
            if got == sigma:
                decoded += 1
            else:
                decode_fail.append(sigma)
    res = {
        "equations": system.by_tag(),
        "vertices_checked": checked,
        "failures": failures[:20],
        "failure_count": len(failures),
        "decode_roundtrips": decoded if n <= 5 else None,
        "decode_failures": decode_fail[:20],
    }
    ok = not failures and not decode_fail
    return RunReport("check-equations", {"n": n}, res, mode="exact", seed=None), ok


def _family_term(family: str, n: int, m: int | None):
    if family == "nonneg":
        return facets.nonneg_formula(n)
    if family == "triple":
        return facets.family_formula_term(n, 2)
    return facets.family_formula_term(n, m or 3)


def cmd_gen_family(args) -> tuple[RunReport, bool]:
    n, fam, m = args.n, args.family, args.m
    members = []
    count = 0
    for g in facets.enumerate_family(fam, n, m):
        count += 1
        if not args.count_only and (args.limit is None or len(members) < args.limit):
            members.append(inequality_record(g))
    res = {"count": count, "formula_term": _family_term(fam, n, m)}
    if not args.count_only:
        res["inequalities"] = members
    params = {"n": n, "family": fam, "m": m, "count_only": args.count_only, "limit": args.limit}
    return RunReport("gen-family", params, res, mode="exact", seed=None), True


def cmd_certify(args) -> tuple[RunReport, bool]:
    n = args.n
    if args.ineq:
        ineq = inequality_from_record(_read_json(args.ineq))
        source = {"file": args.ineq}
    else:
        if args.family is None or args.index is None:
            raise UsageError("certify needs --ineq FILE or both --family and --index")
        ineq = None
        for t, g in enumerate(facets.enumerate_family(args.family, n, args.m)):
            if t == args.index:
                ineq = g
                break
        if ineq is None:
            raise UsageError(f"--index {args.index} is past the end of family {args.family} at n={n}")
        source = {"family": args.family, "index": args.index, "m": args.m}
    if ineq.n != n:
        raise UsageError(f"inequality is for n={ineq.n}, --n is {n}")
    cert = facets.certify(ineq, n, mode=args.mode, seed=args.seed, jobs=args.jobs)
    res = {
        "inequality": ineq,
        "valid": cert.valid,
        "min_value": cert.min_value,
        "tight_count": cert.tight_count,
        "tight_affine_dim": cert.tight_affine_dim,
        "polytope_dim": cert.polytope_dim,
        "verdict": cert.verdict,
    }
    params = {"n": n, "mode": args.mode, **source}
    return RunReport("certify", params, res, mode=cert.mode, seed=args.seed), cert.verdict == "facet"


def cmd_lemma_zero(args) -> tuple[RunReport, bool]:
    ok, failures = lemmas.zero_identity_sweep(args.n, args.trials, args.seed)
    rng = random.Random(args.seed)
    cfg = lemmas.random_config(args.n, rng)
    flipped_zero, _ = lemmas.verify_zero_identity(cfg, flip=0)
    res = {
        "trials": args.trials,
        "verified": ok,
        "failures": [{"base": c.base, "k": [t + 1 for t in c.k], "x": c.x + 1, "y": c.y + 1}
                     for c in failures],
        "negative_control_nonzero": not flipped_zero,
    }
    params = {"n": args.n, "trials": args.trials}
    return (RunReport("lemma-zero", params, res, mode="exact", seed=args.seed),
            ok == args.trials and not flipped_zero)


def cmd_connectivity(args) -> tuple[RunReport, bool]:
    data = _read_json(args.spec)
    records = data if isinstance(data, list) else data.get("specs", [data])
    rows = []
    ok = True
    for rec in records:
        try:
            spec = lemmas.TranspositionGraphSpec.from_record(rec)
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"bad spec {rec!r}: {e}") from None
        g = lemmas.build_transposition_graph(spec)
        connected, comps = lemmas.is_connected(g)
        row = {"spec": spec.to_record(), "nodes": g.number_of_nodes(),
               "connected": connected, "components": comps}
        if spec.mode == "lemma2" and connected and comps:
            row["eccentricity"] = lemmas.identity_eccentricity(g, spec.n)
            row["path_bound"] = lemmas.lemma2_path_bound(spec)
        if spec.mode != "free" and not connected:
            ok = False
        rows.append(row)
    return RunReport("connectivity", {"spec": args.spec}, {"graphs": rows}, mode="exact", seed=None), ok


def cmd_insufficiency(args) -> tuple[RunReport, bool]:
    n = args.n
    if not 2 <= n <= 6:
        raise UsageError("insufficiency runs for 2 <= n <= 6")
    res = {
        "basis_size": len(insufficiency.MonomialBasis(n)),
        "span_bound": insufficiency.span_dimension_bound(n),
        "permutations": math.factorial(n),
    }
    ok = True
    M = insufficiency.moment_matrix(n)
    used = linalg.resolve_mode("auto", M.shape[0])
    res["moment_rank"] = linalg.rank(M, mode=used, seed=args.seed, jobs=args.jobs)
    res["full_rank"] = res["moment_rank"] == M.shape[0]
    if n == 6:
        cert = insufficiency.dependence_certificate(n, points=args.points, seed=args.seed, with_rank=False)
        ints = cert.integer_alpha()
        res["certificate"] = {
            "support_size": len(cert.support),
            "terms": [{"permutation": s, "alpha": a} for s, a in zip(cert.support, ints)],
            "mixed_signs": cert.mixed_signs,
            "symbolic_zero": cert.residual_checked,
            "points_checked": cert.points_checked,
        }
        ok = cert.residual_checked and cert.points_checked == args.points and cert.mixed_signs
    if n >= 3:
        sss = insufficiency.check_sss_equivalence(n, seed=args.seed)
        res["sss_equivalence"] = {"equal": sss.equal, "rank_linear": sss.rank_linear,
                                  "rank_square": sss.rank_square, "rank_joint": sss.rank_joint,
                                  "spot_vectors": sss.spot_vectors}
        ok = ok and sss.equal
    params = {"n": n, "points": args.points}
    return RunReport("insufficiency", params, res, mode=used, seed=args.seed), ok


def cmd_bound(args) -> tuple[RunReport, bool]:
    inst = _read_instance(args.instance)
    fams = [f for f in args.cuts.split(",") if f] if args.cuts else []
    for f in fams:
        if f not in bounds.SEPARATION_FAMILIES:
            raise UsageError(f"unknown cut family {f!r}; choose from {','.join(bounds.SEPARATION_FAMILIES)}")
    try:
        rep = bounds.cutting_plane_bound(inst, fams, max_rounds=args.rounds, budget=args.budget,
                                         brute_force=args.brute_force, backend=args.backend,
                                         jobs=args.jobs)
    except bounds.SoundnessError as e:
        return RunReport("bound", {"instance": args.instance}, {"error": str(e)}, mode="float"), False
    res = {
        "instance": rep.instance,
        "n": rep.n,
        "status": rep.status,
        "rounds": [{"bound": r.bound, "cuts_added": r.cuts_added, "max_violation": r.max_violation}
                   for r in rep.rounds],
        "final_bound": rep.final_bound,
        "monotone": rep.is_monotone(),
        "cuts_by_family": {f: sum(1 for c in rep.cuts if c.family == f) for f in fams},
    }
    if rep.optimum is not None:
        res["optimum"] = rep.optimum
        res["optimum_permutation"] = rep.optimum_perm
        res["gap"] = rep.gap
    params = {"instance": args.instance, "cuts": fams, "rounds": args.rounds, "budget": args.budget,
              "brute_force": args.brute_force, "backend": args.backend}
    mode = "exact" if args.backend == "exact" else "float"
    ok = rep.status == "optimal" and rep.is_monotone()
    return RunReport("bound", params, res, mode=mode, seed=None, timings={"loop": rep.seconds}), ok


def cmd_solve_exact(args) -> tuple[RunReport, bool]:
    inst = _read_instance(args.instance)
    out = bounds.solve_exact(inst)
    res = {"n": inst.n, "optimum": out["optimum"], "permutation": out["permutation"],
           "lp_bound": out["lp_bound"]}
    ok = True
    if out["lp_bound"] is not None:
        res["lp_status"] = out["lp_status"]
        ok = out["lp_status"] == "optimal" and out["lp_bound"] <= out["optimum"]
    return RunReport("solve-exact", {"instance": args.instance}, res, mode="exact", seed=None), ok


COMMANDS = {
    "vertices": cmd_vertices,
    "affine-dim": cmd_affine_dim,
    "check-equations": cmd_check_equations,
    "gen-family": cmd_gen_family,
    "certify": cmd_certify,
    "lemma-zero": cmd_lemma_zero,
    "connectivity": cmd_connectivity,
    "insufficiency": cmd_insufficiency,
    "bound": cmd_bound,
    "solve-exact": cmd_solve_exact,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="FILE", help="also write the report to FILE")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker threads (default: machine parallelism)")
    common.add_argument("--seed", type=int, default=linalg.DEFAULT_SEED, help="random seed")

    parser = argparse.ArgumentParser(prog="qapfacets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("vertices", parents=[common], help="list the vertices for size n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--limit", type=int, default=24, help="vertices to print (count covers all)")

    p = sub.add_parser("affine-dim", parents=[common], help="affine dimension of the vertex set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("auto", "exact", "modp"), default="auto")

    p = sub.add_parser("check-equations", parents=[common], help="verify the hull equations on all vertices")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("gen-family", parents=[common], help="enumerate a facet family")
    p.add_argument("--family", choices=("nonneg", "triple", "mterm"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="pair count for mterm (default 3)")
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("certify", parents=[common], help="facet certificate for one inequality")
    p.add_argument("--n", type=int, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ineq", metavar="FILE", help="inequality JSON")
    src.add_argument("--family", choices=("nonneg", "triple", "mterm"))
    p.add_argument("--index", type=int, help="0-based position in the family stream")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--mode", choices=("auto", "exact", "modp"), default="auto")

    p = sub.add_parser("lemma-zero", parents=[common], help="twelve-term cancellation sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)

    p = sub.add_parser("connectivity", parents=[common], help="transposition-graph connectivity")
    p.add_argument("--spec", metavar="FILE", required=True)

    p = sub.add_parser("insufficiency", parents=[common], help="dependence among the quadratic forms")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--points", type=int, default=1000)

    p = sub.add_parser("bound", parents=[common], help="cutting-plane lower bound")
    p.add_argument("--instance", metavar="FILE", required=True)
    p.add_argument("--cuts", default="nonneg,triple,mterm")
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--backend", choices=bounds.BACKENDS, default="dense")

    p = sub.add_parser("solve-exact", parents=[common], help="brute-force optimum and exact LP bound")
    p.add_argument("--instance", metavar="FILE", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        parser.print_usage(sys.stderr)
        print("qapfacets: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        report, ok = COMMANDS[args.command](args)
    except (UsageError, SizeError, facets.FamilyError, lemmas.ConfigError, ValueError) as e:
        print(f"qapfacets {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    report.timings.setdefault("total", time.perf_counter() - t0)
    text = report.to_json()
    print(text)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as e:
            print(f"qapfacets: cannot write {args.out}: {e.strerror}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
