"""Command line interface: gen, decide, solve, verify, bench, census."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .generators import GENERATORS, Instance, planted, planted_beta
from .geom_core import default_tolerance
from .miniball import seb_radius
from .solver import (NOT_COVERABLE, ApproximateBySEB, SolverConfig,
                     beta_lower_bound, brute_force_decide, decide_cubic, decide_improved,
                     optimize_reference, solve)
from .surface_map import IntersectionBoundViolated, NoIntersection, short_arc_census

SCHEMA = "twocenter3d.report/1"


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.field = field


class EmptyInstance(ParseError):
    pass


def _parse_csv(text: str) -> Instance:
    pts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = [p.strip() for p in s.split(",")]
        if len(parts) < 3:
            missing = "xyz"[len(parts)]
            raise ParseError(f"missing {missing}", lineno, missing)
        if len(parts) > 3:
            raise ParseError("expected 3 fields", lineno)
        row = []
        for name, p in zip("xyz", parts):
            try:
                v = float(p)
            except ValueError:
                raise ParseError(f"not a number: {p!r}", lineno, name) from None
            if not math.isfinite(v):
                raise ParseError("coordinate is not finite", lineno, name)
            row.append(v)
        pts.append(row)
    if not pts:
        raise EmptyInstance("no points")
    return Instance(np.array(pts), {})


def _parse_json(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno) from None
    if not isinstance(obj, dict) or "points" not in obj:
        raise ParseError("expected an object with a 'points' array", field="points")
    pts = obj["points"]
    if not pts:
        raise EmptyInstance("no points")
    for k, p in enumerate(pts):
        if not isinstance(p, (list, tuple)) or len(p) != 3:
            raise ParseError(f"point {k} must have 3 coordinates", field=f"points[{k}]")
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in p):
            raise ParseError(f"point {k} has a non-finite coordinate", field=f"points[{k}]")
    return Instance(np.array(pts, dtype=float), dict(obj.get("meta", {})))


def parse_instance(source, fmt: str | None = None) -> Instance:
    """Read an instance from a path or a text stream; format from the suffix by default."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        path = str(source)
        if fmt is None:
            fmt = "json" if path.lower().endswith(".json") else "csv"
        with open(path) as fh:
            text = fh.read()
    else:
        text = source.read()
        if fmt is None:
            fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json":
        return _parse_json(text)
    raise ParseError(f"unknown format {fmt!r}")


def _instance_json(inst: Instance) -> dict:
    return {"points": inst.points.tolist(), "meta": inst.meta}


def _instance_csv(inst: Instance) -> str:
    buf = io.StringIO()
    for p in inst.points:
        buf.write(",".join(repr(float(v)) for v in p) + "\n")
    return buf.getvalue()


def _emit(report: dict, out) -> None:
    report = {"schema": SCHEMA, **report}
    out.write(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _config(args) -> SolverConfig:
    return SolverConfig(algorithm=args.algorithm, epsilon=getattr(args, "epsilon", 0.0),
                        rho=getattr(args, "rho", 2), seed=args.seed, engine=getattr(args, "engine", "miniball"))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, out) -> int:
    gen = GENERATORS[args.generator]
    kw = {}
    if args.generator == "planted":
        kw = {"radius": args.radius, "distance": args.distance}
    inst = gen(args.n, seed=args.seed, **kw)
    text = json.dumps(_instance_json(inst), default=_jsonable) + "\n" if args.format == "json" else _instance_csv(inst)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _emit({"command": "gen", "config": vars(args), "points": len(inst.points), "output": args.output}, out)
    else:
        out.write(text)
    return 0


def _decide(P, r, args):
    algo = args.algorithm
    if algo == "bruteforce":
        return brute_force_decide(P, r)
    if algo == "cubic":
        return decide_cubic(P, r, engine=args.engine, seed=args.seed)
    r0 = seb_radius(P)
    beta = args.beta
    if beta is None:
        if r >= r0 or len(P) < 2:
            return decide_cubic(P, r, engine=args.engine, seed=args.seed)
        beta = beta_lower_bound(r, r0)
    if algo == "auto" and beta < SolverConfig().beta_floor:
        return decide_cubic(P, r, engine=args.engine, seed=args.seed)
    return decide_improved(P, r, beta, check_bound=True)


def cmd_decide(args, out) -> int:
    inst = parse_instance(args.instance, args.format)
    t = time.perf_counter()
    res = _decide(inst.points, args.radius, args)
    wall = time.perf_counter() - t
    report = {"command": "decide", "config": {"radius": args.radius, "algorithm": args.algorithm,
                                              "beta": args.beta, "seed": args.seed},
              "outcome": {"variant": res.variant,
                          "witness": None if res.witness is None else [list(map(float, c)) for c in res.witness],
                          "partition": None if res.partition is None else [list(s) for s in res.partition]},
              "statistics": {**res.stats, "wall_time": wall}}
    if args.check:
        ref = brute_force_decide(inst.points, args.radius).variant
        report["oracle_check"] = "pass" if ref == res.variant else "fail"
    else:
        report["oracle_check"] = "skipped"
    _emit(report, out)
    return 1 if res.variant == NOT_COVERABLE else 0


def cmd_solve(args, out) -> int:
    inst = parse_instance(args.instance, args.format)
    cfg = _config(args)
    t = time.perf_counter()
    sol = solve(inst.points, cfg)
    wall = time.perf_counter() - t
    if isinstance(sol, ApproximateBySEB):
        body = {"approximate": True, "center": sol.ball.center.tolist(), "radius": sol.ball.radius,
                "r_reached": sol.r_reached}
        stats = {"wall_time": wall}
    else:
        body = {"approximate": False, "c1": list(map(float, sol.c1)), "c2": list(map(float, sol.c2)),
                "radius": sol.radius, "partition": [list(s) for s in sol.partition]}
        stats = {k: v for k, v in sol.meta.items()}
        stats["wall_time"] = wall
    report = {"command": "solve", "config": {"algorithm": cfg.algorithm, "epsilon": cfg.epsilon,
                                             "rho": cfg.rho, "seed": cfg.seed},
              "solution": body, "statistics": stats}
    if args.check and not body["approximate"]:
        ref = optimize_reference(inst.points).radius
        ok = abs(ref - body["radius"]) <= 1e-9 * max(1.0, ref)
        report["oracle_check"] = "pass" if ok else "fail"
    else:
        report["oracle_check"] = "skipped"
    _emit(report, out)
    return 0


def verify_solution(P, sol: dict, tol=None) -> tuple[bool, float]:
    """Every point within radius + tol of its assigned center (or of the single center)."""
    tol = tol or default_tolerance()
    r = float(sol["radius"])
    if sol.get("approximate"):
        d = np.linalg.norm(P - np.array(sol["center"]), axis=1)
        worst = float(d.max())
    else:
        c1, c2 = np.array(sol["c1"]), np.array(sol["c2"])
        d1 = np.linalg.norm(P - c1, axis=1)
        d2 = np.linalg.norm(P - c2, axis=1)
        if sol.get("partition"):
            s1, s2 = sol["partition"]
            worst = max([float(d1[i]) for i in s1] + [float(d2[i]) for i in s2] + [0.0])
            if len(s1) + len(s2) != len(P) or set(s1) & set(s2):
                return False, math.inf
        else:
            worst = float(np.minimum(d1, d2).max())
    return worst <= r + tol.margin(r), worst


def cmd_verify(args, out) -> int:
    inst = parse_instance(args.instance, args.format)
    with open(args.solution) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, e.lineno) from None
    sol = obj.get("solution", obj)
    if "radius" not in sol:
        raise ParseError("solution has no radius", field="radius")
    ok, worst = verify_solution(inst.points, sol)
    _emit({"command": "verify", "result": "pass" if ok else "fail", "max_distance": worst,
           "radius": sol["radius"]}, out)
    return 0 if ok else 1


def cmd_bench(args, out) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "seed", "algorithm", "cells", "M_vertices", "guesses", "micros", "outcome"])
    for n in args.n:
        for seed in range(args.seeds):
            inst = planted(n, seed=seed, distance=args.distance)
            P = inst.points
            r = inst.meta["planted_r"]
            for algo in args.algorithm:
                t = time.perf_counter()
                if algo == "improved":
                    beta = min(2.0, planted_beta(P, inst.meta["labels"], r))
                    if beta <= 0:
                        continue
                    res = decide_improved(P, r, beta)
                elif algo == "cubic":
                    res = decide_cubic(P, r)
                else:
                    res = brute_force_decide(P, r)
                micros = int((time.perf_counter() - t) * 1e6)
                w.writerow([n, seed, algo, res.stats.get("cells", 0), res.stats.get("M_vertices", 0),
                            res.stats.get("guesses", 0), micros, res.variant])
    return 0


def _census_config(rng):
    """q left of lam, a and b right of it; every other trial puts q near the midpoint of ab,
    where the outside arc of C_ab is short."""
    while True:
        a = np.array([rng.uniform(0, 1.5), rng.uniform(-1, 1), rng.uniform(-1, 1)])
        b = np.array([rng.uniform(0, 1.5), rng.uniform(-1, 1), rng.uniform(-1, 1)])
        if rng.random() < 0.5:
            q = np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1, 1), rng.uniform(-1, 1)])
        else:
            q = 0.5 * (a + b) + rng.normal(scale=0.4, size=3)
        right = min(a[0], b[0])
        if q[0] < right:
            return a, b, q, rng.uniform(q[0], right)


def lemma_census(trials: int, seed: int) -> dict:
    """Random configurations with lam separating q from a, b at r = 1; count short outside
    arcs with no endpoint right of lam."""
    rng = np.random.default_rng(seed)
    counts = {"trials": trials, "vacuous": 0, "short": 0, "long": 0, "violations": 0}
    for _ in range(trials):
        a, b, q, lam = _census_config(rng)
        try:
            rec = short_arc_census(a, b, q, 1.0, lam)
        except NoIntersection:
            counts["vacuous"] += 1
            continue
        if rec.short:
            counts["short"] += 1
        else:
            counts["long"] += 1
        if rec.violates:
            counts["violations"] += 1
    return counts


def cmd_census(args, out) -> int:
    counts = lemma_census(args.trials, args.seed)
    report = {"command": "census", "config": {"trials": args.trials, "seed": args.seed}, "lemma": counts}
    if args.runs:
        worst = 0
        for k in range(args.runs):
            inst = planted(12, seed=args.seed + k, distance=5.0)
            P = inst.points
            r = inst.meta["planted_r"]
            beta = min(2.0, planted_beta(P, inst.meta["labels"], r))
            res = decide_improved(P, r, beta, check_bound=True)
            worst = max(worst, res.stats["max_pair_hits"])
        report["pair_intersections"] = {"runs": args.runs, "max": worst, "bound": 3}
    _emit(report, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twocenter3d", description="Exact Euclidean 2-center in 3-space")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("--generator", choices=sorted(GENERATORS), default="planted")
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--distance", type=float, default=4.0)
    g.add_argument("--format", choices=["csv", "json"], default="csv")
    g.add_argument("-o", "--output")

    def common(sp, algorithms):
        sp.add_argument("instance")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--algorithm", choices=algorithms, default="auto")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--engine", choices=["miniball", "polytope"], default="miniball")
        sp.add_argument("--check", action="store_true", help="compare against the brute-force oracle")

    d = sub.add_parser("decide", help="three-way decision at a radius")
    common(d, ["auto", "cubic", "improved", "bruteforce"])
    d.add_argument("--radius", type=float, required=True)
    d.add_argument("--beta", type=float)

    s = sub.add_parser("solve", help="optimal radius and centers")
    common(s, ["auto", "cubic", "improved", "bruteforce"])
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--rho", type=int, default=2)

    v = sub.add_parser("verify", help="check a solution report against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--format", choices=["csv", "json"])

    b = sub.add_parser("bench", help="CSV scaling table of the decision procedures")
    b.add_argument("--n", type=int, nargs="+", default=[8, 12, 16])
    b.add_argument("--seeds", type=int, default=3)
    b.add_argument("--distance", type=float, default=5.0)
    b.add_argument("--algorithm", nargs="+", choices=["improved", "cubic", "bruteforce"],
                   default=["improved", "cubic"])

    c = sub.add_parser("census", help="randomized audit of the short-arc lemma")
    c.add_argument("--trials", type=int, default=10000)
    c.add_argument("--seed", type=int, default=7)
    c.add_argument("--runs", type=int, default=0, help="also run this many decisions checking pair crossings")
    return p


COMMANDS = {"gen": cmd_gen, "decide": cmd_decide, "solve": cmd_solve, "verify": cmd_verify,
            "bench": cmd_bench, "census": cmd_census}


def run_command(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        return COMMANDS[args.command](args, out)
    except (ParseError, OSError, ValueError) as e:
        err.write(f"error: {e}\n")
        return 2
    except (IntersectionBoundViolated, AssertionError) as e:
        err.write(f"internal assertion: {e}\n")
        return 3


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
