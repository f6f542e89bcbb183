"""Command-line front end: ``deepcore depth|check|pca|ddplot|bench``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .api import METHODS, compute_depth
from .applications import dd_plot, robust_pca
from .errors import DegeneracyDetected, DimensionError
from .geometry import DEFAULT_PERTURBATION, PointCloud

EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_DEGENERATE = 4

DEPTH_SCHEMA = {
    "type": "object",
    "required": ["depth", "depth_rational", "count", "n", "d", "method", "witness_direction",
                 "cones_visited", "lp_calls", "lp_cache_hits", "generations"],
    "properties": {
        "depth": {"type": "number", "minimum": 0, "maximum": 1},
        "depth_rational": {"type": "string", "pattern": r"^\d+/\d+$"},
        "count": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "method": {"enum": list(METHODS)},
        "witness_direction": {"type": ["array", "null"], "items": {"type": "number"}},
        "cones_visited": {"type": "integer", "minimum": 0},
        "lp_calls": {"type": "integer", "minimum": 0},
        "lp_cache_hits": {"type": "integer", "minimum": 0},
        "generations": {"type": "integer", "minimum": 0},
        "perturbed": {"type": "boolean"},
        "wall_time_ms": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}


class InputError(Exception):
    """Unreadable or malformed input file / argument."""


def _num(x: float) -> float:
    """Round to 12 significant digits so the text form is stable."""
    return float(f"{x:.12g}")


def read_points(path: str) -> np.ndarray:
    """One point per line, comma-separated; a non-numeric first line is a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    width = {len(r) for r in data}
    if len(width) != 1:
        raise InputError(f"{path}: rows have differing lengths {sorted(width)}")
    arr = np.array(data)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: non-finite value")
    return arr


def parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(c) for c in text.split(",")])
    except ValueError as exc:
        raise InputError(f"bad point {text!r}: {exc}") from exc


def parse_int_list(text: str) -> list[int]:
    """'2,3' or '8..14' or a mix such as '5,8..10'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        keys = list(report)
        out.write("\t".join(keys) + "\n")
        out.write("\t".join(_tsv_value(report[k]) for k in keys) + "\n")


def _tsv_value(v) -> str:
    if isinstance(v, list):
        return ",".join(_tsv_value(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def depth_report(result, d: int, wall_ms: float | None = None) -> dict:
    diag = result.diagnostics
    w = result.witness_direction
    report = {
        "depth": _num(float(result.depth)),
        "depth_rational": result.rational,
        "count": result.count,
        "n": result.n,
        "d": d,
        "method": result.method,
        "witness_direction": None if w is None else [_num(x) for x in w],
        "cones_visited": diag.cones_visited,
        "lp_calls": diag.lp_calls,
        "lp_cache_hits": diag.cache_hits,
        "generations": diag.generations,
        "perturbed": diag.perturbed,
    }
    if wall_ms is not None:
        report["wall_time_ms"] = round(wall_ms, 3)
    return report


def cmd_depth(args, out) -> int:
    data = read_points(args.data)
    z = parse_point(args.point)
    if z.size != data.shape[1]:
        raise DimensionError(f"point has {z.size} coordinates, data has d={data.shape[1]}")
    t0 = time.perf_counter()
    result = compute_depth(PointCloud(data), z, args.method, seed=args.seed,
                           perturb_magnitude=args.perturb, approx_directions=args.approx_dirs,
                           skip_hull_precheck=args.skip_precheck)
    wall = (time.perf_counter() - t0) * 1e3 if args.timing else None
    _emit(depth_report(result, data.shape[1], wall), args.format, out)
    return 0


def check_instance(seed: int, d: int, n: int, rep: int):
    """The seeded random (cloud, query) pair used by ``check`` and the tests."""
    rng = np.random.default_rng([seed, d, n, rep])
    x = rng.standard_normal((n, d))
    z = x.mean(axis=0) + 0.5 * rng.standard_normal(d)
    return x, z


def run_check(dims, sizes, reps, seed=0, invert_facet=False, timing=False, err=None):
    """Cross-validate the cone search against the oracles on a seeded grid."""
    err = err or sys.stderr
    instances, skipped, table = [], [], []
    mismatches = 0
    for d in dims:
        for n in sizes:
            if n < d + 2:
                skipped.append({"d": d, "n": n})
                err.write(f"notice: skipping d={d}, n={n} (needs n >= d + 2)\n")
                continue
            spent = {"exact": 0.0, "comb": 0.0, "planar": 0.0}
            bad = 0
            for rep in range(reps):
                x, z = check_instance(seed, d, n, rep)
                cloud = PointCloud(x)
                counts = {}
                for method in ("exact", "comb") + (("planar",) if d == 2 else ()):
                    t0 = time.perf_counter()
                    res = compute_depth(cloud, z, method, seed=rep,
                                        invert_facet=invert_facet and method == "exact")
                    spent[method] += time.perf_counter() - t0
                    counts[method] = res.count
                    if method == "exact":
                        diag = res.diagnostics
                ok = len(set(counts.values())) == 1
                bad += not ok
                instances.append({"d": d, "n": n, "rep": rep, **counts, "match": ok,
                                  "cones_visited": diag.cones_visited, "lp_calls": diag.lp_calls,
                                  "lp_cache_hits": diag.cache_hits,
                                  "generations": diag.generations,
                                  "generation_cap": (n + 2) // 2})
            mismatches += bad
            row = {"d": d, "n": n, "reps": reps, "mismatches": bad}
            if timing:
                row.update({f"{k}_ms": round(v / reps * 1e3, 3)
                            for k, v in spent.items() if v})
            table.append(row)
    return {"mismatches": mismatches, "instances": instances, "table": table, "skipped": skipped}


def cmd_check(args, out) -> int:
    report = run_check(parse_int_list(args.dims), parse_int_list(args.sizes), args.reps,
                       args.seed, args.invert_facet, args.timing)
    if args.format == "json":
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        keys = list(report["table"][0]) if report["table"] else ["d", "n", "reps", "mismatches"]
        out.write("\t".join(keys) + "\n")
        for row in report["table"]:
            out.write("\t".join(str(row[k]) for k in keys) + "\n")
        out.write(f"mismatches\t{report['mismatches']}\n")
    return EXIT_MISMATCH if report["mismatches"] else 0


def cmd_pca(args, out) -> int:
    data = read_points(args.data)
    res = robust_pca(PointCloud(data), args.method, seed=args.seed,
                     perturb_magnitude=args.perturb) if args.method != "approx" else \
        robust_pca(PointCloud(data), "approx", seed=args.seed, approx_directions=args.approx_dirs)
    report = {
        "method": args.method,
        "n": int(data.shape[0]),
        "d": int(data.shape[1]),
        "eigenvectors": [[_num(x) for x in col] for col in res.eigenvectors.T],
        "singular_values": [_num(x) for x in res.singular_values],
        "center": [_num(x) for x in res.center],
        "depths": [f"{int(c)}/{res.field.n}" for c in res.field.counts],
    }
    if args.format == "json":
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        for i, col in enumerate(report["eigenvectors"]):
            out.write("\t".join(["eigenvector", str(i + 1)] + [str(x) for x in col]) + "\n")
        out.write("\t".join(["singular_values"] + [str(x) for x in report["singular_values"]]) + "\n")
        out.write("\t".join(["center"] + [str(x) for x in report["center"]]) + "\n")
        for i, dep in enumerate(report["depths"]):
            out.write(f"depth\t{i}\t{dep}\n")
    return 0


def cmd_ddplot(args, out) -> int:
    x1, x2 = read_points(args.data1), read_points(args.data2)
    if x1.shape[1] != x2.shape[1]:
        raise DimensionError(f"class dimensions differ: {x1.shape[1]} vs {x2.shape[1]}")
    plot = dd_plot(x1, x2, args.method, seed=args.seed, perturb_magnitude=args.perturb) \
        if args.method != "approx" else \
        dd_plot(x1, x2, "approx", seed=args.seed, approx_directions=args.approx_dirs)
    if args.format == "json":
        rows = [{"D1": _num(a), "D2": _num(b), "label": int(lab)}
                for (a, b), lab in zip(plot.coordinates, plot.labels)]
        out.write(json.dumps({"n1": plot.sizes[0], "n2": plot.sizes[1], "rows": rows},
                             indent=2) + "\n")
    else:
        out.write("D1\tD2\tlabel\n")
        for (a, b), lab in zip(plot.coordinates, plot.labels):
            out.write(f"{_num(a)!r}\t{_num(b)!r}\t{int(lab)}\n")
    return 0


def cmd_bench(args, out) -> int:
    report = run_check(parse_int_list(args.dims), parse_int_list(args.sizes), args.reps,
                       args.seed, timing=True)
    keys = ["d", "n", "reps", "exact_ms", "comb_ms", "planar_ms"]
    out.write("\t".join(keys) + "\n")
    for row in report["table"]:
        out.write("\t".join(str(row.get(k, "")) for k in keys) + "\n")
    return EXIT_MISMATCH if report["mismatches"] else 0


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("DEEPCORE_SEED", "0"))
    parser = argparse.ArgumentParser(prog="deepcore", description="Exact Tukey depth via cone search.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, methods=True):
        p.add_argument("--seed", type=int, default=default_seed,
                       help="RNG seed (default: $DEEPCORE_SEED or 0)")
        p.add_argument("--format", choices=("json", "tsv"), default="json")
        p.add_argument("--timing", action="store_true", help="include wall-clock timings")
        if methods:
            p.add_argument("--method", choices=METHODS, default="exact")
            p.add_argument("--approx-dirs", type=int, default=1000)
            p.add_argument("--perturb", type=float, default=DEFAULT_PERTURBATION)

    p = sub.add_parser("depth", help="depth of one point")
    p.add_argument("--data", required=True)
    p.add_argument("--point", required=True, help='comma-separated, e.g. "0,0"')
    p.add_argument("--skip-precheck", action="store_true")
    common(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("check", help="cross-validate against the oracles")
    p.add_argument("--dims", default="2,3")
    p.add_argument("--sizes", default="8..14")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--invert-facet", action="store_true", help=argparse.SUPPRESS)
    common(p, methods=False)
    p.set_defaults(func=cmd_check, format="tsv")

    p = sub.add_parser("pca", help="depth-based robust PCA")
    p.add_argument("--data", required=True)
    common(p)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("ddplot", help="DD-plot coordinates of two classes")
    p.add_argument("--data1", required=True)
    p.add_argument("--data2", required=True)
    common(p)
    p.set_defaults(func=cmd_ddplot, format="tsv")

    p = sub.add_parser("bench", help="timing grid")
    p.add_argument("--dims", default="2,3")
    p.add_argument("--sizes", default="8,10,12,14")
    p.add_argument("--reps", type=int, default=10)
    common(p, methods=False)
    p.set_defaults(func=cmd_bench, format="tsv")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "method", None) == "approx" and args.approx_dirs < 1:
        sys.stderr.write("error: --approx-dirs must be >= 1\n")
        return EXIT_PARSE
    try:
        return args.func(args, out)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except DimensionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DIMENSION
    except DegeneracyDetected as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DEGENERATE


def run(argv=None) -> str:
    """Run the CLI in-process and return what it printed (for tests/scripts)."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
