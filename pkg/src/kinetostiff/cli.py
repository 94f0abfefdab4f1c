"""Command-line front end.

Exit codes: 0 success, 1 computational error (unreachable point, singular
matrix, failed validation suite), 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import orthoglide as og
from . import procrustes
from .errors import DataError, InputError, StiffnessError, StructuralError
from .validation import run_all

EVAL_SCHEMA = "kinetostiff.stiffness-report/1"
MAP_SCHEMA = "kinetostiff.stiffness-map/1"
COMPARE_SCHEMA = "kinetostiff.compare/1"
COMPLIANCE_SCHEMA = "kinetostiff.compliance/1"
VALIDATE_SCHEMA = "kinetostiff.validate/1"
MAP_COLUMNS = ("x", "y", "z", "k_tran", "k_rot", "rank_Km", "status")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


def parse_point(text: str) -> np.ndarray:
    """``x,y,z`` in mm, or one of the named points Q0, Q1, Q2."""
    if text.upper() in og.POINTS:
        return np.array(og.POINTS[text.upper()], dtype=float)
    parts = text.split(",")
    try:
        p = np.array([float(v) for v in parts])
    except ValueError:
        raise InputError(f"point must be x,y,z or a named point, got {text!r}") from None
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InputError(f"point must be three finite numbers, got {text!r}")
    return p


def _fmt(v) -> str:
    return "nan" if v is None else f"{v:.16e}"


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _setup(args, variant=None, extended=None):
    data, springs = og.load_config(args.config)
    if extended is None:
        extended = getattr(args, "extended", False)
    geom = og.geometry_from_dict(
        data,
        variant=variant or args.variant,
        kappa_f=getattr(args, "kf", None),
        axis_flexibility=True if extended else None,
    )
    return geom, springs


def cmd_eval(args) -> int:
    geom, springs = _setup(args)
    rep = og.evaluate_stiffness(geom, parse_point(args.point), springs)
    doc = {"schema": EVAL_SCHEMA, "geometry": {"L": geom.L, "r": geom.r, "d": geom.d}, **rep.to_dict()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def map_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={MAP_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MAP_COLUMNS)
    for row in rows:
        rep = row.report
        w.writerow([
            *(_fmt(v) for v in row.point),
            _fmt(rep.k_tran if rep else None),
            _fmt(rep.k_rot if rep else None),
            rep.rank_Km if rep else "",
            row.status,
        ])
    return buf.getvalue()


def cmd_map(args) -> int:
    geom, springs = _setup(args)
    points = og.grid_points(og.parse_grid(args.grid))
    rows = og.workspace_map(geom, points, springs, workers=args.workers)
    text = map_csv(rows)
    side = {
        "schema": MAP_SCHEMA,
        "variant": geom.variant,
        "geometry": {"L": geom.L, "r": geom.r, "d": geom.d},
        "points": [
            {"index": r.index, "status": r.status, "message": r.message, **(r.report.to_dict() if r.report else {"point": r.point.tolist()})}
            for r in rows
        ],
    }
    if args.out:
        _emit(text, args.out)
        _emit(json.dumps(side, indent=1) + "\n", str(Path(args.out).with_suffix(".json")))
    else:
        _emit(text, None)
    return EXIT_OK


def cmd_compare(args) -> int:
    names = args.points.split(";") if args.points else list(og.POINTS)
    rows = []
    for name in names:
        p = parse_point(name)
        entry = {"point": name, "xyz": p.tolist()}
        for variant in og.VARIANTS:
            # axis flexibility only exists in the parallelogram leg
            geom, springs = _setup(args, variant=variant, extended=args.extended and variant == "prpar")
            rep = og.evaluate_stiffness(geom, p, springs)
            entry[variant] = {"k_tran": rep.k_tran, "k_rot": rep.k_rot, "rank_Km": rep.rank_Km}
        a, b = entry["puu"]["k_rot"], entry["prpar"]["k_rot"]
        entry["k_rot_ratio_puu_over_prpar"] = a / b if a and b else None
        rows.append(entry)
    if args.format == "json":
        _emit(json.dumps({"schema": COMPARE_SCHEMA, "rows": rows}, indent=2) + "\n", args.out)
    else:
        lines = [f"# schema={COMPARE_SCHEMA}", f"{'point':>8} {'PUU k_tran':>12} {'PUU k_rot':>12} {'PRPaR k_tran':>13} {'PRPaR k_rot':>12} {'ratio':>7}"]
        for e in rows:
            u, v = e["puu"], e["prpar"]
            ratio = e["k_rot_ratio_puu_over_prpar"]
            lines.append(
                f"{e['point']:>8} {u['k_tran'] or float('nan'):12.4e} {u['k_rot'] or float('nan'):12.4e} "
                f"{v['k_tran'] or float('nan'):13.4e} {v['k_rot'] or float('nan'):12.4e} {ratio or float('nan'):7.2f}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_fit_compliance(args) -> int:
    if len(args.datasets) != 6:
        raise InputError(f"need six datasets (one per load case), got {len(args.datasets)}")
    p0 = parse_point(args.p0) if args.p0 else None
    sets = [procrustes.read_dataset(path, p0=p0) for path in args.datasets]
    try:
        k = procrustes.build_compliance(sets)
    except InputError as exc:
        # a missing or repeated load case is a defect of the data files
        raise DataError(str(exc)) from None
    doc = {"schema": COMPLIANCE_SCHEMA, args.key: k.tolist()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    data, _ = _raw_config(args.config)
    results = run_all(data, seed=args.seed)
    width = max(len(r.name) for r in results)
    lines = [f"# schema={VALIDATE_SCHEMA}"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  {r.name:<{width}}  max_err={r.max_error:.3e}  tol={r.tolerance:.0e}  {r.detail}".rstrip())
    failed = [r.name for r in results if not r.passed]
    lines.append("all suites passed" if not failed else "failing: " + ", ".join(failed))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if not failed else EXIT_COMPUTE


def _raw_config(path):
    # validation must see a bad matrix itself rather than fail while loading
    if path is None:
        return og.load_config(None)
    try:
        return json.loads(Path(path).read_text()), None
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinetostiff", description="Stiffness analysis of Orthoglide-type manipulators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, variant=True):
        p.add_argument("--config", help="geometry + spring config JSON (default: bundled prototype)")
        p.add_argument("--out", help="output file (default: stdout)")
        if variant:
            p.add_argument("--variant", choices=og.VARIANTS, help="override the config's variant")
        p.add_argument("--kf", type=float, help="fictitious swing stiffness of the parallelogram [N/mm]")
        p.add_argument("--extended", action="store_true", help="include parallelogram axis flexibility")

    p = sub.add_parser("eval", help="stiffness report at one point")
    common(p)
    p.add_argument("--point", required=True, help="x,y,z in mm or Q0/Q1/Q2")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("map", help="compliance summaries over a grid")
    common(p)
    p.add_argument("--grid", required=True, help="xmin:xmax:n,ymin:ymax:n,zmin:zmax:n (write --grid=... when xmin is negative)")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: CPU count)")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; maps are deterministic")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("compare", help="PUU vs PRPaR at shared points")
    common(p, variant=False)
    p.add_argument("--points", help="';'-separated points (x,y,z or Q0/Q1/Q2); default Q0;Q1;Q2")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fit-compliance", help="6x6 compliance from six displacement datasets")
    p.add_argument("datasets", nargs="+", help="six node CSV files, each with a JSON sidecar naming its load")
    p.add_argument("--p0", help="reference point x,y,z (default: from the sidecars)")
    p.add_argument("--key", default="k", help="config key to store the matrix under")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_fit_compliance)

    p = sub.add_parser("validate", help="run the built-in invariant suites")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, StructuralError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StiffnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
