"""Command-line front end.  Machine-readable output goes to stdout or ``--out``; summaries go to stderr."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import decomp, grid, maximal, operators, testlib, verify
from .functionals import KINDS, MusielakSpec, eval_functional

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise UsageError(f"{where} is missing field '{key}'")
    return d[key]


def load_function(path: str, grid_override: Optional[str] = None) -> grid.SampledFunction:
    """Read a function spec (JSON), or raw cell values (``.csv`` / ``.bin``)."""
    p = Path(path)
    try:
        if p.suffix == ".csv":
            return grid.from_csv(p)
        if p.suffix == ".bin":
            return grid.from_binary(p)
        text = p.read_text()
    except OSError as e:
        raise UsageError(f"cannot read function spec {path}: {e.strerror or e}")
    except (ValueError, KeyError) as e:
        raise UsageError(f"bad raw function file {path}: {e}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"function spec {path} is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise UsageError(f"function spec {path} must be a JSON object")
    if grid_override:
        spec = grid.GridSpec.parse(grid_override)
    else:
        g = _require(doc, "grid", "function spec")
        if not isinstance(g, dict):
            raise UsageError("function spec field 'grid' must be an object")
        spec = grid.GridSpec.from_dict(g)
    if "values" in doc:
        return grid.SampledFunction(spec, doc["values"])
    family = _require(doc, "family", "function spec")
    params = doc.get("params", {}) or {}
    if family == "zero":
        return grid.zeros(spec)
    if family == "indicator":
        lo = _require(params, "lo", "params")
        hi = _require(params, "hi", "params")
        return grid.indicator(spec, lo, hi)
    if family not in testlib.FAMILIES:
        raise UsageError(f"function spec field 'family' has unknown value {family!r}")
    tf = testlib.TestFunction.make(family, dim=spec.dim, **params)
    return testlib.materialize(tf, spec)


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _radius_set(args, spec, local: bool):
    return maximal.RadiusSet.named(args.radii, spec, local=local)


def cmd_eval(args) -> int:
    f = load_function(args.function, args.grid)
    value = eval_functional(MusielakSpec(args.functional), f, log_cutoff=args.log_cutoff)
    _emit(f"{value!r}\n", args.out)
    return EXIT_OK


def cmd_maximal(args) -> int:
    f = load_function(args.function, args.grid)
    spec = f.spec
    if args.operator == "hl":
        M = maximal.hl_max(f, _radius_set(args, spec, False))
    elif args.operator == "local":
        M = maximal.local_max(f, _radius_set(args, spec, True))
    elif args.operator == "dyadic":
        M = maximal.dyadic_max(f)
    else:
        kernel = maximal.BumpKernel(args.kernel, spec.dim)
        local = args.operator == "smooth-local"
        scales = maximal.RadiusSet.named(args.radii, spec, local=local, include_single_cell=False)
        radii = tuple(r for r in scales.radii if r >= spec.h)
        scales = maximal.RadiusSet(radii, False, local)
        M = maximal.smooth_max(f, kernel, scales)
    _emit(grid.to_csv(M), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    f = load_function(args.function, args.grid)
    d = decomp.split(f)
    _emit(decomp.piece_table(d), args.out)
    print(f"local_llogl={decomp.local_llogl_sum(d)!r} amalgam={decomp.amalgam_entropy_sum(d)!r} "
          f"log_moment={decomp.log_moment_sum(d)!r} min_term={decomp.min_term_sum(d)!r}", file=sys.stderr)
    return EXIT_OK


def cmd_ttheta(args) -> int:
    f = load_function(args.function, args.grid)
    th = operators.make_theta(f.spec, args.theta)
    _emit(grid.to_csv(operators.t_theta(f, th)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = {"seed": args.seed, "count": args.count, "theta": args.theta, "kernel": args.kernel,
              "radii": args.radii, "constant": args.constant, "local_kernel": args.local_kernel}
    try:
        reports = verify.run_suite(args.suite, config)
    except KeyError as e:
        raise UsageError(str(e.args[0]))
    _emit(verify.reports_to_csv(reports), args.out)
    if args.json:
        Path(args.json).write_text(verify.reports_to_json(reports))
    if args.plot_dir:
        d = Path(args.plot_dir)
        d.mkdir(parents=True, exist_ok=True)
        for r in reports:
            (d / f"{r.experiment}.dat").write_text(r.gnuplot())
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_catalog(args) -> int:
    _emit(json.dumps(testlib.catalog_document(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardylab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, function=True):
        if function:
            p.add_argument("--function", required=True, help="function spec (.json) or raw values (.csv/.bin)")
        p.add_argument("--grid", help="override grid, e.g. dim=1,R=64,m=64")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("eval", help="evaluate a functional")
    common(p)
    p.add_argument("--functional", required=True, choices=sorted(KINDS))
    p.add_argument("--log-cutoff", type=float, default=None,
                   help="include the analytic tail up to ln(e+|x|) < this value")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("maximal", help="apply a maximal operator")
    common(p)
    p.add_argument("--operator", default="hl", choices=["hl", "local", "dyadic", "smooth", "smooth-local"])
    p.add_argument("--radii", default="quarter-octave", choices=["quarter-octave", "dense"])
    p.add_argument("--kernel", default="bump", choices=["box", "tent", "bump"])
    p.set_defaults(run=cmd_maximal)

    p = sub.add_parser("decompose", help="per-cube decomposition table")
    common(p)
    p.set_defaults(run=cmd_decompose)

    p = sub.add_parser("ttheta", help="apply the cancellation operator")
    common(p)
    p.add_argument("--theta", default="box", choices=["box", "smooth"])
    p.set_defaults(run=cmd_ttheta)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help=f"one of: {', '.join(sorted(verify.SUITES))}, all")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--json", help="also write the reports as JSON here")
    p.add_argument("--plot-dir", help="write two-column data files per experiment here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--radii", default="quarter-octave", choices=["quarter-octave", "dense"])
    p.add_argument("--theta", default="box", choices=["box", "smooth"])
    p.add_argument("--kernel", default="bump", choices=["box", "tent", "bump"])
    p.add_argument("--local-kernel", default=None, choices=["box", "tent", "bump"],
                   help="use the smooth local maximal function in local-h1")
    p.add_argument("--constant", default="literal", choices=["literal", "classical"],
                   help="constant in the dyadic level-set inequality")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("catalog", help="print the test-function catalog")
    p.add_argument("--out")
    p.set_defaults(run=cmd_catalog)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    try:
        return args.run(args)
    except UsageError as e:
        print(f"hardylab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as e:
        print(f"hardylab: error: missing field {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, grid.DomainError) as e:
        print(f"hardylab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
