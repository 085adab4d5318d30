"""Command-line front end.

Commands: ``constant`` (one law, JSON out), ``bounds`` (bound reports),
``grid`` (contour-grid CSV over truncation mass coordinates), ``flood``
(screening study of the flood test model), ``selftest`` (golden suite).

Exit codes: 0 success, 1 selftest failure, 2 invalid spec or arguments,
3 numerical failure.  Errors are emitted as machine-readable JSON.
Values print with 6 significant digits by default (``--precision`` overrides);
spec echoes always print at full precision so they re-parse identically.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds, compute, dist, sa, selftest
from .dist import DistributionSpec, Family
from .errors import ArgumentError, DomainError, NotApplicableError, PoincareError

_THREADS_ENV = "POINCARE1D_THREADS"

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _round_sig(x, sig: int):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.{sig}g}")


def _round_tree(obj, sig: int):
    if isinstance(obj, dict):
        return {k: _round_tree(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v, sig) for v in obj]
    return _round_sig(obj, sig)


def _emit(payload: dict, precision: int):
    print(json.dumps(_round_tree(payload, precision), indent=2, sort_keys=True))


def _load_spec(path: str) -> DistributionSpec:
    try:
        if path == "-":
            raw = json.load(sys.stdin)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ArgumentError(f"cannot read spec {path!r}: {exc}") from exc
    return DistributionSpec.from_dict(raw)


def _bound_payload(d: DistributionSpec) -> dict:
    out = {}
    try:
        muck = bounds.muckenhoupt(d)
        out["muckenhoupt_lower"] = muck.lower
        out["muckenhoupt_upper"] = muck.upper
    except PoincareError as exc:
        out["muckenhoupt_error"] = str(exc)
    for name, fn in (("transport_doubleexp", bounds.transport_doubleexp_bound),
                     ("transport_logistic", bounds.transport_logistic_bound),
                     ("bakry_emery", bounds.bakry_emery_bound),
                     ("variance", bounds.variance_lower_bound)):
        try:
            out[name] = fn(d)
        except NotApplicableError:
            pass
        except PoincareError as exc:
            out[f"{name}_error"] = str(exc)
    return out


def _cmd_constant(args) -> int:
    spec = _load_spec(args.spec)
    payload = {"spec": spec.to_dict()}
    if args.method == "bounds":
        payload.update({"value": None, "method": "bounds",
                        "warning": "bounds only; no exact or FEM value requested"})
    else:
        try:
            est, _ = compute.poincare_constant(spec, method=args.method, tol=args.tol,
                                               max_elements=args.max_elements)
            payload.update({"value": est.value, "method": est.method.value,
                            "error_estimate": est.error_estimate,
                            "spectral_gap": est.spectral_gap})
        except (NotApplicableError, PoincareError) as exc:
            if args.method != "auto":
                raise
            payload.update({"value": None, "method": "bounds",
                            "warning": f"fell back to bounds only: {exc}"})
    payload["bounds"] = _bound_payload(spec)
    prec = args.precision
    out = _round_tree(payload, prec)
    out["spec"] = spec.to_dict()  # full precision, round-trips exactly
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_bounds(args) -> int:
    spec = _load_spec(args.spec)
    reports = []
    for rep in bounds.bound_reports(spec):
        reports.append({
            "method": rep.method.value,
            "lower": None if math.isinf(rep.lower) else rep.lower,  # null encodes the sentinel
            "upper": None if math.isinf(rep.upper) else rep.upper,
            "details": dict(rep.details),
        })
    payload = {"spec": spec.to_dict(), "reports": reports, "bounds": _bound_payload(spec)}
    out = _round_tree(payload, args.precision)
    out["spec"] = spec.to_dict()
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


@dataclass(frozen=True)
class GridRequest:
    """Truncation grid in probability-mass coordinates (F(a), 1 - F(b))."""

    spec: DistributionSpec
    fa_values: np.ndarray  # lower-tail masses
    fb_values: np.ndarray  # upper-tail masses 1 - F(b)

    def __post_init__(self):
        fa, fb = np.asarray(self.fa_values), np.asarray(self.fb_values)
        if len(fa) < 1 or len(fb) < 1 or len(fa) > 200 or len(fb) > 200:
            raise ArgumentError("grid resolution must be between 1 and 200 per axis")
        if np.any(fa <= 0) or np.any(fa >= 1) or np.any(fb <= 0) or np.any(fb >= 1):
            raise ArgumentError("axis values must lie strictly in (0, 1)")
        if float(fa.max() + fb.max()) >= 1.0:
            raise ArgumentError("infeasible cell: F(a) + (1 - F(b)) must stay below 1")


def _grid_cell(spec: DistributionSpec, fa: float, fb: float, tol: float):
    base = DistributionSpec(spec.family, spec.location, spec.scale)
    a = float(dist.quantile(base, fa))
    b = float(dist.quantile(base, 1.0 - fb))
    row = {"f_a": fa, "one_minus_f_b": fb, "status": "ok", "message": ""}
    try:
        cell = dist.truncate(base, a, b)
        est, _ = compute.poincare_constant(cell, method="auto", tol=tol)
        row.update({
            "c_p": est.value,
            "method": est.method.value,
            "lower_variance": bounds.variance_lower_bound(cell),
            "upper_transport_doubleexp": bounds.transport_doubleexp_bound(cell),
            "upper_transport_logistic": bounds.transport_logistic_bound(cell),
        })
    except PoincareError as exc:
        row.update({"status": "error", "message": str(exc), "c_p": "", "method": "",
                    "lower_variance": "", "upper_transport_doubleexp": "",
                    "upper_transport_logistic": ""})
    return row


_GRID_COLUMNS = ("f_a", "one_minus_f_b", "c_p", "method", "lower_variance",
                 "upper_transport_doubleexp", "upper_transport_logistic",
                 "status", "message")


def _cmd_grid(args) -> int:
    try:
        fam = Family(args.family)
    except ValueError:
        raise ArgumentError(f"unknown family {args.family!r}") from None
    spec = DistributionSpec(fam, args.location, args.scale)
    req = GridRequest(spec,
                      np.linspace(args.fa_min, args.fa_max, args.resolution),
                      np.linspace(args.fb_min, args.fb_max, args.resolution))
    cells = [(float(fa), float(fb)) for fa in req.fa_values for fb in req.fb_values]
    workers = max(1, int(os.environ.get(_THREADS_ENV, "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: _grid_cell(spec, c[0], c[1], args.tol), cells))
    else:
        rows = [_grid_cell(spec, fa, fb, args.tol) for fa, fb in cells]

    sig = args.precision
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_GRID_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:  # deterministic grid order after the parallel barrier
            writer.writerow({k: (_round_sig(v, sig) if isinstance(v, float) else v)
                             for k, v in row.items()})
    errors = sum(r["status"] != "ok" for r in rows)
    print(f"wrote {len(rows)} cells to {args.out} ({errors} error rows)")
    return EXIT_OK


def _scaled_laws_block() -> dict:
    """Constants and bounds for the standardized laws of the flood inputs."""
    block = {}
    laws = {
        "triangular(-1,1)": DistributionSpec(Family.TRIANGULAR),
        "normal(0,1)|[-1.875,inf)": DistributionSpec(Family.NORMAL, truncation=(-1.875, None)),
        "gumbel(0,1)|[-0.919,3.561]": DistributionSpec(
            Family.GUMBEL, truncation=((500.0 - 1013.0) / 558.0, (3000.0 - 1013.0) / 558.0)),
    }
    for label, spec in laws.items():
        est, _ = compute.poincare_constant(spec, method="auto", tol=1e-6)
        block[label] = {
            "upper_transport_doubleexp": bounds.transport_doubleexp_bound(spec),
            "upper_transport_logistic": bounds.transport_logistic_bound(spec),
            "poincare": est.value,
            "lower_variance": bounds.variance_lower_bound(spec),
        }
    return block


_FLOOD_CSV_COLUMNS = ("input", "nu", "nu_sd", "total_sobol", "sobol_sd", "poincare",
                      "poincare_method", "upper_bound", "bound_sd", "active")


def _cmd_flood(args) -> int:
    report = sa.screening_study(sa.flood_model(), sa.flood_inputs(), args.n,
                                threshold=args.threshold, seed=args.seed,
                                qmc=not args.plain_mc)
    payload = report.to_dict()
    payload["scaled_laws"] = _scaled_laws_block()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_FLOOD_CSV_COLUMNS)
            for item in report.inputs:
                writer.writerow([item.name, item.nu, item.nu_sd, item.total_sobol,
                                 item.sobol_sd, item.poincare, item.poincare_method,
                                 item.upper_bound, item.bound_sd, item.active])
    summary = {
        "scaled_laws": payload["scaled_laws"],
        "variance": report.variance,
        "active": [i.name for i in report.inputs if i.active],
        "inactive": [i.name for i in report.inputs if not i.active],
        "report": args.out,
    }
    _emit(summary, args.precision)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    results = selftest.run_selftest()
    print(selftest.format_results(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poincare1d",
        description="Poincare constants of truncated 1-D laws and DGSM screening bounds.")
    parser.add_argument("--precision", type=int, default=6,
                        help="significant digits for printed values (default 6)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant", help="compute C_P for a JSON-specified law")
    p.add_argument("spec", help="path to a JSON distribution spec, or - for stdin")
    p.add_argument("--method", choices=("auto", "exact", "fem", "bounds"), default="auto")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-elements", type=int, default=2 ** 20)
    p.set_defaults(func=_cmd_constant)

    p = sub.add_parser("bounds", help="closed-form bound reports for a law")
    p.add_argument("spec", help="path to a JSON distribution spec, or - for stdin")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("grid", help="CSV of constants over truncation-mass coordinates "
                                    "(columns: " + ",".join(_GRID_COLUMNS) + ")")
    p.add_argument("--family", required=True)
    p.add_argument("--location", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=20)
    p.add_argument("--fa-min", type=float, default=0.01)
    p.add_argument("--fa-max", type=float, default=0.45)
    p.add_argument("--fb-min", type=float, default=0.01)
    p.add_argument("--fb-max", type=float, default=0.45)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("flood", help="screening study of the flood test model")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--out", default="flood_report.json")
    p.add_argument("--csv", default=None,
                   help="optional per-input CSV (columns: " + ",".join(_FLOOD_CSV_COLUMNS) + ")")
    p.add_argument("--plain-mc", action="store_true",
                   help="plain Monte Carlo instead of the Halton sequence")
    p.set_defaults(func=_cmd_flood)

    p = sub.add_parser("selftest", help="run the golden reference suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ArgumentError, DomainError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_INVALID
    except PoincareError as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
