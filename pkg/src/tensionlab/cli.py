"""Batch command line interface: verify / report / radial.

Exit codes: 0 all requested checks passed, 1 at least one check failed,
2 usage or configuration error, 3 numerical domain error.  Output on
stdout is byte-identical across runs with the same arguments and seed;
``--threads`` only changes how the work is scheduled, never the bytes.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys

import numpy as np

from .checks import CheckUsageError, run_verify
from .conformal import conformal_metric, predicted_tau_h, predicted_tau_v
from .exprlang import EvalDomainError, ExprSyntaxError, parse
from .geometry import GeometryError
from .jets import JetDomainError
from .radial import SingularBranchError, integrate_radial
from .scenes import SceneError, builtin, builtin_names, load
from .tension import tau_h, tau_v, tension_report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

FORMATS = ("text", "json", "csv")


def _fail(message: str) -> None:
    print(f"tensionlab: {message}", file=sys.stderr)


def resolve_scene(name_or_path: str):
    if name_or_path in builtin_names():
        return builtin(name_or_path)
    if os.path.exists(name_or_path):
        return load(name_or_path)
    raise SceneError(
        f"unknown scene {name_or_path!r}: not a builtin ({', '.join(builtin_names())}) and not a file"
    )


def _join(values) -> str:
    return ";".join(repr(float(v)) for v in np.asarray(values, dtype=float).ravel())


# -- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    scene = resolve_scene(args.scene)
    if args.checks == "all":
        selected = "all"
    else:
        selected = [c.strip() for c in args.checks.split(",") if c.strip()]
        if not selected:
            raise CheckUsageError("no checks requested")
    overrides = {}
    for item in args.tol_check or []:
        name, _, value = item.partition("=")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise CheckUsageError(f"bad tolerance override {item!r}, expected NAME=VALUE") from None
    results = run_verify(
        scene,
        checks=selected,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        tol_overrides=overrides,
        mu_override=args.mu,
        threads=args.threads,
    )
    failures = sum(1 for r in results if not r.passed)
    if args.format == "json":
        doc = {
            "command": "verify",
            "scene": scene.name,
            "samples": args.samples,
            "seed": args.seed,
            "results": [r.to_dict() for r in results],
            "summary": {"total": len(results), "failures": failures},
        }
        print(json.dumps(doc, sort_keys=True))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(
            ["check", "case", "scene", "point", "lhs_norm", "rhs_norm", "abs_error", "rel_error", "pass"]
        )
        for r in results:
            writer.writerow(
                [
                    r.check,
                    r.case,
                    r.scene,
                    _join(r.point),
                    repr(r.lhs_norm),
                    repr(r.rhs_norm),
                    repr(r.abs_error),
                    repr(r.rel_error),
                    "true" if r.passed else "false",
                ]
            )
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            point = ",".join(repr(c) for c in r.point)
            print(f"{status} {r.check}[{r.case}] point=({point}) abs={r.abs_error!r} rel={r.rel_error!r}")
        print(f"checks: {len(results)}, failures: {failures}")
    return EXIT_FAIL if failures else EXIT_OK


# -- report ----------------------------------------------------------------------


def _report_points(scene, args) -> list[np.ndarray]:
    points: list[np.ndarray] = []
    if args.point:
        for text in args.point:
            parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
            if len(parts) != scene.n:
                raise CheckUsageError(f"point {text!r} needs {scene.n} coordinates")
            x = np.array([float(p) for p in parts])
            if not scene.admissible(x):
                raise GeometryError(f"point {x.tolist()} outside scene domain")
            points.append(x)
    elif args.points_file:
        try:
            with open(args.points_file, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise SceneError(f"cannot read points file: {err}") from err
        for row in raw:
            x = np.asarray(row, dtype=float)
            if x.shape != (scene.n,):
                raise CheckUsageError(f"point {row!r} needs {scene.n} coordinates")
            if not scene.admissible(x):
                raise GeometryError(f"point {x.tolist()} outside scene domain")
            points.append(x)
    else:
        k = args.grid
        axes = [
            [lo + (i + 0.5) * (hi - lo) / k for i in range(k)]
            for lo, hi in scene.box
        ]
        for combo in itertools.product(*axes):
            x = np.array(combo)
            if scene.admissible(x):
                points.append(x)
    if not points:
        raise CheckUsageError("no admissible report points")
    return points


def _conformal_block(scene, mu, x) -> dict:
    g, dist = scene.metric, scene.distribution
    gt = conformal_metric(g, mu)
    mu_val = mu.evaluate(x).value
    th_direct = math.exp(4.0 * mu_val) * tau_h(gt, dist, x)
    th_pred = predicted_tau_h(g, dist, mu, x)
    tv_direct = math.exp(2.0 * mu_val) * tau_v(gt, dist, x)
    tv_pred = predicted_tau_v(g, dist, mu, x)

    def rel(a, b):
        a = np.asarray(a).ravel()
        b = np.asarray(b).ravel()
        return float(np.linalg.norm(a - b) / (1.0 + max(np.linalg.norm(a), np.linalg.norm(b))))

    return {
        "mu": mu.source,
        "tau_h_direct_scaled": th_direct,
        "tau_h_predicted": th_pred,
        "tau_h_residual": rel(th_direct, th_pred),
        "tau_v_direct_scaled": tv_direct,
        "tau_v_predicted": tv_pred,
        "tau_v_residual": rel(tv_direct, tv_pred),
    }


def cmd_report(args) -> int:
    scene = resolve_scene(args.scene)
    points = _report_points(scene, args)
    mu = parse(args.mu, scene.coordinates) if args.mu else scene.mu
    rows = []
    for x in points:
        rep = tension_report(scene.metric, scene.distribution, x)
        extra = _conformal_block(scene, mu, x) if mu is not None else None
        rows.append((rep, extra))
    if args.format == "json":
        docs = []
        for rep, extra in rows:
            doc = {
                "point": rep.point.tolist(),
                "h_sigma": rep.h_sigma.tolist(),
                "h_sigma_perp": rep.h_perp.tolist(),
                "h": rep.h.tolist(),
                "tau_h": rep.tau_h.tolist(),
                "tau_v": rep.tau_v.tolist(),
                "norms": {
                    "h_sigma": rep.h_sigma_norm,
                    "h_sigma_perp": rep.h_perp_norm,
                    "h": rep.h_norm,
                    "tau_h": rep.tau_h_norm,
                    "tau_v": rep.tau_v_norm,
                },
            }
            if extra is not None:
                doc["conformal"] = {
                    k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in extra.items()
                }
            docs.append(doc)
        print(json.dumps({"command": "report", "scene": scene.name, "reports": docs}, sort_keys=True))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        header = [
            "point", "h_sigma", "h_sigma_perp", "h", "tau_h", "tau_v",
            "h_sigma_norm", "h_sigma_perp_norm", "h_norm", "tau_h_norm", "tau_v_norm",
        ]
        if rows and rows[0][1] is not None:
            header += [
                "mu", "tau_h_direct_scaled", "tau_h_predicted", "tau_h_residual",
                "tau_v_direct_scaled", "tau_v_predicted", "tau_v_residual",
            ]
        writer.writerow(header)
        for rep, extra in rows:
            row = [
                _join(rep.point), _join(rep.h_sigma), _join(rep.h_perp), _join(rep.h),
                _join(rep.tau_h), _join(rep.tau_v),
                repr(rep.h_sigma_norm), repr(rep.h_perp_norm), repr(rep.h_norm),
                repr(rep.tau_h_norm), repr(rep.tau_v_norm),
            ]
            if extra is not None:
                row += [
                    extra["mu"], _join(extra["tau_h_direct_scaled"]), _join(extra["tau_h_predicted"]),
                    repr(extra["tau_h_residual"]), _join(extra["tau_v_direct_scaled"]),
                    _join(extra["tau_v_predicted"]), repr(extra["tau_v_residual"]),
                ]
            writer.writerow(row)
    else:
        for rep, extra in rows:
            point = ",".join(repr(float(c)) for c in rep.point)
            print(f"point ({point})")
            print(f"  H_sigma      = {rep.h_sigma.tolist()!r}  |.|_g = {rep.h_sigma_norm!r}")
            print(f"  H_sigma_perp = {rep.h_perp.tolist()!r}  |.|_g = {rep.h_perp_norm!r}")
            print(f"  tau_h        = {rep.tau_h.tolist()!r}  |.|_g = {rep.tau_h_norm!r}")
            print(f"  tau_v        = {rep.tau_v.tolist()!r}  |.|_F = {rep.tau_v_norm!r}")
            if extra is not None:
                print(f"  conformal factor mu = {extra['mu']}")
                print(f"    e^4mu tau_h(tilde) = {extra['tau_h_direct_scaled'].tolist()!r}")
                print(f"    predicted          = {extra['tau_h_predicted'].tolist()!r}  (rel {extra['tau_h_residual']!r})")
                print(f"    e^2mu tau_v(tilde) = {extra['tau_v_direct_scaled'].tolist()!r}")
                print(f"    predicted          = {extra['tau_v_predicted'].tolist()!r}  (rel {extra['tau_v_residual']!r})")
    return EXIT_OK


# -- radial ----------------------------------------------------------------------


def cmd_radial(args) -> int:
    try:
        lo_text, _, hi_text = args.r.partition(":")
        r0, r1 = float(lo_text), float(hi_text)
    except ValueError:
        _fail(f"bad --r range {args.r!r}, expected LO:HI")
        return EXIT_USAGE
    if args.steps < 1:
        _fail("--steps must be at least 1")
        return EXIT_USAGE
    if args.D <= 0:
        _fail("--D must be positive")
        return EXIT_USAGE
    try:
        rows = integrate_radial(args.C, r0, r1, (r1 - r0) / args.steps)
    except ValueError as err:
        _fail(str(err))
        return EXIT_USAGE
    max_abs = max(r.abs_error for r in rows)
    max_res = max(abs(r.ode_residual) for r in rows)
    summary = {
        "C": args.C,
        "D": args.D,
        "r0": r0,
        "r1": r1,
        "steps": args.steps,
        "max_abs_error": max_abs,
        "max_ode_residual": max_res,
    }
    flat = args.C == 1.0 and args.D == 0.5
    if flat:
        summary["note"] = "rescaled metric is flat (Euclidean recovery)"
    if args.format == "json":
        doc = {
            "command": "radial",
            "rows": [
                {
                    "r": r.r,
                    "f_numeric": r.f_numeric,
                    "f_closed": r.f_closed,
                    "abs_error": r.abs_error,
                    "ode_residual": r.ode_residual,
                }
                for r in rows
            ],
            "summary": summary,
        }
        print(json.dumps(doc, sort_keys=True))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["r", "f_numeric", "f_closed", "abs_error", "ode_residual"])
        for r in rows:
            writer.writerow([repr(r.r), repr(r.f_numeric), repr(r.f_closed), repr(r.abs_error), repr(r.ode_residual)])
        print(
            f"# max_abs_error={max_abs!r} max_ode_residual={max_res!r}"
            + (" flat" if flat else ""),
            file=sys.stderr,
        )
    else:
        print(f"{'r':>12} {'f_numeric':>22} {'f_closed':>22} {'abs_error':>12}")
        for r in rows:
            print(f"{r.r:12.6f} {r.f_numeric:22.15e} {r.f_closed:22.15e} {r.abs_error:12.3e}")
        print(f"max |f_numeric - f_closed| = {max_abs!r}")
        print(f"max closed-form ODE residual = {max_res!r}")
        if flat:
            print("note: C=1, D=0.5 rescales to the flat (Euclidean) metric")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _default_threads() -> int:
    raw = os.environ.get("TENSIONLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensionlab",
        description="Verify tension-field and conformal-deformation identities on chart scenes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run identity checks at seeded sample points")
    pv.add_argument("--scene", required=True, help="builtin scene name or scene JSON path")
    pv.add_argument("--checks", default="all", help="comma-separated check names, or 'all'")
    pv.add_argument("--samples", type=int, default=100)
    pv.add_argument("--seed", type=int, default=7)
    pv.add_argument("--tol", type=float, default=None, help="override the default tolerance of every check")
    pv.add_argument("--tol-check", action="append", metavar="NAME=VALUE", help="per-check tolerance override")
    pv.add_argument("--mu", default=None, help="conformal factor expression (overrides the scene's)")
    pv.add_argument("--format", choices=FORMATS, default="text")
    pv.add_argument("--threads", type=int, default=_default_threads())
    pv.set_defaults(func=cmd_verify)

    pr = sub.add_parser("report", help="per-point tension report")
    pr.add_argument("--scene", required=True)
    pr.add_argument("--point", action="append", help="explicit point 'x,y' (repeatable)")
    pr.add_argument("--points-file", default=None, help="JSON file with an array of points")
    pr.add_argument("--grid", type=int, default=3, help="grid resolution per axis (cell centers)")
    pr.add_argument("--mu", default=None, help="conformal factor expression (overrides the scene's)")
    pr.add_argument("--format", choices=FORMATS, default="text")
    pr.set_defaults(func=cmd_report)

    pd = sub.add_parser("radial", help="radial ODE study: RK4 against the closed form")
    pd.add_argument("--C", type=float, required=True, help="family branch parameter")
    pd.add_argument("--D", type=float, default=1.0, help="factor scale parameter (positive)")
    pd.add_argument("--r", default="1:2", metavar="LO:HI", help="radius range, LO must be > 0")
    pd.add_argument("--steps", type=int, default=1000)
    pd.add_argument("--format", choices=FORMATS, default="text")
    pd.set_defaults(func=cmd_radial)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CheckUsageError as err:
        _fail(str(err))
        return EXIT_USAGE
    except (SceneError, ExprSyntaxError) as err:
        _fail(str(err))
        return EXIT_USAGE
    except (EvalDomainError, JetDomainError, GeometryError, SingularBranchError) as err:
        _fail(str(err))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
