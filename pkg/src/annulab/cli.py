"""Command line front end for the annulus laboratory.

Subcommands: ``solve``, ``torsion``, ``symmetry-check``, ``shape-derivative``,
``sweep``, ``dn-analyze``, ``converge``.  Exit codes: 0 success, 2 validation
error, 3 solver non-convergence, 4 failed assertion suite.  A JSON config
file may preload any flag defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checks import geometry_report
from .eigensolver import SolverConvergenceError
from .export import write_json
from .fem import ProblemKind
from .geometry import AnnularDomain, DomainError
from .mesh import MeshQualityError
from .shape import (
    dirichlet_normal_derivative,
    finite_difference_tau_prime,
    hadamard_tau_prime,
    half_boundary_tau_prime,
)
from .spectral import solve_eigenproblem, write_field_csv, write_field_vtk
from .sweep import (
    Resolution,
    analyze_dn_family,
    bracket_critical_ratio,
    concentric_reference,
    convergence_study,
    monotonicity_violations,
    richardson_limit,
    sweep_translation,
    write_sweep_csv,
    write_sweep_svg,
)
from .symmetrize import deviation, foliated_schwarz, polarize, sample_rings, star_polarizers
from .torsion import solve_torsion, torsional_rigidity

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_ASSERTIONS = 4


def _parse_grid(text: str):
    """``start:step:end`` inclusive of both endpoints within half a step."""
    try:
        start, step, end = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be start:step:end, got {text!r}"
        )
    if step <= 0 or end < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    out = []
    k = 0
    while True:
        v = start + k * step
        if v > end + step / 2:
            break
        out.append(round(v, 12))
        k += 1
    return out


def _parse_ratios(text: str):
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be comma-separated floats")


def _add_common(p, with_s=True):
    p.add_argument("--R0", type=float, default=1.0, help="inner radius (default 1)")
    p.add_argument("--R1", type=float, default=5.0, help="outer radius (default 5)")
    if with_s:
        p.add_argument("--s", type=float, default=0.0,
                       help="inner center offset (default 0)")
    p.add_argument("--n-theta", type=int, default=256,
                   help="angular resolution (default 256)")
    p.add_argument("--n-rad", type=int, default=64,
                   help="radial layers (default 64)")
    p.add_argument("--grading", type=float, default=1.5,
                   help="radial grading exponent in [0.5, 2]; >1 refines the "
                        "inner circle (default 1.5)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="eigensolver residual tolerance (default 1e-9)")
    p.add_argument("--linear-solver", choices=("pcg", "direct"), default="pcg",
                   help="inner linear solver (default pcg)")
    p.add_argument("--out-dir", default="out", help="output directory (default out)")
    p.add_argument("--vtk", action="store_true", help="also write VTK files")
    p.add_argument("--svg", action="store_true", help="also write SVG charts")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="annulab",
        description="Mixed, Dirichlet and torsion problems on eccentric annuli",
    )
    ap.add_argument("--config", help="JSON file with flag defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="first eigenpair of one configuration")
    _add_common(p)
    p.add_argument("--kind", choices=("nd", "dn", "dd"), default="nd",
                   help="boundary configuration (default nd)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("torsion", help="torsion function and rigidity")
    _add_common(p)
    p.set_defaults(func=cmd_torsion)

    p = sub.add_parser("symmetry-check",
                       help="geometry report and rearrangement deviations")
    _add_common(p)
    p.add_argument("--exclusion", type=float, default=None,
                   help="exclusion radius around (+-R1, 0); default 0.05 R1")
    p.add_argument("--rings", type=int, default=64,
                   help="sample rings for rearrangements (default 64)")
    p.add_argument("--ring-samples", type=int, default=256,
                   help="samples per ring (default 256)")
    p.set_defaults(func=cmd_symmetry_check)

    p = sub.add_parser("shape-derivative",
                       help="three derivative estimates at one offset")
    _add_common(p)
    p.add_argument("--fd-step", type=float, default=0.05,
                   help="finite difference step (default 0.05)")
    p.set_defaults(func=cmd_shape_derivative)

    p = sub.add_parser("sweep", help="translation sweep of the inner hole")
    _add_common(p, with_s=False)
    p.add_argument("--s-grid", type=_parse_grid, default=_parse_grid("0:0.4:3.6"),
                   help="offset grid start:step:end (default 0:0.4:3.6)")
    p.add_argument("--fd-step", type=float, default=0.05,
                   help="finite difference step (default 0.05)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker cap (default: machine parallelism)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dn-analyze",
                       help="minimum structure of the outer-Dirichlet family")
    p.add_argument("--R1", type=float, default=5.0, help="outer radius (default 5)")
    p.add_argument("--ratios", type=_parse_ratios, default=_parse_ratios("0.1,0.6"),
                   help="comma separated R0/R1 ratios (default 0.1,0.6)")
    p.add_argument("--s-points", type=int, default=12,
                   help="sweep points per ratio (default 12)")
    p.add_argument("--n-theta", type=int, default=128,
                   help="angular resolution (default 128)")
    p.add_argument("--n-rad", type=int, default=32,
                   help="radial layers (default 32)")
    p.add_argument("--grading", type=float, default=1.5,
                   help="radial grading exponent (default 1.5)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="eigensolver residual tolerance (default 1e-9)")
    p.add_argument("--linear-solver", choices=("pcg", "direct"), default="pcg",
                   help="inner linear solver (default pcg)")
    p.add_argument("--bracket", action="store_true",
                   help="also bisect for the critical ratio")
    p.add_argument("--bracket-width", type=float, default=0.05,
                   help="target bracket width (default 0.05)")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_dn_analyze)

    p = sub.add_parser("converge", help="mesh convergence study")
    _add_common(p)
    p.add_argument("--kind", choices=("nd", "dn", "dd"), default="nd")
    p.add_argument("--levels", type=int, default=3,
                   help="number of dyadic refinement levels (default 3)")
    p.add_argument("--base-n-theta", type=int, default=64,
                   help="coarsest angular resolution (default 64)")
    p.add_argument("--base-n-rad", type=int, default=16,
                   help="coarsest radial layers (default 16)")
    p.set_defaults(func=cmd_converge)
    return ap


def _ensure_outdir(args):
    os.makedirs(args.out_dir, exist_ok=True)


def _run_params(args):
    return dict(
        n_theta=args.n_theta, n_rad=args.n_rad, grading=args.grading,
        tol=args.tol, linear_solver=args.linear_solver,
    )


def cmd_solve(args) -> int:
    d = AnnularDomain(args.R0, args.R1, args.s)
    kind = ProblemKind.parse(args.kind)
    sol = solve_eigenproblem(d, kind=kind, **_run_params(args))
    _ensure_outdir(args)
    base = os.path.join(args.out_dir, f"eig_{kind.value}_s{args.s:g}")
    write_field_csv(sol.u, base + ".csv")
    if args.vtk:
        write_field_vtk(sol.u, base + ".vtk")
    print(f"first eigenvalue ({kind.value}, s={args.s:g}): {sol.value!r}")
    print(f"residual {sol.pair.residual:.3e} after {sol.pair.iterations} iterations")
    print(f"field written to {base}.csv")
    return EXIT_OK


def cmd_torsion(args) -> int:
    d = AnnularDomain(args.R0, args.R1, args.s)
    sol = solve_torsion(d, **_run_params(args))
    t_energy, t_integral = torsional_rigidity(sol.v)
    _ensure_outdir(args)
    base = os.path.join(args.out_dir, f"torsion_s{args.s:g}")
    write_field_csv(sol.v, base + ".csv")
    if args.vtk:
        write_field_vtk(sol.v, base + ".vtk", name="v")
    print(f"torsional rigidity (s={args.s:g}): {t_integral!r}")
    print(f"energy/integral mismatch: {abs(t_energy - t_integral) / t_integral:.3e}")
    print(f"field written to {base}.csv")
    return EXIT_OK


def cmd_symmetry_check(args) -> int:
    d = AnnularDomain(args.R0, args.R1, args.s)
    sol = solve_eigenproblem(d, kind=ProblemKind.ND, **_run_params(args))
    report = geometry_report(sol.u, exclusion=args.exclusion)
    rings = sample_rings(sol.u, m=args.ring_samples, n_rings=args.rings)
    star = foliated_schwarz(rings)
    dev_star = deviation(rings, star)
    dev_pol = max(
        deviation(rings, polarize(rings, pol))
        for pol in star_polarizers(args.ring_samples)
    )
    payload = report.to_payload()
    payload["rearrangement_deviation"] = dev_star
    payload["worst_polarization_deviation"] = dev_pol
    _ensure_outdir(args)
    path = os.path.join(args.out_dir, f"symmetry_s{args.s:g}.json")
    write_json(path, payload)
    print(f"geometry checks: {'pass' if report.all_passed else 'FAIL'}")
    print(f"rearrangement deviation: {dev_star:.4e}")
    print(f"worst polarization deviation: {dev_pol:.4e}")
    print(f"report written to {path}")
    return EXIT_OK if report.all_passed else EXIT_ASSERTIONS


def cmd_shape_derivative(args) -> int:
    d = AnnularDomain(args.R0, args.R1, args.s)
    sol = solve_eigenproblem(d, kind=ProblemKind.ND, **_run_params(args))
    trace = dirichlet_normal_derivative(sol.u, ProblemKind.ND)
    had = hadamard_tau_prime(trace)
    halfb = half_boundary_tau_prime(trace, d)
    fd = finite_difference_tau_prime(
        d, args.fd_step, args.n_theta, args.n_rad, args.grading,
        tol=args.tol, linear_solver=args.linear_solver,
    )
    print(f"eigenvalue:        {sol.value!r}")
    print(f"boundary integral: {had!r}")
    print(f"half boundary:     {halfb!r}")
    print(f"finite difference: {fd!r}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    res = Resolution(args.n_theta, args.n_rad, args.grading)
    records = sweep_translation(
        args.R0, args.R1, args.s_grid, resolution=res, fd_step=args.fd_step,
        tol=args.tol, linear_solver=args.linear_solver, threads=args.threads,
    )
    _ensure_outdir(args)
    path = os.path.join(args.out_dir, "sweep.csv")
    write_sweep_csv(records, path)
    if args.svg:
        write_sweep_svg(records, os.path.join(args.out_dir, "sweep.svg"))
    print(f"{len(records)} records written to {path}")
    violations = monotonicity_violations(records)
    for msg in violations:
        print(f"assertion failed: {msg}", file=sys.stderr)
    return EXIT_OK if not violations else EXIT_ASSERTIONS


def cmd_dn_analyze(args) -> int:
    res = Resolution(args.n_theta, args.n_rad, args.grading)
    analyses = analyze_dn_family(
        args.R1, args.ratios, s_points=args.s_points, resolution=res,
        tol=args.tol, linear_solver=args.linear_solver,
    )
    payload = {"R1": args.R1, "ratios": []}
    inconclusive = False
    for a in analyses:
        print(f"ratio {a.ratio:g}: {a.classification}"
              + (f", s0 = {a.s0:.4f}" if a.s0 is not None else ""))
        payload["ratios"].append({
            "ratio": a.ratio,
            "classification": a.classification,
            "s0": a.s0,
            "s": [float(x) for x in a.s_points],
            "nu1": [float(x) for x in a.nu_values],
        })
        inconclusive |= a.classification == "inconclusive"
    if args.bracket:
        lo, hi, _ = bracket_critical_ratio(
            args.R1, min(args.ratios), max(args.ratios),
            width=args.bracket_width, s_points=args.s_points, resolution=res,
            tol=args.tol, linear_solver=args.linear_solver,
        )
        payload["critical_ratio_bracket"] = [lo, hi]
        print(f"critical ratio bracket: [{lo:.4f}, {hi:.4f}]")
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "dn_analysis.json")
    write_json(path, payload)
    print(f"analysis written to {path}")
    return EXIT_OK if not inconclusive else EXIT_ASSERTIONS


def cmd_converge(args) -> int:
    d = AnnularDomain(args.R0, args.R1, args.s)
    kind = ProblemKind.parse(args.kind)
    reference = None
    if args.s == 0.0:
        reference = concentric_reference(kind, args.R0, args.R1)
        print(f"radial reference: {reference!r}")
    rows = convergence_study(
        d, kind, levels=args.levels, base=(args.base_n_theta, args.base_n_rad),
        grading=args.grading, tol=args.tol, linear_solver=args.linear_solver,
        reference=reference,
    )
    print("h        n_theta  n_rad   value             order")
    for r in rows:
        order = f"{r.observed_order:.3f}" if r.observed_order is not None else "-"
        print(f"{r.h:<8g} {r.n_theta:<8d} {r.n_rad:<7d} {r.value:<17.12f} {order}")
    print(f"extrapolated limit: {richardson_limit(rows)!r}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    # config file preloads defaults; explicit flags override
    try:
        pre, _ = ap.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    if getattr(pre, "config", None):
        try:
            with open(pre.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        known = {a.dest for a in ap._actions}
        for sp in ap._subparsers._group_actions[0].choices.values():
            known |= {a.dest for a in sp._actions}
        bad = set(cfg) - known
        if bad:
            print(f"error: unknown config keys: {sorted(bad)}", file=sys.stderr)
            return EXIT_VALIDATION
        ap.set_defaults(**cfg)
        for sp in ap._subparsers._group_actions[0].choices.values():
            sp.set_defaults(**{k: v for k, v in cfg.items()
                               if k in {a.dest for a in sp._actions}})
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (DomainError, MeshQualityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
