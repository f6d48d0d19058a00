"""Parameter sweeps: offset translations, the outer-Dirichlet family, and
mesh convergence studies.

Sweep points are independent solves merged by parameter value, so results do
not depend on evaluation order or worker count.  Monotonicity expectations
(first mixed eigenvalue strictly decreasing in the offset, rigidity strictly
increasing) are checked on the assembled records and reported, never silently
dropped and never raised mid-sweep.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .checks import geometry_report
from .export import svg_line_chart, write_csv
from .fem import Field, ProblemKind
from .geometry import AnnularDomain
from .radial_oracle import concentric_eigenvalue
from .shape import (
    dirichlet_normal_derivative,
    finite_difference_tau_prime,
    hadamard_tau_prime,
    half_boundary_tau_prime,
)
from .spectral import solve_eigenproblem
from .torsion import rigidity_derivative, solve_torsion, torsional_rigidity

log = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    "s", "tau1", "lambda1", "nu1", "T",
    "dtau_hadamard", "dtau_half", "dtau_fd", "dT_boundary", "checks_pass",
)


@dataclass
class Resolution:
    """Mesh resolution bundle shared by all solves of a sweep."""

    n_theta: int = 256
    n_rad: int = 64
    # exponent > 1 refines toward the inner circle, where normal derivatives
    # are extracted; 1.5 keeps the boundary-integral derivative within a few
    # permille of finite differences at the default resolution
    grading: float = 1.5

    def refined(self, factor: int = 2) -> "Resolution":
        return Resolution(self.n_theta * factor, self.n_rad * factor, self.grading)


@dataclass
class SweepRecord:
    """One row of a translation sweep."""

    s: float
    tau1: float
    lambda1: float
    nu1: float
    T: float
    dtau_hadamard: float
    dtau_half: float
    dtau_fd: float
    dT_boundary: float
    checks_pass: bool
    u: Field | None = field(default=None, repr=False, compare=False)
    v: Field | None = field(default=None, repr=False, compare=False)

    def row(self):
        return (
            self.s, self.tau1, self.lambda1, self.nu1, self.T,
            self.dtau_hadamard, self.dtau_half, self.dtau_fd,
            self.dT_boundary, self.checks_pass,
        )


def _solve_record(
    R0, R1, s, res: Resolution, fd_step, tol, linear_solver, keep_fields, exclusion
) -> SweepRecord:
    d = AnnularDomain(R0, R1, s)
    common = dict(
        n_theta=res.n_theta, n_rad=res.n_rad, grading=res.grading,
        tol=tol, linear_solver=linear_solver,
    )
    nd = solve_eigenproblem(d, kind=ProblemKind.ND, **common)
    dd = solve_eigenproblem(d, kind=ProblemKind.DD, mesh=nd.mesh, **common)
    dn = solve_eigenproblem(d, kind=ProblemKind.DN, mesh=nd.mesh, **common)
    tor = solve_torsion(d, mesh=nd.mesh, **common)
    t_energy, t_integral = torsional_rigidity(tor.v)

    trace = dirichlet_normal_derivative(nd.u, ProblemKind.ND)
    had = hadamard_tau_prime(trace)
    halfb = half_boundary_tau_prime(trace, d)
    room = R1 - R0 - s
    h = min(fd_step, room / 8.0 if s == 0.0 else min(s, room) / 4.0)
    fd = finite_difference_tau_prime(
        d, h, res.n_theta, res.n_rad, res.grading,
        kind=ProblemKind.ND, tol=tol, linear_solver=linear_solver,
    )
    dT = rigidity_derivative(dirichlet_normal_derivative(tor.v, ProblemKind.ND))

    excl = 0.05 * R1 if exclusion is None else exclusion
    rep_u = geometry_report(nd.u, exclusion=excl)
    rep_v = geometry_report(tor.v, exclusion=excl)
    checks = rep_u.all_passed and rep_v.passed(
        ("affine_radial", "axial_cap", "outer_axial")
    )
    return SweepRecord(
        s=s, tau1=nd.value, lambda1=dd.value, nu1=dn.value, T=t_integral,
        dtau_hadamard=had, dtau_half=halfb, dtau_fd=fd, dT_boundary=dT,
        checks_pass=checks,
        u=nd.u if keep_fields else None,
        v=tor.v if keep_fields else None,
    )


def sweep_translation(
    R0: float,
    R1: float,
    s_grid,
    resolution: Resolution | None = None,
    fd_step: float = 0.05,
    tol: float = 1e-9,
    linear_solver: str = "pcg",
    threads: int = 1,
    keep_fields: bool = False,
    exclusion: float | None = None,
) -> list[SweepRecord]:
    """One record per offset; logs monotonicity violations, returns all rows."""
    res = resolution or Resolution()
    s_grid = [float(s) for s in s_grid]
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s_grid must be strictly increasing")
    if s_grid and not (0.0 <= s_grid[0] and s_grid[-1] < R1 - R0):
        raise ValueError("s_grid must lie inside [0, R1 - R0)")

    def work(s):
        return _solve_record(
            R0, R1, s, res, fd_step, tol, linear_solver, keep_fields, exclusion
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, s_grid))
    else:
        records = [work(s) for s in s_grid]
    for msg in monotonicity_violations(records):
        log.warning("sweep: %s", msg)
    return records


def monotonicity_violations(records) -> list[str]:
    """Expected trends over the sweep; empty when everything holds."""
    out = []
    for a, b in zip(records, records[1:]):
        if not b.tau1 < a.tau1:
            out.append(f"tau1 not strictly decreasing between s={a.s} and s={b.s}")
        if not b.T > a.T:
            out.append(f"T not strictly increasing between s={a.s} and s={b.s}")
    for r in records:
        if r.s > 0.0 and not r.dtau_hadamard < 0.0:
            out.append(f"dtau_hadamard not negative at s={r.s}")
        if r.s > 0.0 and not r.dT_boundary > 0.0:
            out.append(f"dT_boundary not positive at s={r.s}")
        if not r.checks_pass:
            out.append(f"geometry checks failed at s={r.s}")
    return out


def write_sweep_csv(records, path):
    write_csv(path, SWEEP_COLUMNS, (r.row() for r in records))


def write_sweep_svg(records, path):
    s = [r.s for r in records]
    svg_line_chart(
        path,
        [
            ("tau1", s, [r.tau1 for r in records]),
            ("lambda1", s, [r.lambda1 for r in records]),
            ("nu1", s, [r.nu1 for r in records]),
        ],
        title="first eigenvalues vs offset",
        xlabel="s",
        ylabel="eigenvalue",
    )


# -- outer-Dirichlet family analysis -------------------------------------


@dataclass
class DNAnalysis:
    """Shape of nu1(s) for one radius ratio.

    ``classification`` is one of ``interior_minimum``, ``monotone_decreasing``
    or ``inconclusive``; ``s0`` is the refined minimizer when one exists.
    """

    ratio: float
    classification: str
    s0: float | None
    s_points: np.ndarray
    nu_values: np.ndarray

    @property
    def monotone_decreasing(self) -> bool:
        return self.classification == "monotone_decreasing"


def _nu1(R0, R1, s, res: Resolution, tol, linear_solver) -> float:
    d = AnnularDomain(R0, R1, s)
    return solve_eigenproblem(
        d, res.n_theta, res.n_rad, res.grading,
        kind=ProblemKind.DN, tol=tol, linear_solver=linear_solver,
    ).value


def _golden_minimize(f, a, b, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def analyze_dn_ratio(
    R1: float,
    ratio: float,
    s_points: int = 12,
    resolution: Resolution | None = None,
    tol: float = 1e-9,
    linear_solver: str = "pcg",
) -> DNAnalysis:
    """Classify nu1(s) for ``R0 = ratio R1`` on a uniform interior grid.

    An interior minimum is detected from the sign change of successive
    differences and refined by golden section to a window of
    ``(R1 - R0)/200``; a non-unimodal difference pattern is reported as
    inconclusive rather than forced into either class.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if s_points < 3:
        raise ValueError("need at least 3 sweep points")
    res = resolution or Resolution()
    R0 = ratio * R1
    width = R1 - R0
    # midpoint grid: uniform over the open interval with end coverage
    # 0.5 dx from either endpoint, where the shallow minimum tends to sit
    grid = (np.arange(s_points) + 0.5) * (width / s_points)
    nu = np.array([_nu1(R0, R1, s, res, tol, linear_solver) for s in grid])

    diffs = np.diff(nu)
    signs = np.sign(diffs)
    if np.all(signs < 0):
        return DNAnalysis(ratio, "monotone_decreasing", None, grid, nu)
    # admissible unimodal pattern: some negatives then some positives
    pos = np.nonzero(signs > 0)[0]
    first_pos = int(pos[0]) if pos.size else len(signs)
    unimodal = np.all(signs[:first_pos] < 0) and np.all(signs[first_pos:] > 0)
    if not unimodal or first_pos == 0:
        return DNAnalysis(ratio, "inconclusive", None, grid, nu)
    lo = grid[max(first_pos - 1, 0)]
    hi = grid[min(first_pos + 1, len(grid) - 1)]
    s0 = _golden_minimize(
        lambda s: _nu1(R0, R1, s, res, tol, linear_solver), lo, hi, width / 200.0
    )
    return DNAnalysis(ratio, "interior_minimum", float(s0), grid, nu)


def analyze_dn_family(
    R1: float,
    ratios,
    s_points: int = 12,
    resolution: Resolution | None = None,
    tol: float = 1e-9,
    linear_solver: str = "pcg",
) -> list[DNAnalysis]:
    return [
        analyze_dn_ratio(R1, r, s_points, resolution, tol, linear_solver)
        for r in ratios
    ]


def bracket_critical_ratio(
    R1: float,
    lo: float,
    hi: float,
    width: float = 0.05,
    s_points: int = 12,
    resolution: Resolution | None = None,
    tol: float = 1e-9,
    linear_solver: str = "pcg",
):
    """Bisect the ratio axis for the crossover between the two behaviors.

    ``lo`` must classify as interior minimum and ``hi`` as monotone
    decreasing; returns ``(lo, hi, analyses)`` with ``hi - lo <= width``.
    An inconclusive midpoint is retried once at doubled grid density, then
    assigned to the monotone side (the dip, if any, is below resolution).
    """
    analyses = {}

    def classify(ratio):
        a = analyze_dn_ratio(R1, ratio, s_points, resolution, tol, linear_solver)
        if a.classification == "inconclusive":
            a = analyze_dn_ratio(
                R1, ratio, 2 * s_points, resolution, tol, linear_solver
            )
        analyses[ratio] = a
        return a.classification

    c_lo = classify(lo)
    c_hi = classify(hi)
    if c_lo != "interior_minimum" or c_hi == "interior_minimum":
        raise ValueError(
            f"bracket endpoints do not straddle the crossover: {lo}→{c_lo}, {hi}→{c_hi}"
        )
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if classify(mid) == "interior_minimum":
            lo = mid
        else:
            hi = mid
    return lo, hi, analyses


# -- convergence ----------------------------------------------------------


@dataclass
class ConvergenceRow:
    h: float
    n_theta: int
    n_rad: int
    value: float
    observed_order: float | None
    error: float | None


def convergence_study(
    domain: AnnularDomain,
    kind: ProblemKind = ProblemKind.ND,
    levels: int = 3,
    base: tuple[int, int] = (64, 16),
    grading: float = 1.5,
    tol: float = 1e-10,
    linear_solver: str = "pcg",
    reference: float | None = None,
) -> list[ConvergenceRow]:
    """Eigenvalue at dyadically refined meshes with observed orders.

    Orders come from Richardson triplets of computed values; when an
    independent ``reference`` is supplied (the radial solver at s = 0),
    per-level errors and error-based orders are reported instead.
    """
    if levels < 3:
        raise ValueError("need at least 3 levels for an observed order")
    values = []
    rows = []
    for lvl in range(levels):
        nt = base[0] * 2**lvl
        nr = base[1] * 2**lvl
        val = solve_eigenproblem(
            domain, nt, nr, grading, kind, tol=tol, linear_solver=linear_solver
        ).value
        values.append(val)
        rows.append(ConvergenceRow(1.0 / 2**lvl, nt, nr, val, None, None))
    if reference is not None:
        for row in rows:
            row.error = abs(row.value - reference)
        for i in range(1, levels):
            e0, e1 = rows[i - 1].error, rows[i].error
            if e0 > 0 and e1 > 0:
                rows[i].observed_order = math.log2(e0 / e1)
    else:
        for i in range(2, levels):
            d0 = values[i - 1] - values[i - 2]
            d1 = values[i] - values[i - 1]
            if d0 != 0.0 and d1 != 0.0 and d0 / d1 > 0:
                rows[i].observed_order = math.log2(abs(d0 / d1))
    if not all(a.value >= b.value for a, b in zip(rows, rows[1:])):
        log.warning("eigenvalues did not decrease monotonically under refinement")
    return rows


def richardson_limit(rows) -> float:
    """Extrapolated limit from the two finest levels and the observed order."""
    p = rows[-1].observed_order or 2.0
    v1, v2 = rows[-2].value, rows[-1].value
    return v2 + (v2 - v1) / (2.0**p - 1.0)


def concentric_reference(kind: ProblemKind, R0: float, R1: float) -> float:
    return concentric_eigenvalue(kind, R0, R1)
