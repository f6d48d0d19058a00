"""Sign checks on computed fields: monotonicity, symmetry and peak location.

Each check evaluates a strict continuum inequality on the discrete field and
reports the worst margin together with where it occurs.  Signs are tested
against zero; the only tunables are the exclusion radius around the two
points where the inequalities genuinely degenerate (``(+-R1, 0)``, where the
gradient vanishes) and the interpolation tolerance of the reflection
comparison.

Interior derivative checks use the area-weighted recovered vertex gradient.
The outer-circle axial check instead differentiates the boundary values
tangentially and multiplies by the tangent's first component: the normal
derivative vanishes there, and centered differencing of boundary values is an
order more accurate than the one-sided recovered gradient, whose bias would
drown the small true margin near the right pole.

The concentric domain is a degenerate special case: the angular derivative
vanishes identically, the peak spreads over the whole outer circle, and
strict sign checks become coin flips on rounding noise.  At ``s = 0`` the
angular checks therefore verify ring constancy instead, and the peak check
only requires the maximum on the outer layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .export import write_json
from .fem import Field
from .geometry import Polarizer
from .mesh import Mesh

# ordering allowance for interpolated reflection comparisons, relative to
# max |u|; covers the O(h^2) interpolation error of the reflected value
DEFAULT_INTERP_RTOL = 1e-3

# relative ring-value spread accepted as "angularly constant" at s = 0
RADIAL_SPREAD_RTOL = 1e-3

CHECK_NAMES = (
    "affine_radial",
    "axial_cap",
    "outer_axial",
    "tangential_sign",
    "gradient_nonzero",
    "reflection_ordering",
    "peak_location",
)


@dataclass
class GradientField:
    """Area-weighted vertex averages of the per-triangle P1 gradients."""

    values: np.ndarray  # (nv, 2)
    mesh: Mesh

    def at(self, pts, outside: str = "error"):
        gx = self.mesh.interpolate(self.values[:, 0], pts, outside=outside)
        gy = self.mesh.interpolate(self.values[:, 1], pts, outside=outside)
        return np.stack([gx, gy], axis=-1)


def recover_gradient(u: Field) -> GradientField:
    """Vertex gradient: sum of area * triangle gradient over adjacent cells.

    Exact for globally linear fields; O(h) accurate at interior vertices.
    """
    mesh = u.mesh
    p = mesh.vertices[mesh.triangles]
    x = p[..., 0]
    y = p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = mesh.areas
    vals = u.values[mesh.triangles]  # (nt, 3)
    # P1 gradient = sum_k u_k (b_k, c_k) / (2 area)
    gx_tri = np.einsum("ij,ij->i", vals, b) / (2.0 * area)
    gy_tri = np.einsum("ij,ij->i", vals, c) / (2.0 * area)
    num = np.zeros((mesh.num_vertices, 2))
    den = np.zeros(mesh.num_vertices)
    flat = mesh.triangles.ravel()
    np.add.at(num[:, 0], flat, np.repeat(area * gx_tri, 3))
    np.add.at(num[:, 1], flat, np.repeat(area * gy_tri, 3))
    np.add.at(den, flat, np.repeat(area, 3))
    return GradientField(values=num / den[:, None], mesh=mesh)


def outer_axial_derivative(u: Field) -> np.ndarray:
    """du/dx1 at outer-circle vertices from tangential differencing.

    Uses the vanishing normal derivative: du/dx1 = (du/dt) t1 with the
    tangential derivative from centered differences along the boundary ring.
    """
    mesh = u.mesh
    ring = mesh.lattice[:, mesh.n_rad]
    pts = mesh.vertices[ring]
    vals = u.values[ring]
    idx = np.arange(mesh.n_theta)
    nxt = np.roll(idx, -1)
    prv = np.roll(idx, 1)
    dvec = pts[nxt] - pts[prv]
    dlen = np.hypot(dvec[:, 0], dvec[:, 1])
    return (vals[nxt] - vals[prv]) / dlen * (dvec[:, 0] / dlen)


@dataclass
class CheckResult:
    name: str
    worst: float
    location: tuple[float, float]
    passed: bool
    detail: str = ""


@dataclass
class GeometryReport:
    exclusion: float
    checks: dict[str, CheckResult]
    violation_counts: dict[str, int]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def passed(self, names) -> bool:
        return all(self.checks[n].passed for n in names)

    def to_payload(self) -> dict:
        return {
            "exclusion": self.exclusion,
            "all_passed": self.all_passed,
            "checks": {
                name: {
                    "worst": c.worst,
                    "location": list(c.location),
                    "pass": c.passed,
                    "detail": c.detail,
                }
                for name, c in self.checks.items()
            },
        }

    def write_json(self, path):
        write_json(path, self.to_payload())


def _interior_mask(mesh: Mesh) -> np.ndarray:
    mask = np.ones(mesh.num_vertices, dtype=bool)
    mask[mesh.lattice[:, 0]] = False
    mask[mesh.lattice[:, mesh.n_rad]] = False
    return mask


def _outside_poles(points: np.ndarray, r1: float, exclusion: float) -> np.ndarray:
    d2p = (points[:, 0] - r1) ** 2 + points[:, 1] ** 2
    d2m = (points[:, 0] + r1) ** 2 + points[:, 1] ** 2
    return (d2p > exclusion**2) & (d2m > exclusion**2)


def _ring_spread(u: Field) -> float:
    """Largest angular value spread over lattice rings, relative to max |u|."""
    mesh = u.mesh
    by_ring = u.values[mesh.lattice]  # (n_theta, n_rad + 1)
    spread = by_ring.max(axis=0) - by_ring.min(axis=0)
    return float(spread.max() / max(np.abs(u.values).max(), 1e-300))


def report_polarizers(count: int = 8):
    """Evenly spread star-family polarizers for the reflection check."""
    angles = [-np.pi / 2 + (j + 0.5) * np.pi / count for j in range(count)]
    return [Polarizer.from_angle(g) for g in angles]


def geometry_report(
    u: Field,
    exclusion: float | None = None,
    polarizer_count: int = 8,
    interp_rtol: float = DEFAULT_INTERP_RTOL,
) -> GeometryReport:
    """Evaluate the seven sign checks on a positive first eigenfunction.

    Also meaningful for the torsion field, whose gradient obeys the same
    affine-radial and axial inequalities.  Interior vertices within
    ``exclusion`` (default ``0.05 R1``) of ``(+-R1, 0)`` are skipped.
    """
    mesh = u.mesh
    d = mesh.domain
    if exclusion is None:
        exclusion = 0.05 * d.R1
    degenerate = d.s == 0.0
    grad = recover_gradient(u)
    g = grad.values
    v = mesh.vertices
    umax = float(np.abs(u.values).max())

    interior = _interior_mask(mesh) & _outside_poles(v, d.R1, exclusion)
    off_axis = np.abs(v[:, 1]) > 1e-12 * d.R1
    checks: dict[str, CheckResult] = {}
    counts: dict[str, int] = {}

    def record(name, mask, values, sense, detail=""):
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            checks[name] = CheckResult(name, float("nan"), (0.0, 0.0), True,
                                       "no test points")
            counts[name] = 0
            return
        vals = values[idx]
        if sense == "min>0":
            wpos = int(np.argmin(vals))
            ok = bool(vals[wpos] > 0.0)
            nviol = int((vals <= 0.0).sum())
        else:  # "max<0"
            wpos = int(np.argmax(vals))
            ok = bool(vals[wpos] < 0.0)
            nviol = int((vals >= 0.0).sum())
        checks[name] = CheckResult(
            name, float(vals[wpos]), tuple(float(c) for c in v[idx[wpos]]), ok, detail
        )
        counts[name] = nviol

    # (a) increasing along rays from the inner center
    radial = np.einsum("ij,ij->i", g, v - d.inner_center)
    record("affine_radial", interior, radial, "min>0",
           "min of grad u . (x - s e1)")

    # (b) decreasing in x1 on the cap left of the inner center
    cap = interior & (v[:, 0] < d.s - exclusion)
    record("axial_cap", cap, g[:, 0], "max<0",
           "max of du/dx1 over {x1 < s - exclusion}")

    # (c) decreasing in x1 along the outer circle
    ring = mesh.lattice[:, mesh.n_rad]
    ring_pts = v[ring]
    ring_mask = _outside_poles(ring_pts, d.R1, exclusion)
    d1 = outer_axial_derivative(u)
    spread = _ring_spread(u)
    if degenerate:
        ok = bool(spread <= RADIAL_SPREAD_RTOL)
        wpos = int(np.argmax(np.abs(d1 * ring_mask)))
        checks["outer_axial"] = CheckResult(
            "outer_axial", float(d1[wpos]),
            tuple(float(c) for c in ring_pts[wpos]), ok,
            f"concentric: angular derivative vanishes; ring spread {spread:.2e}",
        )
        counts["outer_axial"] = 0 if ok else 1
    else:
        idx = np.nonzero(ring_mask)[0]
        wpos = int(np.argmax(d1[idx]))
        worst = float(d1[idx[wpos]])
        checks["outer_axial"] = CheckResult(
            "outer_axial", worst, tuple(float(c) for c in ring_pts[idx[wpos]]),
            bool(worst < 0.0), "max of du/dx1 on the outer circle",
        )
        counts["outer_axial"] = int((d1[idx] >= 0.0).sum())

    # (d) tangential derivative sign: grad u . eta and eta . e1 have opposite
    # signs for the tangential direction eta = (-x2, x1)/|x|
    mask_d = interior & off_axis
    idx = np.nonzero(mask_d)[0]
    rr = np.hypot(v[idx, 0], v[idx, 1])
    eta = np.stack([-v[idx, 1], v[idx, 0]], axis=1) / rr[:, None]
    tang = np.einsum("ij,ij->i", g[idx], eta)
    prod = tang * v[idx, 1]  # requirement: positive (sign(tang) = sign(x2))
    if degenerate:
        ok = bool(spread <= RADIAL_SPREAD_RTOL)
        wpos = int(np.argmax(np.abs(tang)))
        checks["tangential_sign"] = CheckResult(
            "tangential_sign", float(tang[wpos]),
            tuple(float(c) for c in v[idx[wpos]]), ok,
            f"concentric: angular derivative vanishes; ring spread {spread:.2e}",
        )
        counts["tangential_sign"] = 0 if ok else 1
    else:
        nviol = int((prod <= 0.0).sum())
        frac = nviol / max(idx.size, 1)
        wpos = int(np.argmin(prod))
        checks["tangential_sign"] = CheckResult(
            "tangential_sign", float(prod[wpos]),
            tuple(float(c) for c in v[idx[wpos]]), bool(frac < 1e-3),
            f"{nviol} violations of {idx.size} points",
        )
        counts["tangential_sign"] = nviol

    # (e) gradient does not vanish off the axis
    gnorm = np.hypot(g[:, 0], g[:, 1])
    record("gradient_nonzero", mask_d, gnorm, "min>0", "min |grad u| off axis")

    # (f) strict ordering under star-family reflections
    tol = interp_rtol * umax
    nviol = 0
    ntest = 0
    worst = np.inf
    wloc = (0.0, 0.0)
    for pol in report_polarizers(polarizer_count):
        side = pol.side(v)
        cand = interior & (side > 1e-12 * d.R1)  # strictly outside H
        pts = v[cand]
        refl = pol.reflect(pts)
        ok_ref = d.contains(refl)
        pts = pts[ok_ref]
        refl = refl[ok_ref]
        if pts.shape[0] == 0:
            continue
        u_ref = u.at(refl, outside="clamp")
        margin = u_ref - u.values[cand.nonzero()[0][ok_ref]]
        ntest += pts.shape[0]
        bad = margin <= -tol
        nviol += int(bad.sum())
        wpos = int(np.argmin(margin))
        if margin[wpos] < worst:
            worst = float(margin[wpos])
            wloc = tuple(float(c) for c in pts[wpos])
    checks["reflection_ordering"] = CheckResult(
        "reflection_ordering", worst, wloc, bool(nviol == 0),
        f"{nviol} of {ntest} beyond tolerance {tol:.2e}",
    )
    counts["reflection_ordering"] = nviol

    # (g) unique maximum at (-R1, 0); at s = 0 the maximum spreads over the
    # whole outer circle, so only membership in the outer layer is required
    peak = int(np.argmax(u.values))
    ploc = tuple(float(c) for c in v[peak])
    if degenerate:
        on_outer = peak in set(int(k) for k in ring)
        checks["peak_location"] = CheckResult(
            "peak_location", float(np.hypot(v[peak][0], v[peak][1]) - d.R1),
            ploc, bool(on_outer), "concentric: maximum attained on the outer circle",
        )
        counts["peak_location"] = 0 if on_outer else 1
    else:
        target = np.array([-d.R1, 0.0])
        dist = float(np.hypot(*(v[peak] - target)))
        ref_vertex = mesh.vertex_index(mesh.n_theta // 2, mesh.n_rad)
        adj = np.nonzero(np.any(mesh.triangles == ref_vertex, axis=1))[0]
        pts = mesh.vertices[mesh.triangles[adj]]
        diam = float(
            max(
                np.linalg.norm(pts[:, a] - pts[:, b], axis=1).max()
                for a, b in ((0, 1), (1, 2), (2, 0))
            )
        )
        checks["peak_location"] = CheckResult(
            "peak_location", dist, ploc, bool(dist <= 1.5 * diam),
            f"peak vertex {dist:.3e} from (-R1, 0), cell size {diam:.3e}",
        )
        counts["peak_location"] = 0 if dist <= 1.5 * diam else 1

    return GeometryReport(exclusion=exclusion, checks=checks, violation_counts=counts)
