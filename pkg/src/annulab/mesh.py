"""Structured triangulation of an eccentric annulus.

Vertices live on rays from the inner center: vertex ``(i, j)`` sits at
``(s,0) + (R0 + t_j (L_i - R0)) (cos phi_i, sin phi_i)`` with
``phi_i = 2 pi i / n_theta``, ``t_j = (j / n_rad)^grading`` and ``L_i`` the
ray exit distance.  Layer 0 is the inner (Dirichlet) circle, layer ``n_rad``
the outer (Neumann) circle.

The direction table is generated half-circle-by-reflection so the vertex set
is *bitwise* invariant under ``x2 -> -x2``; quad diagonals are likewise chosen
on the upper half and mirrored, which makes the triangle set exactly
reflection symmetric.  When ``n_theta`` is divisible by 4 the inner circle is
also symmetric across the vertical line ``x1 = s`` to the last bit of
rounding, which the half-boundary derivative pairing relies on.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AnnularDomain

log = logging.getLogger(__name__)

MIN_ANGLE_TARGET_DEG = 15.0


class MeshQualityError(ValueError):
    """A triangle with nonpositive area was produced."""


class BoundaryTag(enum.Enum):
    DIRICHLET_INNER = "DirichletInner"
    NEUMANN_OUTER = "NeumannOuter"


def _unit_directions(n: int):
    """cos/sin tables of 2*pi*i/n with exact reflection symmetries.

    Entries for i > n/2 are copied from the upper half with the sine negated,
    so the table is bitwise invariant under conjugation.  For 4 | n the upper
    quarter is built from the first quarter, making the table bitwise
    antisymmetric under i -> n/2 - i as well.
    """
    c = np.empty(n)
    sn = np.empty(n)
    half = n // 2
    quarter, rem = divmod(n, 4)
    for i in range(half + 1):
        if rem == 0 and i > quarter:
            c[i] = -c[half - i]
            sn[i] = sn[half - i]
        else:
            a = 2.0 * math.pi * i / n
            c[i] = math.cos(a)
            sn[i] = math.sin(a)
    c[0], sn[0] = 1.0, 0.0
    c[half], sn[half] = -1.0, 0.0
    if rem == 0:
        c[quarter], sn[quarter] = 0.0, 1.0
    for i in range(half + 1, n):
        c[i] = c[n - i]
        sn[i] = -sn[n - i]
    return c, sn


@dataclass
class Mesh:
    """Immutable structured triangulation of an :class:`AnnularDomain`."""

    domain: AnnularDomain
    n_theta: int
    n_rad: int
    grading: float
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    lattice: np.ndarray  # (n_theta, n_rad + 1) -> vertex index
    inner_edges: np.ndarray  # (n_theta, 2) vertex pairs on layer 0
    outer_edges: np.ndarray  # (n_theta, 2) vertex pairs on layer n_rad
    mirror: np.ndarray  # (nv,) vertex permutation for x2 -> -x2
    areas: np.ndarray = field(repr=False, default=None)
    min_angle_deg: float = float("nan")

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def boundary_edges(self):
        """All tagged boundary edges as (v0, v1, tag) triples."""
        out = []
        for v0, v1 in self.inner_edges:
            out.append((int(v0), int(v1), BoundaryTag.DIRICHLET_INNER))
        for v0, v1 in self.outer_edges:
            out.append((int(v0), int(v1), BoundaryTag.NEUMANN_OUTER))
        return out

    def vertex_index(self, i: int, j: int) -> int:
        return int(self.lattice[i % self.n_theta, j])

    def total_area(self) -> float:
        return float(self.areas.sum())

    # -- point location -------------------------------------------------

    def _bary(self, tids, pts):
        tri = self.triangles[tids]
        a = self.vertices[tri[:, 0]]
        b = self.vertices[tri[:, 1]]
        c = self.vertices[tri[:, 2]]
        v0 = b - a
        v1 = c - a
        v2 = pts - a
        den = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
        l1 = (v2[:, 0] * v1[:, 1] - v2[:, 1] * v1[:, 0]) / den
        l2 = (v0[:, 0] * v2[:, 1] - v0[:, 1] * v2[:, 0]) / den
        return np.stack([1.0 - l1 - l2, l1, l2], axis=1)

    def _cell_guess(self, pts):
        d = self.domain
        q = pts - d.inner_center
        t = np.hypot(q[:, 0], q[:, 1])
        phi = np.arctan2(q[:, 1], q[:, 0]) % (2.0 * math.pi)
        ell = d.ray_exit_distance(phi)
        tau = np.clip((t - d.R0) / (ell - d.R0), 0.0, 1.0)
        jf = self.n_rad * tau ** (1.0 / self.grading)
        j0 = np.clip(np.floor(jf).astype(int), 0, self.n_rad - 1)
        i0 = np.floor(phi / (2.0 * math.pi / self.n_theta)).astype(int) % self.n_theta
        return i0, j0

    _NEIGHBOR_OFFSETS = (
        (0, 0), (1, 0), (-1, 0), (0, 1), (0, -1),
        (1, 1), (-1, -1), (1, -1), (-1, 1), (2, 0), (-2, 0),
    )

    def locate(self, pts, tol: float = 1e-10):
        """Containing triangle and barycentric coordinates per point.

        Returns ``(tri, bary, best_tri, best_bary)``; ``tri`` is -1 for
        points not inside any tested triangle, in which case the best
        candidate (largest minimal barycentric coordinate) is reported for
        clamped evaluation.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        npts = pts.shape[0]
        i0, j0 = self._cell_guess(pts)
        tri = np.full(npts, -1, dtype=int)
        bary = np.zeros((npts, 3))
        best_tri = np.zeros(npts, dtype=int)
        best_score = np.full(npts, -np.inf)
        best_bary = np.zeros((npts, 3))
        pending = np.arange(npts)
        for di, dj in self._NEIGHBOR_OFFSETS:
            if pending.size == 0:
                break
            ii = (i0[pending] + di) % self.n_theta
            jj = np.clip(j0[pending] + dj, 0, self.n_rad - 1)
            quad = ii * self.n_rad + jj
            for k in (0, 1):
                tids = 2 * quad + k
                lam = self._bary(tids, pts[pending])
                score = lam.min(axis=1)
                better = score > best_score[pending]
                upd = pending[better]
                best_score[upd] = score[better]
                best_tri[upd] = tids[better]
                best_bary[upd] = lam[better]
            done = best_score[pending] >= -tol
            hit = pending[done]
            tri[hit] = best_tri[hit]
            bary[hit] = best_bary[hit]
            pending = pending[~done]
        return tri, bary, best_tri, best_bary

    def interpolate(self, values, pts, outside: str = "error", tol: float = 1e-10):
        """P1 interpolation of per-vertex ``values`` at arbitrary points.

        ``outside`` controls points not located in any triangle: ``"zero"``
        yields 0, ``"clamp"`` evaluates the nearest candidate triangle with
        clipped barycentric weights, ``"error"`` raises.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        values = np.asarray(values, dtype=float)
        tri, bary, best_tri, best_bary = self.locate(pts, tol=tol)
        out = np.zeros(pts.shape[0])
        ok = tri >= 0
        if np.any(ok):
            out[ok] = np.einsum("ij,ij->i", bary[ok], values[self.triangles[tri[ok]]])
        miss = ~ok
        if np.any(miss):
            if outside == "error":
                raise ValueError(f"{int(miss.sum())} points outside the mesh")
            if outside == "clamp":
                lam = np.clip(best_bary[miss], 0.0, None)
                lam /= lam.sum(axis=1, keepdims=True)
                out[miss] = np.einsum(
                    "ij,ij->i", lam, values[self.triangles[best_tri[miss]]]
                )
            # "zero": leave zeros
        return out

    # -- export ----------------------------------------------------------

    def write_vtk(self, path, point_data: dict | None = None, title: str = "annulab mesh"):
        """Legacy ASCII VTK 2.0 unstructured grid with optional point scalars."""
        lines = [
            "# vtk DataFile Version 2.0",
            title,
            "ASCII",
            "DATASET UNSTRUCTURED_GRID",
            f"POINTS {self.num_vertices} double",
        ]
        for x, y in self.vertices:
            lines.append(f"{x!r} {y!r} 0.0")
        nt = self.num_triangles
        lines.append(f"CELLS {nt} {4 * nt}")
        for a, b, c in self.triangles:
            lines.append(f"3 {a} {b} {c}")
        lines.append(f"CELL_TYPES {nt}")
        lines.extend(["5"] * nt)
        if point_data:
            lines.append(f"POINT_DATA {self.num_vertices}")
            for name, vals in point_data.items():
                lines.append(f"SCALARS {name} double 1")
                lines.append("LOOKUP_TABLE default")
                lines.extend(f"{float(v)!r}" for v in vals)
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _triangle_quality(vertices, triangles):
    p = vertices[triangles]
    e0 = p[:, 1] - p[:, 0]
    e1 = p[:, 2] - p[:, 1]
    e2 = p[:, 0] - p[:, 2]
    cross = e0[:, 0] * (-e2[:, 1]) - e0[:, 1] * (-e2[:, 0])
    areas = 0.5 * cross
    lengths = np.stack(
        [np.hypot(e[:, 0], e[:, 1]) for e in (e0, e1, e2)], axis=1
    )
    # angle at vertex k is opposite edge k+1; use the sine rule
    s2 = 2.0 * np.abs(areas)
    with np.errstate(invalid="ignore", divide="ignore"):
        sines = np.clip(
            s2[:, None] / (lengths[:, [2, 0, 1]] * lengths[:, [0, 1, 2]]), -1.0, 1.0
        )
    min_angle = math.degrees(float(np.arcsin(sines).min()))
    return areas, min_angle


def build_mesh(
    domain: AnnularDomain, n_theta: int, n_rad: int, grading: float = 1.0
) -> Mesh:
    """Deterministic structured mesh of ``domain``.

    ``n_theta`` must be even and at least 16, ``n_rad`` at least 4 and
    ``grading`` in [0.5, 2].  Exponents above 1 refine toward the inner
    circle, below 1 toward the outer one.  Each lattice quad is split along
    the diagonal whose midpoint is farther from the inner center (ties keep
    the diagonal through the lower angle-index corner); quads on the lower
    half copy the mirrored choice so the split is exactly symmetric.
    """
    if n_theta % 2 != 0 or n_theta < 16:
        raise ValueError(f"n_theta must be even and >= 16, got {n_theta}")
    if n_rad < 4:
        raise ValueError(f"n_rad must be >= 4, got {n_rad}")
    if not (0.5 <= grading <= 2.0):
        raise ValueError(f"grading must lie in [0.5, 2], got {grading}")

    cos_t, sin_t = _unit_directions(n_theta)
    ell = domain.exit_distance_from_direction(cos_t, sin_t)  # (n_theta,)
    t = (np.arange(n_rad + 1) / n_rad) ** grading  # t[0] = 0, t[-1] = 1 exactly
    radii = domain.R0 + t[None, :] * (ell[:, None] - domain.R0)  # (n_theta, n_rad+1)

    xs = domain.s + radii * cos_t[:, None]
    ys = radii * sin_t[:, None]
    vertices = np.stack([xs.ravel(), ys.ravel()], axis=1)
    lattice = np.arange(n_theta * (n_rad + 1)).reshape(n_theta, n_rad + 1)

    # vertex (i, j) mirrors to ((n - i) mod n, j); the coordinate tables make
    # this exact in floating point
    i_idx = np.arange(n_theta)
    mirror_rows = (n_theta - i_idx) % n_theta
    mirror = lattice[mirror_rows].ravel()

    half = n_theta // 2
    center = domain.inner_center
    ip1 = (i_idx + 1) % n_theta

    # diagonal choice per quad column, decided on the upper half and mirrored
    v00 = lattice[i_idx][:, :-1]
    v10 = lattice[ip1][:, :-1]
    v11 = lattice[ip1][:, 1:]
    v01 = lattice[i_idx][:, 1:]
    mid_a = 0.5 * (vertices[v00] + vertices[v11]) - center
    mid_b = 0.5 * (vertices[v10] + vertices[v01]) - center
    dist_a = np.einsum("ijk,ijk->ij", mid_a, mid_a)
    dist_b = np.einsum("ijk,ijk->ij", mid_b, mid_b)
    diag_a = dist_a >= dist_b
    diag_a[half:] = ~diag_a[half - 1 :: -1]

    tris = np.empty((n_theta * n_rad * 2, 3), dtype=int)
    quad = (i_idx[:, None] * n_rad + np.arange(n_rad)[None, :])
    t0 = 2 * quad
    t1 = t0 + 1
    # diagonal through (i,j)-(i+1,j+1); counter-clockwise triangles
    tris[t0[diag_a]] = np.stack(
        [v00[diag_a], v01[diag_a], v11[diag_a]], axis=1
    )
    tris[t1[diag_a]] = np.stack(
        [v00[diag_a], v11[diag_a], v10[diag_a]], axis=1
    )
    # diagonal through (i+1,j)-(i,j+1)
    nb = ~diag_a
    tris[t0[nb]] = np.stack([v00[nb], v01[nb], v10[nb]], axis=1)
    tris[t1[nb]] = np.stack([v01[nb], v11[nb], v10[nb]], axis=1)

    areas, min_angle = _triangle_quality(vertices, tris)
    bad = np.nonzero(areas <= 0.0)[0]
    if bad.size:
        raise MeshQualityError(
            f"{bad.size} degenerate triangles, first at cell {int(bad[0])}"
        )
    if min_angle < MIN_ANGLE_TARGET_DEG:
        log.warning(
            "mesh quality: minimum triangle angle %.2f deg below the %.0f deg target "
            "(n_theta=%d, n_rad=%d, grading=%.3g, s=%.3g)",
            min_angle, MIN_ANGLE_TARGET_DEG, n_theta, n_rad, grading, domain.s,
        )

    inner_edges = np.stack([lattice[i_idx, 0], lattice[ip1, 0]], axis=1)
    outer_edges = np.stack([lattice[i_idx, n_rad], lattice[ip1, n_rad]], axis=1)

    return Mesh(
        domain=domain,
        n_theta=n_theta,
        n_rad=n_rad,
        grading=grading,
        vertices=vertices,
        triangles=tris,
        lattice=lattice,
        inner_edges=inner_edges,
        outer_edges=outer_edges,
        mirror=mirror,
        areas=areas,
        min_angle_deg=min_angle,
    )
