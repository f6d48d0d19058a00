"""Discrete polarization and two-point rearrangement on concentric rings.

A field is sampled on circles about one of the two natural centers (the
origin, extending by zero into the hole, or the inner center, extending by
zero outside the outer circle).  Per ring, polarization swaps reflected
sample pairs so the half-plane side keeps the larger value; the full
rearrangement sorts the ring and lays the values out symmetrically about the
direction opposite to +x, alternating upper half first.  Both operations
permute each ring's values, so per-ring multisets are preserved bit for bit.

The alternating layout makes the rearranged ring invariant under every
grid-aligned polarization whose boundary line is *not* the x-axis: reflected
pairs of such a polarizer always have strictly different angular distances
from the peak direction, so the tie-breaking side never matters.  Invariance
under the two x-axis-aligned polarizers additionally requires equal values at
conjugate angles, which only axially symmetric inputs satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .export import write_csv
from .fem import Field
from .geometry import Polarizer

BALL = "ball"
CONCENTRIC = "concentric"


class AlignmentError(ValueError):
    """Polarizer is not aligned with the ring sample grid."""


@dataclass
class RingSampling:
    """Values of a zero-extended field on concentric sample circles.

    ``values[k, q]`` is the sample on ring ``radii[k]`` at angle
    ``2 pi q / m`` about ``center``.  ``provenance`` records which zero
    extension produced the samples.
    """

    center: np.ndarray
    radii: np.ndarray
    m: int
    values: np.ndarray  # (n_rings, m)
    provenance: str

    def __post_init__(self):
        if self.m % 2 != 0:
            raise ValueError("sample count per ring must be even")
        if self.values.shape != (self.radii.size, self.m):
            raise ValueError("values shape does not match radii and m")

    def angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.m) / self.m

    def points(self) -> np.ndarray:
        psi = self.angles()
        unit = np.stack([np.cos(psi), np.sin(psi)], axis=1)
        return self.center[None, None, :] + self.radii[:, None, None] * unit[None, :, :]

    def copy_with(self, values) -> "RingSampling":
        return RingSampling(self.center, self.radii, self.m, values, self.provenance)

    def same_geometry(self, other: "RingSampling") -> bool:
        return (
            self.m == other.m
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.radii, other.radii)
        )

    def write_csv(self, path):
        psi = self.angles()
        rows = (
            (float(r), float(p), float(val))
            for k, r in enumerate(self.radii)
            for p, val in zip(psi, self.values[k])
        )
        write_csv(path, ("r", "psi", "value"), rows)


def sample_rings(
    u: Field, m: int = 256, n_rings: int = 64, center: str = "origin"
) -> RingSampling:
    """Sample the zero extension of ``u`` on ``n_rings`` concentric circles.

    ``center="origin"`` samples the extension-by-zero into the hole on radii
    strictly inside the outer circle (starting at 0.02 R0 to avoid the
    center); ``center="inner"`` samples the extension that is zero outside
    the outer circle, on radii in (R0, R1 + s) about the inner center.
    """
    mesh = u.mesh
    d = mesh.domain
    if center == "origin":
        ctr = np.zeros(2)
        r_lo, r_hi = 0.02 * d.R0, d.R1
        provenance = BALL
    elif center == "inner":
        ctr = d.inner_center.copy()
        r_lo, r_hi = d.R0, d.R1 + d.s
        provenance = CONCENTRIC
    else:
        raise ValueError(f"center must be 'origin' or 'inner', got {center!r}")
    radii = r_lo + (np.arange(1, n_rings + 1) / (n_rings + 1)) * (r_hi - r_lo)
    rs = RingSampling(ctr, radii, m, np.zeros((n_rings, m)), provenance)
    pts = rs.points().reshape(-1, 2)

    inside_hole = np.hypot(pts[:, 0] - d.s, pts[:, 1]) <= d.R0
    beyond_outer = np.einsum("ij,ij->i", pts, pts) >= d.R1**2
    zero = inside_hole | beyond_outer
    vals = np.zeros(pts.shape[0])
    live = ~zero
    if np.any(live):
        vals[live] = mesh.interpolate(u.values, pts[live], outside="clamp")
    rs.values = vals.reshape(n_rings, m)
    return rs


def _reflection_index_map(rs: RingSampling, pol: Polarizer) -> np.ndarray:
    """Sample-index permutation induced by the polarizer's reflection.

    Requires the boundary line through the ring center and a normal angle
    that is a multiple of pi / m, so reflected sample points are again
    sample points.
    """
    if abs(pol.side(rs.center)) > 1e-12:
        raise AlignmentError("polarizer boundary must pass through the ring center")
    gamma = math.atan2(pol.h[1], pol.h[0])
    k = gamma / (math.pi / rs.m)
    k_int = round(k)
    if abs(k - k_int) > 1e-9:
        raise AlignmentError(
            f"polarizer normal angle {gamma:.6f} is not a multiple of pi/{rs.m}"
        )
    q = np.arange(rs.m)
    return (k_int + rs.m // 2 - q) % rs.m


def polarize(rs: RingSampling, pol: Polarizer) -> RingSampling:
    """Two-point rearrangement: the half-plane side keeps the larger value."""
    refl = _reflection_index_map(rs, pol)
    psi = rs.angles()
    h = np.asarray(pol.h)
    side = np.cos(psi) * h[0] + np.sin(psi) * h[1]  # sign of h . (x - center)
    in_h = side < 0.0
    on_line = side == 0.0

    vals = rs.values
    mirrored = vals[:, refl]
    hi = np.maximum(vals, mirrored)
    lo = np.minimum(vals, mirrored)
    out = np.where(in_h[None, :], hi, lo)
    out[:, on_line] = vals[:, on_line]
    return rs.copy_with(out)


def _placement_order(m: int) -> np.ndarray:
    """Sample indices ordered by decreasing rank in the symmetric layout.

    Rank 0 sits opposite +x (index m/2), then ranks alternate upper half
    first at increasing angular distance, ending at index 0.
    """
    half = m // 2
    order = np.empty(m, dtype=int)
    order[0] = half
    pos = 1
    for t in range(1, half + 1):
        order[pos] = half - t
        pos += 1
        if t < half:
            order[pos] = half + t
            pos += 1
    return order


def foliated_schwarz(rs: RingSampling) -> RingSampling:
    """Symmetric-decreasing rearrangement of every ring about the -x direction."""
    order = _placement_order(rs.m)
    ranked = -np.sort(-rs.values, axis=1)  # descending, stable not required
    out = np.empty_like(rs.values)
    out[:, order] = ranked
    return rs.copy_with(out)


def deviation(a: RingSampling, b: RingSampling) -> float:
    """Relative L2 distance over all samples, rings weighted by circumference."""
    if not a.same_geometry(b):
        raise ValueError("ring samplings have different geometry")
    w = (2.0 * math.pi * a.radii / a.m)[:, None]
    num = float(np.sum(w * (a.values - b.values) ** 2))
    den = float(np.sum(w * a.values**2))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return math.sqrt(num / den)


def star_polarizers(m: int, center=(0.0, 0.0), include_axis: bool = False):
    """All grid-aligned polarizers through ``center`` with ``h . e1 > 0``.

    ``include_axis=True`` appends the two polarizers with horizontal
    boundary line (``h = (0, +-1)``), the closure of the family; invariance
    under those forces exact axial symmetry.
    """
    pols = [
        Polarizer.from_angle(k * math.pi / m, b=center)
        for k in range(-(m // 2) + 1, m // 2)
    ]
    if include_axis:
        pols.append(Polarizer(h=(0.0, 1.0), b=(float(center[0]), float(center[1]))))
        pols.append(Polarizer(h=(0.0, -1.0), b=(float(center[0]), float(center[1]))))
    return pols
