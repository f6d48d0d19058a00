"""Analytic geometry of eccentric annuli, half-plane polarizers and caps.

The domain is the open set ``B_{R1}(0) \\ closure(B_{R0}((s, 0)))`` in the
plane: the outer disk is centered at the origin, the excised inner disk at
``(s, 0)``.  Two different angular conventions coexist and are kept apart on
purpose:

* ``phi`` parameterizes mesh rays from the inner center ``(s, 0)``, measured
  counter-clockwise from the positive x-axis;
* the polar angle ``theta = polar_angle(p, a)`` is measured from the
  *negative* x-direction through a center ``a`` and lives in ``[0, pi]``.
  Symmetric rearrangements are monotone in ``theta``, not in ``phi``.

Everything here is pure and operates on immutable values; point arguments
broadcast over trailing ``(..., 2)`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# absolute tolerance for geometric predicates on lengths normalized by R1
GEOM_TOL = 1e-12

E1 = np.array([1.0, 0.0])


class DomainError(ValueError):
    """Parameter set does not describe a valid eccentric annulus."""


class DegeneratePointError(ValueError):
    """Polar angle requested at the center point itself."""


@dataclass(frozen=True)
class AnnularDomain:
    """Eccentric annulus with outer radius R1, inner radius R0, offset s.

    Valid parameters satisfy ``0 < R0 < R1`` and ``0 <= s < R1 - R0`` so the
    closed inner disk stays strictly inside the outer disk.
    """

    R0: float
    R1: float
    s: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.R0 < self.R1):
            raise DomainError(f"need 0 < R0 < R1, got R0={self.R0}, R1={self.R1}")
        if not (0.0 <= self.s < self.R1 - self.R0):
            raise DomainError(
                f"need 0 <= s < R1 - R0 = {self.R1 - self.R0}, got s={self.s}"
            )

    @property
    def inner_center(self) -> np.ndarray:
        return np.array([self.s, 0.0])

    @property
    def area(self) -> float:
        return math.pi * (self.R1**2 - self.R0**2)

    def contains(self, p):
        """Open-set membership: ``|p| < R1`` and ``|p - (s,0)| > R0``."""
        p = np.asarray(p, dtype=float)
        q = p - self.inner_center
        inside = np.einsum("...i,...i->...", p, p) < self.R1**2
        off_hole = np.einsum("...i,...i->...", q, q) > self.R0**2
        out = inside & off_hole
        return bool(out) if out.ndim == 0 else out

    def signed_distance(self, p):
        """Negative outside the closure, zero on the boundary, positive inside."""
        p = np.asarray(p, dtype=float)
        q = p - self.inner_center
        d_outer = self.R1 - np.sqrt(np.einsum("...i,...i->...", p, p))
        d_inner = np.sqrt(np.einsum("...i,...i->...", q, q)) - self.R0
        return np.minimum(d_outer, d_inner)

    def ray_exit_distance(self, phi):
        """Distance from (s, 0) to the outer circle along (cos phi, sin phi).

        Rays from the inner center cross the annulus in a single segment, so
        the exit parameter ``t = -s cos(phi) + sqrt(R1^2 - s^2 sin^2(phi))``
        is unique and lies in ``[R1 - s, R1 + s]``.
        """
        phi = np.asarray(phi, dtype=float)
        c = np.cos(phi)
        sn = np.sin(phi)
        t = -self.s * c + np.sqrt(self.R1**2 - (self.s * sn) ** 2)
        return float(t) if t.ndim == 0 else t

    def exit_distance_from_direction(self, cos_phi, sin_phi):
        """Same as :meth:`ray_exit_distance` but from an explicit direction.

        Takes cos/sin directly so that callers with exactly mirror-symmetric
        direction tables get bitwise mirror-symmetric distances.
        """
        c = np.asarray(cos_phi, dtype=float)
        sn = np.asarray(sin_phi, dtype=float)
        return -self.s * c + np.sqrt(self.R1**2 - (self.s * sn) ** 2)


@dataclass(frozen=True)
class Polarizer:
    """Closed half plane ``H = {x : h . (x - b) <= 0}`` with unit normal h.

    ``h`` points out of H.  H belongs to the centered family when its
    boundary line passes through the origin; the star subfamily additionally
    has ``h . e1 > 0``, which places ``-e1`` strictly inside H.
    """

    h: tuple[float, float]
    b: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        nrm = math.hypot(self.h[0], self.h[1])
        if abs(nrm - 1.0) > 1e-14:
            raise ValueError(f"polarizer normal must be unit length, |h| = {nrm}")

    @classmethod
    def from_angle(cls, gamma: float, b=(0.0, 0.0)) -> "Polarizer":
        """Polarizer whose outward normal makes angle ``gamma`` with +x.

        Right angles snap to exact axis vectors so that axis-aligned
        reflections are exact in floating point.
        """
        k = gamma / (math.pi / 2)
        if k == round(k):
            c, sn = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(k)) % 4]
        else:
            c, sn = math.cos(gamma), math.sin(gamma)
        return cls(h=(c, sn), b=(float(b[0]), float(b[1])))

    @property
    def in_h0(self) -> bool:
        """True when the boundary line passes through the origin."""
        return abs(self.h[0] * self.b[0] + self.h[1] * self.b[1]) <= GEOM_TOL

    @property
    def in_hstar(self) -> bool:
        """True for the star subfamily: centered and ``h . e1 > 0``."""
        return self.in_h0 and self.h[0] > 0.0

    def side(self, p):
        """Signed side value ``h . (p - b)``; nonpositive inside H."""
        p = np.asarray(p, dtype=float)
        h = np.asarray(self.h)
        b = np.asarray(self.b)
        out = np.einsum("...i,i->...", p - b, h)
        return float(out) if out.ndim == 0 else out

    def contains(self, p):
        out = np.asarray(self.side(p)) <= 0.0
        return bool(out) if out.ndim == 0 else out

    def reflect(self, p):
        """Mirror image across the boundary line of H; an involution."""
        p = np.asarray(p, dtype=float)
        h = np.asarray(self.h)
        b = np.asarray(self.b)
        proj = np.einsum("...i,i->...", p - b, h)
        return p - 2.0 * proj[..., None] * h


def reflect(pol: Polarizer, p):
    return pol.reflect(p)


def polar_angle(p, a=(0.0, 0.0)):
    """Angle in [0, pi] of ``p`` about ``a``, measured from the -x direction.

    ``theta = arccos(-(p - a) . e1 / |p - a|)``: zero exactly on the ray
    ``a - R+ e1`` and pi on the opposite ray.  Raises for ``p == a``.
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    q = p - a
    r = np.sqrt(np.einsum("...i,...i->...", q, q))
    if np.any(r == 0.0):
        raise DegeneratePointError("polar angle undefined at the center point")
    c = np.clip(-q[..., 0] / r, -1.0, 1.0)
    out = np.arccos(c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Cap:
    """Sub-region of an annulus left of the vertical line ``x1 = alpha``."""

    alpha: float

    def contains(self, domain: AnnularDomain, p):
        if not (-domain.R1 < self.alpha < domain.R1):
            raise DomainError(
                f"cap threshold must lie in (-R1, R1), got {self.alpha}"
            )
        p = np.asarray(p, dtype=float)
        out = domain.contains(p) & (p[..., 0] < self.alpha)
        return bool(out) if np.ndim(out) == 0 else out
