"""Derivative of the first eigenvalue under translations of the inner hole.

Three independent evaluations are provided and cross-checked:

* a boundary integral of the squared normal derivative over the inner circle,
  weighted by the first normal component;
* the same integral regrouped over the half circle right of ``x1 = s`` by
  pairing each edge with its mirror image: an exact discrete rearrangement;
* the general Eulerian form for an arbitrary perturbation field, which
  reduces to the first one for the canonical translation field and also
  covers dilations;
* central finite differences of the eigenvalue in the offset.

The outward normal of the annulus is used everywhere; on the inner circle it
points into the hole.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checks import GradientField, recover_gradient
from .fem import Field, ProblemKind
from .geometry import AnnularDomain
from .mesh import Mesh
from .spectral import solve_eigenproblem


class SymmetryViolationError(RuntimeError):
    """Inner-circle edges failed to pair up across x1 = s."""


@dataclass
class BoundaryTrace:
    """Per-edge normal derivative data on the inner (Dirichlet) circle.

    ``normals`` are outward unit normals of the annulus evaluated at edge
    midpoints, i.e. they point toward the inner center.
    """

    midpoints: np.ndarray  # (E, 2)
    normals: np.ndarray  # (E, 2)
    lengths: np.ndarray  # (E,)
    dudn: np.ndarray  # (E,)
    mesh: Mesh


def dirichlet_normal_derivative(u: Field, kind: ProblemKind) -> BoundaryTrace:
    """One-sided normal derivative of ``u`` on the inner circle.

    Each inner boundary edge has a unique adjacent triangle whose constant
    P1 gradient is already normal to the edge (the trace vanishes on it), so
    dotting with the outward normal loses nothing.
    """
    if kind is ProblemKind.DN:
        raise ValueError("the inner circle is not Dirichlet for kind 'dn'")
    mesh = u.mesh
    d = mesh.domain
    vals = u.values
    pinned = vals[mesh.lattice[:, 0]]
    if np.abs(pinned).max() > 1e-12 * max(np.abs(vals).max(), 1.0):
        raise ValueError("field does not vanish on the inner circle")

    edges = mesh.inner_edges  # (n_theta, 2), ccw
    # the inner edge belongs to exactly one of its quad's two triangles,
    # depending on the diagonal choice
    quads = np.arange(mesh.n_theta) * mesh.n_rad
    cand0 = mesh.triangles[2 * quads]
    cand1 = mesh.triangles[2 * quads + 1]

    def has_edge(tri):
        a = (tri == edges[:, 0:1]).any(axis=1)
        b = (tri == edges[:, 1:2]).any(axis=1)
        return a & b

    use0 = has_edge(cand0)
    use1 = has_edge(cand1)
    if not np.all(use0 | use1):
        raise RuntimeError("inner edge without adjacent triangle")
    tids = np.where(use0, 2 * quads, 2 * quads + 1)

    tri = mesh.triangles[tids]
    p = mesh.vertices[tri]
    x = p[..., 0]
    y = p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = mesh.areas[tids]
    uv = vals[tri]
    gx = np.einsum("ij,ij->i", uv, b) / (2.0 * area)
    gy = np.einsum("ij,ij->i", uv, c) / (2.0 * area)

    v0 = mesh.vertices[edges[:, 0]]
    v1 = mesh.vertices[edges[:, 1]]
    mid = 0.5 * (v0 + v1)
    lengths = np.hypot(*(v1 - v0).T)
    normals = d.inner_center - mid
    normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
    dudn = gx * normals[:, 0] + gy * normals[:, 1]

    tangential = gx * (-normals[:, 1]) + gy * normals[:, 0]
    scale = max(float(np.abs(dudn).max()), 1e-30)
    if np.abs(tangential).max() > 1e-10 * scale:
        raise RuntimeError("trace gradient has an unexpected tangential component")

    return BoundaryTrace(
        midpoints=mid, normals=normals, lengths=lengths, dudn=dudn, mesh=mesh
    )


def hadamard_tau_prime(trace: BoundaryTrace) -> float:
    """Eigenvalue derivative: minus the n1-weighted square of the trace."""
    return -float(np.sum(trace.dudn**2 * trace.normals[:, 0] * trace.lengths))


def _mirror_edge_indices(n_theta: int) -> np.ndarray:
    """Index of the x1 = s mirror image of each inner edge."""
    i = np.arange(n_theta)
    return (n_theta // 2 - 1 - i) % n_theta


def half_boundary_tau_prime(trace: BoundaryTrace, domain: AnnularDomain) -> float:
    """Same derivative regrouped over the half circle right of x1 = s.

    Each edge with midpoint ``x1 > s`` contributes
    ``(dudn(mirror)^2 - dudn^2) n1 length``; this is an exact rearrangement
    of the full sum because the inner circle is built mirror symmetric.
    """
    mesh = trace.mesh
    n = mesh.n_theta
    mirror = _mirror_edge_indices(n)
    mid_x = trace.midpoints[:, 0]
    tol = 1e-10 * domain.R1
    bad = np.abs(mid_x[mirror] - (2.0 * domain.s - mid_x)) > tol
    if np.any(bad):
        raise SymmetryViolationError(
            f"{int(bad.sum())} inner edges have no x1-mirror partner"
        )
    right = mid_x > domain.s
    m = mirror[right]
    diff = trace.dudn[m] ** 2 - trace.dudn[right] ** 2
    return float(np.sum(diff * trace.normals[right, 0] * trace.lengths[right]))


@dataclass
class VectorField:
    """Perturbation field: vertex vectors plus normal components per edge."""

    vertex_values: np.ndarray  # (nv, 2)
    inner_vn: np.ndarray  # (n_theta,) V.n at inner edge midpoints
    outer_vn: np.ndarray  # (n_theta,) V.n at outer edge midpoints
    mesh: Mesh


def _edge_geometry(mesh: Mesh, edges):
    v0 = mesh.vertices[edges[:, 0]]
    v1 = mesh.vertices[edges[:, 1]]
    mid = 0.5 * (v0 + v1)
    lengths = np.hypot(*(v1 - v0).T)
    return mid, lengths


def translation_field(mesh: Mesh) -> VectorField:
    """Unit x-translation near the inner circle, vanishing at the outer one.

    The plateau radius keeps the support inside the outer disk, so the
    perturbed domains are exactly the translated annuli.
    """
    d = mesh.domain
    gap = d.R1 - d.s - d.R0
    r_in = d.R0 + 0.25 * gap
    r_out = d.R0 + 0.75 * gap
    q = mesh.vertices - d.inner_center
    r = np.hypot(q[:, 0], q[:, 1])
    t = np.clip((r - r_in) / (r_out - r_in), 0.0, 1.0)
    rho = 1.0 - t * t * (3.0 - 2.0 * t)  # smoothstep plateau
    vertex = np.zeros_like(mesh.vertices)
    vertex[:, 0] = rho

    mid, _ = _edge_geometry(mesh, mesh.inner_edges)
    normals = d.inner_center - mid
    normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
    inner_vn = normals[:, 0]
    outer_vn = np.zeros(mesh.n_theta)
    return VectorField(vertex, inner_vn, outer_vn, mesh)


def dilation_field(mesh: Mesh) -> VectorField:
    """The field V(x) = x; useful as an independent scaling cross-check."""
    d = mesh.domain
    mid_i, _ = _edge_geometry(mesh, mesh.inner_edges)
    normals = d.inner_center - mid_i
    normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
    inner_vn = np.einsum("ij,ij->i", mid_i, normals)
    mid_o, _ = _edge_geometry(mesh, mesh.outer_edges)
    outer_vn = np.hypot(mid_o[:, 0], mid_o[:, 1])  # x . x/|x|
    return VectorField(mesh.vertices.copy(), inner_vn, outer_vn, mesh)


def eulerian_derivative(
    u: Field, tau: float, V: VectorField, kind: ProblemKind = ProblemKind.ND
) -> float:
    """General first-variation formula for the eigenvalue.

    ``integral over the outer circle of (|grad u|^2 - tau u^2)(V.n)`` minus
    ``integral over the inner circle of (du/dn)^2 (V.n)``; outer gradients
    use the recovered vertex gradient averaged to edge midpoints, inner ones
    the one-sided trace.
    """
    if kind is not ProblemKind.ND:
        raise ValueError("the Eulerian formula is set up for kind 'nd'")
    mesh = u.mesh
    trace = dirichlet_normal_derivative(u, kind)
    inner = -float(np.sum(trace.dudn**2 * V.inner_vn * trace.lengths))

    grad = recover_gradient(u).values
    e = mesh.outer_edges
    gmid = 0.5 * (grad[e[:, 0]] + grad[e[:, 1]])
    umid = 0.5 * (u.values[e[:, 0]] + u.values[e[:, 1]])
    _, lengths = _edge_geometry(mesh, e)
    dens = np.einsum("ij,ij->i", gmid, gmid) - tau * umid**2
    outer = float(np.sum(dens * V.outer_vn * lengths))
    return outer + inner


def finite_difference_tau_prime(
    domain: AnnularDomain,
    h: float = 0.05,
    n_theta: int = 256,
    n_rad: int = 64,
    grading: float = 1.0,
    kind: ProblemKind = ProblemKind.ND,
    tol: float = 1e-9,
    linear_solver: str = "pcg",
) -> float:
    """Central difference of the eigenvalue in the offset, one-sided at s = 0.

    All re-solves use the identical resolution so the discretization bias
    cancels in the difference.  The step must satisfy
    ``h <= min(s, R1 - R0 - s)/4`` (``h <= (R1 - R0)/8`` at s = 0, where the
    second-order one-sided formula needs 2h of room).
    """
    if h <= 0.0:
        raise ValueError("step must be positive")
    room = domain.R1 - domain.R0 - domain.s
    limit = room / 8.0 if domain.s == 0.0 else min(domain.s, room) / 4.0
    if h > limit:
        raise ValueError(f"step {h} too large; must be <= {limit}")

    def tau_at(s):
        dd = AnnularDomain(domain.R0, domain.R1, s)
        return solve_eigenproblem(
            dd, n_theta, n_rad, grading, kind, tol=tol, linear_solver=linear_solver
        ).value

    if domain.s == 0.0:
        # second-order one-sided stencil; the plain forward difference would
        # pick up the O(h) curvature term of the even function tau(s)
        return (-3.0 * tau_at(0.0) + 4.0 * tau_at(h) - tau_at(2.0 * h)) / (2.0 * h)
    return (tau_at(domain.s + h) - tau_at(domain.s - h)) / (2.0 * h)


def reflected_neumann_margin(
    u: Field, grad: GradientField | None = None, exclusion: float | None = None
):
    """Worst value of the reflected normal-derivative proxy on the outer circle.

    For an outer vertex ``x`` with ``x1 > s`` the composition of ``u`` with
    the reflection across ``x1 = s`` has outward normal derivative
    ``grad u(sigma x) . ((-x1, x2)/R1)``; it is positive away from the two
    points where the outer circle meets the reflection line.  Returns
    ``(min proxy, number of tested vertices)``.
    """
    mesh = u.mesh
    d = mesh.domain
    if exclusion is None:
        exclusion = 0.05 * d.R1
    if grad is None:
        grad = recover_gradient(u)
    corners_y = np.sqrt(max(d.R1**2 - d.s**2, 0.0))
    outer = mesh.vertices[mesh.lattice[:, mesh.n_rad]]
    sel = outer[:, 0] > d.s
    for cy in (corners_y, -corners_y):
        sel &= np.hypot(outer[:, 0] - d.s, outer[:, 1] - cy) > exclusion
    pts = outer[sel]
    refl = np.stack([2.0 * d.s - pts[:, 0], pts[:, 1]], axis=1)
    gref = grad.at(refl, outside="clamp")
    proxy = (gref[:, 0] * (-pts[:, 0]) + gref[:, 1] * pts[:, 1]) / d.R1
    return float(proxy.min()), int(sel.sum())
