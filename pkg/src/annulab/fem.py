"""P1 assembly of stiffness, mass and load, and Dirichlet elimination.

The three boundary configurations share one code path: ``ND`` pins the inner
circle, ``DN`` the outer one, ``DD`` both.  Dirichlet conditions are imposed
by eliminating the pinned rows/columns, never by penalties, so the reduced
stiffness stays well conditioned.  Neumann conditions are natural and add no
terms.

Assembled operators are made *exactly* symmetric and *exactly* invariant
under the mesh mirror permutation by averaging with their transpose/mirrored
images; both averages are exact in floating point because addition is
commutative and halving is lossless.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh

# explicit stored values smaller than this are pruned after assembly
ZERO_PRUNE = 1e-300


class ProblemKind(enum.Enum):
    """Boundary configuration: Dirichlet/Neumann split of the two circles."""

    ND = "nd"  # Dirichlet inner, Neumann outer
    DN = "dn"  # Neumann inner, Dirichlet outer
    DD = "dd"  # Dirichlet on the whole boundary

    @classmethod
    def parse(cls, name: str) -> "ProblemKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown problem kind {name!r}; expected nd, dn or dd")


@dataclass
class SparseSymMatrix:
    """Symmetric sparse matrix backed by CSR storage.

    The full pattern is kept for fast products; the lower triangle in
    compressed-row form is available through :meth:`lower_triangle`.
    """

    csr: sp.csr_matrix

    def __post_init__(self):
        a = self.csr.tocsr()
        if a.nnz:
            a.data[np.abs(a.data) < ZERO_PRUNE] = 0.0
            a.eliminate_zeros()
        diff = a - a.T
        if diff.nnz and np.abs(diff.data).max() > 0.0:
            raise ValueError("matrix is not symmetric")
        self.csr = a

    @property
    def dimension(self) -> int:
        return self.csr.shape[0]

    def __matmul__(self, x):
        return self.csr @ x

    def matvec(self, x):
        return self.csr @ x

    def quadratic_form(self, x) -> float:
        return float(x @ (self.csr @ x))

    def diagonal(self):
        return self.csr.diagonal()

    def lower_triangle(self):
        """(row offsets, column indices, values) of the lower triangle."""
        low = sp.tril(self.csr, format="csr")
        return low.indptr.copy(), low.indices.copy(), low.data.copy()

    def toarray(self):
        return self.csr.toarray()

    def submatrix(self, idx) -> "SparseSymMatrix":
        return SparseSymMatrix(self.csr[idx][:, idx].tocsr())


@dataclass
class Field:
    """Per-vertex scalar values of a finite element function."""

    values: np.ndarray
    mesh: Mesh

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.num_vertices,):
            raise ValueError(
                f"field length {self.values.shape} does not match "
                f"{self.mesh.num_vertices} mesh vertices"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")

    def at(self, pts, outside: str = "error"):
        return self.mesh.interpolate(self.values, pts, outside=outside)


def _p1_geometry(coords: np.ndarray):
    """Shape-function data for (nt, 3, 2) triangle coordinates."""
    x = coords[..., 0]
    y = coords[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (
        y[:, 1] - y[:, 0]
    )
    return b, c, 0.5 * area2


MASS_BLOCK = (np.ones((3, 3)) + np.eye(3)) / 12.0


def p1_local_matrices(coords: np.ndarray):
    """Per-triangle stiffness and mass blocks for (nt, 3, 2) coordinates."""
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 2
    if single:
        coords = coords[None]
    b, c, area = _p1_geometry(coords)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * area
    )[:, None, None]
    me = area[:, None, None] * MASS_BLOCK[None, :, :]
    if single:
        return ke[0], me[0]
    return ke, me


def _scatter(mesh: Mesh, local):
    """Sum (nt, 3, 3) local matrices into a global CSR matrix."""
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.num_vertices
    a = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    a.sum_duplicates()
    return a


def _symmetrize(a: sp.csr_matrix, mirror: np.ndarray) -> sp.csr_matrix:
    # both averages are exact projections: fl(x + y) = fl(y + x) and the
    # halving is a power of two
    a = (0.5 * (a + a.T)).tocsr()
    a = (0.5 * (a + a[mirror][:, mirror])).tocsr()
    a.sort_indices()
    return a


def assemble_stiffness(mesh: Mesh) -> SparseSymMatrix:
    """Stiffness matrix of the Laplacian: K_ij = integral grad phi_i . grad phi_j."""
    ke, _ = p1_local_matrices(mesh.vertices[mesh.triangles])
    return SparseSymMatrix(_symmetrize(_scatter(mesh, ke), mesh.mirror))


def assemble_mass(mesh: Mesh) -> SparseSymMatrix:
    """Consistent P1 mass matrix: local block area/12 * [[2,1,1],[1,2,1],[1,1,2]]."""
    _, me = p1_local_matrices(mesh.vertices[mesh.triangles])
    return SparseSymMatrix(_symmetrize(_scatter(mesh, me), mesh.mirror))


def assemble_load(mesh: Mesh) -> np.ndarray:
    """Load vector of the unit source: b_i = integral phi_i = adjacent area / 3."""
    _, _, area = _p1_geometry(mesh.vertices[mesh.triangles])
    b = np.zeros(mesh.num_vertices)
    np.add.at(b, mesh.triangles.ravel(), np.repeat(area / 3.0, 3))
    return 0.5 * (b + b[mesh.mirror])


def dirichlet_vertices(mesh: Mesh, kind: ProblemKind) -> np.ndarray:
    """Sorted indices of vertices pinned to zero for the given configuration."""
    parts = []
    if kind in (ProblemKind.ND, ProblemKind.DD):
        parts.append(mesh.lattice[:, 0])
    if kind in (ProblemKind.DN, ProblemKind.DD):
        parts.append(mesh.lattice[:, mesh.n_rad])
    return np.sort(np.concatenate(parts))


@dataclass
class Reduction:
    """Index map between full vertex vectors and the free (unpinned) subset."""

    free: np.ndarray
    full_size: int

    def expand(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.full_size)
        out[self.free] = x
        return out

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.free]

    def free_permutation(self, full_perm: np.ndarray) -> np.ndarray:
        """Restriction of a full-vertex permutation to free-index positions.

        Requires the permutation to map the free set onto itself.
        """
        pos = np.full(self.full_size, -1)
        pos[self.free] = np.arange(self.free.size)
        out = pos[full_perm[self.free]]
        if np.any(out < 0):
            raise ValueError("permutation does not preserve the free vertex set")
        return out


def reduce_system(
    K: SparseSymMatrix,
    M: SparseSymMatrix,
    b: np.ndarray,
    mesh: Mesh,
    kind: ProblemKind,
):
    """Eliminate Dirichlet rows/columns; returns (Khat, Mhat, bhat, reduction)."""
    pinned = dirichlet_vertices(mesh, kind)
    if pinned.size == 0:
        raise ValueError("empty Dirichlet set: the pure Neumann problem is singular")
    free = np.setdiff1d(np.arange(mesh.num_vertices), pinned, assume_unique=False)
    red = Reduction(free=free, full_size=mesh.num_vertices)
    return K.submatrix(free), M.submatrix(free), np.asarray(b)[free], red
