"""Numerical laboratory for Laplace problems on eccentric planar annuli.

Solves the mixed (inner Dirichlet / outer Neumann), reversed-mixed and pure
Dirichlet eigenvalue problems plus the torsion problem on the annulus
``B_{R1}(0) \\ closure(B_{R0}((s, 0)))``, checks the monotonicity and
symmetry structure of the computed first eigenfunctions, and evaluates the
derivative of the first eigenvalue in the offset ``s`` by three independent
routes.
"""

from .geometry import AnnularDomain, Cap, DomainError, Polarizer, polar_angle
from .mesh import Mesh, MeshQualityError, build_mesh
from .fem import (
    Field,
    ProblemKind,
    SparseSymMatrix,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    reduce_system,
)
from .eigensolver import EigenPair, SolverConvergenceError, smallest_eigenpair, solve_spd
from .spectral import EigenSolution, solve_eigenproblem, write_field_csv, write_field_vtk
from .symmetrize import (
    RingSampling,
    deviation,
    foliated_schwarz,
    polarize,
    sample_rings,
    star_polarizers,
)
from .checks import GeometryReport, geometry_report, recover_gradient
from .shape import (
    BoundaryTrace,
    VectorField,
    dilation_field,
    dirichlet_normal_derivative,
    eulerian_derivative,
    finite_difference_tau_prime,
    hadamard_tau_prime,
    half_boundary_tau_prime,
    reflected_neumann_margin,
    translation_field,
)
from .torsion import rigidity_derivative, solve_torsion, torsion_trace, torsional_rigidity
from .radial_oracle import concentric_eigenvalue, concentric_torsion
from .sweep import (
    DNAnalysis,
    Resolution,
    SweepRecord,
    analyze_dn_family,
    analyze_dn_ratio,
    bracket_critical_ratio,
    convergence_study,
    monotonicity_violations,
    sweep_translation,
    write_sweep_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AnnularDomain", "Cap", "DomainError", "Polarizer", "polar_angle",
    "Mesh", "MeshQualityError", "build_mesh",
    "Field", "ProblemKind", "SparseSymMatrix",
    "assemble_load", "assemble_mass", "assemble_stiffness", "reduce_system",
    "EigenPair", "SolverConvergenceError", "smallest_eigenpair", "solve_spd",
    "EigenSolution", "solve_eigenproblem", "write_field_csv", "write_field_vtk",
    "RingSampling", "deviation", "foliated_schwarz", "polarize",
    "sample_rings", "star_polarizers",
    "GeometryReport", "geometry_report", "recover_gradient",
    "BoundaryTrace", "VectorField", "dilation_field",
    "dirichlet_normal_derivative", "eulerian_derivative",
    "finite_difference_tau_prime", "hadamard_tau_prime",
    "half_boundary_tau_prime", "reflected_neumann_margin", "translation_field",
    "rigidity_derivative", "solve_torsion", "torsion_trace", "torsional_rigidity",
    "concentric_eigenvalue", "concentric_torsion",
    "DNAnalysis", "Resolution", "SweepRecord",
    "analyze_dn_family", "analyze_dn_ratio", "bracket_critical_ratio",
    "convergence_study", "monotonicity_violations", "sweep_translation",
    "write_sweep_csv",
]
