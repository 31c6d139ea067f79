"""Compact discontinuous Galerkin (CDG) discretizations of elliptic problems,
with the LDG and BR2 schemes for comparison."""

__version__ = "0.1.0"

from .basis import NodalBasis, reference_element
from .forms import DGField, DGSpace, ProblemSpec, SchemeConfig, assemble
from .linalg import SystemMatrix, nullspace_dim, solve_spd, spectral_radius_generalized
from .manufactured import ManufacturedSolution
from .mesh import Mesh, assign_switches, build_structured_mesh

__all__ = [
    "NodalBasis", "reference_element", "DGField", "DGSpace", "ProblemSpec", "SchemeConfig",
    "assemble", "SystemMatrix", "nullspace_dim", "solve_spd", "spectral_radius_generalized",
    "ManufacturedSolution", "Mesh", "assign_switches", "build_structured_mesh",
]
