"""Tight-binding toolkit for the H-cell ladder crystal."""
from .lattice import (CellGeometry, CellSpec, GroupName, GroupPreset, IntercellMode, Role, Site,
                      apply_texture, build_geometry, textured)
from .hamiltonian import (BlochOperator, assemble_intercell, assemble_intracell, bloch_hamiltonian,
                          bloch_operator, build_finite)

__version__ = "0.1.0"

__all__ = [
    "CellGeometry", "CellSpec", "GroupName", "GroupPreset", "IntercellMode", "Role", "Site",
    "apply_texture", "build_geometry", "textured", "BlochOperator", "assemble_intercell",
    "assemble_intracell", "bloch_hamiltonian", "bloch_operator", "build_finite",
]
