"""Real-space and Bloch Hamiltonians of the ladder crystal."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lattice import ARM_ROLES, CellGeometry, CellSpec, IntercellMode, Role, build_geometry

HERMITIAN_RTOL = 1e-14


def is_hermitian(matrix: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim < 2 or matrix.shape[-1] != matrix.shape[-2]:
        return False
    scale = max(np.abs(matrix).max(initial=0.0), 1.0)
    return bool(np.abs(matrix - matrix.conj().swapaxes(-1, -2)).max(initial=0.0) <= rtol * scale)


def _anchor_index(geometry: CellGeometry, role: Role) -> int:
    column = 0 if role in (Role.ARM_UL, Role.ARM_DL) else geometry.n_chain - 1
    return geometry.lookup()[(Role.CHAIN, column)]


def assemble_intracell(geometry: CellGeometry, spec: CellSpec) -> np.ndarray:
    """Onsite energies plus every bond inside one cell."""
    dim = geometry.n_sites
    h0 = np.zeros((dim, dim), dtype=complex)
    for site in geometry.sites:
        h0[site.index, site.index] = spec.eps0 if site.role is Role.CHAIN else spec.arm_onsite(site.role)
    chain = geometry.chain_sites()
    for a, b in zip(chain[:-1], chain[1:]):
        h0[a.index, b.index] = h0[b.index, a.index] = spec.t_c
    for role in ARM_ROLES:
        previous = _anchor_index(geometry, role)
        for site in geometry.arm_sites(role):
            h0[previous, site.index] = h0[site.index, previous] = spec.t_a
            previous = site.index
    return h0


def assemble_intercell(geometry: CellGeometry, spec: CellSpec) -> np.ndarray:
    """Hopping block from cell ``n`` (rows) to cell ``n + 1`` (columns)."""
    dim = geometry.n_sites
    h1 = np.zeros((dim, dim), dtype=complex)
    if spec.t_i == 0.0:
        return h1
    table = geometry.lookup()
    h1[table[(Role.CHAIN, geometry.n_chain - 1)], table[(Role.CHAIN, 0)]] = spec.t_i
    if spec.intercell_mode is IntercellMode.FULL_COLUMN:
        # rows missing on either side are simply left uncoupled
        for right, left in ((Role.ARM_UR, Role.ARM_UL), (Role.ARM_DR, Role.ARM_DL)):
            for site in geometry.arm_sites(right):
                partner = table.get((left, site.row))
                if partner is not None:
                    h1[site.index, partner] = spec.t_i
    return h1


@dataclass(frozen=True)
class BlochOperator:
    """Intracell block ``h0`` and intercell hop ``h1`` generating ``H(k)``.

    ``geometry`` and ``spec`` record where the blocks came from; the
    symmetry, band and Zak routines read them.
    """

    h0: np.ndarray
    h1: np.ndarray
    geometry: CellGeometry
    spec: Optional[CellSpec] = None

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def lattice_constant(self) -> float:
        return self.geometry.lattice_constant


def bloch_operator(spec: CellSpec, geometry: Optional[CellGeometry] = None) -> BlochOperator:
    geometry = build_geometry(spec) if geometry is None else geometry
    return BlochOperator(assemble_intracell(geometry, spec), assemble_intercell(geometry, spec), geometry, spec)


def bloch_hamiltonian(op: BlochOperator, k) -> np.ndarray:
    """``H(k) = h0 + h1 exp(i k a) + h1^dagger exp(-i k a)``.

    ``k`` may be a scalar or an array; an array gives a stack of matrices
    with the k axis first.
    """
    k = np.asarray(k, dtype=float)
    phase = np.exp(1j * k * op.lattice_constant)[..., None, None]
    hop = op.h1 * phase
    return op.h0 + hop + np.conj(np.swapaxes(hop, -1, -2))


def build_finite(geometry: CellGeometry, spec: CellSpec, n_cells: int, periodic: bool = False) -> np.ndarray:
    """Open chain of ``n_cells`` complete cells (block tridiagonal).

    With ``periodic=True`` the last cell is also hopped back onto the
    first, which is only used to cross-check against the Bloch spectrum.
    """
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    h0 = assemble_intracell(geometry, spec)
    h1 = assemble_intercell(geometry, spec)
    d = h0.shape[0]
    h = np.zeros((n_cells * d, n_cells * d), dtype=complex)
    for c in range(n_cells):
        h[c * d:(c + 1) * d, c * d:(c + 1) * d] = h0
    for c in range(n_cells - 1):
        h[c * d:(c + 1) * d, (c + 1) * d:(c + 2) * d] += h1
        h[(c + 1) * d:(c + 2) * d, c * d:(c + 1) * d] += h1.conj().T
    if periodic and n_cells > 1:
        last = (n_cells - 1) * d
        h[last:last + d, 0:d] += h1
        h[0:d, last:last + d] += h1.conj().T
    elif periodic:
        h += h1 + h1.conj().T
    return h


def to_triplets(matrix: np.ndarray, atol: float = 0.0):
    """Nonzero entries as ``(row, col, re, im)`` tuples in row-major order."""
    matrix = np.asarray(matrix)
    rows, cols = np.nonzero(np.abs(matrix) > atol)
    return [(int(r), int(c), float(matrix[r, c].real), float(matrix[r, c].imag)) for r, c in zip(rows, cols)]


def format_triplets(matrix: np.ndarray) -> str:
    lines = ["row,col,re,im"]
    lines += [f"{r},{c},{re:.17g},{im:.17g}" for r, c, re, im in to_triplets(matrix)]
    return "\n".join(lines) + "\n"
