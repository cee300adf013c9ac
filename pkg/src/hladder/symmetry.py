"""Spatial operations as site permutations and two-color group classification.

The color flip ``C`` is not a Hilbert-space operator here.  It is the
parameter map that negates every arm detuning, so a colored check compares
``P H(k) P^T`` against the Hamiltonian rebuilt from the flipped cell.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import SymmetryError
from .hamiltonian import bloch_hamiltonian, bloch_operator
from .lattice import CellGeometry, CellSpec, GroupName, Role, build_geometry

SYMMETRY_ATOL = 1e-12
# generic k*a values plus both time-reversal-invariant momenta
_TEST_KA = (0.0, 0.3712, 1.1093, np.pi, 2.4521, 4.9187)


class OpKind(str, enum.Enum):
    IDENTITY = "Identity"
    MX = "Mx"
    MY = "My"
    INV = "Inv"


_ROLE_IMAGE = {
    OpKind.MX: {Role.ARM_UL: Role.ARM_DL, Role.ARM_DL: Role.ARM_UL,
                Role.ARM_UR: Role.ARM_DR, Role.ARM_DR: Role.ARM_UR},
    OpKind.MY: {Role.ARM_UL: Role.ARM_UR, Role.ARM_UR: Role.ARM_UL,
                Role.ARM_DL: Role.ARM_DR, Role.ARM_DR: Role.ARM_DL},
    OpKind.INV: {Role.ARM_UL: Role.ARM_DR, Role.ARM_DR: Role.ARM_UL,
                 Role.ARM_DL: Role.ARM_UR, Role.ARM_UR: Role.ARM_DL},
}


@dataclass(frozen=True)
class SymmetryOp:
    """Site bijection of one cell; ``perm[i]`` is the image of site ``i``.

    ``flips_k`` is True for operations that reverse the periodic direction
    (My, Inv); those relate ``H(k)`` to ``H(-k)``.
    """

    kind: OpKind
    perm: Tuple[int, ...]
    flips_k: bool

    def matrix(self) -> np.ndarray:
        n = len(self.perm)
        p = np.zeros((n, n))
        p[list(self.perm), list(range(n))] = 1.0
        return p

    def compose(self, other: "SymmetryOp") -> Tuple[int, ...]:
        """Permutation of ``self`` applied after ``other``."""
        return tuple(self.perm[j] for j in other.perm)


def op_permutation(geometry: CellGeometry, kind) -> SymmetryOp:
    kind = OpKind(kind)
    n = geometry.n_sites
    if kind is OpKind.IDENTITY:
        return SymmetryOp(kind, tuple(range(n)), False)
    nc = geometry.n_chain
    table = geometry.lookup()
    flips_column = kind in (OpKind.MY, OpKind.INV)
    flips_row = kind in (OpKind.MX, OpKind.INV)
    perm = [0] * n
    for site in geometry.sites:
        if site.role is Role.CHAIN:
            target = (Role.CHAIN, nc - 1 - site.column if flips_column else site.column)
        else:
            target = (_ROLE_IMAGE[kind][site.role], -site.row if flips_row else site.row)
        if target not in table:
            raise SymmetryError(
                f"operation not geometric: {kind.value} maps {site.role.value} row {site.row} "
                "onto a missing site (unequal arm lengths)")
        perm[site.index] = table[target]
    if sorted(perm) != list(range(n)):
        raise SymmetryError(f"operation not geometric: {kind.value} is not a bijection")
    return SymmetryOp(kind, tuple(perm), flips_column)


def color_flip(spec: CellSpec) -> CellSpec:
    """The two-color operation: every arm detuning changes sign."""
    return replace(spec, eps_ul=-spec.eps_ul, eps_dl=-spec.eps_dl,
                   eps_ur=-spec.eps_ur, eps_dr=-spec.eps_dr)


def check_symmetry(spec: CellSpec, kind, colored: bool = False, atol: float = SYMMETRY_ATOL) -> bool:
    """True when ``P H(k) P^T`` equals ``H(+-k)`` of the (color-flipped) cell."""
    geometry = build_geometry(spec)
    try:
        op = op_permutation(geometry, kind)
    except SymmetryError:
        return False
    p = op.matrix()
    ka = np.asarray(_TEST_KA)
    k = ka / geometry.lattice_constant
    h = bloch_hamiltonian(bloch_operator(spec, geometry), k)
    target_spec = color_flip(spec) if colored else spec
    target = bloch_hamiltonian(bloch_operator(target_spec, geometry), -k if op.flips_k else k)
    transformed = p @ h @ p.T
    return bool(np.abs(transformed - target).max() <= atol)


@dataclass(frozen=True)
class GroupLabel:
    label: GroupName
    protecting: Tuple[OpKind, ...]

    def describe(self) -> str:
        if not self.protecting:
            return f"{self.label.value} / protecting: none"
        return f"{self.label.value} / protecting: {', '.join(k.value for k in self.protecting)}"


# pure-symmetry pattern (Mx, My, Inv) with the other two holding only as colored ops
_SINGLE_PURE = {
    (False, True, False): GroupName.P2PMPM,
    (False, False, True): GroupName.P2MPMP,
    (True, False, False): GroupName.P2PMMP,
}
_PROTECTING = {
    GroupName.P2MM: (OpKind.MY, OpKind.INV),
    GroupName.P2PMPM: (OpKind.MY,),
    GroupName.P2MPMP: (OpKind.INV,),
    GroupName.P2PMMP: (),
    GroupName.NO_GROUP: (),
}


def symmetry_table(spec: CellSpec) -> Dict[Tuple[OpKind, bool], bool]:
    return {(kind, colored): check_symmetry(spec, kind, colored)
            for kind in (OpKind.MX, OpKind.MY, OpKind.INV) for colored in (False, True)}


def classify_group(spec: CellSpec) -> GroupLabel:
    table = symmetry_table(spec)
    kinds = (OpKind.MX, OpKind.MY, OpKind.INV)
    pure = tuple(table[(k, False)] for k in kinds)
    colored = tuple(table[(k, True)] for k in kinds)
    if all(pure):
        label = GroupName.P2MM
    elif pure in _SINGLE_PURE and all(c for p, c in zip(pure, colored) if not p):
        label = _SINGLE_PURE[pure]
    else:
        label = GroupName.NO_GROUP
    return GroupLabel(label, _PROTECTING[label])


def protecting_operation(spec: CellSpec) -> Optional[SymmetryOp]:
    """First pure symmetry along the periodic direction, if the cell has one."""
    group = classify_group(spec)
    if not group.protecting:
        return None
    return op_permutation(build_geometry(spec), group.protecting[0])


def parity(op: SymmetryOp, vector: np.ndarray) -> float:
    """Expectation value of the permutation in ``vector`` (+-1 for eigenstates)."""
    vector = np.asarray(vector)
    return float(np.real(np.vdot(vector, vector[np.argsort(op.perm)])))


def mirror_basis(geometry: CellGeometry) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal columns spanning the Mx-even and Mx-odd subspaces."""
    mx = op_permutation(geometry, OpKind.MX)
    n = geometry.n_sites
    even, odd = [], []
    for i in range(n):
        j = mx.perm[i]
        if j == i:
            v = np.zeros(n)
            v[i] = 1.0
            even.append(v)
        elif i < j:
            v = np.zeros(n)
            v[i] = v[j] = 1 / np.sqrt(2)
            even.append(v)
            w = np.zeros(n)
            # upper arm site carries +, lower arm site -
            upper = i if geometry.sites[i].row > 0 else j
            lower = j if upper == i else i
            w[upper], w[lower] = 1 / np.sqrt(2), -1 / np.sqrt(2)
            odd.append(w)
    return np.array(even).T, np.array(odd).reshape(len(odd), n).T


def mirror_sector_split(geometry: CellGeometry, spec: CellSpec, k: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """``H(k)`` restricted to the Mx-even and Mx-odd sectors.

    Requires Mx to be a pure symmetry of ``spec`` (P2'mm' or P2mm).  The
    odd block lives entirely on arm sites.
    """
    if not check_symmetry(spec, OpKind.MX, colored=False):
        raise SymmetryError("Mx not a pure symmetry")
    even, odd = mirror_basis(geometry)
    h = bloch_hamiltonian(bloch_operator(spec, geometry), k)
    return even.T @ h @ even, odd.T @ h @ odd
