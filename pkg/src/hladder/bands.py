"""Band structures, flat-band detection and the central-pair band inversion."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import NoClosingError, NoStraddlingPairError
from .hamiltonian import BlochOperator, bloch_hamiltonian, bloch_operator
from .lattice import CellSpec, GroupName, GroupPreset, apply_texture
from .symmetry import OpKind, check_symmetry, op_permutation, parity, protecting_operation

logger = logging.getLogger(__name__)

DEFAULT_NK = 512
FLAT_TOL = 1e-9
BISECTION_TOL = 1e-6
DEGENERACY_TOL = 1e-9


@dataclass
class BandStructure:
    """Sorted spectrum on a closed k grid ``[0, 2 pi / a]``.

    ``vectors[i, :, n]`` is the eigenvector of band ``n`` at ``k[i]``.
    """

    k: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    op: BlochOperator

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]

    def dispersion(self) -> np.ndarray:
        return self.energies.max(axis=0) - self.energies.min(axis=0)


def _rotate_clusters(energies, vectors, previous, local_op):
    """Fix the basis inside degenerate clusters at one k point.

    A k-local pure symmetry (Mx) is diagonalized inside the cluster when
    available; otherwise the cluster is aligned with the previous k point.
    """
    n = len(energies)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            if local_op is not None:
                sym = block.conj().T @ local_op @ block
                _, rot = np.linalg.eigh((sym + sym.conj().T) / 2)
                vectors[:, start:stop] = block @ rot
            elif previous is not None:
                u, _, vh = np.linalg.svd(block.conj().T @ previous[:, start:stop])
                vectors[:, start:stop] = block @ (u @ vh)
        start = stop
    return vectors


def band_structure(op: BlochOperator, n_k: int = DEFAULT_NK) -> BandStructure:
    if n_k < 2:
        raise ValueError(f"n_k must be >= 2, got {n_k}")
    k = np.linspace(0.0, 2 * np.pi / op.lattice_constant, n_k)
    energies, vectors = np.linalg.eigh(bloch_hamiltonian(op, k))
    local_op = None
    if op.spec is not None and check_symmetry(op.spec, OpKind.MX):
        local_op = op_permutation(op.geometry, OpKind.MX).matrix()
    gaps = np.diff(energies, axis=1)
    if np.any(gaps < DEGENERACY_TOL):
        for i in range(n_k):
            if np.any(gaps[i] < DEGENERACY_TOL):
                prev = vectors[i - 1] if i > 0 else None
                vectors[i] = _rotate_clusters(energies[i], vectors[i], prev, local_op)
    return BandStructure(k=k, energies=energies, vectors=vectors, op=op)


@dataclass(frozen=True)
class FlatBand:
    index: int
    energy: float
    dispersion: float


def flat_band_scan(bs: BandStructure, tol: float = FLAT_TOL) -> List[FlatBand]:
    """Energies present at every k to within ``tol``.

    The check follows energies rather than sorted band indices, so a flat
    band crossed by a dispersive one is still found.  ``index`` is the
    sorted band index at ``k = 0``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    e0 = bs.energies[0]
    found: List[FlatBand] = []
    start = 0
    n = len(e0)
    while start < n:
        stop = start + 1
        while stop < n and e0[stop] - e0[start] < tol:
            stop += 1
        center = e0[start:stop].mean()
        near = np.abs(bs.energies - center) < tol
        multiplicity = int(min(near.sum(axis=1).min(), stop - start))
        if multiplicity:
            # the `multiplicity` closest eigenvalues at each k are the flat ones
            order = np.argsort(np.abs(bs.energies - center), axis=1)[:, :multiplicity]
            picked = np.take_along_axis(bs.energies, order, axis=1)
            spread = float(picked.max() - picked.min())
            for j in range(multiplicity):
                found.append(FlatBand(start + j, float(picked[:, j].mean()), spread))
        start = stop
    return found


@dataclass(frozen=True)
class GapReport:
    band_pair: Tuple[int, int]
    min_gap: float
    argmin_k: float
    inverted: bool


def central_pair(energies: np.ndarray) -> Tuple[int, int]:
    """Indices of the two bands whose mean energies straddle zero."""
    means = np.asarray(energies).mean(axis=0)
    below = np.nonzero(means < 0)[0]
    if len(below) == 0 or below[-1] + 1 >= len(means):
        raise NoStraddlingPairError("no straddling pair: all bands lie on one side of E = 0")
    lower = int(below[-1])
    return lower, lower + 1


def _high_symmetry_states(op: BlochOperator):
    ks = np.array([0.0, np.pi / op.lattice_constant])
    energies, vectors = np.linalg.eigh(bloch_hamiltonian(op, ks))
    return ks, energies, vectors


def _lower_band_parities(op: BlochOperator, lower: int):
    """Parity of band ``lower`` at k = 0 and k = pi/a under the protecting symmetry."""
    sym = protecting_operation(op.spec) if op.spec is not None else None
    if sym is None:
        return None
    _, _, vectors = _high_symmetry_states(op)
    return tuple(int(np.sign(round(parity(sym, vectors[i, :, lower]), 6))) for i in range(2))


def is_inverted(op: BlochOperator, lower: int) -> bool:
    """Parity product of the lower central band at k = 0 and k = pi/a is -1.

    At ``t_i = 0`` every band is k independent, so the product starts at
    +1; a sign change means the central pair has exchanged character.
    """
    parities = _lower_band_parities(op, lower)
    if parities is None or 0 in parities:
        return False
    return parities[0] * parities[1] < 0


def central_pair_gap(bs: BandStructure) -> GapReport:
    lower, upper = central_pair(bs.energies)
    gaps = bs.energies[:, upper] - bs.energies[:, lower]
    i = int(np.argmin(gaps))
    min_gap, argmin_k = float(gaps[i]), float(bs.k[i])
    ks, e_hs, _ = _high_symmetry_states(bs.op)
    for k, e in zip(ks, e_hs):
        g = float(e[upper] - e[lower])
        if g < min_gap:
            min_gap, argmin_k = g, float(k)
    return GapReport((lower, upper), max(min_gap, 0.0), argmin_k, is_inverted(bs.op, lower))


def _op_for(template: CellSpec, label, abs_eps: float, t_i: float) -> BlochOperator:
    spec = apply_texture(template.with_(t_i=t_i), GroupPreset(label, abs_eps))
    return bloch_operator(spec)


def _inverted_at(template, label, abs_eps, t_i) -> bool:
    op = _op_for(template, label, abs_eps, t_i)
    _, e, _ = _high_symmetry_states(op)
    lower, _ = central_pair(e)
    return is_inverted(op, lower)


def _signed_gap(template, label, abs_eps, t_i, k_index, reference_parity) -> float:
    op = _op_for(template, label, abs_eps, t_i)
    _, e, v = _high_symmetry_states(op)
    lower, upper = central_pair(e)
    sym = protecting_operation(op.spec)
    p = np.sign(parity(sym, v[k_index, :, lower]))
    gap = e[k_index, upper] - e[k_index, lower]
    return float(gap if p == reference_parity else -gap)


def _scan_bracket(template, label, abs_eps, t_max=2.0, n=400) -> Tuple[float, float]:
    grid = np.geomspace(1e-7, t_max, n)
    start = _inverted_at(template, label, abs_eps, grid[0])
    for lo, hi in zip(grid[:-1], grid[1:]):
        if _inverted_at(template, label, abs_eps, hi) != start:
            return float(lo), float(hi)
    raise NoClosingError(f"no closing in (1e-7, {t_max}) for |eps| = {abs_eps}")


def critical_ti(template: CellSpec, abs_eps: float, bracket: Optional[Tuple[float, float]] = None,
                label=GroupName.P2PMPM, tol: float = BISECTION_TOL) -> float:
    """Intercell hopping at which the central pair inverts.

    Bisects on the parity-inversion flag until the bracket is narrower than
    ``tol``, then takes one secant step on the parity-signed gap at the
    momentum where the parity flipped, which lands on the closing point.

    Parameters
    ----------
    template
        Cell supplying geometry, hoppings and intercell mode; its ``t_i``
        and arm onsites are overwritten.
    abs_eps
        Detuning magnitude.
    bracket
        ``(lo, hi)`` in ``t_i``.  When omitted it is found by a geometric
        scan starting just above zero.
    label
        Group texture to apply (must have a protecting symmetry).
    """
    if bracket is None:
        bracket = _scan_bracket(template, label, abs_eps)
    lo, hi = map(float, bracket)
    f_lo = _inverted_at(template, label, abs_eps, lo)
    if _inverted_at(template, label, abs_eps, hi) == f_lo:
        raise NoClosingError(f"no closing in bracket ({lo}, {hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _inverted_at(template, label, abs_eps, mid) == f_lo:
            lo = mid
        else:
            hi = mid
    op_lo = _op_for(template, label, abs_eps, lo)
    op_hi = _op_for(template, label, abs_eps, hi)
    _, e_lo, _ = _high_symmetry_states(op_lo)
    lower, _ = central_pair(e_lo)
    p_lo = _lower_band_parities(op_lo, lower)
    p_hi = _lower_band_parities(op_hi, lower)
    k_index = 0 if p_lo[0] != p_hi[0] else 1
    g_lo = _signed_gap(template, label, abs_eps, lo, k_index, p_lo[k_index])
    g_hi = _signed_gap(template, label, abs_eps, hi, k_index, p_lo[k_index])
    if g_lo != g_hi:
        root = lo - g_lo * (hi - lo) / (g_hi - g_lo)
        if lo <= root <= hi:
            return float(root)
    return 0.5 * (lo + hi)


def phase_diagram(template: CellSpec, eps_list: Sequence[float], label=GroupName.P2PMPM,
                  bracket: Optional[Tuple[float, float]] = None) -> List[Tuple[float, float]]:
    """Critical ``t_i`` for each detuning magnitude (the band-inversion line)."""
    out = []
    for eps in eps_list:
        out.append((float(eps), critical_ti(template, eps, bracket=bracket, label=label)))
        logger.debug("critical t_i at |eps|=%g: %g", eps, out[-1][1])
    return out


def gap_at(template: CellSpec, label, abs_eps: float, t_i: float, n_k: int = 129) -> float:
    """Central-pair direct gap for one parameter point (coarse helper for sweeps)."""
    return central_pair_gap(band_structure(_op_for(template, label, abs_eps, t_i), n_k)).min_gap
