"""Zak phases from a discrete Wilson loop with the periodic gauge.

The loop runs over the cell-periodic parts ``u_k = exp(-i k x) psi_k`` of
the Bloch eigenvectors, with ``x = x_frac * a`` the horizontal site
position.  Because ``psi`` is periodic in ``k`` under the ``exp(i k a)``
Bloch convention, the closing vector ``u_{2 pi / a}`` is the ``k = 0``
vector multiplied site by site by ``exp(-2 pi i x_frac)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegeneracyError, VanishingOverlapError
from .hamiltonian import BlochOperator, bloch_hamiltonian, bloch_operator
from .lattice import CellSpec, GroupName, GroupPreset, apply_texture

TWO_PI = 2 * np.pi
DEFAULT_NK = 512
QUANTIZATION_TOL = 1e-3
OVERLAP_FLOOR = 1e-8
BAND_SPACING_FLOOR = 1e-10


def wrap_phase(phase: float) -> float:
    """Map onto the branch ``[0, 2 pi)``."""
    wrapped = float(np.mod(phase, TWO_PI))
    return 0.0 if wrapped >= TWO_PI else wrapped


def phase_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    d = np.mod(a - b, TWO_PI)
    return float(min(d, TWO_PI - d))


@dataclass
class GaugeFrame:
    """Cell-periodic eigenvectors of one band around the Brillouin zone.

    ``vectors`` has ``n_k + 1`` rows; the last row is the gauge-fixed copy
    of the first.
    """

    band: int
    k: np.ndarray
    vectors: np.ndarray
    n_chain: int

    @property
    def n_k(self) -> int:
        return len(self.k) - 1


@dataclass(frozen=True)
class ZakResult:
    band: int
    phase: float
    n_k: int
    convergence: float
    quantized_to: Optional[float]


def quantized_values(n_chain: int) -> Tuple[float, float]:
    return (np.pi - np.pi / n_chain, TWO_PI - np.pi / n_chain)


def quantization_distance(phase: float, n_chain: int) -> float:
    """Distance of ``phase + pi / n_chain`` from the set {0, pi} modulo 2 pi."""
    shifted = phase + np.pi / n_chain
    return min(phase_distance(shifted, 0.0), phase_distance(shifted, np.pi))


def periodic_gauge_frame(op: BlochOperator, band: int, n_k: int = DEFAULT_NK,
                         origin_shift: float = 0.0) -> GaugeFrame:
    """Eigenvectors of ``band`` on ``n_k`` points plus the gauge-fixed endpoint.

    ``origin_shift`` moves every site by that horizontal distance, which
    adds ``2 pi shift / a`` to the resulting phase.
    """
    if n_k < 2:
        raise ValueError("n_k must be >= 2")
    a = op.lattice_constant
    x_frac = np.asarray(op.geometry.x_frac) + origin_shift / a
    k = TWO_PI / a * np.arange(n_k + 1) / n_k
    energies, vecs = np.linalg.eigh(bloch_hamiltonian(op, k[:-1]))
    spacing = np.full(n_k, np.inf)
    if band > 0:
        spacing = np.minimum(spacing, energies[:, band] - energies[:, band - 1])
    if band < op.dim - 1:
        spacing = np.minimum(spacing, energies[:, band + 1] - energies[:, band])
    bad = np.nonzero(spacing < BAND_SPACING_FLOOR)[0]
    if len(bad):
        raise DegeneracyError(f"degeneracy on grid for band {band} at k = {k[bad[0]]:.6g}", k=float(k[bad[0]]))
    psi = vecs[:, :, band]
    u = np.exp(-1j * np.outer(k[:-1], x_frac * a)) * psi
    closing = u[0] * np.exp(-1j * TWO_PI * x_frac)
    return GaugeFrame(band=band, k=k, vectors=np.vstack([u, closing]), n_chain=op.geometry.n_chain)


def _loop_phase(vectors: np.ndarray) -> float:
    overlaps = np.einsum("ij,ij->i", vectors[:-1].conj(), vectors[1:])
    smallest = np.abs(overlaps).min()
    if smallest < OVERLAP_FLOOR:
        raise VanishingOverlapError(
            f"vanishing overlap |<u_k|u_k+dk>| = {smallest:.3g}; grid too coarse or bands cross")
    # normalise each factor before multiplying so the product cannot underflow
    product = np.prod(overlaps / np.abs(overlaps))
    return wrap_phase(-np.angle(product))


def zak_phase(frame: GaugeFrame, tol: float = QUANTIZATION_TOL) -> ZakResult:
    phase = _loop_phase(frame.vectors)
    if frame.n_k % 2 == 0 and frame.n_k >= 4:
        coarse = _loop_phase(frame.vectors[::2])
        convergence = phase_distance(phase, coarse)
    else:
        convergence = float("nan")
    quantized_to = None
    for target in quantized_values(frame.n_chain):
        if phase_distance(phase, target) < tol:
            quantized_to = float(target)
    return ZakResult(frame.band, phase, frame.n_k, convergence, quantized_to)


def zak_phases(op: BlochOperator, bands: Optional[Sequence[int]] = None, n_k: int = DEFAULT_NK,
               origin_shift: float = 0.0) -> List[ZakResult]:
    bands = range(op.dim) if bands is None else bands
    return [zak_phase(periodic_gauge_frame(op, b, n_k, origin_shift)) for b in bands]


def central_bands(op: BlochOperator) -> Tuple[int, int]:
    from .bands import central_pair

    ks = np.linspace(0, TWO_PI / op.lattice_constant, 33)
    return central_pair(np.linalg.eigvalsh(bloch_hamiltonian(op, ks)))


def zak_transition(template: CellSpec, t_i_values: Sequence[float], label=GroupName.P2PMPM,
                   abs_eps: float = 0.1, bands: Optional[Tuple[int, int]] = None,
                   n_k: int = DEFAULT_NK) -> List[Tuple[float, float, float]]:
    """Zak phases of the central pair along a sweep of ``t_i``."""
    rows = []
    for t_i in t_i_values:
        spec = apply_texture(template.with_(t_i=float(t_i)), GroupPreset(label, abs_eps))
        op = bloch_operator(spec)
        pair = central_bands(op) if bands is None else bands
        first, second = (zak_phase(periodic_gauge_frame(op, b, n_k)).phase for b in pair)
        rows.append((float(t_i), first, second))
    return rows
