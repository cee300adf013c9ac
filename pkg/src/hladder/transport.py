"""Two-lead transmission and lead-coupled LDOS of a finite sample.

Each lead is a semi-infinite uniform chain hopping onto one outer chain
site of the sample.  Its effect on the device is the retarded self-energy
``t^2 g(E)`` on that site, with ``g`` the surface Green's function of the
lead.  Transmission uses the single-channel Caroli form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import TransportError
from .hamiltonian import build_finite
from .lattice import CellSpec, Role, build_geometry

DEFAULT_ETA = 1e-9
# eigenvalues closer than this (relative) form one degenerate cluster
CLUSTER_TOL = 1e-10
# lead-site amplitude below which a device mode counts as unreachable
COUPLING_FLOOR = 1e-10


@dataclass(frozen=True)
class LeadModel:
    hopping: float = 1.0
    onsite: float = 0.0
    site: Optional[int] = None

    def __post_init__(self):
        if self.hopping <= 0:
            raise ValueError("lead hopping must be positive")


@dataclass
class TransmissionCurve:
    energies: np.ndarray
    T: np.ndarray
    ldos: Optional[np.ndarray] = None


def lead_surface_green(energy: float, hopping: float = 1.0, eta: float = DEFAULT_ETA,
                       onsite: float = 0.0) -> complex:
    """Retarded surface Green's function of a semi-infinite chain.

    Inside the band ``|E| < 2|t|`` this is ``(E - i sqrt(4 t^2 - E^2)) / (2 t^2)``;
    outside it is the real root with ``|t g| < 1``.
    """
    if hopping == 0:
        raise ValueError("hopping must be nonzero")
    z = complex(energy - onsite, eta)
    root = np.sqrt(z * z - 4 * hopping ** 2)
    candidates = ((z - root) / (2 * hopping ** 2), (z + root) / (2 * hopping ** 2))
    if abs(energy - onsite) < 2 * abs(hopping):
        g = min(candidates, key=lambda c: c.imag)
    else:
        g = min(candidates, key=abs)
    return complex(g.real, min(g.imag, 0.0))


def attachment_sites(spec: CellSpec, n_cells: int) -> Tuple[int, int]:
    """Leftmost chain site of the first cell and rightmost of the last."""
    geometry = build_geometry(spec)
    table = geometry.lookup()
    d = geometry.n_sites
    return table[(Role.CHAIN, 0)], (n_cells - 1) * d + table[(Role.CHAIN, geometry.n_chain - 1)]


def _resolve_leads(spec, n_cells, leads):
    left, right = leads if leads is not None else (LeadModel(), LeadModel())
    default_left, default_right = attachment_sites(spec, n_cells)
    return ((left, default_left if left.site is None else left.site),
            (right, default_right if right.site is None else right.site))


class _CoupledDevice:
    """Device eigenmodes split into the part the leads can reach and the rest.

    Inside every degenerate cluster only the projections of the attachment
    sites couple to the leads; the orthogonal remainder is an exact bound
    state of the open system.  Working in the coupled subspace keeps the
    Green's function well conditioned at the energies of those bound states.
    """

    def __init__(self, h: np.ndarray, sites: Sequence[int]):
        energies, vectors = np.linalg.eigh(h)
        scale = max(1.0, float(np.abs(energies).max(initial=0.0)))
        coupled, coupled_e = [], []
        self.bound_energies, self.bound_weights = [], []
        start = 0
        n = len(energies)
        while start < n:
            stop = start + 1
            while stop < n and energies[stop] - energies[stop - 1] < CLUSTER_TOL * scale:
                stop += 1
            block = vectors[:, start:stop]
            u, sv, _ = np.linalg.svd(block[list(sites)].conj().T, full_matrices=False)
            keep = u[:, sv > COUPLING_FLOOR]
            level = float(energies[start:stop].mean())
            reached = block @ keep
            coupled.append(reached)
            coupled_e += [level] * reached.shape[1]
            remainder = np.sum(np.abs(block) ** 2, axis=1) - np.sum(np.abs(reached) ** 2, axis=1)
            if stop - start > reached.shape[1]:
                self.bound_energies.append(level)
                self.bound_weights.append(np.clip(remainder, 0.0, None))
            start = stop
        self.modes = np.hstack(coupled)
        self.energies = np.asarray(coupled_e)
        self.sites = list(sites)
        # lead-site amplitudes of the coupled modes, one column per site
        self.anchors = self.modes[self.sites].conj().T

    def green(self, energy: float, sigmas: Sequence[complex], eta: float, device_eta: float):
        """Green's function in the coupled basis."""
        a = np.diag(energy + 1j * device_eta - self.energies).astype(complex)
        for sigma, b in zip(sigmas, self.anchors.T):
            a -= sigma * np.outer(b, b.conj())
        try:
            return np.linalg.inv(a)
        except np.linalg.LinAlgError:
            pass
        # a coupled level outside the lead band sits exactly at E: broaden it
        try:
            return np.linalg.inv(a + 1j * eta * np.eye(len(a)))
        except np.linalg.LinAlgError as exc:
            raise TransportError(f"singular device matrix at E = {energy}") from exc

    def element(self, g: np.ndarray, i: int, j: int) -> complex:
        return complex(self.anchors[:, i].conj() @ g @ self.anchors[:, j])

    def ldos(self, g: np.ndarray, energy: float, device_eta: float) -> np.ndarray:
        rho = -np.einsum("ik,kl,il->i", self.modes, g, self.modes.conj()).imag / np.pi
        if device_eta > 0:
            for level, weight in zip(self.bound_energies, self.bound_weights):
                rho += weight * device_eta / np.pi / ((energy - level) ** 2 + device_eta ** 2)
        return rho


def _self_energies(energy: float, attached, eta: float):
    return [lead.hopping ** 2 * lead_surface_green(energy, lead.hopping, eta, lead.onsite)
            for lead, _ in attached]


def transmission(spec: CellSpec, n_cells: int, energies: Sequence[float],
                 leads: Optional[Tuple[LeadModel, LeadModel]] = None,
                 eta: float = DEFAULT_ETA, with_ldos: bool = False,
                 device_eta: float = 0.0) -> TransmissionCurve:
    """Caroli transmission between the two leads at each energy.

    ``eta`` is the retarded infinitesimal of the leads.  ``device_eta`` adds
    a uniform absorptive broadening to the sample itself; keep it at zero
    unless bound states outside the lead band must be smeared out.
    """
    h = build_finite(build_geometry(spec), spec, n_cells)
    attached = _resolve_leads(spec, n_cells, leads)
    device = _CoupledDevice(h, [site for _, site in attached])
    energies = np.asarray(energies, dtype=float)
    T = np.empty(len(energies))
    rho = np.empty((len(energies), h.shape[0])) if with_ldos else None
    for i, e in enumerate(energies):
        sig_l, sig_r = _self_energies(e, attached, eta)
        g = device.green(e, (sig_l, sig_r), eta, device_eta)
        gamma_l, gamma_r = -2 * sig_l.imag, -2 * sig_r.imag
        T[i] = gamma_l * gamma_r * abs(device.element(g, 0, 1)) ** 2
        if rho is not None:
            rho[i] = np.clip(device.ldos(g, e, device_eta), 0.0, None)
    return TransmissionCurve(energies, T, rho)


def device_ldos(spec: CellSpec, n_cells: int, energy: float,
                leads: Optional[Tuple[LeadModel, LeadModel]] = None,
                eta: float = DEFAULT_ETA, device_eta: float = 0.0) -> np.ndarray:
    """``-Im G_ii(E) / pi`` on every device site with both leads attached."""
    h = build_finite(build_geometry(spec), spec, n_cells)
    attached = _resolve_leads(spec, n_cells, leads)
    device = _CoupledDevice(h, [site for _, site in attached])
    g = device.green(energy, _self_energies(energy, attached, eta), eta, device_eta)
    return np.clip(device.ldos(g, energy, device_eta), 0.0, None)
