"""Parameter sets and data tables behind each figure data set."""
from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

import numpy as np

from .bands import band_structure, central_pair, phase_diagram
from .finite import bulk_gap_window, finite_spectrum, in_gap_states, ldos
from .hamiltonian import bloch_operator
from .lattice import CellSpec, GroupName, textured

Table = Tuple[List[str], List[Sequence]]

FIGURES = ("fig1d", "fig2", "fig3a", "fig3b", "fig3c")
N_ARM, N_CHAIN = 3, 4
FIG3_CELLS = 6
FIG3_EPS = 0.1
FIG2_EPS = 0.01
# well below the fig2 closing point (about eps**2), i.e. the atomic-like regime
FIG2_TI = 2e-5
FIG3_TI = {"fig3a": 0.0015, "fig3b": 0.15, "fig3c": 0.09}
FIG3_GROUP = {"fig3a": GroupName.P2PMPM, "fig3b": GroupName.P2PMPM, "fig3c": GroupName.P2PMMP}


def bands_table(bs) -> Table:
    header = ["k"] + [f"band_{n}" for n in range(bs.n_bands)]
    rows = [[float(k)] + [float(e) for e in row] for k, row in zip(bs.k, bs.energies)]
    return header, rows


def spectrum_table(spectrum, in_gap: Sequence[int]) -> Table:
    flagged = set(in_gap)
    rows = [[i, float(e), int(i in flagged)] for i, e in enumerate(spectrum.energies)]
    return ["index", "energy", "in_gap"], rows


def ldos_table(spectrum, state: int) -> Table:
    weights = ldos(spectrum, state).weights
    d = spectrum.cell_size
    rows = []
    for i, w in enumerate(weights):
        site = spectrum.geometry.sites[i % d]
        rows.append([i // d, i % d, site.role.value, site.column, site.row, float(w)])
    return ["cell", "site_index_in_cell", "role", "column", "row", "weight"], rows


def fig3_state(spectrum) -> int:
    """State drawn in the LDOS panels: the same ordinal index in every panel.

    It is the index just below mid-spectrum, which is the lower member of
    the in-gap pair in the inverted phase.
    """
    return len(spectrum.energies) // 2 - 1


def figure_spec(fig: str) -> CellSpec:
    if fig == "fig2":
        return textured(N_ARM, N_CHAIN, GroupName.P2PMPM, FIG2_EPS, t_i=FIG2_TI)
    if fig in FIG3_TI:
        return textured(N_ARM, N_CHAIN, FIG3_GROUP[fig], FIG3_EPS, t_i=FIG3_TI[fig])
    if fig == "fig1d":
        return CellSpec.equal_arms(N_ARM, N_CHAIN)
    raise ValueError(f"unknown figure {fig!r}; choose from {FIGURES}")


def reproduce(fig: str, n_k: int = 512) -> Dict[str, Table]:
    """Tables for one figure, keyed by output file stem."""
    spec = figure_spec(fig)
    if fig == "fig1d":
        eps_list = np.round(np.linspace(0.02, 0.2, 10), 10)
        rows = [list(r) for r in phase_diagram(spec, eps_list)]
        return {"fig1d_phase_diagram": (["eps", "ti_star"], rows)}
    if fig == "fig2":
        tables = {"fig2_bands": bands_table(band_structure(bloch_operator(spec), n_k))}
        rows = []
        for t_i in np.linspace(0.0, 4e-4, 9):
            bs = band_structure(bloch_operator(spec.with_(t_i=float(t_i))), n_k // 4)
            lower, upper = central_pair(bs.energies)
            rows += [[float(t_i), float(k), float(el), float(eu)]
                     for k, el, eu in zip(bs.k, bs.energies[:, lower], bs.energies[:, upper])]
        tables["fig2_central_pair_sweep"] = (["t_i", "k", "E_lower", "E_upper"], rows)
        return tables
    spectrum = finite_spectrum(spec, FIG3_CELLS)
    in_gap = in_gap_states(spectrum, bulk_gap_window(spec))
    state = fig3_state(spectrum)
    return {f"{fig}_spectrum": spectrum_table(spectrum, in_gap),
            f"{fig}_ldos": ldos_table(spectrum, state)}
