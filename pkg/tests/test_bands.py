import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from hladder.bands import (
    band_structure, central_pair, central_pair_gap, critical_ti, flat_band_scan, gap_at,
    phase_diagram,
)
from hladder.errors import NoClosingError, NoStraddlingPairError
from hladder.hamiltonian import bloch_hamiltonian, bloch_operator
from hladder.lattice import CellSpec, GroupName, GroupPreset, IntercellMode, apply_texture, textured

TEMPLATE = CellSpec.equal_arms(3, 4)


def test_decoupled_cells_give_flat_molecular_levels():
    spec = textured(3, 4, "P2'm'm", 0.1, t_i=0.0)
    op = bloch_operator(spec)
    bs = band_structure(op, 64)
    assert_allclose(bs.energies, np.tile(np.linalg.eigvalsh(op.h0), (64, 1)), atol=1e-12)
    assert len(flat_band_scan(bs)) == 16


def test_uniform_chain_dispersion():
    op = bloch_operator(CellSpec.equal_arms(0, 2, t_i=1.0))
    bs = band_structure(op, 101)
    analytic = 2 * np.abs(np.cos(bs.k * op.lattice_constant / 2))
    assert_allclose(bs.energies[:, 1], analytic, atol=1e-12)
    assert_allclose(bs.energies[:, 0], -analytic, atol=1e-12)


def test_grid_shape_and_endpoints():
    bs = band_structure(bloch_operator(textured(3, 4, "P2'm'm", 0.1, t_i=0.15)), 512)
    assert bs.energies.shape == (512, 16)
    assert bs.k[0] == 0.0 and bs.k[-1] == pytest.approx(2 * np.pi / 4)


def test_small_detuning_central_pair_hugs_zero():
    bs = band_structure(bloch_operator(textured(3, 4, "P2'm'm", 0.01, t_i=2e-5)), 256)
    lower, upper = central_pair(bs.energies)
    assert (lower, upper) == (7, 8)
    assert np.abs(bs.energies[:, [lower, upper]]).max() < 0.011


def test_time_reversal_pairs_k_and_minus_k(topo):
    bs = band_structure(bloch_operator(topo), 129)
    assert_allclose(bs.energies, bs.energies[::-1], atol=1e-12)


def test_eigenvector_frames_are_unitary(flat_cell):
    bs = band_structure(bloch_operator(flat_cell), 64)
    for v in bs.vectors:
        assert_allclose(v.conj().T @ v, np.eye(16), atol=1e-12)


def test_refined_grid_contains_coarse_grid(topo):
    op = bloch_operator(topo)
    coarse, fine = band_structure(op, 65), band_structure(op, 129)
    assert_allclose(fine.energies[::2], coarse.energies, atol=0, rtol=0)


def _oracle_flat_levels(mode, eps=0.1, t_i=0.09):
    lam = [2 * np.cos(m * np.pi / 4) for m in (1, 2, 3)]
    if mode is IntercellMode.CHAIN_ONLY:
        return np.sort([l + s * eps for l in lam for s in (1, -1)])
    shift = np.hypot(eps, t_i)
    return np.sort([l + s * shift for l in lam for s in (1, -1)])


def test_flat_bands_of_transverse_mirror_group(flat_cell, mode):
    spec = flat_cell.with_(intercell_mode=mode)
    bs = band_structure(bloch_operator(spec), 512)
    flats = flat_band_scan(bs, 1e-9)
    assert len(flats) == 6
    assert_allclose(sorted(f.energy for f in flats), _oracle_flat_levels(mode), atol=1e-10)
    assert all(f.dispersion < 1e-9 for f in flats)


def test_flat_levels_are_eigenvalues_everywhere(flat_cell):
    op = bloch_operator(flat_cell)
    ks = np.random.default_rng(3).uniform(0, 2 * np.pi / 4, 40)
    e = np.linalg.eigvalsh(bloch_hamiltonian(op, ks))
    for level in _oracle_flat_levels(IntercellMode.FULL_COLUMN):
        assert np.abs(e - level).min(axis=1).max() < 1e-12


@pytest.mark.parametrize("label", [GroupName.P2PMPM, GroupName.P2MPMP])
def test_no_flat_bands_without_pure_transverse_mirror(label):
    bs = band_structure(bloch_operator(textured(3, 4, label, 0.1, t_i=0.09)), 256)
    assert flat_band_scan(bs) == []


def test_flat_scan_rejects_bad_tolerance(topo):
    with pytest.raises(ValueError):
        flat_band_scan(band_structure(bloch_operator(topo), 8), 0.0)


def test_central_pair_requires_straddling_bands():
    spec = CellSpec.equal_arms(1, 2, eps0=10.0, t_i=0.1)
    spec = spec.with_(eps_ul=10.0, eps_dl=10.0, eps_ur=10.0, eps_dr=10.0)
    with pytest.raises(NoStraddlingPairError):
        central_pair_gap(band_structure(bloch_operator(spec), 16))


def test_gap_report_on_both_sides(trivial, topo):
    before = central_pair_gap(band_structure(bloch_operator(trivial), 256))
    after = central_pair_gap(band_structure(bloch_operator(topo), 256))
    assert before.band_pair == after.band_pair == (7, 8)
    assert not before.inverted and after.inverted
    assert before.min_gap > 1e-3 and after.min_gap > 0.2


def _oracle_critical(abs_eps, lo, hi):
    """Minimise the smaller of the k = 0 and k = pi/a central gaps with a scalar optimiser."""
    def gap(t_i):
        op = bloch_operator(apply_texture(TEMPLATE.with_(t_i=t_i), GroupPreset("P2'm'm", abs_eps)))
        e = np.linalg.eigvalsh(bloch_hamiltonian(op, np.array([0.0, np.pi / 4])))
        return min(e[0, 8] - e[0, 7], e[1, 8] - e[1, 7])
    return scipy.optimize.minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                                          options={"xatol": 1e-10}).x


@pytest.mark.parametrize("abs_eps", [0.05, 0.1, 0.2])
def test_critical_point_matches_gap_minimiser(abs_eps):
    t_star = critical_ti(TEMPLATE, abs_eps)
    assert t_star == pytest.approx(_oracle_critical(abs_eps, 0.5 * t_star, 1.5 * t_star), abs=1e-6)
    assert gap_at(TEMPLATE, "P2'm'm", abs_eps, t_star, n_k=257) < 1e-5


def test_critical_point_monotone_and_vanishing_with_detuning():
    rows = phase_diagram(TEMPLATE, [0.01, 0.05, 0.1, 0.15, 0.2])
    values = [t for _, t in rows]
    assert all(a < b for a, b in zip(values, values[1:]))
    # the closing scales as eps**2 at small detuning
    assert values[0] == pytest.approx(0.01 ** 2, rel=0.01)
    assert critical_ti(TEMPLATE, 0.002) < 1e-5


def test_bracketed_search_and_missing_closing():
    assert critical_ti(TEMPLATE, 0.1, bracket=(0.005, 0.02)) == pytest.approx(critical_ti(TEMPLATE, 0.1), abs=1e-6)
    with pytest.raises(NoClosingError):
        critical_ti(TEMPLATE, 0.1, bracket=(0.02, 0.05))


def test_phase_diagram_edge_cases():
    assert phase_diagram(TEMPLATE, []) == []
    [(eps, t)] = phase_diagram(TEMPLATE, [0.1])
    assert eps == 0.1 and t == critical_ti(TEMPLATE, 0.1)


def test_inversion_symmetric_texture_has_its_own_closing():
    t_star = critical_ti(TEMPLATE, 0.1, label=GroupName.P2MPMP)
    assert 0.005 < t_star < 0.02


def test_arm_hopping_moves_the_closing():
    assert critical_ti(TEMPLATE.with_(t_a=0.8), 0.1) > critical_ti(TEMPLATE, 0.1) + 1e-3


def test_gap_reopens_above_the_closing():
    gaps = [gap_at(TEMPLATE, "P2'm'm", 0.1, t) for t in (0.02, 0.05, 0.1, 0.15)]
    assert all(a < b for a, b in zip(gaps, gaps[1:]))


@given(st.floats(0.0, 0.3), st.floats(1e-4, 1e-2))
def test_gap_is_lipschitz_in_intercell_hopping(t_i, dt):
    # each level moves at most |dH/dt_i| <= 2, so the gap at most twice that
    g0 = gap_at(TEMPLATE, "P2'm'm", 0.1, t_i, n_k=33)
    g1 = gap_at(TEMPLATE, "P2'm'm", 0.1, t_i + dt, n_k=33)
    assert abs(g1 - g0) <= 4 * dt + 1e-12
