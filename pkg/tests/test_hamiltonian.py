import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from hladder.hamiltonian import (
    assemble_intercell, assemble_intracell, bloch_hamiltonian, bloch_operator, build_finite,
    format_triplets, is_hermitian, to_triplets,
)
from hladder.lattice import CellSpec, IntercellMode, Role, build_geometry, textured


def _bonded(a, b, shift=0):
    """Nearest-neighbour test from coordinates alone; arms never touch other arms."""
    close = abs(a.column - (b.column + shift)) + abs(a.row - b.row) == 1
    both_arms = a.role is not Role.CHAIN and b.role is not Role.CHAIN
    return close and not (shift == 0 and both_arms and a.role is not b.role)


def oracle_blocks(spec):
    """Intracell and intercell blocks rebuilt from site coordinates."""
    g = build_geometry(spec)
    d = g.n_sites
    h0 = np.zeros((d, d))
    h1 = np.zeros((d, d))
    for a in g.sites:
        h0[a.index, a.index] = spec.eps0 if a.role is Role.CHAIN else spec.arm_onsite(a.role)
        for b in g.sites:
            if a.index != b.index and _bonded(a, b):
                h0[a.index, b.index] = spec.t_c if a.role is b.role is Role.CHAIN else spec.t_a
            # b sits one period to the right of a
            if _bonded(a, b, shift=g.n_chain):
                chain_bond = a.role is Role.CHAIN and b.role is Role.CHAIN
                arm_bond = a.role in (Role.ARM_UR, Role.ARM_DR) and b.role in (Role.ARM_UL, Role.ARM_DL)
                if chain_bond or (arm_bond and spec.intercell_mode is IntercellMode.FULL_COLUMN):
                    h1[a.index, b.index] = spec.t_i
    return h0, h1


specs = st.builds(
    lambda na, nc, ti, mode, e: textured(na, nc, "P2'm'm", e, t_i=ti, intercell_mode=mode),
    st.integers(0, 4), st.integers(3, 6), st.floats(0.0, 2.0), st.sampled_from(list(IntercellMode)),
    st.floats(0.0, 1.0))


@given(specs)
def test_blocks_match_coordinate_oracle(spec):
    g = build_geometry(spec)
    h0, h1 = oracle_blocks(spec)
    assert_allclose(assemble_intracell(g, spec), h0, atol=0)
    assert_allclose(assemble_intercell(g, spec), h1, atol=0)


def test_bare_dimer():
    spec = CellSpec.equal_arms(0, 2)
    assert_allclose(assemble_intracell(build_geometry(spec), spec), [[0, 1], [1, 0]])


def test_benchmark_bond_counts(mode):
    spec = CellSpec.equal_arms(3, 4, intercell_mode=mode)
    g = build_geometry(spec)
    h0 = assemble_intracell(g, spec)
    assert np.count_nonzero(np.triu(h0, 1)) == 15
    expected = 1 if mode is IntercellMode.CHAIN_ONLY else 7
    assert np.count_nonzero(assemble_intercell(g, spec)) == expected


def test_zero_intercell_hopping_gives_zero_block():
    spec = CellSpec.equal_arms(3, 4, t_i=0.0)
    assert not assemble_intercell(build_geometry(spec), spec).any()
    op = bloch_operator(spec)
    assert_allclose(bloch_hamiltonian(op, 1.234), op.h0)


def test_unequal_arms_couple_only_shared_rows():
    spec = CellSpec(n_chain=3, n_arm_ul=1, n_arm_dl=2, n_arm_ur=3, n_arm_dr=2, t_i=0.5)
    g = build_geometry(spec)
    h1 = assemble_intercell(g, spec)
    # chain + one upper row + two lower rows
    assert np.count_nonzero(h1) == 4


def test_high_symmetry_points_are_real():
    op = bloch_operator(textured(3, 4, "P2'm'm", 0.1, t_i=0.15))
    for k in (0.0, np.pi / op.lattice_constant):
        assert_allclose(bloch_hamiltonian(op, k).imag, 0, atol=1e-15)


def test_bipartite_spectrum_is_symmetric():
    spec = CellSpec.equal_arms(1, 2, t_i=1.0)
    op = bloch_operator(spec)
    for k in np.linspace(0, np.pi, 7):
        e = np.linalg.eigvalsh(bloch_hamiltonian(op, k))
        assert_allclose(e, -e[::-1], atol=1e-12)


@given(specs, st.floats(-10, 10))
def test_bloch_matrix_is_hermitian(spec, k):
    h = bloch_hamiltonian(bloch_operator(spec), k)
    assert is_hermitian(h)


def test_vectorized_k_matches_loop():
    op = bloch_operator(textured(2, 3, "P2m'm'", 0.3, t_i=0.4))
    ks = np.linspace(0, 2, 5)
    stacked = bloch_hamiltonian(op, ks)
    assert stacked.shape == (5, op.dim, op.dim)
    for k, h in zip(ks, stacked):
        assert_allclose(h, bloch_hamiltonian(op, k))


def test_finite_single_cell_is_intracell_block(topo):
    g = build_geometry(topo)
    assert_allclose(build_finite(g, topo, 1), assemble_intracell(g, topo))
    assert build_finite(g, topo, 6).shape == (96, 96)


def test_decoupled_cells_double_the_spectrum():
    spec = textured(3, 4, "P2'm'm", 0.1, t_i=0.0)
    g = build_geometry(spec)
    single = np.linalg.eigvalsh(assemble_intracell(g, spec))
    assert_allclose(np.linalg.eigvalsh(build_finite(g, spec, 2)), np.sort(np.repeat(single, 2)), atol=1e-12)


@pytest.mark.parametrize("n_cells", [1, 3, 8])
def test_periodic_sample_matches_bloch_spectrum(mode, n_cells):
    spec = textured(3, 4, "P2'm'm", 0.1, t_i=0.37, intercell_mode=mode)
    g = build_geometry(spec)
    op = bloch_operator(spec, g)
    ks = 2 * np.pi * np.arange(n_cells) / (n_cells * op.lattice_constant)
    bloch = np.sort(np.linalg.eigvalsh(bloch_hamiltonian(op, ks)).ravel())
    finite = scipy.linalg.eigh(build_finite(g, spec, n_cells, periodic=True), eigvals_only=True)
    assert_allclose(finite, bloch, atol=1e-10)


def test_hermiticity_check_rejects_asymmetric():
    assert not is_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    assert not is_hermitian(np.zeros((2, 3)))


def test_triplet_export():
    m = np.array([[1.0, 0.5j], [-0.5j, 0.0]])
    assert to_triplets(m) == [(0, 0, 1.0, 0.0), (0, 1, 0.0, 0.5), (1, 0, 0.0, -0.5)]
    text = format_triplets(m)
    assert text.splitlines()[0] == "row,col,re,im"
    assert len(text.splitlines()) == 4
