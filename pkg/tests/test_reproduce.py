import numpy as np
import pytest

from hladder.reproduce import FIGURES, figure_spec, reproduce
from hladder.symmetry import classify_group


def cell_profile(table):
    header, rows = table
    weights = np.zeros(6)
    for row in rows:
        weights[row[0]] += row[-1]
    return weights


def test_every_figure_has_a_parameter_set():
    for fig in FIGURES:
        assert figure_spec(fig).n_chain == 4
    with pytest.raises(ValueError):
        figure_spec("fig9")


def test_panel_groups():
    assert classify_group(figure_spec("fig3b")).label.value == "P2'm'm"
    assert classify_group(figure_spec("fig3c")).label.value == "P2'mm'"


def test_panel_profiles():
    trivial = cell_profile(reproduce("fig3a")["fig3a_ldos"])
    pair = cell_profile(reproduce("fig3b")["fig3b_ldos"])
    one_sided = cell_profile(reproduce("fig3c")["fig3c_ldos"])
    assert trivial[2:4].sum() > trivial[[0, -1]].sum()
    assert pair[0] > 0.45 and pair[-1] > 0.45
    assert max(one_sided[0], one_sided[-1]) > 0.99


def test_spectrum_table_flags_in_gap_states():
    header, rows = reproduce("fig3b")["fig3b_spectrum"]
    assert [r[0] for r in rows if r[2]] == [47, 48]
    header, rows = reproduce("fig3a")["fig3a_spectrum"]
    assert not any(r[2] for r in rows)


def test_band_figure_tables():
    tables = reproduce("fig2", n_k=64)
    header, rows = tables["fig2_bands"]
    assert len(header) == 17 and len(rows) == 64
    header, rows = tables["fig2_central_pair_sweep"]
    assert header == ["t_i", "k", "E_lower", "E_upper"]
    assert all(lo < hi for _, _, lo, hi in rows)


def test_phase_diagram_table_is_monotone():
    header, rows = reproduce("fig1d")["fig1d_phase_diagram"]
    t = [r[1] for r in rows]
    assert header == ["eps", "ti_star"] and len(rows) == 10
    assert all(a < b for a, b in zip(t, t[1:]))
