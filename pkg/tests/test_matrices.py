"""Matrix builders, exact rank, and the structural report."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gensys import make_random_system
from snpkit.matrices import (
    IntMatrix,
    augmented_matrix,
    consumption_matrix,
    production_matrix,
    row_rank,
    spiking_matrix,
    struc_matrix,
    structural_report,
)
from snpkit.model import parse_system


def rank_by_fractions(mat: IntMatrix) -> int:
    """Plain Gaussian elimination over Q (independent rank oracle)."""
    a = [[Fraction(x) for x in row] for row in mat.data]
    rank = 0
    for c in range(mat.cols):
        piv = next((i for i in range(rank, mat.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(mat.rows):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


# --- golden matrices ---------------------------------------------------------


def test_spiking_matrix_first_system(example1):
    assert spiking_matrix(example1).data == (
        (-1, 1, 1),
        (-2, 1, 1),
        (1, -1, 1),
        (0, 0, -1),
        (0, 0, -2),
    )


def test_augmented_matrix_first_system(example1):
    ag = augmented_matrix(example1)
    assert ag.rows == 5 and ag.cols == 4
    assert ag.column(3) == (0, 0, 0, 1, 0)  # forgetting row emits nothing
    assert tuple(row[:3] for row in ag.data) == spiking_matrix(example1).data


def test_spiking_matrix_delayed_system(example3):
    assert spiking_matrix(example3).data == (
        (-1, 1, 0),
        (1, -1, 1),
        (0, -2, 0),
        (0, 1, -1),
    )


def test_production_consumption_split(example3):
    assert production_matrix(example3).data == (
        (0, 1, 0),
        (1, 0, 1),
        (0, 0, 0),  # forgetting rule produces nothing
        (0, 1, 0),
    )
    assert consumption_matrix(example3).data == (
        (1, 0, 0),
        (0, 1, 0),
        (0, 2, 0),
        (0, 0, 1),
    )


def test_pm_minus_cm_is_m(example1, example3):
    for s in (example1, example3):
        assert (
            production_matrix(s).sub(consumption_matrix(s)).data
            == spiking_matrix(s).data
        )


def test_single_neuron_no_synapses():
    s = parse_system("neuron x spikes=1\nrule x E=a c=1 p=1 d=0\n")
    assert spiking_matrix(s).data == ((-1,),)


def test_struc_matrix_first_system(example1):
    st_m = struc_matrix(example1)
    assert st_m.data == ((-1, 1, 1), (1, -1, 1), (0, 0, -1))
    assert row_rank(st_m) == 2


def test_struc_matrix_edge_cases():
    iso = parse_system("neuron a spikes=0\nneuron b spikes=0\n")
    assert struc_matrix(iso).data == ((-1, 0), (0, -1))
    both = parse_system("neuron a spikes=0\nneuron b spikes=0\nsyn a b\nsyn b a\n")
    assert struc_matrix(both).data == ((-1, 1), (1, -1))


def test_row_rank_edge_cases():
    assert row_rank(IntMatrix(3, 3, ((-1, 0, 0), (0, -1, 0), (0, 0, -1)))) == 3
    assert row_rank(IntMatrix(2, 3, ((0, 0, 0), (0, 0, 0)))) == 0
    assert row_rank(IntMatrix(0, 0, ())) == 0
    # rank needs column skipping here
    assert row_rank(IntMatrix(2, 3, ((0, 1, 2), (0, 2, 4)))) == 1


def test_augmented_requires_out_neuron(example3):
    with pytest.raises(ValueError):
        augmented_matrix(example3)


def test_augmented_out_neuron_without_rules():
    s = parse_system(
        "neuron a spikes=1\nneuron b spikes=0\n"
        "rule a E=a c=1 p=1 d=0\nsyn a b\nout b\n"
    )
    assert augmented_matrix(s).column(2) == (0,)


def test_vecmat_golden(example1):
    m = spiking_matrix(example1)
    assert m.vecmat((1, 0, 1, 1, 0)) == (0, 0, 1)
    assert m.vecmat((0, 1, 1, 0, 1)) == (-1, 0, 0)
    with pytest.raises(ValueError):
        m.vecmat((1, 0, 0))


def test_matrix_text_and_json_round_trip(example1):
    m = spiking_matrix(example1)
    d = m.to_json_dict()
    assert d == {
        "rows": 5,
        "cols": 3,
        "data": [[-1, 1, 1], [-2, 1, 1], [1, -1, 1], [0, 0, -1], [0, 0, -2]],
    }
    text = m.to_text()
    assert text.splitlines()[0] == "-1  1  1"
    assert text.splitlines()[3] == " 0  0 -1"


# --- structural report -------------------------------------------------------


def test_structural_report_first_system(example1):
    rep = structural_report(example1)
    assert rep.row_negative_counts == (1, 1, 1, 1, 1)
    assert rep.col_negative_counts == (2, 1, 2)
    assert rep.inferred_output_neurons == (2,)
    assert rep.out_degree == (2, 2, 0)
    assert rep.struc_rank == 2
    assert rep.rank_cycle_hint is True
    assert rep.dfs_has_cycle is True


def test_structural_report_delayed_system(example3):
    rep = structural_report(example3)
    assert rep.row_negative_counts == (1, 1, 1, 1)
    assert rep.dfs_has_cycle is True


def test_acyclic_chain_report():
    s = parse_system(
        "neuron a spikes=1\nneuron b spikes=0\nneuron c spikes=0\n"
        "rule a E=a c=1 p=1 d=0\n"
        "syn a b\nsyn b c\n"
    )
    rep = structural_report(s)
    assert rep.dfs_has_cycle is False
    assert rep.struc_rank == 3
    assert rep.rank_cycle_hint is False


def test_cycle_without_rank_deficiency():
    # a 3-cycle plus one chord: the digraph has cycles yet Struc-M has
    # full rank, so the rank hint must stay a one-directional signal
    s = parse_system(
        "neuron a spikes=0\nneuron b spikes=0\nneuron c spikes=0\n"
        "syn a b\nsyn b c\nsyn c a\nsyn c b\n"
    )
    rep = structural_report(s)
    assert rep.dfs_has_cycle is True
    assert rep.struc_rank == 3
    assert rep.rank_cycle_hint is False


# --- properties --------------------------------------------------------------


@given(seed=st.integers(min_value=0, max_value=10**9))
@settings(max_examples=150, deadline=None)
def test_matrix_invariants_on_random_systems(seed):
    s = make_random_system(random.Random(seed), allow_delay=True)
    m = spiking_matrix(s)
    assert production_matrix(s).sub(consumption_matrix(s)).data == m.data
    # each row has exactly one negative entry, in the owner column, = -c
    for i, rule in enumerate(s.rules):
        row = m.data[i]
        negs = [j for j, x in enumerate(row) if x < 0]
        assert negs == [rule.owner]
        # owner column aggregates -c with +p from self-loops, which are
        # excluded by validity, so the entry is exactly -c
        assert row[rule.owner] == -rule.c
    if s.out_neuron is not None:
        ag = augmented_matrix(s)
        assert tuple(row[:-1] for row in ag.data) == m.data
    assert row_rank(struc_matrix(s)) <= s.neuron_count


mats = st.integers(min_value=1, max_value=6).flatmap(
    lambda r: st.integers(min_value=1, max_value=6).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(min_value=-9, max_value=9), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        ).map(lambda rows: IntMatrix(r, c, tuple(tuple(x) for x in rows)))
    )
)


@given(mat=mats)
@settings(max_examples=300, deadline=None)
def test_bareiss_rank_matches_fraction_elimination(mat):
    assert row_rank(mat) == rank_by_fractions(mat)
