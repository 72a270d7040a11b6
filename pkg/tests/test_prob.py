import numpy as np
import pytest
from hypothesis import given, strategies as st

from pairhmm import (DataError, build_emission_table, build_transitions,
                     phred_to_prob)
from pairhmm.errors import DegenerateTransitionError, InvalidQualityError
from pairhmm.model import N_CODE

from conftest import make_read


def test_phred_examples():
    assert phred_to_prob(10) == pytest.approx(0.1, rel=1e-15)
    assert phred_to_prob(30) == pytest.approx(0.001, rel=1e-15)
    assert phred_to_prob(0) == 1.0


def test_phred_range_errors():
    with pytest.raises(InvalidQualityError):
        phred_to_prob(-1)
    with pytest.raises(InvalidQualityError):
        phred_to_prob(94)


@given(st.integers(0, 93))
def test_phred_in_unit_interval(q):
    value = phred_to_prob(q)
    assert 0.0 < value <= 1.0
    if q:
        assert value < phred_to_prob(q - 1)


def test_transition_values_from_stated_formulas():
    read = make_read("A", base_q=30, ins_q=40, del_q=40, gcp_q=10)
    t = build_transitions(read)
    assert t.delta[0] == pytest.approx(1e-4, rel=1e-12)
    assert t.zeta[0] == pytest.approx(1e-4, rel=1e-12)
    assert t.epsilon[0] == pytest.approx(0.1, rel=1e-12)
    assert t.alpha[0] == pytest.approx(0.9998, rel=1e-12)
    assert t.beta[0] == pytest.approx(0.9, rel=1e-12)


def test_transition_values_at_max_quality():
    read = make_read("A", ins_q=93, del_q=93, gcp_q=93)
    t = build_transitions(read)
    expected = 10.0 ** -9.3
    assert t.delta[0] == pytest.approx(expected, rel=1e-12)
    assert t.epsilon[0] == pytest.approx(expected, rel=1e-12)
    assert t.alpha[0] == pytest.approx(1.0, abs=2e-9)
    assert t.beta[0] == pytest.approx(1.0, abs=2e-9)


def test_degenerate_transitions_rejected():
    read = make_read("ACG", ins_q=0, del_q=0)
    with pytest.raises(DegenerateTransitionError, match="position 1"):
        build_transitions(read)


def test_row_sums_over_random_tracks(rng):
    m = 50_000
    read = make_read("A" * m,
                     base_q=rng.integers(0, 94, m),
                     ins_q=rng.integers(4, 94, m),
                     del_q=rng.integers(4, 94, m),
                     gcp_q=rng.integers(0, 94, m))
    t = build_transitions(read)
    assert np.max(np.abs(t.alpha + t.delta + t.zeta - 1.0)) < 1e-12
    assert np.max(np.abs(t.beta + t.epsilon - 1.0)) < 1e-12
    for arr in (t.alpha, t.beta, t.delta, t.epsilon, t.zeta):
        assert arr.min() >= 0.0 and arr.max() <= 1.0


@given(st.integers(4, 93), st.integers(4, 93), st.integers(0, 93))
def test_row_sums_hypothesis(ins_q, del_q, gcp_q):
    t = build_transitions(make_read("A", ins_q=ins_q, del_q=del_q, gcp_q=gcp_q))
    assert abs(t.alpha[0] + t.delta[0] + t.zeta[0] - 1.0) < 1e-12
    assert abs(t.beta[0] + t.epsilon[0] - 1.0) < 1e-12


def test_emission_match_and_mismatch_values():
    read = make_read("A", base_q=20)
    table = build_emission_table(read, 8)
    assert table.values[0, 0] == pytest.approx(0.99, rel=1e-15)       # A vs A
    assert table.values[1, 0] == pytest.approx(0.01 / 3, rel=1e-15)   # A vs C
    assert table.values[N_CODE, 0] == pytest.approx(0.99, rel=1e-15)  # A vs N


def test_emission_n_read_base_matches_everything():
    read = make_read("N", base_q=20)
    table = build_emission_table(read, 8)
    assert np.allclose(table.values[:, 0], 0.99, rtol=1e-15)


def test_emission_padding_is_one():
    read = make_read("ACG", base_q=20)
    table = build_emission_table(read, 16)
    assert np.all(table.values[:, 3:] == 1.0)


def _inline_emission(read, code, i):
    # direct restatement of the two-branch definition
    q = 10.0 ** (-float(read.base_qual[i]) / 10.0)
    r = int(read.bases[i])
    if r == code or r == N_CODE or code == N_CODE:
        return 1.0 - q
    return q / 3.0


def test_emission_table_equals_inline_evaluation(rng):
    for _ in range(20):
        m = int(rng.integers(1, 40))
        bases = rng.integers(0, 5, size=m, dtype=np.int8)
        read = make_read("".join("ACGTN"[b] for b in bases),
                         base_q=rng.integers(0, 94, m))
        table = build_emission_table(read, 64)
        for code in range(5):
            for i in range(m):
                assert table.values[code, i] == _inline_emission(read, code, i)


def test_emission_table_validates_padding():
    read = make_read("ACGT")
    with pytest.raises(DataError):
        build_emission_table(read, 3)       # smaller than the read
    with pytest.raises(DataError):
        build_emission_table(read, 10)      # not a lane-group product


def test_emission_table_cost_shape():
    read = make_read("ACGT")
    table = build_emission_table(read, 32)
    assert table.values.shape == (5, 32)
    assert table.m == 4
