import json

import pytest
from hypothesis import given, strategies as st

from elm.memory import MemoryTrace, apply_write, parity_project, replay_trace, str_to_bits


def test_apply_write_toggles_and_saturates():
    assert apply_write((0, 1, 2), (1, 1, 1), 2) == ((1, 1, 2), (1, 1, 0))


def test_apply_write_third_write_of_worked_trace():
    v, c = apply_write((2, 1, 1, 1, 1, 0, 0), (0, 1, 1, 1, 0, 0, 0), 2)
    assert v == (2, 1, 1, 1, 2, 0, 0)
    assert c == (0, 1, 1, 1, 0, 0, 0)


def test_apply_write_noop():
    assert apply_write((0,) * 4, (0,) * 4, 3) == ((0,) * 4, (0,) * 4)


def test_apply_write_rejects_bad_input():
    with pytest.raises(ValueError):
        apply_write((0, 0), (1,), 2)
    with pytest.raises(ValueError):
        apply_write((3,), (1,), 2)


def test_parity_project():
    assert parity_project((2, 1, 0)) == (0, 1, 0)
    assert parity_project((2, 1, 1, 1, 1, 0, 0)) == (0, 1, 1, 1, 1, 0, 0)


def test_replay_example_states():
    states = [str_to_bits(s) for s in ("1110000", "0111100", "0111000")]
    tr = replay_trace(2, states)
    assert tr.final_counts == (2, 1, 1, 1, 2, 0, 0)
    assert tr.saturated_writes == []


def test_replay_single_cell():
    tr = replay_trace(1, [(1,), (0,)])
    assert tr.final_counts == (1,) and tr.final_state == (1,)
    assert tr.saturated_writes == [2]
    tr = replay_trace(3, [(1,), (0,), (1,)])
    assert tr.final_counts == (3,)
    assert [w.state for w in tr.writes] == [(1,), (0,), (1,)]


def test_trace_json_roundtrip():
    tr = replay_trace(2, [(1, 0), (0, 0), (1, 1)])
    d = json.loads(tr.to_json())
    assert set(d) == {"n", "ell", "writes"}
    assert d["writes"][0] == {"intended": "10", "state": "10", "counts": [1, 0]}
    assert MemoryTrace.from_json(tr.to_json()) == tr


@st.composite
def counts_and_state(draw):
    ell = draw(st.integers(1, 4))
    n = draw(st.integers(1, 8))
    v = tuple(draw(st.lists(st.integers(0, ell), min_size=n, max_size=n)))
    c = tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    return ell, v, c


@given(counts_and_state())
def test_state_is_parity_of_counts(args):
    ell, v, c = args
    v2, c2 = apply_write(v, c, ell)
    assert parity_project(v2) == c2


@given(counts_and_state())
def test_writing_current_state_is_idempotent(args):
    ell, v, _ = args
    assert apply_write(v, parity_project(v), ell) == (v, parity_project(v))


@given(st.integers(1, 3), st.integers(1, 6),
       st.lists(st.lists(st.integers(0, 1), min_size=6, max_size=6), min_size=1, max_size=6))
def test_replay_monotone_bounded_deterministic(ell, n, rows):
    states = [tuple(r[:n]) for r in rows]
    tr = replay_trace(ell, states)
    prev = (0,) * n
    for w in tr.writes:
        assert all(a <= b <= ell for a, b in zip(prev, w.counts))
        prev = w.counts
    assert replay_trace(ell, states) == tr
