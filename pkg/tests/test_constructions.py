import math
from fractions import Fraction

import pytest

from elm.capacity import EiaProfile, counting_bound
from elm.codebook import ElmCodebook, ModelSpec, tabulate_codebook, verify_elm_codebook, view_conflicts
from elm.constructions import (ConstructionError, PhasePlan, build_construction1, build_construction2,
                               build_construction3, build_construction4, construction1_components,
                               messages_for_states, optimal_partition)
from elm.memory import replay_trace, str_to_bits
from elm.wom import free_one_write, search_two_write_wom

EXAMPLE_STATES = [str_to_bits(s) for s in ("1110000", "0111100", "0111000")]


@pytest.fixture(scope="module")
def wom3():
    return search_two_write_wom(3)


@pytest.fixture(scope="module")
def example_code():
    comps = construction1_components(7, Fraction(3, 7), Fraction(1, 2), Fraction(1, 3))
    return build_construction1(7, Fraction(3, 7), Fraction(1, 2), Fraction(1, 3), comps,
                               realize=EXAMPLE_STATES)


def within_counting_bound(code: ElmCodebook) -> bool:
    return code.product <= counting_bound(code.n, code.t, code.ell)


def test_optimal_partition():
    plan = optimal_partition(3, 2)
    assert plan.partition == (2, 1) and plan.value == pytest.approx(math.log2(6))
    plan = optimal_partition(4, 2)
    assert plan.partition == (2, 2) and plan.value == pytest.approx(2 * math.log2(3))
    assert optimal_partition(4, 4).partition == (1, 1, 1, 1)
    assert optimal_partition(4, 4).value == 4
    assert PhasePlan((2, 2, 1)).complemented == (False, True, False)


def test_optimal_partition_beats_every_other_partition():
    for t in range(2, 9):
        for ell in range(1, t + 1):
            best = optimal_partition(t, ell).value
            for cuts in _compositions(t, ell):
                assert sum(math.log2(k + 1) for k in cuts) <= best + 1e-12


def _compositions(t, parts):
    if parts == 1:
        yield (t,)
        return
    for first in range(1, t - parts + 2):
        for rest in _compositions(t - first, parts - 1):
            yield (first,) + rest


def test_phased_code(wom3):
    code = build_construction3(4, 2, PhasePlan((2, 2)), [wom3, wom3])
    rep = verify_elm_codebook(code)
    assert rep.passed and rep.sequences == 4 ** 4 and rep.max_changes == 2
    assert code.sum_rate == pytest.approx(8 / 3)
    assert within_counting_bound(code)


def test_phased_code_literal_variant_breaks_budget(wom3):
    code = build_construction3(4, 2, PhasePlan((2, 2)), [wom3, wom3], complement_even_phases=False, verify=False)
    rep = verify_elm_codebook(code)
    assert not rep.passed and rep.max_changes >= 3
    trace = rep.budget_violation_trace
    assert trace is not None
    with pytest.raises(ConstructionError):
        build_construction3(4, 2, PhasePlan((2, 2)), [wom3, wom3], complement_even_phases=False)


def test_phased_code_with_free_phase(wom3):
    code = build_construction3(3, 2, PhasePlan((2, 1)), [wom3, free_one_write(3)])
    assert code.sum_rate == pytest.approx(7 / 3)
    assert code.verified["failures"] == 0


def test_phased_code_all_free_phases():
    comps = [free_one_write(2)] * 3
    code = build_construction3(3, 3, PhasePlan((1, 1, 1)), comps)
    assert code.rates == (1.0, 1.0, 1.0)
    assert code.verified["max_changes"] <= 3


def test_phased_code_rejects_mismatch(wom3):
    with pytest.raises(ValueError):
        build_construction3(4, 2, PhasePlan((2, 2)), [wom3, free_one_write(3)])


def test_example_trajectory(example_code):
    code = example_code
    assert code.M == (35, 8, 32)
    assert code.verified["failures"] == 0 and code.verified["saturation_events"] == 0
    msgs = messages_for_states(code, EXAMPLE_STATES)
    v = (0,) * 7
    states = []
    for j, m in enumerate(msgs):
        x = code.encode(j, m, v)
        states.append(x)
        from elm.memory import apply_write
        v2, c2 = apply_write(v, x, 2)
        assert code.decode(j, c2, v) == m
        v = v2
    assert states == EXAMPLE_STATES
    assert v == (2, 1, 1, 1, 2, 0, 0)
    assert replay_trace(2, states).saturated_writes == []
    assert within_counting_bound(code)


def test_example_decoder_needs_only_final_state(example_code):
    assert view_conflicts(example_code, "U") == []


def test_eia32_degenerate_first_write():
    code = build_construction1(4, 0, Fraction(1, 2), 0)
    assert code.M[0] == 1
    assert code.verified["saturation_events"] == 0


def test_general_construction_small():
    prof = EiaProfile(4, 2, ((0.25,), (0.5, 0.25), (0.5, 0.5), (0.5, 0.5)))
    code = build_construction2(4, 2, prof, 4)
    assert code.verified["failures"] == 0 and code.verified["saturation_events"] == 0
    assert 0 < code.sum_rate <= math.log2(11)
    assert within_counting_bound(code)


def test_general_construction_matches_eia32_shape():
    prof = EiaProfile(3, 2, ((0.5,), (0.5, 0.5), (0.5, 0.5)))
    code = build_construction2(3, 2, prof, 4)
    assert code.model == ModelSpec("IA", "U")
    assert code.M[0] == math.comb(4, 2)
    assert code.verified["max_changes"] <= 2


def test_general_construction_free_when_budget_large():
    prof = EiaProfile(2, 3, ((0.5,), (0.5, 0.5)))
    code = build_construction2(2, 3, prof, 3)
    assert code.M == (8, 8)


def test_eip32_code():
    code = build_construction4(6, Fraction(1, 2), Fraction(1, 2), Fraction(1, 3))
    rep = verify_elm_codebook(code)
    assert rep.passed and rep.failure_count == 0
    assert code.rates == tuple(math.log2(m) / 6 for m in code.M)
    assert within_counting_bound(code)


def test_eip32_without_twice_changed_cells():
    code = build_construction4(6, Fraction(1, 2), Fraction(1, 2), 0)
    assert code.M[2] == 2 ** 6
    assert code.verified["saturation_events"] == 0


def test_codebook_json_roundtrip(wom3):
    code = build_construction3(4, 2, PhasePlan((2, 2)), [wom3, wom3])
    again = ElmCodebook.from_json(code.to_json())
    assert again == code
    assert again.phases == ((2, False), (2, True))
    assert verify_elm_codebook(again).passed


def _toggle_code():
    # write 2 stores m as "toggle or not", so the decoder must know the old state
    return tabulate_codebook(1, 2, 2, ModelSpec("IA", "IA"), (2, 2),
                             lambda j, m, v, c: (m,) if j == 0 else ((c[0] ^ m),),
                             lambda j, view: view[0][0] if j == 0 else view[0][0] ^ view[1][0])


def test_decoder_view_discipline():
    code = _toggle_code()
    assert verify_elm_codebook(code).passed
    assert view_conflicts(code, "IA") == []
    assert view_conflicts(code, "IP") == []
    assert view_conflicts(code, "U") != []


def test_tabulate_rejects_view_leak():
    with pytest.raises(ValueError):
        tabulate_codebook(1, 2, 2, ModelSpec("U", "IA"), (2, 2),
                          lambda j, m, v, c: (m,) if j == 0 else ((c[0] ^ m),),
                          lambda j, view: 0)


def test_one_write_free_code_passes_every_model():
    for e in ("IA", "IP", "U"):
        for d in ("IA", "IP", "U"):
            code = tabulate_codebook(2, 1, 1, ModelSpec(e, d), (4,),
                                     lambda j, m, v, c: ((m >> 1) & 1, m & 1),
                                     lambda j, view: (lambda c: 2 * c[0] + c[1])(view[0] if d != "U" else view))
            assert verify_elm_codebook(code).passed
