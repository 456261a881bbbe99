"""Acceptance criteria 1-11, one test each. Every test prints a single
``criterion N: PASS|FAIL`` line (visible without ``-s``) and enforces its
runtime limit."""
import json
import math
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from elm.capacity import (EiaProfile, EipDiaProfile, EuDiaProfile, binomial_prefix, closed_form_max_sum_rate,
                          counting_bound, eia_rates, eip_dia_rates, eip_du_bounds, entropy, eu_dia_rates,
                          optimize_sum_rate, policy_tree_from_eia, policy_tree_rates)
from elm.cli import main as cli_main
from elm.codebook import all_models, verify_elm_codebook
from elm.constructions import (PhasePlan, build_construction1, build_construction2, build_construction3,
                               build_construction4, construction1_components)
from elm.memory import replay_trace, str_to_bits
from elm.search import SearchInstance, model_ordering_check, search_optimal_elm
from elm.wom import cw_rank, cw_unrank, search_two_write_wom

DATA = Path(__file__).parent / "data"
GRID = json.loads((DATA / "grid_oracle.json").read_text())
SEARCH = json.loads((DATA / "search_oracle.json").read_text())


@contextmanager
def criterion(number, limit_s, capsys):
    """Run the body, then print one verdict line and re-raise any failure."""
    start = time.perf_counter()
    notes: list[str] = []
    error = None
    try:
        yield notes
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - start
    if error is None and elapsed >= limit_s:
        error = AssertionError(f"took {elapsed:.1f}s, limit {limit_s}s")
    verdict = "PASS" if error is None else "FAIL"
    detail = "; ".join(notes) if error is None else str(error).splitlines()[0]
    with capsys.disabled():
        print(f"\ncriterion {number}: {verdict} ({elapsed:.2f}s) {detail}")
    if error is not None:
        raise error


def test_criterion_01_closed_form_vs_optimizer(capsys):
    with criterion(1, 30, capsys) as notes:
        for t, ell in [(3, 2), (4, 2), (4, 3), (5, 2), (5, 3)]:
            res = optimize_sum_rate("EIA", t, ell)
            X = binomial_prefix(t, ell)
            assert abs(res.rates.sum_rate - math.log2(X)) <= 1e-4, (t, ell, res.rates.sum_rate)
            target = binomial_prefix(t - 1, ell - 1) / X
            assert abs(res.profile.p[0][0] - target) <= 5e-3, (t, ell, res.profile.p[0][0], target)
            if ell == 2:
                assert Fraction(binomial_prefix(t - 1, 1), X) == Fraction(2 * t, t * t + t + 2)
            notes.append(f"({t},{ell}) {res.rates.sum_rate:.6f}")


def test_criterion_02_wom_reduction(capsys):
    with criterion(2, 5, capsys) as notes:
        for t in (2, 3, 4):
            s = optimize_sum_rate("EIA", t, 1).rates.sum_rate
            assert abs(s - math.log2(t + 1)) <= 1e-4, (t, s)
            notes.append(f"t={t} {s:.6f}")


def test_criterion_03_eip_dia_equals_eia_at_two_changes(capsys):
    with criterion(3, 30, capsys) as notes:
        for t in (3, 4, 5):
            s = optimize_sum_rate("EIP_DIA", t, 2).rates.sum_rate
            assert abs(s - math.log2(binomial_prefix(t, 2))) <= 1e-4, (t, s)
            notes.append(f"t={t} {s:.6f}")


def test_criterion_04_eu_dia_strictly_below(capsys):
    with criterion(4, 10, capsys) as notes:
        s = optimize_sum_rate("EU_DIA", 3, 2).rates.sum_rate
        assert 2.780 <= s <= 2.790, s
        assert math.log2(7) - s >= 0.015, s
        notes.append(f"{s:.6f} (grid oracle {GRID['eu_dia_3_2']['sum']:.6f})")


def test_criterion_05_eip_dia_strictly_below_at_three_changes(capsys):
    with criterion(5, 60, capsys) as notes:
        margin = GRID["eip_dia_4_3"]["margin_threshold"]
        s = optimize_sum_rate("EIP_DIA", 4, 3).rates.sum_rate
        gap = math.log2(15) - s
        assert gap >= margin > 0, (gap, margin)
        notes.append(f"gap {gap:.6f} >= frozen margin {margin}")


def test_criterion_06_eip_du_bounds_and_curve(capsys, tmp_path):
    with criterion(6, 5, capsys) as notes:
        lo, hi = eip_du_bounds(3, 2)
        assert abs(lo - math.log2(6)) <= 1e-10 and abs(hi - math.log2(7)) <= 1e-10
        for t in range(3, 26):
            lo, hi = eip_du_bounds(t, 2)
            assert hi - lo <= 1 + 1e-9, (t, hi - lo)
        out = tmp_path / "fig1.csv"
        with capsys.disabled():
            code = cli_main(["curve", "--ell", "2", "--t-min", "3", "--t-max", "25", "--out", str(out)])
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "t,lower_bits,upper_bits" and len(rows) == 24
        for row in rows[1:]:
            t, a, b = row.split(",")
            lo, hi = eip_du_bounds(int(t), 2)
            assert (a, b) == (f"{lo:.6f}", f"{hi:.6f}")
        assert rows[1] == "3,2.584963,2.807355"
        notes.append("23 rows")


def test_criterion_07_example_replay(capsys):
    with criterion(7, 1, capsys) as notes:
        states = [str_to_bits(s) for s in ("1110000", "0111100", "0111000")]
        tr = replay_trace(2, states)
        assert tr.final_counts == (2, 1, 1, 1, 2, 0, 0)
        assert tr.saturated_writes == []
        assert all(max(w.counts) <= 2 for w in tr.writes)
        notes.append(f"counts {list(tr.final_counts)}")


def test_criterion_08_phased_construction(capsys):
    with criterion(8, 30, capsys) as notes:
        comp = search_two_write_wom(3)
        code = build_construction3(4, 2, PhasePlan((2, 2)), [comp, comp])
        rep = verify_elm_codebook(code)
        assert rep.sequences == 4 ** 4
        assert rep.passed and rep.failure_count == 0 and rep.max_changes == 2
        assert abs(code.sum_rate - 8 / 3) <= 1e-12
        literal = build_construction3(4, 2, PhasePlan((2, 2)), [comp, comp],
                                      complement_even_phases=False, verify=False)
        lrep = verify_elm_codebook(literal)
        assert lrep.budget_violation_trace is not None and lrep.max_changes > 2
        notes.append(f"sum-rate {code.sum_rate:.6f}; literal variant reaches {lrep.max_changes} attempted changes")


def test_criterion_09_counting_bound_safety(capsys):
    with criterion(9, 60, capsys) as notes:
        codes = []
        for n, t, ell in [(1, 2, 1), (1, 3, 2), (2, 2, 1), (2, 3, 2), (3, 2, 1), (1, 4, 2)]:
            for model in all_models():
                codes.append(search_optimal_elm(SearchInstance(n, t, ell, model)).witness)
        comp = search_two_write_wom(3)
        codes.append(build_construction3(4, 2, PhasePlan((2, 2)), [comp, comp]))
        p = (Fraction(3, 7), Fraction(1, 2), Fraction(1, 3))
        codes.append(build_construction1(7, *p, construction1_components(7, *p)))
        codes.append(build_construction2(4, 2, EiaProfile(4, 2, ((0.4,), (0.5, 0.25), (0.5, 0.5), (0.5, 0.5))), 5))
        codes.append(build_construction4(6, Fraction(1, 2), Fraction(1, 2), Fraction(1, 3)))
        for code in codes:
            bound = binomial_prefix(code.t, code.ell) ** code.n
            assert math.prod(code.M) <= bound, (code.model.tag, code.M, bound)
            assert bound == counting_bound(code.n, code.t, code.ell)
        notes.append(f"{len(codes)} codebooks")


def test_criterion_10_model_ordering(capsys):
    with criterion(10, 600, capsys) as notes:
        rep = model_ordering_check(2, 3, 2)
        assert all(rep.optimal.values())
        P = rep.products
        assert P["EU:DIA"] <= P["EIP:DIA"] <= P["EIA:DIA"]
        for e in ("EU", "EIP", "EIA"):
            assert P[f"{e}:DU"] <= P[f"{e}:DIP"] <= P[f"{e}:DIA"]
        assert rep.encoder_chains_hold and rep.decoder_chains_hold
        assert P == SEARCH["frozen_products"]
        assert P["EIA:DIA"] == SEARCH["eia_dia_product"]
        notes.append(f"products {sorted(set(P.values()))}")


def test_criterion_11_property_suites(capsys):
    with criterion(11, 60, capsys) as notes:
        rng = np.random.default_rng(20240601)
        # occupancy conservation
        for _ in range(200):
            t = int(rng.integers(1, 9))
            ell = int(rng.integers(1, t + 1))
            p = tuple(tuple(float(x) for x in rng.uniform(0, 0.5, min(ell, j))) for j in range(1, t + 1))
            p0, p1, pu = (tuple(float(x) for x in rng.uniform(0, 0.5, t)) for _ in range(3))
            for table, _ in (eia_rates(EiaProfile(t, ell, p)), eip_dia_rates(EipDiaProfile(t, ell, p0, p1)),
                             eu_dia_rates(EuDiaProfile(t, ell, pu))):
                assert np.all(table.Q >= 0)
                assert np.max(np.abs(table.Q.sum(axis=1) - 1.0)) <= 1e-12
        # Pascal and log identities
        for t in range(3, 13):
            for ell in range(2, t):
                X = binomial_prefix
                assert X(t, ell) == X(t - 1, ell - 1) + X(t - 1, ell)
                q = X(t - 1, ell - 1) / X(t, ell)
                rhs = entropy(q) + q * math.log2(X(t - 1, ell - 1)) + (1 - q) * math.log2(X(t - 1, ell))
                assert abs(math.log2(X(t, ell)) - rhs) <= 1e-10
                assert closed_form_max_sum_rate(t, ell).achiever_p == Fraction(X(t - 1, ell - 1), X(t, ell))
        # recursive form equals the direct region
        for _ in range(100):
            t = int(rng.integers(1, 9))
            ell = int(rng.integers(1, t + 1))
            p = tuple(tuple(float(x) for x in rng.uniform(0, 0.5, min(ell, j))) for j in range(1, t + 1))
            prof = EiaProfile(t, ell, p)
            a = np.array(eia_rates(prof)[1].R)
            b = np.array(policy_tree_rates(policy_tree_from_eia(prof)).R)
            assert np.max(np.abs(a - b)) <= 1e-10
        # combinadic roundtrip
        count = 0
        for n in range(1, 13):
            for w in range(n + 1):
                for i in range(math.comb(n, w)):
                    v = cw_unrank(n, w, i)
                    assert cw_rank(v) == i and sum(v) == w
                    count += 1
        assert count == sum(2 ** n for n in range(1, 13))
        notes.append("occupancy, identities, 100 trees, all combinadic indices n<=12")
