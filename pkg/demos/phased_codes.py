"""Stacking WOM codes for an encoder that sees only the cell states.

Two 3-cell two-write WOM codes run back to back give four writes with at
most two changes per cell, but only if the second code works on the
complemented cells. Without that, some cell is asked to change three times.

    python3 demos/phased_codes.py
"""
from elm.codebook import verify_elm_codebook
from elm.constructions import PhasePlan, build_construction3, optimal_partition
from elm.wom import search_two_write_wom

wom = search_two_write_wom(3)
print("component", wom.M, "rates", [round(r, 3) for r in wom.rates])

plan = PhasePlan((2, 2))
good = build_construction3(4, 2, plan, [wom, wom])
print("complemented:", verify_elm_codebook(good).summary(), f"sum-rate {good.sum_rate:.4f}")

bad = build_construction3(4, 2, plan, [wom, wom], complement_even_phases=False, verify=False)
rep = verify_elm_codebook(bad)
print("literal:     ", rep.summary())
print("  first over-budget sequence:", rep.budget_violation_messages)
for w in rep.budget_violation_trace.writes:
    print("   ", "".join(map(str, w.intended)), w.counts, "saturated" if w.saturation_events else "")

for t, ell in [(3, 2), (5, 2), (7, 3)]:
    plan = optimal_partition(t, ell)
    print(f"best split of t={t} into {ell} phases: {plan.partition} -> {plan.value:.4f} bits")
