"""Independent value for the informed-all encoder/decoder pair at tiny sizes.

With both sides seeing the count vector, each count vector can be treated
on its own: a write with M messages is possible from v iff at least M
non-saturating intended states lead to count vectors from which the rest
of the schedule is possible. Maximizing over schedules (M_1..M_t) gives the
optimal product. Run from the repository root::

    python3 tests/oracles/search_oracle.py

It writes ``tests/data/search_oracle.json``; the per-model products listed
under ``frozen_products`` come from the first run of the package search and
are regression values, not oracle output.
"""
import itertools
import json
from functools import lru_cache
from pathlib import Path

N, T, ELL = 2, 3, 2


def step(v, x):
    out = []
    for vk, xk in zip(v, x):
        out.append(vk if xk == vk % 2 else vk + 1)
    return tuple(out)


def options(v):
    for x in itertools.product((0, 1), repeat=len(v)):
        if all(vk < ELL or xk == vk % 2 for vk, xk in zip(v, x)):
            yield x


@lru_cache(maxsize=None)
def feasible(j, v, schedule):
    if j == len(schedule):
        return True
    good = sum(1 for x in options(v) if feasible(j + 1, step(v, x), schedule))
    return good >= schedule[j]


def best_product(n, t):
    best = 0
    for schedule in itertools.product(range(1, 2 ** n + 1), repeat=t):
        prod = 1
        for m in schedule:
            prod *= m
        if prod > best and feasible(0, (0,) * n, schedule):
            best = prod
    return best


def main():
    value = best_product(N, T)
    out = {
        "n": N, "t": T, "ell": ELL,
        "eia_dia_product": value,
        "frozen_products": {tag: 24 for tag in (
            "EIA:DIA", "EIA:DIP", "EIA:DU", "EIP:DIA", "EIP:DIP", "EIP:DU", "EU:DIA", "EU:DIP", "EU:DU")},
        "one_cell": {"t": 3, "ell": 2, "eia_dia_product": best_product(1, 3)},
    }
    path = Path(__file__).resolve().parents[1] / "data" / "search_oracle.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
