"""Finite-length ELM codes assembled from WOM components.

Every builder tabulates its encoder/decoder functions over the reachable
views and, unless told otherwise, runs :func:`verify_elm_codebook` before
returning. Requested probabilities are turned into exact cell counts with
round-half-up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .capacity import EiaProfile
from .codebook import ElmCodebook, ElmReport, ModelSpec, tabulate_codebook, verify_elm_codebook
from .memory import Vector, apply_write
from .wom import (EI_DU, EU_DU, Composition, WomCodebook, build_lemma2_two_write, cw_rank, cw_unrank,
                  free_one_write, int_to_vec, pin_codeword, round_half_up, search_two_write_wom,
                  two_write_over)


class ConstructionError(RuntimeError):
    def __init__(self, message: str, report: ElmReport | None = None):
        super().__init__(message)
        self.report = report


def complement(c: Sequence[int]) -> Vector:
    return tuple(1 - b for b in c)


def _gate(code: ElmCodebook, verify: bool, what: str) -> ElmCodebook:
    if not verify:
        return code
    report = verify_elm_codebook(code)
    if not report.passed or report.max_changes > code.ell and code.model.encoder == "IA":
        raise ConstructionError(f"{what} failed verification: {report.summary()}", report)
    return code.with_verification(report)


# ---------------------------------------------------------------------------
# phased WOM construction for EIP:DU

@dataclass(frozen=True)
class PhasePlan:
    partition: tuple[int, ...]

    def __post_init__(self):
        if not self.partition or any(k < 1 for k in self.partition):
            raise ValueError("phase lengths must be >= 1")

    @property
    def t(self) -> int:
        return sum(self.partition)

    @property
    def ell(self) -> int:
        return len(self.partition)

    @property
    def complemented(self) -> tuple[bool, ...]:
        """Odd-numbered phases (1-based) run directly, even ones through the
        bitwise complement."""
        return tuple(i % 2 == 1 for i in range(len(self.partition)))

    @property
    def value(self) -> float:
        """Sum-rate of the plan with capacity-achieving components."""
        return math.fsum(math.log2(k + 1) for k in self.partition)


def optimal_partition(t: int, ell: int) -> PhasePlan:
    """Split ``t`` writes into ``ell`` phases maximizing ``sum log2(k_i + 1)``:
    ``t mod ell`` phases of ``t // ell + 1`` writes, the rest of ``t // ell``."""
    if not t >= ell >= 1:
        raise ValueError("need t >= ell >= 1")
    k, r = divmod(t, ell)
    return PhasePlan(tuple([k + 1] * r + [k] * (ell - r)))


def construction3_components(n: int, plan: PhasePlan) -> list[WomCodebook]:
    """Searched components for each phase: the free code for one-write
    phases and the exhaustive two-write optimum otherwise."""
    out = []
    for k in plan.partition:
        if k == 1:
            out.append(free_one_write(n))
        elif k == 2:
            out.append(search_two_write_wom(n))
        else:
            raise ValueError(f"no searched {k}-write component available")
    return out


def build_construction3(t: int, ell: int, plan: PhasePlan, components: Sequence[WomCodebook], *,
                        complement_even_phases: bool = True, verify: bool = True) -> ElmCodebook:
    """EIP:DU code running phase ``i`` as component ``i`` over the same cells.

    With ``complement_even_phases`` each even phase encodes and decodes
    through the bitwise complement of the cell states; without it the
    components are applied literally, which can exceed the change budget.
    """
    if plan.t != t or plan.ell != ell:
        raise ValueError(f"plan {plan.partition} does not match t={t}, ell={ell}")
    if len(components) != ell:
        raise ValueError("need one component per phase")
    n = components[0].n
    for k, comp in zip(plan.partition, components):
        if comp.n != n or comp.q != 2 or comp.model != EI_DU or comp.writes != k:
            raise ValueError(f"component shape mismatch: need a binary {k}-write EI:DU code on {n} cells")
    flips = plan.complemented if complement_even_phases else (False,) * ell
    where = [(i, h) for i, k in enumerate(plan.partition) for h in range(k)]

    def encode(j, m, v, c):
        i, h = where[j]
        comp = components[i]
        view = complement(c) if flips[i] else c
        x = comp.encoders[0][m] if h == 0 else comp.encoders[h][(m, view)]
        return complement(x) if flips[i] else x

    def decode(j, c):
        i, h = where[j]
        return components[i].decoders[h][complement(c) if flips[i] else tuple(c)]

    M = tuple(comp.M[h] for i, comp in enumerate(components) for h in range(plan.partition[i]))
    code = tabulate_codebook(n, t, ell, ModelSpec("IP", "U"), M, encode, decode,
                             phases=tuple(zip(plan.partition, flips)),
                             metadata={"construction": "phased-wom",
                                       "complement_even_phases": complement_even_phases})
    return _gate(code, verify, "phased construction")


# ---------------------------------------------------------------------------
# two-change three-write EIA:DU construction

def _c1_composition(n: int, p10, p20, p21) -> tuple[Composition, int, int, int]:
    w1 = round_half_up(float(p10) * n)
    a0 = round_half_up(float(p20) * (n - w1))
    k = round_half_up(float(p21) * w1)
    comp = Composition((n - w1, w1, 0), ((0, a0, n - w1 - a0), (0, w1 - k, k), None))
    return comp, w1, a0, k


def construction1_components(n: int, p10, p20, p21, *, budget: int = 200_000) -> tuple[WomCodebook, WomCodebook]:
    """Ternary two-write component for writes 1-2 and the weight-``k``
    two-write binary component for write 3 (``k`` cells reach count 2)."""
    comp, w1, a0, k = _c1_composition(n, p10, p20, p21)
    ternary = search_two_write_wom(n, 3, "EI_DU", comp, budget=budget)
    return ternary, build_lemma2_two_write(n, k)


def _lift(c2: Sequence[int]) -> Vector:
    # binary state after write 2 -> ternary level: 1 stays 1, 0 means level 2
    return tuple(1 if b else 2 for b in c2)


def _stuck(v: Sequence[int]) -> Vector:
    return tuple(int(x == 2) for x in v)


def _pin_trajectory(ternary: WomCodebook, binary: WomCodebook, states: Sequence[Vector]):
    c1, c2, c3 = (tuple(s) for s in states)
    ternary = pin_codeword(ternary, 1, c1, _lift(c2))
    v = (0,) * len(c1)
    for c in (c1, c2):
        v, _ = apply_write(v, c, 2)
    binary = pin_codeword(binary, 1, _stuck(v), complement(c3))
    return ternary, binary


def build_construction1(n: int, p10, p20, p21, components: tuple[WomCodebook, WomCodebook] | None = None,
                        *, realize: Sequence[Vector] | None = None, verify: bool = True) -> ElmCodebook:
    """Zero-error EIA:DU code for ``t = 3``, ``ell = 2``.

    Write 1 stores a weight-``round(p10 n)`` vector. Write 2 moves every cell
    to ternary level 1 or 2 by the ternary component and stores the level
    mod 2. Write 3 hands the set of cells already changed twice to the binary
    component as its first-write state and stores the complement of the
    resulting codeword, so only the final states are needed to decode.

    ``realize`` names three intended states; component encoders are pinned
    so that some message sequence produces exactly them.
    """
    if n > 8:
        raise ValueError("n must be <= 8 for exhaustive verification")
    if components is None:
        components = construction1_components(n, p10, p20, p21)
    ternary, binary = components
    if ternary.q != 3 or ternary.n != n or ternary.writes != 2:
        raise ValueError("first component must be a ternary two-write code on n cells")
    if binary.q != 2 or binary.n != n or binary.writes != 2 or binary.model != EI_DU:
        raise ValueError("second component must be a binary two-write EI:DU code on n cells")
    if any(2 in c for c in ternary.first_write_states()):
        raise ValueError("ternary first write must not use level 2")
    if realize is not None:
        ternary, binary = _pin_trajectory(ternary, binary, realize)

    def encode(j, m, v, c):
        if j == 0:
            return ternary.encoders[0][m]
        if j == 1:
            return tuple(x % 2 for x in ternary.encoders[1][(m, tuple(c))])
        return complement(binary.encoders[1][(m, _stuck(v))])

    def decode(j, c):
        if j == 0:
            return ternary.decoders[0][c]
        if j == 1:
            return ternary.decoders[1][_lift(c)]
        return binary.decoders[1][complement(c)]

    M = (ternary.M[0], ternary.M[1], binary.M[1])
    comp, w1, a0, k = _c1_composition(n, p10, p20, p21)
    meta = {"construction": "eia-du-3-2", "weights": {"first": w1, "zero_to_one": a0, "one_to_two": k}}
    code = tabulate_codebook(n, 3, 2, ModelSpec("IA", "U"), M, encode, decode, metadata=meta)
    return _gate(code, verify, "EIA:DU three-write construction")


def messages_for_states(code: ElmCodebook, states: Sequence[Vector]) -> tuple[int, ...]:
    """Message sequence whose intended states are ``states``."""
    v = (0,) * code.n
    msgs = []
    for j, target in enumerate(states):
        target = tuple(target)
        m = next((m for m in range(code.M[j]) if code.encoders[j].get((m, code.model.encoder_view(v))) == target),
                 None)
        if m is None:
            raise ValueError(f"no message realizes state {target} on write {j + 1}")
        msgs.append(m)
        v, _ = apply_write(v, target, code.ell)
    return tuple(msgs)


# ---------------------------------------------------------------------------
# general EIA:DU construction

ComponentProvider = Callable[[int, int, Sequence[Vector], Composition], WomCodebook]


def default_provider(j: int, q: int, first: Sequence[Vector], comp: Composition) -> WomCodebook:
    return two_write_over(first, q, comp, metadata={"write": j + 1})


def _level_split(toggled: int, stay: int, parity: int, q: int) -> tuple[int, ...]:
    # counts per level 0..q-1; the two top levels are state 1 (q-2) and state 0 (q-1)
    out = [0] * q
    to_one = toggled if parity == 0 else stay
    out[q - 2] = to_one
    out[q - 1] = toggled + stay - to_one
    return tuple(out)


def build_construction2(t: int, ell: int, profile: EiaProfile, n: int,
                        component_provider: ComponentProvider | None = None, *,
                        verify: bool = True) -> ElmCodebook:
    """Zero-error EIA:DU code for any ``(t, ell)``.

    Write 1 stores a constant-weight vector. Write ``j >= 2`` uses a
    ``(2m+1)``-ary two-write component, ``m = min(j, ell)``: its first write
    is the list of reachable count vectors, its second write lifts every cell
    to level ``2m-1`` (state 1) or ``2m`` (state 0), toggling
    ``round(p[j][i] * n_i)`` of the ``n_i`` cells changed ``i`` times. Cells
    already changed ``ell`` times keep their parity. When ``ell >= t``
    nothing can freeze and every write stores ``n`` free bits instead.
    """
    if profile.t != t or profile.ell != ell:
        raise ValueError("profile does not match (t, ell)")
    if n > 8:
        raise ValueError("n must be <= 8 for exhaustive verification")
    provider = component_provider or default_provider
    model = ModelSpec("IA", "U")
    if ell >= t:
        free = free_one_write(n)
        code = tabulate_codebook(n, t, ell, model, (1 << n,) * t,
                                 lambda j, m, v, c: int_to_vec(m, n),
                                 lambda j, c: free.decoders[0][c],
                                 metadata={"construction": "eia-du-general", "free": True})
        return _gate(code, verify, "general EIA:DU construction")

    p = profile.toggle_rows()
    w1 = round_half_up(p[0][0] * n)
    comps: list[WomCodebook | None] = [None]
    levels = [None]
    layer = {cw_unrank(n, w1, i) for i in range(math.comb(n, w1))}  # counts after write 1
    for j in range(1, t):
        m_lvl = min(j + 1, ell)
        q = 2 * m_lvl + 1
        sample = min(layer)
        sizes = [sum(1 for x in sample if x == i) for i in range(ell + 1)]
        if any(sorted(v) != sorted(sample) for v in layer):
            raise ConstructionError(f"write {j + 1}: reachable count vectors have differing compositions")
        second: list[tuple[int, ...] | None] = [None] * q
        for i in range(ell + 1):
            if sizes[i] == 0:
                continue
            toggled = round_half_up(p[j][i] * sizes[i]) if i < ell else 0
            second[i] = _level_split(toggled, sizes[i] - toggled, i % 2, q)
        comp = Composition((), tuple(second))
        try:
            component = provider(j, q, sorted(layer), comp)
        except Exception as exc:
            raise ConstructionError(f"provider failed at write {j + 1} (q={q}, composition={second})") from exc
        comps.append(component)
        levels.append(q)
        nxt = set()
        for v in layer:
            for m in range(component.M[1]):
                y = component.encoders[1][(m, v)]
                v2, _ = apply_write(v, tuple(x % 2 for x in y), ell)
                nxt.add(v2)
        layer = nxt

    def encode(j, m, v, c):
        if j == 0:
            return cw_unrank(n, w1, m)
        return tuple(x % 2 for x in comps[j].encoders[1][(m, tuple(v))])

    def decode(j, c):
        if j == 0:
            return cw_rank(c)
        q = levels[j]
        return comps[j].decoders[1][tuple(q - 2 if b else q - 1 for b in c)]

    M = (math.comb(n, w1),) + tuple(comps[j].M[1] for j in range(1, t))
    meta = {"construction": "eia-du-general", "first_weight": w1, "alphabets": levels[1:]}
    code = tabulate_codebook(n, t, ell, model, M, encode, decode, metadata=meta)
    return _gate(code, verify, "general EIA:DU construction")


# ---------------------------------------------------------------------------
# EIP:DU three-write construction with an uninformed third write

def construction4_components(n: int, p10, p20, p21) -> tuple[WomCodebook, WomCodebook]:
    comp, w1, a0, k = _c1_composition(n, p10, p20, p21)
    ternary = search_two_write_wom(n, 3, "EI_DU", comp)
    eu = search_two_write_wom(n, 2, "EU_DU", Composition((n - k, k)))
    return ternary, eu


def build_construction4(n: int, p10, p20, p21, components: tuple[WomCodebook, WomCodebook] | None = None,
                        *, verify: bool = True) -> ElmCodebook:
    """EIP:DU code for ``t = 3``, ``ell = 2``.

    Writes 1-2 are those of :func:`build_construction1`. On write 3 the
    encoder no longer knows which cells are used up, so it stores the
    complement of an uninformed (EU:DU) second-write codeword; the used-up
    cells stay at 0, which after complementing is exactly the EU:DU code's
    unknown first-write state.
    """
    if n > 8:
        raise ValueError("n must be <= 8 for exhaustive verification")
    if components is None:
        components = construction4_components(n, p10, p20, p21)
    ternary, eu = components
    _, _, _, k = _c1_composition(n, p10, p20, p21)
    if ternary.q != 3 or ternary.n != n or ternary.writes != 2:
        raise ValueError("first component must be a ternary two-write code on n cells")
    if eu.model != EU_DU or eu.n != n or eu.writes != 2:
        raise ValueError("second component must be a two-write EU:DU code on n cells")
    if any(sum(s) != k for s in eu.first_write_states()):
        raise ValueError(f"EU:DU first-write states must have weight {k}")

    def encode(j, m, v, c):
        if j == 0:
            return ternary.encoders[0][m]
        if j == 1:
            return tuple(x % 2 for x in ternary.encoders[1][(m, tuple(c))])
        return complement(eu.encoders[1][m])

    def decode(j, c):
        if j == 0:
            return ternary.decoders[0][c]
        if j == 1:
            return ternary.decoders[1][_lift(c)]
        return eu.decoders[1][complement(c)]

    M = (ternary.M[0], ternary.M[1], eu.M[1])
    code = tabulate_codebook(n, 3, 2, ModelSpec("IP", "U"), M, encode, decode,
                             metadata={"construction": "eip-du-3-2", "stuck_weight": k})
    return _gate(code, verify, "EIP:DU three-write construction")
