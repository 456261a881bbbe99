"""Finite-length write-once-memory components.

Cells hold levels ``0..q-1``; a write may only raise levels. Codebooks are
explicit tables so that every property can be checked by replay.

Most of the search work reduces to one combinatorial question, answered by
:func:`rainbow_coloring`: colour a set of vectors with ``K`` colours so that
every *hyperedge* (the set of vectors an encoder may move to from one prior
state) sees all ``K`` colours. The colour of a vector is then the decoded
message and the encoder picks, from its hyperedge, a vector of the wanted
colour.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import networkx as nx

from .memory import Vector

EI_DU = "EI:DU"
EU_DU = "EU:DU"
_WOM_MODELS = {"ei_du": EI_DU, "ei:du": EI_DU, "eu_du": EU_DU, "eu:du": EU_DU}


class SearchBudgetExceeded(RuntimeError):
    pass


class InfeasibleComponent(RuntimeError):
    """No codebook with the requested shape was found."""


def normalize_wom_model(model: str) -> str:
    try:
        return _WOM_MODELS[model.lower()]
    except KeyError:
        raise ValueError(f"unknown WOM model {model!r}; expected EI_DU or EU_DU") from None


# ---------------------------------------------------------------------------
# constant-weight indexing (lexicographic by bit string, cell 0 leftmost)

def cw_unrank(n: int, w: int, index: int) -> Vector:
    """The ``index``-th weight-``w`` vector of length ``n``."""
    total = math.comb(n, w)
    if not 0 <= index < total:
        raise IndexError(f"index {index} outside [0, {total})")
    bits = []
    for k in range(n):
        zeros_first = math.comb(n - k - 1, w)  # completions with a 0 here
        if index < zeros_first:
            bits.append(0)
        else:
            bits.append(1)
            index -= zeros_first
            w -= 1
    return tuple(bits)


def cw_rank(bits: Sequence[int]) -> int:
    n, w = len(bits), sum(bits)
    index = 0
    for k, b in enumerate(bits):
        if b:
            index += math.comb(n - k - 1, w)
            w -= 1
    return index


def weight_ordered(n: int, max_weight: int) -> list[Vector]:
    """All binary vectors of weight ``<= max_weight``, by weight then rank."""
    return [cw_unrank(n, w, i) for w in range(max_weight + 1) for i in range(math.comb(n, w))]


def vec_to_int(v: Sequence[int]) -> int:
    out = 0
    for b in v:
        out = (out << 1) | b
    return out


def int_to_vec(x: int, n: int) -> Vector:
    return tuple((x >> (n - 1 - k)) & 1 for k in range(n))


def digits(v: Sequence[int]) -> str:
    return "".join(str(x) for x in v)


def undigits(s: str) -> Vector:
    return tuple(int(ch) for ch in s)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------------------
# rainbow colouring

def rainbow_coloring(edges: Sequence[Sequence[Vector]], K: int, budget: int = 200_000) -> dict | None:
    """Colour the union of ``edges`` with ``0..K-1`` so that each edge holds
    every colour, or return ``None`` if impossible.

    Backtracking on the edge with least slack (uncoloured vertices minus
    missing colours); fresh colours are introduced in order, which removes
    colour-permutation symmetry. Raises :class:`SearchBudgetExceeded` after
    ``budget`` assignments.
    """
    if K < 1:
        raise ValueError("need at least one colour")
    verts = sorted({v for e in edges for v in e})
    vid = {v: i for i, v in enumerate(verts)}
    E = [sorted({vid[v] for v in e}) for e in edges]
    if any(len(e) < K for e in E):
        return None
    if K == 1:
        return {v: 0 for v in verts}
    member = [[] for _ in verts]
    for ei, e in enumerate(E):
        for v in e:
            member[v].append(ei)
    color = [-1] * len(verts)
    cnt = [[0] * K for _ in E]
    present = [0] * len(E)
    free = [len(e) for e in E]
    nodes = 0
    used = 0  # colours 0..used-1 have appeared

    def assign(v, k):
        color[v] = k
        ok = True
        for ei in member[v]:
            free[ei] -= 1
            if cnt[ei][k] == 0:
                present[ei] += 1
            cnt[ei][k] += 1
            if free[ei] < K - present[ei]:
                ok = False
        return ok

    def unassign(v, k):
        color[v] = -1
        for ei in member[v]:
            free[ei] += 1
            cnt[ei][k] -= 1
            if cnt[ei][k] == 0:
                present[ei] -= 1

    def solve() -> bool:
        nonlocal nodes, used
        best_e, best_slack = -1, None
        for ei in range(len(E)):
            if present[ei] == K:
                continue
            slack = free[ei] - (K - present[ei])
            if best_slack is None or slack < best_slack:
                best_e, best_slack = ei, slack
                if slack == 0:
                    break
        if best_e < 0:
            return True
        e = E[best_e]
        v = next(x for x in e if color[x] < 0)
        missing = [k for k in range(K) if cnt[best_e][k] == 0]
        choices = [k for k in missing if k <= used]
        if best_slack > 0:
            choices += [k for k in range(min(used, K)) if cnt[best_e][k] > 0]
        for k in choices:
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"rainbow colouring with K={K} exceeded {budget} nodes")
            prev_used = used
            used = max(used, k + 1)
            if assign(v, k) and solve():
                return True
            unassign(v, k)
            used = prev_used
        return False

    if not solve():
        return None
    out = {}
    for v, i in vid.items():
        out[v] = color[i] if color[i] >= 0 else 0
    return out


class RainbowResult(NamedTuple):
    K: int
    coloring: dict
    certified: bool  # False if some larger K was abandoned on budget


def max_rainbow_coloring(edges: Sequence[Sequence[Vector]], upper: int | None = None,
                         budget: int = 200_000) -> RainbowResult:
    """Largest ``K`` admitting a rainbow colouring.

    Feasibility is monotone in ``K`` (merging two colours keeps every edge
    rainbow), so ``K`` is raised until the first failure. The result is
    certified maximal when that failure is a proof rather than a budget stop.
    """
    sizes = [len(set(e)) for e in edges]
    hi = min(sizes) if sizes else 1
    if upper is not None:
        hi = min(hi, upper)
    best = None
    certified = True
    for K in range(1, hi + 1):
        try:
            col = rainbow_coloring(edges, K, budget)
        except SearchBudgetExceeded:
            certified = False
            break
        if col is None:
            break
        best = (K, col)
    if best is None:
        raise InfeasibleComponent("no colouring found")
    return RainbowResult(best[0], best[1], certified)


# ---------------------------------------------------------------------------
# codebooks

@dataclass(frozen=True)
class WomCodebook:
    """Explicit multi-write WOM codebook.

    ``encoders[0]`` maps message -> codeword. For ``EI:DU`` later writes map
    ``(message, current state) -> new state``; for ``EU:DU`` they map
    message -> programmed vector and the new state is the cellwise maximum.
    ``decoders[j]`` maps a state to the message of write ``j+1``.
    """
    n: int
    q: int
    model: str
    M: tuple[int, ...]
    encoders: tuple[Mapping, ...]
    decoders: tuple[Mapping, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def writes(self) -> int:
        return len(self.M)

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(math.log2(m) / self.n for m in self.M)

    def encode(self, j: int, m: int, state: Vector | None = None) -> Vector:
        """New cell state after write ``j`` (0-based) of message ``m``."""
        if j == 0:
            return self.encoders[0][m]
        if self.model == EU_DU:
            x = self.encoders[j][m]
            return tuple(max(a, b) for a, b in zip(state, x))
        return self.encoders[j][(m, state)]

    def decode(self, j: int, state: Vector) -> int:
        return self.decoders[j][state]

    def first_write_states(self) -> list[Vector]:
        return [self.encoders[0][m] for m in range(self.M[0])]

    def to_dict(self) -> dict:
        writes = []
        for j, (enc, dec) in enumerate(zip(self.encoders, self.decoders)):
            if j == 0 or self.model == EU_DU:
                e = {str(m): digits(c) for m, c in sorted(enc.items())}
            else:
                e = {f"{m}|{digits(s)}": digits(c) for (m, s), c in sorted(enc.items())}
            d = {digits(s): str(m) for s, m in sorted(dec.items())}
            writes.append({"M": self.M[j], "encoder": e, "decoder": d})
        out = {"n": self.n, "q": self.q, "model": self.model, "writes": writes}
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "WomCodebook":
        model = normalize_wom_model(d["model"])
        encs, decs, M = [], [], []
        for j, w in enumerate(d["writes"]):
            if j == 0 or model == EU_DU:
                enc = {int(k): undigits(v) for k, v in w["encoder"].items()}
            else:
                enc = {}
                for k, v in w["encoder"].items():
                    m, s = k.split("|")
                    enc[(int(m), undigits(s))] = undigits(v)
            encs.append(enc)
            decs.append({undigits(k): int(v) for k, v in w["decoder"].items()})
            M.append(int(w["M"]))
        return cls(int(d["n"]), int(d["q"]), model, tuple(M), tuple(encs), tuple(decs),
                   dict(d.get("metadata", {})))

    @classmethod
    def from_json(cls, s: str) -> "WomCodebook":
        return cls.from_dict(json.loads(s))


def free_one_write(n: int) -> WomCodebook:
    """Single write of ``n`` unconstrained bits (``M = 2^n``)."""
    enc = {m: int_to_vec(m, n) for m in range(1 << n)}
    return WomCodebook(n, 2, EI_DU, (1 << n,), (enc,), ({c: m for m, c in enc.items()},))


# ---------------------------------------------------------------------------
# verification

@dataclass
class WomReport:
    writes: int
    failures: list[Fraction]
    ambiguous: list[tuple[int, Vector, tuple[int, ...]]] = field(default_factory=list)
    monotonicity_violations: list[tuple[int, Vector, Vector]] = field(default_factory=list)
    missing: list[tuple[int, int, Vector | None]] = field(default_factory=list)

    @property
    def zero_error(self) -> bool:
        return all(f == 0 for f in self.failures) and not self.missing

    @property
    def passed(self) -> bool:
        return self.zero_error and not self.monotonicity_violations


def verify_wom_codebook(code: WomCodebook) -> WomReport:
    """Replay every message sequence; never raises on a bad code."""
    n, k = code.n, code.writes
    report = WomReport(k, [Fraction(0)] * k)
    layer: dict[Vector, int] = {(0,) * n: 1}  # state -> number of message prefixes
    total = 1
    for j in range(k):
        outcomes: dict[Vector, set[int]] = {}
        bad = 0
        nxt: dict[Vector, int] = {}
        for state in sorted(layer):
            mult = layer[state]
            for m in range(code.M[j]):
                try:
                    if j == 0:
                        new = code.encoders[0][m]
                    elif code.model == EU_DU:
                        new = tuple(max(a, b) for a, b in zip(state, code.encoders[j][m]))
                    else:
                        new = code.encoders[j][(m, state)]
                except KeyError:
                    report.missing.append((j + 1, m, state if j else None))
                    bad += mult
                    continue
                if any(a < b for a, b in zip(new, state)) or any(not 0 <= x < code.q for x in new):
                    report.monotonicity_violations.append((j + 1, state, new))
                outcomes.setdefault(new, set()).add(m)
                if code.decoders[j].get(new) != m:
                    bad += mult
                nxt[new] = nxt.get(new, 0) + mult
        for s in sorted(outcomes):
            if len(outcomes[s]) > 1:
                report.ambiguous.append((j + 1, s, tuple(sorted(outcomes[s]))))
        total *= code.M[j]
        report.failures[j] = Fraction(bad, total)
        layer = nxt
    return report


# ---------------------------------------------------------------------------
# target sets for the second write

@dataclass(frozen=True)
class Composition:
    """Per-level symbol counts.

    ``first[k]`` is the number of cells at level ``k`` after write 1.
    ``second[i]`` (or ``None``) gives, for the cells at level ``i`` after write
    1, how many must end at each level after write 2.
    """
    first: tuple[int, ...]
    second: tuple[tuple[int, ...] | None, ...] = ()


def _composition_meta(comp: Composition) -> dict:
    return {"first": list(comp.first), "second": [None if s is None else list(s) for s in comp.second]}


def _vectors_with_composition(n: int, counts: Sequence[int]) -> list[Vector]:
    # multiset permutations in lexicographic order
    if sum(counts) != n:
        raise ValueError(f"composition {tuple(counts)} does not sum to n={n}")
    out: list[Vector] = []

    def rec(prefix, rem):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for lvl, c in enumerate(rem):
            if c:
                rem[lvl] -= 1
                prefix.append(lvl)
                rec(prefix, rem)
                prefix.pop()
                rem[lvl] += 1

    rec([], list(counts))
    return out


def _up_set(state: Vector, q: int) -> list[Vector]:
    return [tuple(y) for y in itertools.product(*(range(x, q) for x in state))]


def _targets(state: Vector, q: int, comp: Composition | None) -> list[Vector]:
    if comp is None or not comp.second:
        return _up_set(state, q)
    groups: dict[int, list[int]] = {}
    for k, x in enumerate(state):
        groups.setdefault(x, []).append(k)
    parts = []
    for lvl, pos in sorted(groups.items()):
        want = comp.second[lvl] if lvl < len(comp.second) else None
        if want is None:
            parts.append((pos, [tuple(y) for y in itertools.product(range(lvl, q), repeat=len(pos))]))
        else:
            if any(want[k] for k in range(lvl)):
                raise ValueError(f"composition for level {lvl} asks for lower levels")
            parts.append((pos, _vectors_with_composition(len(pos), want)))
    out = []
    for combo in itertools.product(*(opts for _, opts in parts)):
        y = list(state)
        for (pos, _), sub in zip(parts, combo):
            for k, val in zip(pos, sub):
                y[k] = val
        out.append(tuple(y))
    return sorted(out)


def _two_write_from_coloring(n, q, first: Sequence[Vector], K: int, coloring: Mapping[Vector, int],
                             targets: Callable[[Vector], list[Vector]],
                             pinned: Mapping[tuple[int, Vector], Vector] | None = None,
                             metadata: dict | None = None) -> WomCodebook:
    enc1 = {m: c for m, c in enumerate(first)}
    dec1 = {c: m for m, c in enc1.items()}
    enc2 = {}
    for c in first:
        for y in targets(c):  # sorted: first hit per colour is lexicographically smallest
            m = coloring[y]
            enc2.setdefault((m, c), y)
    if pinned:
        for (m, c), y in pinned.items():
            if y not in targets(c) or coloring[y] != m:
                raise ValueError(f"pinned codeword {digits(y)} is not a valid choice for message {m}")
            enc2[(m, c)] = y
    dec2 = {y: m for y, m in coloring.items()}
    return WomCodebook(n, q, EI_DU, (len(first), K), (enc1, enc2), (dec1, dec2), dict(metadata or {}))


# ---------------------------------------------------------------------------
# exhaustive two-write search

def _cell_perms(n):
    return list(itertools.permutations(range(n)))


def _canonical(states: Iterable[Vector], perms) -> tuple:
    best = None
    for p in perms:
        img = tuple(sorted(tuple(s[i] for i in p) for s in states))
        if best is None or img < best:
            best = img
    return best


def _down_sets(cands: Sequence[Vector], size: int, perms, budget_box: list[int]):
    """Down-closed subsets of ``cands`` of the given size, one per cell
    permutation orbit, in lexicographic order of their sorted members."""
    below = {c: {d for d in cands if d != c and all(a <= b for a, b in zip(d, c))} for c in cands}
    seen = set()
    for combo in itertools.combinations(cands, size):
        budget_box[0] -= 1
        if budget_box[0] < 0:
            raise SearchBudgetExceeded("two-write search budget exceeded")
        s = set(combo)
        if any(not below[c] <= s for c in combo):
            continue
        key = _canonical(combo, perms)
        if key in seen:
            continue
        seen.add(key)
        yield combo


def search_two_write_wom(n: int, q: int = 2, model: str = "EI_DU", composition: Composition | None = None,
                         *, first_write_size: int | None = None, budget: int = 2_000_000) -> WomCodebook:
    """Two-write code maximizing ``M1 * M2`` (ties: larger ``M1``).

    Without a composition the first-write set is searched exhaustively up to
    cell permutation. For EI:DU it may be taken down-closed: if every message
    is reachable above ``c`` it is reachable above anything below ``c``. With
    a composition the first write uses the whole constant-composition class
    and only ``M2`` is maximized.
    """
    model = normalize_wom_model(model)
    if q < 2 or (q > 2 and q % 2 == 0) or q > 5:
        raise ValueError("q must be 2 or an odd number in 3..5")
    # a fixed composition class removes the first-write search, so allow larger n
    q_limit = 8 if composition is not None else 6
    if (q == 2 and n > 12) or (q > 2 and n > q_limit) or n < 1:
        raise ValueError(f"n={n} outside the exhaustive range for q={q}")
    if model == EU_DU:
        return _search_eu_du(n, q, composition, first_write_size, budget)

    def targets(c):
        return _targets(c, q, composition)

    if composition is not None:
        first = _vectors_with_composition(n, composition.first)
        edges = [targets(c) for c in first]
        K, col, certified = max_rainbow_coloring(edges, budget=budget)
        meta = {"composition": _composition_meta(composition), "m2_certified_max": certified}
        return _two_write_from_coloring(n, q, first, K, col, targets, metadata=meta)

    states = [tuple(s) for s in itertools.product(range(q), repeat=n)]
    perms = _cell_perms(n)
    budget_box = [budget]
    best = None  # (product, M1, first, K, coloring)
    max_up = q ** n
    for K in range(max_up, 0, -1):
        cands = [c for c in states if len(targets(c)) >= K]
        sizes = [first_write_size] if first_write_size is not None else range(len(cands), 0, -1)
        for size in sizes:
            if size > len(cands):
                continue
            if best is not None and (size * K, size) <= best[:2]:
                break
            found = None
            for S in _down_sets(cands, size, perms, budget_box):
                col = rainbow_coloring([targets(c) for c in S], K, budget=budget)
                if col is not None:
                    found = (S, col)
                    break
            if found:
                best = (size * K, size, found[0], K, found[1])
                break
    if best is None:
        raise InfeasibleComponent("no two-write code found")
    _, _, first, K, col = best
    return _two_write_from_coloring(n, q, sorted(first), K, col, targets)


def _images(x: Vector, first: Sequence[Vector]) -> set[Vector]:
    return {tuple(max(a, b) for a, b in zip(s, x)) for s in first}


def eu_du_second_write(n: int, first: Sequence[Vector], q: int = 2) -> tuple[list[Vector], int]:
    """Largest set of programmed vectors decodable from ``max(s, x)`` for
    every ``s`` in ``first``; returned sorted, with its size."""
    xs = [tuple(x) for x in itertools.product(range(q), repeat=n)]
    imgs = [_images(x, first) for x in xs]
    g = nx.Graph()
    g.add_nodes_from(range(len(xs)))
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            if imgs[a].isdisjoint(imgs[b]):
                g.add_edge(a, b)  # compatible pair
    clique, size = nx.max_weight_clique(g, weight=None)
    chosen = sorted(xs[i] for i in clique)
    return chosen, len(chosen)


def _eu_du_codebook(n, q, first, xs, metadata=None) -> WomCodebook:
    enc1 = {m: c for m, c in enumerate(first)}
    enc2 = {m: x for m, x in enumerate(xs)}
    dec2 = {}
    for m, x in enc2.items():
        for y in sorted(_images(x, first)):
            dec2[y] = m
    return WomCodebook(n, q, EU_DU, (len(first), len(xs)), (enc1, enc2),
                       ({c: m for m, c in enc1.items()}, dec2), dict(metadata or {}))


def _search_eu_du(n, q, composition, first_write_size, budget) -> WomCodebook:
    if composition is not None:
        first = _vectors_with_composition(n, composition.first)
        xs, _ = eu_du_second_write(n, first, q)
        return _eu_du_codebook(n, q, first, xs, {"composition": {"first": list(composition.first)}})
    states = [tuple(s) for s in itertools.product(range(q), repeat=n)]
    perms = _cell_perms(n)
    best = None
    seen = set()
    count = 0
    sizes = [first_write_size] if first_write_size is not None else range(len(states), 0, -1)
    for size in sizes:
        if best is not None and size * len(states) < best[0]:
            break
        for S in itertools.combinations(states, size):
            count += 1
            if count > budget:
                raise SearchBudgetExceeded("EU:DU search budget exceeded")
            key = _canonical(S, perms)
            if key in seen:
                continue
            seen.add(key)
            xs, m2 = eu_du_second_write(n, S, q)
            if best is None or (size * m2, size) > best[:2]:
                best = (size * m2, size, list(S), xs)
    _, _, first, xs = best
    return _eu_du_codebook(n, q, first, xs)


# ---------------------------------------------------------------------------
# weight-tau first write, syndrome second write

def _span(basis: Sequence[int]) -> list[int]:
    out = [0]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def linear_lexicode_basis(n: int, d: int, dim: int) -> list[int] | None:
    """Basis (as ints) of a ``dim``-dimensional binary code of length ``n``
    and minimum distance ``>= d`` built greedily in lexicographic order."""
    basis: list[int] = []
    code = [0]
    for x in range(1, 1 << n):
        if len(basis) == dim:
            break
        if all(bin(x ^ c).count("1") >= d for c in code):
            basis.append(x)
            code = _span(basis)
    return basis if len(basis) == dim else None


def build_lemma2_two_write(n: int, tau: int, *, budget: int = 500_000) -> WomCodebook:
    """Two-write binary code with ``M1 = sum_{i<=tau} C(n,i)`` and
    ``M2 = 2^(n-tau-1)``.

    The first write stores any vector of weight ``<= tau``. The second
    write is decoded by a syndrome ``D(y) = H y`` when a parity-check
    matrix ``H`` whose row space has minimum distance ``> tau`` exists (then
    the columns outside any ``tau`` cells still span everything); otherwise a
    tabular decoder is searched by rainbow colouring for ``n <= 10``.
    """
    if not 0 <= tau < n or n > 14:
        raise ValueError("need 0 <= tau < n <= 14")
    r = n - tau - 1
    M2 = 1 << r
    first = weight_ordered(n, tau)

    def targets(s):
        free = [k for k in range(n) if not s[k]]
        out = []
        for bits in itertools.product((0, 1), repeat=len(free)):
            y = list(s)
            for k, b in zip(free, bits):
                y[k] = b
            out.append(tuple(y))
        return out  # lexicographic, since free positions are in order

    meta = {"tau": tau}
    basis = linear_lexicode_basis(n, tau + 1, r) if r > 0 else []
    if basis is not None:
        # bit k of a basis integer is cell k, so low cells are used first
        H = [tuple((b >> k) & 1 for k in range(n)) for b in basis]
        meta["decoder"] = "syndrome"
        meta["H"] = [digits(h) for h in H]

        def syn(y):
            out = 0
            for h in H:
                out = (out << 1) | (sum(a & b for a, b in zip(h, y)) & 1)
            return out

        coloring = {tuple(y): syn(y) for y in itertools.product((0, 1), repeat=n)}
    else:
        if n > 10:
            raise InfeasibleComponent(
                f"no [{n},{r},>={tau + 1}] linear code found and n={n} is beyond the tabular search range")
        try:
            coloring = rainbow_coloring([targets(s) for s in first], M2, budget)
        except SearchBudgetExceeded as exc:
            raise InfeasibleComponent(f"tabular decoder search for ({n},{tau}) exhausted its budget") from exc
        if coloring is None:
            raise InfeasibleComponent(f"no decoder with M2={M2} exists for ({n},{tau})")
        meta["decoder"] = "table"
    code = _two_write_from_coloring(n, 2, first, M2, coloring, targets, metadata=meta)
    return code


def two_write_over(first: Sequence[Vector], q: int, composition: Composition,
                   *, budget: int = 200_000, metadata: dict | None = None) -> WomCodebook:
    """Two-write code whose first write lists exactly ``first`` and whose
    second write obeys ``composition.second``; ``M2`` is maximized."""
    first = [tuple(c) for c in first]
    n = len(first[0])

    def targets(c):
        return _targets(c, q, composition)

    K, col, certified = max_rainbow_coloring([targets(c) for c in first], budget=budget)
    meta = dict(metadata or {})
    meta["composition"] = _composition_meta(composition)
    meta["m2_certified_max"] = certified
    return _two_write_from_coloring(n, q, first, K, col, targets, metadata=meta)


def pin_codeword(code: WomCodebook, write: int, state: Vector, codeword: Vector) -> WomCodebook:
    """Copy of an EI:DU ``code`` whose encoder on ``write`` (0-based, >= 1)
    sends ``state`` to ``codeword`` for the message ``codeword`` decodes to.

    Any codeword above ``state`` with the right decoded value is an equally
    valid encoder choice, so this never breaks zero-error decoding.
    """
    if code.model != EI_DU or write < 1:
        raise ValueError("pinning applies to later writes of EI:DU codes")
    state, codeword = tuple(state), tuple(codeword)
    if any(a < b for a, b in zip(codeword, state)):
        raise ValueError(f"{digits(codeword)} is not above {digits(state)}")
    if codeword not in code.decoders[write]:
        raise ValueError(f"{digits(codeword)} is not a codeword of write {write + 1}")
    m = code.decoders[write][codeword]
    if (m, state) not in code.encoders[write]:
        raise ValueError(f"{digits(state)} is not a reachable state before write {write + 1}")
    if "composition" in code.metadata and code.metadata["composition"].get("second"):
        comp = Composition(tuple(code.metadata["composition"]["first"]),
                           tuple(None if s is None else tuple(s) for s in code.metadata["composition"]["second"]))
        if codeword not in _targets(state, code.q, comp):
            raise ValueError(f"{digits(codeword)} violates the second-write composition")
    encs = list(code.encoders)
    encs[write] = dict(encs[write])
    encs[write][(m, state)] = codeword
    return replace(code, encoders=tuple(encs))
