"""Exhaustive optimal zero-error ELM codes at tiny parameters.

``best(j, V)`` is the largest ``M_j * ... * M_t`` achievable when the set of
reachable count vectors before write ``j`` is ``V``. A write is described by
a list of ``M`` intended states per encoder class (the count vectors sharing
one encoder view); messages are then labeled so every decoder view is
unambiguous. Values are cached per cell-permutation class of ``V``.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

from .capacity import counting_bound
from .codebook import ElmCodebook, ModelSpec, all_models, verify_elm_codebook
from .memory import apply_write, parity_project

DEFAULT_BUDGET = 5_000_000


def default_budget() -> int:
    raw = os.environ.get("ELM_SEARCH_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class SearchInstance:
    n: int
    t: int
    ell: int
    model: ModelSpec
    max_M: int | None = None
    budget: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.t < 1 or self.ell < 1:
            raise ValueError("n, t, ell must be >= 1")
        if (self.ell + 1) ** self.n > 64 or self.n > 3:
            raise ValueError("instance too large for exhaustive search (need n <= 3, (ell+1)^n <= 64)")


@dataclass
class SearchResult:
    M: tuple[int, ...]
    witness: ElmCodebook
    optimal: bool
    nodes: int = 0

    @property
    def product(self) -> int:
        return math.prod(self.M)

    def to_dict(self) -> dict:
        return {"optimal": self.optimal, "product": self.product, "M": list(self.M),
                "nodes": self.nodes, "witness": self.witness.to_dict()}


@dataclass
class _Plan:
    M: int
    labeled: dict          # encoder view -> tuple of intended states, index = message
    next_states: frozenset
    value: int


class _Budget(Exception):
    pass


def _perm_vec(v, perm):
    return tuple(v[p] for p in perm)


class _Searcher:
    def __init__(self, inst: SearchInstance):
        self.n, self.t, self.ell, self.model = inst.n, inst.t, inst.ell, inst.model
        self.max_M = inst.max_M or (1 << self.n)
        self.budget = inst.budget if inst.budget is not None else default_budget()
        self.nodes = 0
        self.truncated = False
        self.cache: dict = {}
        self.perms = list(itertools.permutations(range(self.n)))
        self.bits = list(itertools.product((0, 1), repeat=self.n))

    # -- symmetry ---------------------------------------------------------
    def _canonical(self, V):
        best = None
        for perm in self.perms:
            key = tuple(sorted(_perm_vec(v, perm) for v in V))
            if best is None or key < best[0]:
                best = (key, perm)
        return best

    def _map_plan(self, plan: _Plan, perm) -> _Plan:
        return _Plan(plan.M, {_perm_vec(k, perm) if k else k: tuple(_perm_vec(x, perm) for x in xs)
                              for k, xs in plan.labeled.items()},
                     frozenset(_perm_vec(v, perm) for v in plan.next_states), plan.value)

    # -- one write ----------------------------------------------------------
    def _classes(self, V):
        out: dict = {}
        for v in sorted(V):
            out.setdefault(self.model.encoder_view(v), []).append(v)
        return out

    def _candidates(self, members):
        """Intended states, one per distinct outcome signature over the class."""
        seen, cands = set(), []
        for x in self.bits:
            if self.model.encoder == "IA":
                v = members[0]
                if any(v[k] == self.ell and x[k] != v[k] % 2 for k in range(self.n)):
                    continue  # informed-all encoders never push a saturated cell
            sig = tuple(apply_write(v, x, self.ell)[0] for v in members)
            if sig not in seen:
                seen.add(sig)
                cands.append((x, sig))
        return cands

    def _assignments(self, classes, M):
        """Yield (chosen states per class, labels) for every feasible write."""
        keys = list(classes)
        cand = {}
        for e in keys:
            cand[e] = self._candidates(classes[e])
            if len(cand[e]) < M:
                return
        views_of = {}
        for e in keys:
            for x, sig in cand[e]:
                views_of[(e, x)] = [self.model.decoder_view(parity_project(v2), v)
                                    for v, v2 in zip(classes[e], sig)]

        def subsets(e):
            for combo in itertools.combinations(cand[e], M):
                # outcomes at each member must differ between messages
                if all(len({sig[i] for _, sig in combo}) == M for i in range(len(classes[e]))):
                    yield tuple(x for x, _ in combo)

        chosen: list = []

        def rec(idx, owner: dict):
            self.nodes += 1
            if self.nodes > self.budget and not self.truncated:
                raise _Budget
            if idx == len(keys):
                labels = self._label(keys, chosen, owner, M)
                if labels is not None:
                    yield list(chosen), labels
                return
            e = keys[idx]
            for xs in subsets(e):
                new_owner = dict(owner)
                ok = True
                for x in xs:
                    for view in views_of[(e, x)]:
                        prev = new_owner.get(view)
                        if prev is None:
                            new_owner[view] = [(e, x)]
                        elif (e, x) not in prev:
                            if any(pe == e for pe, _ in prev):
                                ok = False  # two messages of one class share a view
                                break
                            new_owner[view] = prev + [(e, x)]
                    if not ok:
                        break
                if ok:
                    chosen.append(xs)
                    yield from rec(idx + 1, new_owner)
                    chosen.pop()

        yield from rec(0, {})

    def _label(self, keys, chosen, owner, M):
        parent: dict = {}

        def find(a):
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for items in owner.values():
            for it in items[1:]:
                ra, rb = find(items[0]), find(it)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict = {}
        for e, xs in zip(keys, chosen):
            for x in xs:
                g = groups.setdefault(find((e, x)), set())
                if e in g:
                    return None
                g.add(e)
        order = sorted(groups)
        colour: dict = {}

        def assign(i):
            if i == len(order):
                return True
            g = order[i]
            used = {colour[h] for h in order[:i] if groups[h] & groups[g]}
            for col in range(M):
                if col not in used:
                    colour[g] = col
                    if assign(i + 1):
                        return True
            colour.pop(g, None)
            return False

        if not assign(0):
            return None
        labeled = {}
        for e, xs in zip(keys, chosen):
            row = [None] * M
            for x in xs:
                row[colour[find((e, x))]] = x
            labeled[e] = tuple(row)
        return labeled

    # -- recursion ----------------------------------------------------------
    def best(self, j: int, V: frozenset) -> _Plan:
        key, perm = self._canonical(V)
        if (j, key) in self.cache:
            plan = self.cache[(j, key)]
            inv = [0] * self.n
            for a, b in enumerate(perm):
                inv[b] = a
            return self._map_plan(plan, tuple(inv)) if plan is not None else None
        plan = self._solve(j, frozenset(key))
        self.cache[(j, key)] = plan
        return self.best(j, V)

    def _solve(self, j, V) -> _Plan | None:
        classes = self._classes(V)
        last = j == self.t - 1
        tail_cap = (1 << self.n) ** (self.t - j - 1)
        found: _Plan | None = None
        for M in range(min(self.max_M, 1 << self.n), 0, -1):
            if found is not None and M * tail_cap <= found.value:
                break
            seen_next: set = set()
            try:
                for chosen, labeled in self._assignments(classes, M):
                    nxt = frozenset(apply_write(v, x, self.ell)[0]
                                    for xs, members in zip(chosen, classes.values())
                                    for x in xs for v in members)
                    if nxt in seen_next:
                        continue
                    seen_next.add(nxt)
                    tail = 1 if last else self.best(j + 1, nxt).value
                    if found is None or M * tail > found.value:
                        found = _Plan(M, labeled, nxt, M * tail)
                    if last or self.truncated or tail == tail_cap:
                        break
            except _Budget:
                self.truncated = True  # from here on: first feasible plan per state
            if found is not None and self.truncated:
                break
        return found

    # -- witness ------------------------------------------------------------
    def witness(self) -> ElmCodebook:
        V = frozenset({(0,) * self.n})
        encs, decs, Ms = [], [], []
        for j in range(self.t):
            plan = self.best(j, V)
            enc, dec = {}, {}
            for e, row in plan.labeled.items():
                for m, x in enumerate(row):
                    enc[(m, e)] = x
            for v in sorted(V):
                row = plan.labeled[self.model.encoder_view(v)]
                for m, x in enumerate(row):
                    v2, c2 = apply_write(v, x, self.ell)
                    dec[self.model.decoder_view(c2, v)] = m
            encs.append(enc)
            decs.append(dec)
            Ms.append(plan.M)
            V = plan.next_states
        return ElmCodebook(self.n, self.t, self.ell, self.model, tuple(Ms), tuple(encs), tuple(decs),
                           metadata={"search": "exhaustive"})


def search_optimal_elm(inst: SearchInstance) -> SearchResult:
    """Maximize ``M_1 * ... * M_t``. Among equal products the first found
    wins, scanning larger ``M_j`` first and intended states in
    lexicographic order. With the budget exhausted the best code found so
    far is returned with ``optimal=False``."""
    s = _Searcher(inst)
    s.best(0, frozenset({(0,) * inst.n}))
    code = s.witness()
    report = verify_elm_codebook(code)
    if not report.passed:
        raise RuntimeError(f"search witness failed verification: {report.summary()}")
    return SearchResult(code.M, code.with_verification(report), not s.truncated, s.nodes)


@dataclass
class OrderingReport:
    n: int
    t: int
    ell: int
    products: dict[str, int] = field(default_factory=dict)
    optimal: dict[str, bool] = field(default_factory=dict)
    bound: int = 0

    def chain(self, tags) -> bool:
        vals = [self.products[t] for t in tags]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    @property
    def encoder_chains_hold(self) -> bool:
        return all(self.chain([f"EU:D{d}", f"EIP:D{d}", f"EIA:D{d}"]) for d in ("U", "IP", "IA"))

    @property
    def decoder_chains_hold(self) -> bool:
        return all(self.chain([f"E{e}:DU", f"E{e}:DIP", f"E{e}:DIA"]) for e in ("U", "IP", "IA"))

    @property
    def holds(self) -> bool:
        return (self.encoder_chains_hold and self.decoder_chains_hold
                and all(p <= self.bound for p in self.products.values()))

    def to_dict(self) -> dict:
        return {"n": self.n, "t": self.t, "ell": self.ell, "products": dict(self.products),
                "optimal": dict(self.optimal), "counting_bound": self.bound, "holds": self.holds}


def model_ordering_check(n: int, t: int, ell: int, budget: int | None = None) -> OrderingReport:
    rep = OrderingReport(n, t, ell, bound=counting_bound(n, t, ell))
    for model in all_models():
        res = search_optimal_elm(SearchInstance(n, t, ell, model, budget=budget))
        rep.products[model.tag] = res.product
        rep.optimal[model.tag] = res.optimal
    return rep
