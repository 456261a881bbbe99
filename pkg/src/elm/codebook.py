"""Explicit ELM codebooks for the nine encoder/decoder knowledge models and
their exhaustive verification."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .memory import MemoryTrace, Vector, apply_write, parity_project, replay_trace

KNOWLEDGE = ("IA", "IP", "U")
REGIMES = ("zero_error", "eps_error")


@dataclass(frozen=True)
class ModelSpec:
    encoder: str
    decoder: str
    regime: str = "zero_error"

    def __post_init__(self):
        if self.encoder not in KNOWLEDGE or self.decoder not in KNOWLEDGE:
            raise ValueError(f"knowledge must be one of {KNOWLEDGE}")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")

    @property
    def tag(self) -> str:
        return f"E{self.encoder}:D{self.decoder}"

    def __str__(self) -> str:
        return self.tag

    @classmethod
    def parse(cls, text: str, regime: str = "zero_error") -> "ModelSpec":
        """Accepts ``EIA:DU``, ``eia_du``, ``EIP-DIA`` and similar."""
        s = text.upper().replace("_", ":").replace("-", ":")
        try:
            e, d = s.split(":")
        except ValueError:
            raise ValueError(f"cannot parse model {text!r}") from None
        if not (e.startswith("E") and d.startswith("D")):
            raise ValueError(f"cannot parse model {text!r}")
        return cls(e[1:], d[1:], regime)

    def encoder_view(self, v: Vector) -> Vector:
        if self.encoder == "IA":
            return tuple(v)
        if self.encoder == "IP":
            return parity_project(v)
        return ()

    def decoder_view(self, c_new: Vector, v_prev: Vector, knowledge: str | None = None) -> tuple:
        k = knowledge or self.decoder
        if k == "IA":
            return (tuple(c_new), tuple(v_prev))
        if k == "IP":
            return (tuple(c_new), parity_project(v_prev))
        return tuple(c_new)


def all_models() -> list[ModelSpec]:
    return [ModelSpec(e, d) for e in KNOWLEDGE for d in KNOWLEDGE]


def _digits(v) -> str:
    return "".join(str(x) for x in v)


def _undigits(s: str) -> Vector:
    return tuple(int(ch) for ch in s)


def _view_key(view) -> str:
    # decoder views are a bit tuple or (bits, side-information)
    if view and isinstance(view[0], tuple):
        return f"{_digits(view[0])}|{_digits(view[1])}"
    return _digits(view)


def _parse_view(key: str, knowledge: str) -> tuple:
    if knowledge == "U":
        return _undigits(key)
    a, b = key.split("|")
    return (_undigits(a), _undigits(b))


@dataclass(frozen=True)
class ElmCodebook:
    """Per-write tables. ``encoders[j][(m, view)]`` is the intended cell
    state for message ``m`` given the encoder's view; ``decoders[j][view]``
    is the decoded message."""
    n: int
    t: int
    ell: int
    model: ModelSpec
    M: tuple[int, ...]
    encoders: tuple[Mapping, ...]
    decoders: tuple[Mapping, ...]
    phases: tuple[tuple[int, bool], ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)
    verified: dict | None = field(default=None, compare=False)

    @property
    def product(self) -> int:
        return math.prod(self.M)

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(math.log2(m) / self.n for m in self.M)

    @property
    def sum_rate(self) -> float:
        return math.log2(self.product) / self.n

    def encode(self, j: int, m: int, v: Vector) -> Vector:
        """Intended state for write ``j`` (0-based) over counts ``v``."""
        return self.encoders[j][(m, self.model.encoder_view(v))]

    def decode(self, j: int, c_new: Vector, v_prev: Vector) -> int:
        return self.decoders[j][self.model.decoder_view(c_new, v_prev)]

    def with_verification(self, report: "ElmReport") -> "ElmCodebook":
        return replace(self, verified={"max_changes": report.max_changes,
                                       "failures": report.failure_count,
                                       "saturation_events": report.saturation_events})

    def to_dict(self) -> dict:
        writes = []
        for j in range(self.t):
            enc = {f"{m}|{_digits(view)}": _digits(c) for (m, view), c in sorted(self.encoders[j].items())}
            dec = {_view_key(view): str(m) for view, m in sorted(self.decoders[j].items())}
            writes.append({"M": self.M[j], "encoder": enc, "decoder": dec})
        out = {"n": self.n, "q": 2, "t": self.t, "ell": self.ell, "model": self.model.tag,
               "regime": self.model.regime, "writes": writes}
        if self.phases:
            out["phases"] = [{"k": k, "complemented": c} for k, c in self.phases]
        if self.verified is not None:
            out["verified"] = dict(self.verified)
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ElmCodebook":
        model = ModelSpec.parse(d["model"], d.get("regime", "zero_error"))
        encs, decs, M = [], [], []
        for w in d["writes"]:
            enc = {}
            for key, c in w["encoder"].items():
                m, view = key.split("|")
                enc[(int(m), _undigits(view))] = _undigits(c)
            encs.append(enc)
            decs.append({_parse_view(k, model.decoder): int(m) for k, m in w["decoder"].items()})
            M.append(int(w["M"]))
        phases = tuple((int(p["k"]), bool(p["complemented"])) for p in d.get("phases", []))
        return cls(int(d["n"]), int(d["t"]), int(d["ell"]), model, tuple(M), tuple(encs), tuple(decs),
                   phases, dict(d.get("metadata", {})), d.get("verified"))

    @classmethod
    def from_json(cls, s: str) -> "ElmCodebook":
        return cls.from_dict(json.loads(s))


EncodeFn = Callable[[int, int, Vector, Vector], Vector]   # (j, m, counts, state) -> intended
DecodeFn = Callable[[int, tuple], int]                    # (j, decoder view) -> message


def tabulate_codebook(n: int, t: int, ell: int, model: ModelSpec, M: Sequence[int],
                      encode: EncodeFn, decode: DecodeFn, *, phases=(), metadata=None) -> ElmCodebook:
    """Freeze encoder/decoder functions into tables over the reachable
    views. ``encode`` must only use what the model's encoder may see; this
    is enforced by rejecting two different outputs for one view."""
    encs = [dict() for _ in range(t)]
    decs = [dict() for _ in range(t)]
    layer = {(0,) * n}
    for j in range(t):
        nxt = set()
        for v in sorted(layer):
            c = parity_project(v)
            view = model.encoder_view(v)
            for m in range(M[j]):
                try:
                    intended = tuple(encode(j, m, v, c))
                except KeyError:
                    continue  # no encoder entry; verification reports it
                prev = encs[j].setdefault((m, view), intended)
                if prev != intended:
                    raise ValueError(f"write {j + 1}: encoder output depends on more than its {model.encoder} view")
                v2, c2 = apply_write(v, intended, ell)
                dview = model.decoder_view(c2, v)
                if dview not in decs[j]:
                    try:
                        decs[j][dview] = decode(j, dview)
                    except KeyError:
                        pass  # left undecodable; verification reports it
                nxt.add(v2)
        layer = nxt
    return ElmCodebook(n, t, ell, model, tuple(M), tuple(encs), tuple(decs), tuple(phases),
                       dict(metadata or {}))


@dataclass
class ElmReport:
    model: str
    sequences: int
    failures: list[Fraction]
    failure_count: int = 0
    saturation_events: int = 0
    max_changes: int = 0
    max_count: int = 0
    missing_encoder: int = 0
    failure_trace: MemoryTrace | None = None
    failure_messages: tuple[int, ...] | None = None
    budget_violation_trace: MemoryTrace | None = None
    budget_violation_messages: tuple[int, ...] | None = None
    ell: int = 0
    eia: bool = False  # informed-all encoders must never hit a saturated cell

    @property
    def passed(self) -> bool:
        ok = self.failure_count == 0 and self.missing_encoder == 0 and self.max_count <= self.ell
        if self.eia:
            ok = ok and self.saturation_events == 0
        return ok

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return (f"{state} {self.model}: sequences={self.sequences} failures={self.failure_count} "
                f"saturation_events={self.saturation_events} max_changes={self.max_changes}")


def _trace_for(code: ElmCodebook, preds, j, a, tail_m=None) -> tuple[tuple[int, ...], MemoryTrace]:
    msgs = []
    states = []
    while j > 0:
        prev, m = preds[j][a]
        msgs.append(m)
        j, a = j - 1, prev
    msgs.reverse()
    v = (0,) * code.n
    for jj, m in enumerate(msgs):
        intended = code.encode(jj, m, v)
        states.append(intended)
        v, _ = apply_write(v, intended, code.ell)
    if tail_m is not None:
        msgs.append(tail_m)
        states.append(code.encode(len(msgs) - 1, tail_m, v))
    return tuple(msgs), replay_trace(code.ell, states, n=code.n)


def verify_elm_codebook(code: ElmCodebook) -> ElmReport:
    """Replay every message sequence in ``[M1] x ... x [Mt]``.

    Sequences are merged by their vector of attempted changes per cell
    (uncapped); the stored count is that vector capped at ``ell``. Each
    decode uses exactly the model's decoder view. Failure fractions are
    exact, weighting every message sequence equally.
    """
    n, ell = code.n, code.ell
    report = ElmReport(code.model.tag, code.product, [Fraction(0)] * code.t,
                       ell=ell, eia=code.model.encoder == "IA")
    layer = {(0,) * n: 1}  # attempted-change vector -> number of message prefixes
    preds = [dict() for _ in range(code.t + 1)]
    prefixes = 1
    for j in range(code.t):
        nxt: dict[Vector, int] = {}
        bad = 0
        for a in sorted(layer):
            mult = layer[a]
            v = tuple(min(x, ell) for x in a)
            c = parity_project(v)
            for m in range(code.M[j]):
                try:
                    intended = code.encode(j, m, v)
                except KeyError:
                    report.missing_encoder += mult
                    bad += mult
                    continue
                flips = tuple(int(b != x) for b, x in zip(intended, c))
                sat = sum(1 for x, f in zip(v, flips) if f and x >= ell)
                report.saturation_events += sat * mult
                a2 = tuple(x + f for x, f in zip(a, flips))
                v2, c2 = apply_write(v, intended, ell)
                if a2 not in preds[j + 1]:
                    preds[j + 1][a2] = (a, m)
                if code.decoders[j].get(code.model.decoder_view(c2, v)) != m:
                    bad += mult
                    if report.failure_trace is None:
                        report.failure_messages, report.failure_trace = _trace_for(code, preds, j, a, m)
                top = max(a2) if a2 else 0
                if top > report.max_changes:
                    report.max_changes = top
                if top > ell and report.budget_violation_trace is None:
                    report.budget_violation_messages, report.budget_violation_trace = _trace_for(code, preds, j, a, m)
                report.max_count = max(report.max_count, max(v2) if v2 else 0)
                nxt[a2] = nxt.get(a2, 0) + mult
        prefixes *= code.M[j]
        report.failures[j] = Fraction(bad, prefixes)
        report.failure_count += bad * (code.product // prefixes)
        layer = nxt
    return report


def view_conflicts(code: ElmCodebook, knowledge: str) -> list[tuple[int, tuple, tuple[int, ...]]]:
    """Reachable decoder inputs that a decoder with the given (smaller)
    knowledge could not tell apart: ``(write, view, messages)``."""
    out = []
    layer = {(0,) * code.n}
    for j in range(code.t):
        seen: dict[tuple, set[int]] = {}
        nxt = set()
        for v in sorted(layer):
            for m in range(code.M[j]):
                try:
                    intended = code.encode(j, m, v)
                except KeyError:
                    continue
                v2, c2 = apply_write(v, intended, code.ell)
                seen.setdefault(code.model.decoder_view(c2, v, knowledge), set()).add(m)
                nxt.add(v2)
        for view in sorted(seen):
            if len(seen[view]) > 1:
                out.append((j + 1, view, tuple(sorted(seen[view]))))
        layer = nxt
    return out
