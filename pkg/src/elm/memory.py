"""Binary cells with a per-cell change budget.

Vectors are plain tuples of ints. ``counts`` holds how many times each cell
has changed state (capped at ``ell``); the cell state is always the parity of
its count.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

Vector = tuple[int, ...]


def _check_bits(c: Sequence[int]) -> None:
    for b in c:
        if b not in (0, 1):
            raise ValueError(f"cell state must be 0/1, got {b!r}")


def _check_counts(v: Sequence[int], ell: int) -> None:
    if ell < 1:
        raise ValueError("ell must be >= 1")
    for x in v:
        if not 0 <= x <= ell:
            raise ValueError(f"program count {x!r} outside [0, {ell}]")


def parity_project(v: Sequence[int]) -> Vector:
    """Cell-state vector of a program-count vector (each count mod 2)."""
    return tuple(x & 1 for x in v)


def apply_write(v: Sequence[int], c: Sequence[int], ell: int) -> tuple[Vector, Vector]:
    """Program the intended state ``c`` over counts ``v``.

    Returns ``(new_counts, new_state)``. A cell whose count already reached
    ``ell`` keeps its value; any other cell that differs from ``c`` toggles.
    """
    if len(v) != len(c):
        raise ValueError(f"length mismatch: {len(v)} counts vs {len(c)} cells")
    _check_counts(v, ell)
    _check_bits(c)
    new_v = tuple(x if (b == x & 1) else min(ell, x + 1) for x, b in zip(v, c))
    new_c = tuple(b if x < ell else x & 1 for x, b in zip(v, c))
    return new_v, new_c


def saturated_toggles(v: Sequence[int], c: Sequence[int], ell: int) -> int:
    """Number of cells in ``v`` at count ``ell`` that ``c`` tries to flip."""
    return sum(1 for x, b in zip(v, c) if x >= ell and b != x & 1)


def bits_to_str(c: Sequence[int]) -> str:
    return "".join(str(b) for b in c)


def str_to_bits(s: str) -> Vector:
    s = s.strip()
    if not s or any(ch not in "01" for ch in s):
        raise ValueError(f"not a bit string: {s!r}")
    return tuple(int(ch) for ch in s)


@dataclass(frozen=True)
class WriteRecord:
    intended: Vector
    state: Vector
    counts: Vector
    saturation_events: int = 0


@dataclass(frozen=True)
class MemoryTrace:
    n: int
    ell: int
    writes: tuple[WriteRecord, ...] = field(default_factory=tuple)

    @property
    def t(self) -> int:
        return len(self.writes)

    @property
    def final_counts(self) -> Vector:
        return self.writes[-1].counts if self.writes else (0,) * self.n

    @property
    def final_state(self) -> Vector:
        return self.writes[-1].state if self.writes else (0,) * self.n

    @property
    def saturated_writes(self) -> list[int]:
        """1-based indices of writes that hit at least one saturated cell."""
        return [j for j, w in enumerate(self.writes, 1) if w.saturation_events]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "writes": [
                {"intended": bits_to_str(w.intended), "state": bits_to_str(w.state),
                 "counts": list(w.counts)}
                for w in self.writes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MemoryTrace":
        # saturation is not stored; re-derive it by replaying the intended states
        return replay_trace(d["ell"], [str_to_bits(w["intended"]) for w in d["writes"]],
                            n=d["n"])

    @classmethod
    def from_json(cls, s: str) -> "MemoryTrace":
        return cls.from_dict(json.loads(s))


def replay_trace(ell: int, intended_states: Sequence[Sequence[int]], n: int | None = None) -> MemoryTrace:
    """Fold :func:`apply_write` over ``intended_states`` from all-zero counts."""
    if n is None:
        if not intended_states:
            raise ValueError("cannot infer n from an empty trace")
        n = len(intended_states[0])
    v: Vector = (0,) * n
    records = []
    for c in intended_states:
        c = tuple(c)
        if len(c) != n:
            raise ValueError("all intended states must have the same length")
        sat = saturated_toggles(v, c, ell)
        v, state = apply_write(v, c, ell)
        records.append(WriteRecord(c, state, v, sat))
    return MemoryTrace(n, ell, tuple(records))
