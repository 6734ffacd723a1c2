"""The CHSH_q game: deterministic strategies, exact evaluation and reference values."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .prime_field import PrimeModulus, icbrt, is_prime


class StrategyDocumentError(ValueError):
    """A strategy document is malformed or inconsistent with its modulus."""


@dataclass(frozen=True)
class GameInstance:
    q: PrimeModulus

    def wins(self, x: int, y: int, a: int, b: int) -> bool:
        return wins(x, y, a, b, self.q)


def wins(x: int, y: int, a: int, b: int, q: int | PrimeModulus) -> bool:
    """True iff outputs ``a, b`` win on inputs ``x, y``, i.e. a + b = xy in F_q."""
    return (a + b - x * y) % int(q) == 0


def _as_table(values, q: int, who: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int64)
    if arr.shape != (q,):
        raise StrategyDocumentError(f"{who} table must have exactly {q} entries, got shape {arr.shape}")
    if q and (arr.min() < 0 or arr.max() >= q):
        raise StrategyDocumentError(f"{who} table has entries outside [0, {q})")
    arr.setflags(write=False)
    return arr


class DeterministicStrategy:
    """Output tables ``alice[x]`` and ``bob[y]`` for a CHSH_q game."""

    __slots__ = ("q", "alice", "bob")

    def __init__(self, q: int | PrimeModulus, alice, bob):
        self.q = int(q)
        self.alice = _as_table(alice, self.q, "alice")
        self.bob = _as_table(bob, self.q, "bob")

    def __eq__(self, other):
        if not isinstance(other, DeterministicStrategy):
            return NotImplemented
        return (self.q == other.q and np.array_equal(self.alice, other.alice)
                and np.array_equal(self.bob, other.bob))

    def __repr__(self):
        if self.q <= 8:
            return f"DeterministicStrategy(q={self.q}, alice={self.alice.tolist()}, bob={self.bob.tolist()})"
        return f"DeterministicStrategy(q={self.q})"

    def to_document(self) -> dict:
        return {"q": self.q, "alice": self.alice.tolist(), "bob": self.bob.tolist()}

    @classmethod
    def from_document(cls, doc) -> DeterministicStrategy:
        if not isinstance(doc, dict):
            raise StrategyDocumentError("strategy document must be a JSON object")
        try:
            q, alice, bob = doc["q"], doc["alice"], doc["bob"]
        except KeyError as exc:
            raise StrategyDocumentError(f"strategy document missing field {exc}") from None
        if isinstance(q, bool) or not isinstance(q, int) or q < 2:
            raise StrategyDocumentError(f"bad modulus {q!r}")
        for name, table in (("alice", alice), ("bob", bob)):
            if not isinstance(table, list) or not all(
                    isinstance(v, int) and not isinstance(v, bool) for v in table):
                raise StrategyDocumentError(f"{name} must be an array of integers")
        return cls(q, alice, bob)

    def dumps(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> DeterministicStrategy:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StrategyDocumentError(f"invalid JSON: {exc}") from None
        return cls.from_document(doc)


@dataclass(frozen=True)
class EvaluationReport:
    q: int
    win_count: int
    elapsed: float = 0.0

    def __post_init__(self):
        if not 0 <= self.win_count <= self.q * self.q:
            raise ValueError(f"win_count {self.win_count} outside [0, {self.q ** 2}]")

    @property
    def win_probability(self) -> Fraction:
        return Fraction(self.win_count, self.q * self.q)

    def to_document(self, timing: bool = False) -> dict:
        doc = {
            "q": self.q,
            "win_count": self.win_count,
            "pairs": self.q * self.q,
            "win_probability": f"{self.win_probability.numerator}/{self.win_probability.denominator}",
            "win_probability_decimal": f"{self.win_count / (self.q * self.q):.12g}",
        }
        if timing:
            doc["elapsed"] = self.elapsed
        return doc


@numba.njit(nogil=True, cache=True)
def _row_wins(alice, bob, x0, x1, out):
    # out[x - x0] = #{y : bob[y] == (x*y - alice[x]) mod q}; target advances by x per y.
    q = alice.shape[0]
    for x in range(x0, x1):
        t = q - alice[x] if alice[x] != 0 else 0
        c = 0
        for y in range(q):
            if bob[y] == t:
                c += 1
            t += x
            if t >= q:
                t -= q
        out[x - x0] = c


def default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def win_counts_by_x(s: DeterministicStrategy, threads: int | None = None) -> np.ndarray:
    """Number of winning ``y`` for every Alice input ``x``, by exhaustive scan."""
    q = s.q
    out = np.zeros(q, dtype=np.int64)
    threads = threads or default_threads()
    shards = min(threads, q)
    bounds = [q * i // shards for i in range(shards + 1)]
    if shards == 1:
        _row_wins(s.alice, s.bob, 0, q, out)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        jobs = [pool.submit(_row_wins, s.alice, s.bob, lo, hi, out[lo:hi])
                for lo, hi in zip(bounds, bounds[1:])]
        for job in jobs:
            job.result()
    return out


def evaluate(s: DeterministicStrategy, threads: int | None = None) -> EvaluationReport:
    """Exact win count over all q^2 input pairs."""
    start = time.perf_counter()
    total = int(win_counts_by_x(s, threads).sum())
    return EvaluationReport(s.q, total, time.perf_counter() - start)


def trivial_strategy(q: int | PrimeModulus) -> DeterministicStrategy:
    q = int(q)
    zeros = np.zeros(q, dtype=np.int64)
    return DeterministicStrategy(q, zeros, zeros)


def quantum_upper_bound(q: int) -> float:
    """Known upper bound on the entangled winning probability: 1/sqrt(q) + 1/q - 1/(q sqrt(q))."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    r = math.sqrt(q)
    return 1 / r + 1 / q - 1 / (q * r)


@dataclass(frozen=True)
class ClassicalGuarantee:
    """Win-count floor floor(q^(4/3) / 22) promised by the explicit construction.

    ``valid`` is False when q is composite or the cube-root parameter p1 is at
    most 30; the floor is then reported as a formula value only.
    """
    q: int
    win_floor: int
    p1: int
    valid: bool
    note: str

    @property
    def probability(self) -> Fraction:
        return Fraction(self.win_floor, self.q * self.q)

    def to_document(self) -> dict:
        return {
            "q": self.q,
            "win_floor": self.win_floor,
            "win_floor_expression": "icbrt(q**4) // 22",
            "probability_decimal": f"{self.win_floor / (self.q * self.q):.6g}",
            "p1": self.p1,
            "valid": self.valid,
            "note": self.note,
        }


def classical_guarantee(q: int | PrimeModulus) -> ClassicalGuarantee:
    q = int(q)
    # floor(floor(x) / 22) == floor(x / 22), and floor(q^(4/3)) == icbrt(q^4)
    floor = icbrt(q ** 4) // 22
    p1 = 2 * (icbrt(q) // 2)
    notes = []
    if not is_prime(q):
        notes.append("q is not prime")
    if p1 <= 30:
        notes.append(f"p1 = {p1} <= 30, bound not guaranteed")
    return ClassicalGuarantee(q, floor, p1, not notes, "; ".join(notes) or "guaranteed")


def trivial_win_count(q: int) -> int:
    return 2 * q - 1
