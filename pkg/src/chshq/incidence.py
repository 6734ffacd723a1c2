"""Points and lines over F_p and the correspondence with CHSH_q strategies.

A point ``(x, h)`` stands for Alice answering ``h`` on input ``x``.  A line
``(slope, intercept)`` is the set ``h = slope*x + intercept``; it stands for
Bob answering ``-intercept`` on input ``slope``.  A pair wins exactly when
the point lies on the line.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .game import DeterministicStrategy, StrategyDocumentError
from .prime_field import PrimeModulus


# Residue products must fit in int64.
VECTOR_LIMIT = 1 << 31


class AffinePoint(NamedTuple):
    x: int
    h: int


class AffineLine(NamedTuple):
    slope: int
    intercept: int


@dataclass(frozen=True)
class AmbiguityFlags:
    duplicate_x_count: int
    duplicate_slope_count: int

    @property
    def unambiguous(self) -> bool:
        return self.duplicate_x_count == 0 and self.duplicate_slope_count == 0


class AmbiguousGeometryError(ValueError):
    def __init__(self, flags: AmbiguityFlags):
        super().__init__(
            f"geometry does not define a strategy: {flags.duplicate_x_count} points share an x, "
            f"{flags.duplicate_slope_count} lines share a slope")
        self.flags = flags


def _pairs(items, p: int) -> np.ndarray:
    arr = np.array([tuple(it) for it in items], dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= p):
        raise ValueError(f"coordinates must be canonical residues mod {p}")
    arr.setflags(write=False)
    return arr


class PointSet:
    """Ordered points over F_p, stored as an ``(n, 2)`` array of ``(x, h)``."""

    def __init__(self, p: int | PrimeModulus, points=(), *, array: np.ndarray | None = None):
        self.p = int(p)
        self.data = _pairs(points, self.p) if array is None else _checked(array, self.p)

    @property
    def xs(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def hs(self) -> np.ndarray:
        return self.data[:, 1]

    def __len__(self):
        return len(self.data)

    def __iter__(self) -> Iterator[AffinePoint]:
        for x, h in self.data.tolist():
            yield AffinePoint(x, h)


class LineSet:
    """Ordered lines over F_p, stored as an ``(n, 2)`` array of ``(slope, intercept)``."""

    def __init__(self, p: int | PrimeModulus, lines=(), *, array: np.ndarray | None = None):
        self.p = int(p)
        self.data = _pairs(lines, self.p) if array is None else _checked(array, self.p)

    @property
    def slopes(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def intercepts(self) -> np.ndarray:
        return self.data[:, 1]

    def __len__(self):
        return len(self.data)

    def __iter__(self) -> Iterator[AffineLine]:
        for s, t in self.data.tolist():
            yield AffineLine(s, t)


def _checked(array: np.ndarray, p: int) -> np.ndarray:
    arr = np.ascontiguousarray(array, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= p):
        raise ValueError(f"coordinates must be canonical residues mod {p}")
    arr.setflags(write=False)
    return arr


def on_line(pt: AffinePoint, ln: AffineLine, p: int | PrimeModulus) -> bool:
    return (ln.slope * pt.x + ln.intercept - pt.h) % int(p) == 0


def count_incidences_direct(P: PointSet, L: LineSet) -> int:
    """Reference O(|P| |L|) scan."""
    if P.p != L.p:
        raise ValueError(f"point set over F_{P.p} and line set over F_{L.p}")
    lines = list(L)
    return sum(on_line(pt, ln, P.p) for pt in P for ln in lines)


def count_incidences(P: PointSet, L: LineSet) -> int:
    """Incidence count, grouping lines by slope.

    For each distinct slope the intercept every point would need is computed
    in one vector pass and matched against that slope's intercept multiset.
    """
    _same_field(P, L)
    if not len(P) or not len(L):
        return 0
    p = P.p
    order = np.lexsort((L.intercepts, L.slopes))
    slopes = L.slopes[order]
    intercepts = L.intercepts[order]
    starts = np.flatnonzero(np.r_[True, slopes[1:] != slopes[:-1]])
    ends = np.r_[starts[1:], len(slopes)]
    xs, hs = P.xs, P.hs
    total = 0
    need = np.empty_like(xs)
    for lo, hi in zip(starts.tolist(), ends.tolist()):
        s = int(slopes[lo])
        np.multiply(xs, s, out=need)
        np.remainder(need, p, out=need)
        np.subtract(hs, need, out=need)  # in (-p, p): intercept t or t - p
        if hi - lo == 1:
            t = int(intercepts[lo])
            total += int(np.count_nonzero(need == t)) + int(np.count_nonzero(need == t - p))
        else:
            need[need < 0] += p
            group = intercepts[lo:hi]
            total += int((np.searchsorted(group, need, "right") - np.searchsorted(group, need, "left")).sum())
    return total


def _same_field(P: PointSet, L: LineSet) -> None:
    if P.p != L.p:
        raise ValueError(f"point set over F_{P.p} and line set over F_{L.p}")
    if P.p >= VECTOR_LIMIT:
        raise ValueError(f"vectorized counting needs p < 2**31 (int64 products), got {P.p}")


def strategy_to_geometry(s: DeterministicStrategy) -> tuple[PointSet, LineSet]:
    q = s.q
    inputs = np.arange(q, dtype=np.int64)
    points = np.stack([inputs, s.alice], axis=1)
    lines = np.stack([inputs, (-s.bob) % q], axis=1)
    return PointSet(q, array=points), LineSet(q, array=lines)


def _duplicate_members(keys: np.ndarray) -> int:
    counts = Counter(keys.tolist())
    return sum(c for c in counts.values() if c > 1)


def validate_unambiguous(P: PointSet, L: LineSet) -> AmbiguityFlags:
    """Count points sharing an x and lines sharing a slope (every member counted)."""
    return AmbiguityFlags(_duplicate_members(P.xs), _duplicate_members(L.slopes))


def geometry_to_strategy(P: PointSet, L: LineSet, q: int | PrimeModulus | None = None) -> DeterministicStrategy:
    """Read a strategy off an unambiguous point/line pair; uncovered inputs answer 0."""
    q = P.p if q is None else int(q)
    if P.p != q or L.p != q:
        raise ValueError(f"geometry over F_{P.p}/F_{L.p} used as a strategy for q={q}")
    flags = validate_unambiguous(P, L)
    if not flags.unambiguous:
        raise AmbiguousGeometryError(flags)
    alice = np.zeros(q, dtype=np.int64)
    bob = np.zeros(q, dtype=np.int64)
    alice[P.xs] = P.hs
    bob[L.slopes] = (-L.intercepts) % q
    return DeterministicStrategy(q, alice, bob)


def fallback_wins(P: PointSet, L: LineSet) -> int:
    """Wins on input pairs where Alice's x or Bob's y is not covered by the geometry.

    Uncovered inputs answer 0.  Counted directly from the point and line data
    rather than from a strategy table.
    """
    _same_field(P, L)
    p = P.p
    x_cov = np.zeros(p, dtype=bool)
    x_cov[P.xs] = True
    y_cov = np.zeros(p, dtype=bool)
    y_cov[L.slopes] = True
    free_x = np.flatnonzero(~x_cov)
    free_y = np.flatnonzero(~y_cov)
    total = 0
    # x uncovered (Alice says 0): covered y wins iff x*slope + intercept == 0 ...
    for x in free_x.tolist():
        total += int(np.count_nonzero((x * L.slopes + L.intercepts) % p == 0))
        # ... and uncovered y (Bob says 0) wins iff x*y == 0.
        total += len(free_y) if x == 0 else int(np.count_nonzero(free_y == 0))
    # x covered with answer h, y uncovered: wins iff h == x*y.
    for y in free_y.tolist():
        total += int(np.count_nonzero((P.xs * y - P.hs) % p == 0))
    return total


def geometry_document(P: PointSet, L: LineSet) -> dict:
    return {"p": P.p, "points": P.data.tolist(), "lines": L.data.tolist()}


def geometry_from_document(doc) -> tuple[PointSet, LineSet]:
    if not isinstance(doc, dict):
        raise StrategyDocumentError("geometry document must be a JSON object")
    try:
        p = int(doc["p"])
        return PointSet(p, doc["points"]), LineSet(p, doc["lines"])
    except (KeyError, TypeError, ValueError) as exc:
        raise StrategyDocumentError(f"malformed geometry document: {exc}") from None


def dumps_geometry(P: PointSet, L: LineSet) -> str:
    return json.dumps(geometry_document(P, L), sort_keys=True)
