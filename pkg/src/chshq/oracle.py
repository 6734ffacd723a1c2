"""Exact classical value of CHSH_q for tiny q by exhaustive search.

Every Alice table is scanned in lexicographic order and paired with Bob's
best response, which is exact: for fixed Alice, each Bob input y can be
optimized independently.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .game import DeterministicStrategy, default_threads
from .prime_field import PrimeModulus

DEFAULT_CAP = 7


class OracleCapError(ValueError):
    def __init__(self, q: int, cap: int):
        self.q, self.cap = q, cap
        self.cost = q ** q * q * q
        super().__init__(
            f"q = {q} exceeds cap {cap}: the scan needs {q}^{q} tables x {q}^2 cells "
            f"~ {self.cost:.3e} steps")


@dataclass(frozen=True)
class OracleResult:
    q: int
    max_wins: int
    witness: DeterministicStrategy
    strategies_scanned: int
    roles: str = "alice"

    @property
    def optimal_value(self) -> Fraction:
        return Fraction(self.max_wins, self.q * self.q)

    def to_document(self) -> dict:
        v = self.optimal_value
        return {
            "q": self.q,
            "max_wins": self.max_wins,
            "pairs": self.q * self.q,
            "optimal_value": f"{v.numerator}/{v.denominator}",
            "optimal_value_decimal": f"{float(v):.12g}",
            "strategies_scanned": self.strategies_scanned,
            "scanned_player": self.roles,
            "witness": self.witness.to_document(),
        }


def best_response_bob(alice, q: int | PrimeModulus) -> tuple[np.ndarray, int]:
    """Bob's table maximizing wins against ``alice``; ties go to the smallest answer."""
    q = int(q)
    alice = np.asarray(alice, dtype=np.int64)
    x = np.arange(q, dtype=np.int64)
    bob = np.zeros(q, dtype=np.int64)
    wins = 0
    for y in range(q):
        # Bob's answer b wins on x iff b == x*y - alice[x]
        hist = np.bincount((x * y - alice) % q, minlength=q)
        bob[y] = int(np.argmax(hist))
        wins += int(hist[bob[y]])
    return bob, wins


def best_response_alice(bob, q: int | PrimeModulus) -> tuple[np.ndarray, int]:
    # The winning condition is symmetric in the two players.
    return best_response_bob(bob, q)


@numba.njit(nogil=True, cache=True)
def _scan(q, start, stop):
    # Returns (best wins, first index achieving it) over tables start..stop-1.
    table = np.zeros(q, dtype=np.int64)
    rest = start
    for j in range(q - 1, -1, -1):
        table[j] = rest % q
        rest //= q
    hist = np.zeros(q, dtype=np.int64)
    best, best_idx = -1, start
    for idx in range(start, stop):
        total = 0
        for y in range(q):
            hist[:] = 0
            t = 0  # x*y mod q
            for x in range(q):
                v = t - table[x]
                if v < 0:
                    v += q
                hist[v] += 1
                t += y
                if t >= q:
                    t -= q
            total += hist.max()
        if total > best:
            best, best_idx = total, idx
        # next table in lexicographic order (last entry varies fastest)
        j = q - 1
        while j >= 0:
            table[j] += 1
            if table[j] < q:
                break
            table[j] = 0
            j -= 1
    return best, best_idx


def _table_at(index: int, q: int) -> np.ndarray:
    digits = np.zeros(q, dtype=np.int64)
    for j in range(q - 1, -1, -1):
        index, digits[j] = divmod(index, q)
    return digits


def optimal_classical_value(q: int | PrimeModulus, cap: int = DEFAULT_CAP,
                            threads: int | None = None, roles: str = "alice") -> OracleResult:
    """Exact maximum win count over all deterministic strategies.

    ``roles="bob"`` enumerates Bob's tables with Alice best-responding instead;
    the maximum must not change.
    """
    q = PrimeModulus(int(q)).p
    if q > cap:
        raise OracleCapError(q, cap)
    if roles not in ("alice", "bob"):
        raise ValueError(f"roles must be 'alice' or 'bob', got {roles!r}")
    n = q ** q
    shards = max(1, min(threads or default_threads(), n))
    bounds = [n * i // shards for i in range(shards + 1)]
    if shards == 1:
        results = [_scan(q, 0, n)]
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            results = list(pool.map(lambda lh: _scan(q, *lh), zip(bounds, bounds[1:])))
    # shards are contiguous and ascending: prefer more wins, then the earlier index
    best, best_idx = max(results, key=lambda r: (r[0], -r[1]))
    scanned = _table_at(int(best_idx), q)
    response, wins = best_response_bob(scanned, q)
    assert wins == best
    if roles == "alice":
        witness = DeterministicStrategy(q, scanned, response)
    else:
        witness = DeterministicStrategy(q, response, scanned)
    return OracleResult(q, int(best), witness, n, roles)
