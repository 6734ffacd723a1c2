"""Exact arithmetic in prime fields and the integer helpers built on it.

Residues are plain Python ints in ``[0, p)``.  :class:`FieldElement` wraps one
together with its modulus for callers that want operator syntax; the hot
paths elsewhere in the package work on bare ints.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_MODULUS = 1 << 62

# First twelve primes: a deterministic Miller-Rabin witness set for n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NotPrimeError(ValueError):
    """Raised when a modulus fails the primality check or is out of range."""


class NonInvertibleError(ArithmeticError):
    """Raised when inverting zero."""


def is_prime(n: int) -> bool:
    """Deterministic primality test for ``0 <= n < 2**62``."""
    if n < 2:
        return False
    for sp in _MR_WITNESSES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def icbrt(n: int) -> int:
    """Largest ``t`` with ``t**3 <= n``, computed without floating point."""
    if n < 0:
        raise ValueError(f"icbrt needs n >= 0, got {n}")
    lo, hi = 0, 1 << (n.bit_length() // 3 + 1)
    # invariant: lo**3 <= n < hi**3
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid * mid * mid <= n:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class PrimeModulus:
    p: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int):
            raise NotPrimeError(f"modulus must be an int, got {self.p!r}")
        if not 2 <= self.p < MAX_MODULUS:
            raise NotPrimeError(f"modulus {self.p} outside [2, 2**62)")
        if not is_prime(self.p):
            raise NotPrimeError(f"{self.p} is not prime")

    def __int__(self) -> int:
        return self.p

    def __index__(self) -> int:
        return self.p

    def element(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self.p)


def _modulus(p: int | PrimeModulus) -> int:
    return p.p if isinstance(p, PrimeModulus) else int(p)


def fadd(a: int, b: int, p: int | PrimeModulus) -> int:
    p = _modulus(p)
    s = a + b
    return s - p if s >= p else s


def fsub(a: int, b: int, p: int | PrimeModulus) -> int:
    p = _modulus(p)
    d = a - b
    return d + p if d < 0 else d


def fmul(a: int, b: int, p: int | PrimeModulus) -> int:
    # Python ints are unbounded, so the product never overflows.
    return a * b % _modulus(p)


def fneg(a: int, p: int | PrimeModulus) -> int:
    return (-a) % _modulus(p)


def finv(a: int, p: int | PrimeModulus) -> int:
    """Multiplicative inverse of ``a`` modulo ``p`` by the extended Euclidean algorithm."""
    p = _modulus(p)
    a %= p
    if a == 0:
        raise NonInvertibleError(f"0 has no inverse modulo {p}")
    old_r, r = a, p
    old_s, s = 1, 0
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_s, s = s, old_s - quot * s
    return old_s % p


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.p}")

    def _coerce(self, other: FieldElement | int) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError(f"mixed moduli {self.p} and {other.p}")
            return other.value
        return other % self.p

    def __add__(self, other):
        return FieldElement(fadd(self.value, self._coerce(other), self.p), self.p)

    def __sub__(self, other):
        return FieldElement(fsub(self.value, self._coerce(other), self.p), self.p)

    def __mul__(self, other):
        return FieldElement(fmul(self.value, self._coerce(other), self.p), self.p)

    def __truediv__(self, other):
        return FieldElement(fmul(self.value, finv(self._coerce(other), self.p), self.p), self.p)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(fneg(self.value, self.p), self.p)

    def inverse(self) -> FieldElement:
        return FieldElement(finv(self.value, self.p), self.p)

    def __int__(self) -> int:
        return self.value
