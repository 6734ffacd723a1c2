"""Census of duplicate slopes among the transformed lines.

Two lines (y, b) share a transformed slope 2 p2 b/(p2 - y) exactly when they
solve k*b = p2 - y for the same k = (p2 - y)/b.  The census is taken both
ways, directly from the transformed slopes and from the k-equation, and the
measured totals are compared against the closed-form repetition bounds
p1^2/4 (steps k < p1/2) and p1^3/6 (steps k > 2 p1).
"""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .construction import ConstructionParams, _transformed_lines, derive_params
from .prime_field import PrimeModulus, finv


class Band(str, enum.Enum):
    SMALL = "small"
    MIDDLE = "middle"
    LARGE = "large"


def band_of(k: int, params: ConstructionParams) -> Band:
    if 2 * k < params.p1:
        return Band.SMALL
    if k <= 2 * params.p1:
        return Band.MIDDLE
    return Band.LARGE


@dataclass(frozen=True)
class SlopeEquationRecord:
    k: int
    solutions: tuple[tuple[int, int], ...]
    band: Band


def solutions_for_k(k: int, params: ConstructionParams) -> SlopeEquationRecord:
    """All grid lines (y, b) with k*b = p2 - y in F_p."""
    p = params.p
    if k % p == 0:
        raise ValueError("k = 0 corresponds to no slope; slope 0 is audited separately")
    inv = finv(k, p)
    sols = []
    for y in range(params.p1 // 2):
        b = (params.p2 - y) * inv % p
        if b < params.p2 // 2:
            sols.append((y, b))
    return SlopeEquationRecord(k, tuple(sols), band_of(k, params))


def r_small_bound(params: ConstructionParams) -> Fraction:
    return Fraction(params.p1 ** 2, 4)


def r_large_bound(params: ConstructionParams) -> Fraction:
    return Fraction(params.p1 ** 3, 6)


def r_total_bound(params: ConstructionParams) -> Fraction:
    return r_small_bound(params) + r_large_bound(params)


def r_total_stated(params: ConstructionParams) -> Fraction:
    """p1^2 (1/2 + p1/6): the looser closed form used on the way to p1*p2/5.

    It exceeds r_small + r_large by p1^2/4, so it is still an upper bound.
    """
    return params.p1 ** 2 * (Fraction(1, 2) + Fraction(params.p1, 6))


def r_final_bound(params: ConstructionParams) -> tuple[Fraction, bool]:
    """p1*p2/5 together with whether it is a proven bound (needs p1 > 30)."""
    return Fraction(params.p1 * params.p2, 5), params.p1 > 30


def kept_floor(params: ConstructionParams) -> Fraction:
    return Fraction(params.p1 * params.p2, 4) - Fraction(params.p1 * params.p2, 5)


def k_solution_counts(params: ConstructionParams) -> np.ndarray:
    """``counts[k]`` = number of in-range solutions of k*b = p2 - y, for k in [0, p)."""
    p, half_y, half_b = params.p, params.p1 // 2, params.p2 // 2
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [finv(k, p) for k in range(1, p)]
    counts = np.zeros(p, dtype=np.int64)
    for y in range(half_y):
        b = (params.p2 - y) * inv % p
        counts += (b < half_b)
    counts[0] = 0
    return counts


def _fmt(fr: Fraction) -> str:
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


@dataclass
class AuditReport:
    p: int
    p1: int
    p2: int
    lines_total: int
    slope_zero_family: int
    slope_zero_removed: int
    R_emp: int
    R_emp_nonzero: int
    R_k_census: int
    duplicate_families: int
    lines_kept_after_dedup: int
    census_agrees: bool
    middle_band_violations: int
    middle_band_max_solutions: int
    r_small_bound: Fraction
    r_large_bound: Fraction
    r_total_bound: Fraction
    r_total_stated: Fraction
    r_final_bound: Fraction
    r_final_valid: bool
    kept_floor: Fraction
    guarantee_applies: bool
    k_counts: np.ndarray = field(repr=False)

    @property
    def R_emp_below_final(self) -> bool:
        return self.R_emp < self.r_final_bound

    @property
    def kept_at_least_floor(self) -> bool:
        return self.lines_kept_after_dedup >= self.kept_floor

    @property
    def violations(self) -> list[str]:
        out = []
        if self.middle_band_violations:
            out.append(f"{self.middle_band_violations} middle-band k with more than one solution")
        if not self.census_agrees:
            out.append("slope census and k-equation census disagree")
        if self.guarantee_applies and not self.R_emp_below_final:
            out.append(f"R_emp = {self.R_emp} >= p1*p2/5 = {_fmt(self.r_final_bound)}")
        return out

    def to_document(self) -> dict:
        return {
            "p": self.p,
            "p1": self.p1,
            "p2": self.p2,
            "lines_total": self.lines_total,
            "slope_zero_family": self.slope_zero_family,
            "slope_zero_removed": self.slope_zero_removed,
            "R_emp": self.R_emp,
            "R_emp_nonzero": self.R_emp_nonzero,
            "R_k_census": self.R_k_census,
            "duplicate_families": self.duplicate_families,
            "lines_kept_after_dedup": self.lines_kept_after_dedup,
            "census_agrees": self.census_agrees,
            "middle_band_violations": self.middle_band_violations,
            "middle_band_max_solutions": self.middle_band_max_solutions,
            "r_small_bound": _fmt(self.r_small_bound),
            "r_large_bound": _fmt(self.r_large_bound),
            "r_total_bound": _fmt(self.r_total_bound),
            "r_total_stated": _fmt(self.r_total_stated),
            "r_final_bound": _fmt(self.r_final_bound),
            "r_final_bound_decimal": float(self.r_final_bound),
            "r_final_valid": self.r_final_valid,
            "kept_floor": _fmt(self.kept_floor),
            "guarantee_applies": self.guarantee_applies,
            "R_emp_below_final": self.R_emp_below_final,
            "kept_at_least_floor": self.kept_at_least_floor,
            "advisory": not self.guarantee_applies,
            "violations": self.violations,
        }

    def k_rows(self) -> list[tuple[int, str, int]]:
        params = ConstructionParams(self.p, self.p1, self.p2, False, False, False)
        return [(k, band_of(k, params).value, int(self.k_counts[k])) for k in range(1, self.p)]

    def k_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "band", "solution_count"])
        w.writerows(self.k_rows())
        return buf.getvalue()


def audit(params: ConstructionParams | int | PrimeModulus) -> AuditReport:
    if not isinstance(params, ConstructionParams):
        params = derive_params(params)
    p, p1, p2 = params.p, params.p1, params.p2

    # Ground truth: the slopes the pipeline actually produces.
    lines = _transformed_lines(params)
    slopes = lines.slopes
    census = Counter(slopes.tolist())
    R_emp = sum(c for c in census.values() if c > 1)
    families = sum(1 for c in census.values() if c > 1)
    zero_family = census.get(0, 0)

    # Independent route through k*b = p2 - y; k <-> slope 2 p2 / k is a bijection off zero.
    counts = k_solution_counts(params)
    R_k = int(counts[counts > 1].sum())
    nonzero = lines.sources[:, 1] != 0
    from_k = Counter()
    for k in np.flatnonzero(counts).tolist():
        from_k[2 * p2 * finv(k, p) % p] = int(counts[k])
    agrees = from_k == Counter(slopes[nonzero].tolist())
    # line for line: each (y, b != 0) solves the equation for k = (p2 - y)/b
    ys, bs = lines.sources[nonzero, 0], lines.sources[nonzero, 1]
    ks = [(p2 - y) * finv(b, p) % p for y, b in zip(ys.tolist(), bs.tolist())]
    agrees = agrees and all(
        (2 * p2 * finv(k, p) - s) % p == 0 for k, s in zip(ks, slopes[nonzero].tolist()))

    lo, hi = -(-p1 // 2), min(2 * p1, p - 1)
    middle = counts[lo:hi + 1]
    final, valid = r_final_bound(params)
    return AuditReport(
        p=p, p1=p1, p2=p2,
        lines_total=len(lines),
        slope_zero_family=zero_family,
        slope_zero_removed=max(zero_family - 1, 0),
        R_emp=R_emp,
        R_emp_nonzero=R_emp - (zero_family if zero_family > 1 else 0),
        R_k_census=R_k,
        duplicate_families=families,
        lines_kept_after_dedup=len(census),
        census_agrees=bool(agrees),
        middle_band_violations=int(np.count_nonzero(middle > 1)),
        middle_band_max_solutions=int(middle.max(initial=0)),
        r_small_bound=r_small_bound(params),
        r_large_bound=r_large_bound(params),
        r_total_bound=r_total_bound(params),
        r_total_stated=r_total_stated(params),
        r_final_bound=final,
        r_final_valid=valid,
        kept_floor=kept_floor(params),
        guarantee_applies=params.guarantee_applies,
        k_counts=counts,
    )
