"""The recursive bound function f and the upper bounds built from it.

f is defined by f(0,r) = log r and f(d,r) = (1/r) Σ_{k=1..r} f(d-1,k), all
logs natural. It upper-bounds the log of the per-cell contribution to the
d-permanent: Per_d(A) ≤ Π_i e^{f(d, r_i)} where r_i = |R_i|, which at d=1 is
the classical factorial (Brègman-Minc) permanent bound Π (r_i!)^{1/r_i}.
Asymptotically f(d,r) ≤ log r − d + c_d log^d(r)/r for r ≥ e^d, with c_d from
a closed recursion; this module evaluates the function, the bounds, and the
constants, and sweeps the inequalities numerically.

The float path accumulates its dynamic-programming table in extended
precision (numpy longdouble) and returns doubles: the running sums to
r = 10^5 would otherwise eat most of the 1e-12 agreement budget the exact
path and the d=1 reference are held to. The table is computed once, grown on
demand, and shared read-only.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from hdperm.core import Shape, SupportArray

EXACT_R_LIMIT = 200  # rational coefficients blow up as lcm(1..r); 200 is ample

_rows: list = []  # _rows[d][r-1] = f(d, r) as longdouble
_rmax: int = 0


def _f_row(d: int, rmax: int):
    global _rows, _rmax
    if rmax > _rmax:
        _rmax = max(rmax, 2 * _rmax, 512)
        ks = np.arange(1, _rmax + 1, dtype=np.longdouble)
        fresh = [np.log(ks)]
        for _ in range(1, len(_rows)):
            fresh.append(np.cumsum(fresh[-1]) / ks)
        _rows = fresh
    while d >= len(_rows):
        ks = np.arange(1, _rmax + 1, dtype=np.longdouble)
        _rows.append(np.cumsum(_rows[-1]) / ks)
    return _rows[d]


def _check_dr(d, r):
    if not isinstance(d, int) or d < 0:
        raise ValueError(f"d must be an integer >= 0, got {d!r}")
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"r must be an integer >= 1, got {r!r}")


def f_float(d: int, r: int) -> float:
    """f(d,r) from the memoized table."""
    _check_dr(d, r)
    return float(_f_row(d, r)[r - 1])


def f_values(d: int, r_max: int) -> np.ndarray:
    """The vector (f(d,1), ..., f(d,r_max)) as float64, for sweeps."""
    _check_dr(d, r_max)
    return _f_row(d, r_max)[:r_max].astype(np.float64)


@dataclass(frozen=True)
class LogCombination:
    """f(d,r) written exactly as Σ q_k log k with rational q_k, k ≥ 2."""

    coefficients: dict

    def evaluate(self) -> float:
        return math.fsum(float(q) * math.log(k) for k, q in self.coefficients.items())


_exact_rows: dict = {}  # d -> [coefficients of f(d,r) for r = 1..len]


def _exact_row(d: int, rmax: int) -> list:
    have = _exact_rows.get(d)
    if have is not None and len(have) >= rmax:
        return have
    if d == 0:
        row = [{} if k == 1 else {k: Fraction(1)} for k in range(1, rmax + 1)]
    else:
        prev = _exact_row(d - 1, rmax)
        acc: dict = {}
        row = []
        for k in range(1, rmax + 1):
            for key, q in prev[k - 1].items():
                acc[key] = acc.get(key, 0) + q
            row.append({key: q / k for key, q in acc.items()})
    _exact_rows[d] = row
    return row


def f_exact(d: int, r: int) -> LogCombination:
    """Exact rational-coefficient form of f(d,r); capped at r = 200."""
    _check_dr(d, r)
    if r > EXACT_R_LIMIT:
        raise ValueError(f"exact path capped at r <= {EXACT_R_LIMIT}, got {r}")
    return LogCombination(dict(_exact_row(d, r)[r - 1]))


def bregman_log_bound(a: SupportArray) -> float:
    """log of the factorial-type upper bound on per_d(a): Σ_i f(d, r_i).

    Returns -inf when some cell allows nothing (the count is exactly 0 and
    the bound degenerates gracefully to exp(-inf) = 0).
    """
    rs = a.r_values()
    if 0 in rs:
        return float("-inf")
    d = a.shape.d
    _f_row(d, a.shape.n)  # one table build instead of n^d growth checks
    return math.fsum(f_float(d, r) for r in rs)


def bregman_d1_reference(row_sums) -> float:
    """Σ log(r_i!)/r_i, the classical d=1 permanent bound in log form.

    Independent of the f table (lgamma-based); must agree with
    bregman_log_bound of the same matrix to 1e-12 since f(1,r) = log(r!)/r.
    """
    sums = list(row_sums)
    for r in sums:
        if not isinstance(r, int) or r < 1:
            raise ValueError(f"row sums must be integers >= 1, got {r!r}")
    return math.fsum(math.lgamma(r + 1) / r for r in sums)


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the asymptotic bound at dimension d.

    c_d follows the recursion c_0 = 0,
    c_d = (1 + e^{-(d-1)}) c_{d-1}/d + d (2/d^d + (e/d)^d);
    xi = (d-1) e^{d-1}, gamma = ((d-1)/e)^{d-1}, r_d = e^d.
    """

    d: int
    c_d: float
    xi: float
    gamma: float
    r_d: float


def c_constant(d: int) -> BoundConstants:
    if not isinstance(d, int) or d < 0:
        raise ValueError(f"d must be an integer >= 0, got {d!r}")
    c = 0.0
    for k in range(1, d + 1):
        c = (1 + math.e ** (-(k - 1))) * c / k + k * (2 / k**k + (math.e / k) ** k)
    return BoundConstants(
        d=d,
        c_d=c,
        xi=(d - 1) * math.e ** (d - 1),
        gamma=((d - 1) / math.e) ** (d - 1),
        r_d=math.e**d,
    )


def c_cap(d: int) -> float:
    """Loose closed-form caps on c_d: 0, 5, 8, then d^3 (1.1)^d / d!."""
    if not isinstance(d, int) or d < 0:
        raise ValueError(f"d must be an integer >= 0, got {d!r}")
    if d == 0:
        return 0.0
    if d == 1:
        return 5.0
    if d == 2:
        return 8.0
    return d**3 * 1.1**d / math.factorial(d)


@dataclass(frozen=True)
class SweepReport:
    """Result of a numeric inequality sweep; margin = bound - f, so negative
    minima are violations (there should be none)."""

    d: int
    r_start: int
    r_max: int
    checked: int
    violations: int
    min_margin: float
    weak_checked: int
    weak_violations: int
    weak_min_margin: float
    c_d: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.weak_violations == 0

    @property
    def max_violation(self) -> float:
        worst = min(self.min_margin, self.weak_min_margin)
        return max(0.0, -worst)


def theorem5_check(d: int, r_max: int) -> SweepReport:
    """Sweep f(d,r) ≤ log r − d + c_d log^d(r)/r over integer r in
    [⌈e^d⌉, r_max], with c_d from the recursion, plus the weaker f(d,r) ≤
    log r over 1 ≤ r ≤ r_max."""
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"d must be an integer >= 1, got {d!r}")
    r_start = math.ceil(math.e**d)
    if r_max < r_start:
        raise ValueError(f"r_max must be >= {r_start} for d={d}")
    c = c_constant(d).c_d
    f = f_values(d, r_max)
    r = np.arange(1, r_max + 1, dtype=np.float64)
    logs = np.log(r)
    weak = logs - f
    strong = (logs - d + c * logs**d / r - f)[r_start - 1 :]
    return SweepReport(
        d=d,
        r_start=r_start,
        r_max=r_max,
        checked=int(strong.size),
        violations=int((strong < 0).sum()),
        min_margin=float(strong.min()),
        weak_checked=int(weak.size),
        weak_violations=int((weak < 0).sum()),
        weak_min_margin=float(weak.min()),
        c_d=c,
    )


@dataclass(frozen=True)
class StirlingReport:
    r_start: int
    r_max: int
    checked: int
    violations: int
    min_margin: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def stirling_lemma_check(r_max: int) -> StirlingReport:
    """Sweep log(r!) ≤ r log r − r + 2 log r for 3 ≤ r ≤ r_max, with the
    log-factorials accumulated exactly (extended-precision running sum)."""
    if not isinstance(r_max, int) or r_max < 3:
        raise ValueError(f"r_max must be an integer >= 3, got {r_max!r}")
    ks = np.arange(1, r_max + 1, dtype=np.longdouble)
    logfact = np.cumsum(np.log(ks))
    r = np.arange(3, r_max + 1, dtype=np.float64)
    logs = np.log(r)
    margin = r * logs - r + 2 * logs - logfact[2:].astype(np.float64)
    return StirlingReport(
        r_start=3,
        r_max=r_max,
        checked=int(margin.size),
        violations=int((margin < 0).sum()),
        min_margin=float(margin.min()),
    )


@dataclass(frozen=True)
class SdnBound:
    """Log upper bound on the number of order-n d-dimensional permutations:
    n^d f(d,n). ratio compares it to the crude n^d (log n − d) when the
    latter is positive; it decreases toward 1 as n grows."""

    d: int
    n: int
    log_bound: float
    ratio: Optional[float]


def sdn_log_upper_bound(shape: Shape) -> SdnBound:
    d, n = shape.d, shape.n
    f = f_float(d, n)
    denom = math.log(n) - d
    return SdnBound(
        d=d,
        n=n,
        log_bound=shape.ncells * f,
        ratio=f / denom if denom > 0 else None,
    )


# -- CSV table rows (header first); the CLI writes them out -------------------

def _g15(x) -> str:
    return format(float(x), ".15g")


def f_table_rows(d: int, r_max: int) -> list:
    rows = [("d", "r", "f_float")]
    vals = f_values(d, r_max)
    rows.extend((d, r, _g15(vals[r - 1])) for r in range(1, r_max + 1))
    return rows


def cd_table_rows(d_max: int) -> list:
    rows = [("d", "c_d", "cap")]
    rows.extend(
        (d, _g15(c_constant(d).c_d), _g15(c_cap(d))) for d in range(d_max + 1)
    )
    return rows


def theorem5_table_rows(reports) -> list:
    rows = [
        (
            "d",
            "r_start",
            "r_max",
            "checked",
            "violations",
            "min_margin",
            "weak_violations",
            "weak_min_margin",
            "c_d",
        )
    ]
    rows.extend(
        (
            rep.d,
            rep.r_start,
            rep.r_max,
            rep.checked,
            rep.violations,
            _g15(rep.min_margin),
            rep.weak_violations,
            _g15(rep.weak_min_margin),
            _g15(rep.c_d),
        )
        for rep in reports
    )
    return rows
