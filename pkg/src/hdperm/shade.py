"""The shade process behind the bound function f.

Draw one uniform permutation sigma_k per coordinate; together they order the
cells lexicographically. For a fixed valid tensor X, a target cell i and a
value set W containing X(i), the cells preceding i along coordinate k shade
the values they hold; N counts what survives of W:

    Z^k = { X(i with coordinate k set to t) : sigma_k(t) < sigma_k(i_k) }
    N = |W \\ (Z^1 ∪ ... ∪ Z^d)|

X's own entry is never shaded (no line of X repeats a value), so N ≥ 1. The
central fact this module verifies is that the expectation of log N over the
(n!)^d orderings equals f(d, |W|), whatever X, i and the identity of W's
elements. At d=1, N itself is uniform on {1,...,|W|}.

Exact enumeration walks sigma tuples in lexicographic rank order and NEVER
rounds: it accumulates an integer histogram of N and takes the log-mean with
fsum. Monte Carlo sampling uses random.Random (Mersenne Twister), seeded,
consuming d shuffles per sample; means are reproducible for a fixed seed.
"""

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Optional, Tuple

from hdperm.core import PermTensor, Shape, SupportArray
from hdperm.constructions import modular_perm

ENUM_BUDGET = 10**7  # max (n!)^d ordering tuples for the exact path


@dataclass(frozen=True)
class OrderingSpec:
    """d rank permutations: sigmas[k][t] is the rank of coordinate value t
    along axis k."""

    sigmas: Tuple[tuple, ...]

    def __post_init__(self):
        for sig in self.sigmas:
            if sorted(sig) != list(range(len(sig))):
                raise ValueError(f"not a permutation of 0..{len(sig) - 1}: {sig!r}")


@dataclass(frozen=True)
class ShadeQuery:
    x: PermTensor
    target: tuple
    w: frozenset

    def __post_init__(self):
        shape = self.x.shape
        object.__setattr__(self, "target", shape.check_coords(self.target))
        w = frozenset(self.w)
        object.__setattr__(self, "w", w)
        for v in w:
            if not 0 <= v < shape.n:
                raise ValueError(f"W value {v} out of range 0..{shape.n - 1}")
        if self.x.value_at(self.target) not in w:
            raise ValueError("W must contain the tensor's value at the target cell")


def query_from_support(
    a: SupportArray, x: PermTensor, target, w
) -> ShadeQuery:
    """Build a query whose W is constrained to the support's R_target."""
    q = ShadeQuery(x, tuple(target), frozenset(w))
    if a.shape != x.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {x.shape}")
    allowed = a.mask_at(q.target)
    if any(not (allowed >> v) & 1 for v in q.w):
        raise ValueError("W must be a subset of the support's value set at target")
    return q


def _axis_values(q: ShadeQuery) -> list:
    """values[k][t] = X at the target cell with coordinate k replaced by t."""
    shape = q.x.shape
    out = []
    for k in range(shape.d):
        row = []
        for t in range(shape.n):
            coords = q.target[:k] + (t,) + q.target[k + 1 :]
            row.append(q.x.values[shape.rank(coords)])
        out.append(row)
    return out


def _w_mask(q: ShadeQuery) -> int:
    m = 0
    for v in q.w:
        m |= 1 << v
    return m


def shade_count(q: ShadeQuery, ordering: OrderingSpec) -> int:
    """N for one concrete ordering."""
    shape = q.x.shape
    if len(ordering.sigmas) != shape.d or any(
        len(sig) != shape.n for sig in ordering.sigmas
    ):
        raise ValueError(f"ordering does not match shape {shape}")
    axis_vals = _axis_values(q)
    shaded = 0
    for k, sig in enumerate(ordering.sigmas):
        rank_i = sig[q.target[k]]
        vals = axis_vals[k]
        for t in range(shape.n):
            if sig[t] < rank_i:
                shaded |= 1 << vals[t]
    return (_w_mask(q) & ~shaded).bit_count()


def _check_budget(shape: Shape):
    total = math.factorial(shape.n) ** shape.d
    if total > ENUM_BUDGET:
        raise ValueError(
            f"enumeration budget exceeded: (n!)^d = {total} > {ENUM_BUDGET}"
        )
    return total


def _ordering_histogram(q: ShadeQuery) -> dict:
    """Integer counts of N over all (n!)^d orderings, enumerated in
    lexicographic rank order (exact, no rounding)."""
    shape = q.x.shape
    _check_budget(shape)
    axis_vals = _axis_values(q)
    wmask = _w_mask(q)
    # per axis, the shade mask each sigma produces; the product loop is then
    # just OR + popcount
    per_axis = []
    for k in range(shape.d):
        vals = axis_vals[k]
        ik = q.target[k]
        masks = []
        for sig in permutations(range(shape.n)):
            rank_i = sig[ik]
            m = 0
            for t in range(shape.n):
                if sig[t] < rank_i:
                    m |= 1 << vals[t]
            masks.append(m)
        per_axis.append(masks)
    counts: dict = {}
    for combo in product(*per_axis):
        shaded = 0
        for m in combo:
            shaded |= m
        n_left = (wmask & ~shaded).bit_count()
        counts[n_left] = counts.get(n_left, 0) + 1
    return counts


def exact_expectation_logN(q: ShadeQuery) -> float:
    """Average of log N over all orderings; equals f(d, |W|)."""
    counts = _ordering_histogram(q)
    total = sum(counts.values())
    return math.fsum(c * math.log(n) for n, c in counts.items()) / total


@dataclass(frozen=True)
class ShadeDistribution:
    """Exact PMF of N: integer counts over all (n!)^d orderings."""

    counts: dict
    total: int

    def pmf(self) -> dict:
        return {n: Fraction(c, self.total) for n, c in sorted(self.counts.items())}

    def log_mean(self) -> float:
        return (
            math.fsum(c * math.log(n) for n, c in self.counts.items()) / self.total
        )


def shade_histogram(q: ShadeQuery) -> ShadeDistribution:
    counts = _ordering_histogram(q)
    return ShadeDistribution(counts, sum(counts.values()))


def mc_expectation_logN(
    q: ShadeQuery, samples: int, seed=None
) -> Tuple[float, float]:
    """Sample mean and standard error of log N over uniform orderings.

    Each sample draws d independent uniform permutations (one shuffle per
    axis). N only takes values in {1,...,|W|}, so the run keeps an integer
    histogram; mean and stderr are computed from it exactly at the end.
    """
    if not isinstance(samples, int) or samples < 2:
        raise ValueError(f"samples must be an integer >= 2, got {samples!r}")
    shape = q.x.shape
    n, d = shape.n, shape.d
    rng = random.Random(seed)
    axis_vals = _axis_values(q)
    wmask = _w_mask(q)
    target = q.target
    counts = [0] * (n + 2)
    base = list(range(n))
    for _ in range(samples):
        shaded = 0
        for k in range(d):
            sig = base[:]
            rng.shuffle(sig)
            rank_i = sig[target[k]]
            vals = axis_vals[k]
            for t in range(n):
                if sig[t] < rank_i:
                    shaded |= 1 << vals[t]
        counts[(wmask & ~shaded).bit_count()] += 1
    logs = [0.0] + [math.log(v) for v in range(1, n + 2)]
    mean = math.fsum(c * logs[v] for v, c in enumerate(counts)) / samples
    var = math.fsum(c * (logs[v] - mean) ** 2 for v, c in enumerate(counts)) / (
        samples - 1
    )
    return mean, math.sqrt(var / samples)


def random_valid_perm(shape: Shape, rng: random.Random) -> PermTensor:
    """A scrambled modular permutation: relabel values and permute each axis's
    coordinates independently. Stays valid, varies broadly with the rng."""
    base = modular_perm(shape)
    relabel = list(range(shape.n))
    rng.shuffle(relabel)
    axis_maps = []
    for _ in range(shape.d):
        m = list(range(shape.n))
        rng.shuffle(m)
        axis_maps.append(m)
    values = [0] * shape.ncells
    for coords in shape.cells():
        src = tuple(axis_maps[k][c] for k, c in enumerate(coords))
        values[shape.rank(coords)] = relabel[base.values[shape.rank(src)]]
    return PermTensor(shape, tuple(values))


def random_query(
    shape: Shape,
    r: Optional[int] = None,
    seed=None,
    perm: Optional[PermTensor] = None,
) -> ShadeQuery:
    """A reproducible random query: scrambled-modular X (unless given), a
    uniform target cell, and a uniform W of size r containing X(target)."""
    rng = random.Random(seed)
    if r is None:
        r = shape.n
    if not 1 <= r <= shape.n:
        raise ValueError(f"|W| must be in 1..{shape.n}, got {r}")
    x = perm if perm is not None else random_valid_perm(shape, rng)
    if x.shape != shape:
        raise ValueError(f"tensor is for {x.shape}, not {shape}")
    target = tuple(rng.randrange(shape.n) for _ in range(shape.d))
    must = x.value_at(target)
    others = [v for v in range(shape.n) if v != must]
    w = frozenset([must] + rng.sample(others, r - 1))
    return ShadeQuery(x, target, w)
