import math
import random
from fractions import Fraction
from itertools import permutations

import pytest

from hdperm.bounds import f_float
from hdperm.constructions import modular_perm
from hdperm.core import PermTensor, Shape, all_ones_support, validate_perm
from hdperm.shade import (
    OrderingSpec,
    ShadeQuery,
    exact_expectation_logN,
    mc_expectation_logN,
    query_from_support,
    random_query,
    random_valid_perm,
    shade_count,
    shade_histogram,
)

EXACT_CASES = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (3, 3)]


def identity_ordering(shape):
    return OrderingSpec(tuple(tuple(range(shape.n)) for _ in range(shape.d)))


def test_query_validation():
    p = modular_perm(Shape(2, 3))
    q = ShadeQuery(p, (1, 1), frozenset({0, 2}))  # X(1,1) = 2
    assert q.w == frozenset({0, 2})
    with pytest.raises(ValueError):
        ShadeQuery(p, (1, 1), frozenset({0, 1}))  # misses X(target)
    with pytest.raises(ValueError):
        ShadeQuery(p, (1, 1), frozenset({2, 5}))  # out of range
    with pytest.raises(ValueError):
        ShadeQuery(p, (1, 3), frozenset({2}))  # bad cell


def test_query_from_support_enforces_subset():
    p = modular_perm(Shape(2, 3))
    a = all_ones_support(Shape(2, 3))
    q = query_from_support(a, p, (0, 0), {0, 1})
    assert q.target == (0, 0)
    masks = list(a.masks)
    masks[a.shape.rank((0, 0))] = 0b001
    from hdperm.core import SupportArray

    b = SupportArray(a.shape, tuple(masks))
    with pytest.raises(ValueError):
        query_from_support(b, p, (0, 0), {0, 1})


def test_shade_count_identity_ordering():
    # identity ranks: predecessors of t are 0..t-1 along each axis
    p = modular_perm(Shape(2, 3))  # row i: (i, i+1, i+2) mod 3
    q = ShadeQuery(p, (2, 2), frozenset({0, 1, 2}))  # X(2,2) = 1
    # axis 1 predecessors: X(0,2)=2, X(1,2)=0; axis 2: X(2,0)=2, X(2,1)=0
    assert shade_count(q, identity_ordering(p.shape)) == 1


def test_shade_count_d1_identity():
    # X = identity on 3 cells, target last, full W: rows 0 and 1 precede and
    # shade their own values, leaving only X(2)
    p = PermTensor(Shape(1, 3), (0, 1, 2))
    q = ShadeQuery(p, (2,), frozenset({0, 1, 2}))
    assert shade_count(q, identity_ordering(p.shape)) == 1


def test_shade_count_no_predecessors():
    # target first along every axis: nothing shaded, N = |W|
    p = modular_perm(Shape(2, 4))
    q = ShadeQuery(p, (0, 0), frozenset({0, 1, 3}))
    assert shade_count(q, identity_ordering(p.shape)) == 3


def test_shade_count_bounds_and_own_value_survives():
    rng = random.Random(2)
    for _ in range(50):
        shape = Shape(rng.choice([1, 2, 3]), rng.randint(2, 4))
        q = random_query(shape, r=rng.randint(1, shape.n), seed=rng.random())
        sigmas = []
        for _ in range(shape.d):
            s = list(range(shape.n))
            rng.shuffle(s)
            sigmas.append(tuple(s))
        n_left = shade_count(q, OrderingSpec(tuple(sigmas)))
        assert 1 <= n_left <= len(q.w)


def test_ordering_spec_rejects_non_permutation():
    with pytest.raises(ValueError):
        OrderingSpec(((0, 0, 1),))
    with pytest.raises(ValueError):
        shade_count(
            random_query(Shape(2, 3), seed=0),
            OrderingSpec(((0, 1, 2),)),  # only one axis for d=2
        )


def test_d1_shade_is_uniform():
    # at d=1 the surviving count is uniform on {1..|W|}
    p = PermTensor(Shape(1, 5), (3, 0, 4, 1, 2))
    for r in (1, 2, 4, 5):
        q = random_query(Shape(1, 5), r=r, seed=r, perm=p)
        dist = shade_histogram(q)
        assert dist.pmf() == {k: Fraction(1, r) for k in range(1, r + 1)}


def test_histogram_frozen_case_d2_n3():
    # full W on any valid 3x3 square: 36 orderings split 22/10/4
    q = random_query(Shape(2, 3), r=3, seed=0)
    dist = shade_histogram(q)
    assert dist.counts == {1: 22, 2: 10, 3: 4}
    assert dist.total == 36
    assert dist.pmf() == {1: Fraction(11, 18), 2: Fraction(5, 18), 3: Fraction(1, 9)}
    assert dist.log_mean() == pytest.approx(f_float(2, 3), abs=1e-15)


def test_exact_expectation_matches_f():
    for d, n in EXACT_CASES:
        shape = Shape(d, n)
        for r in range(1, n + 1):
            for i in range(10):
                q = random_query(shape, r=r, seed=1000 * d + 100 * n + 10 * r + i)
                delta = abs(exact_expectation_logN(q) - f_float(d, r))
                assert delta <= 1e-12, (d, n, r, delta)


def test_expectation_invariant_in_x_cell_and_w_identity():
    # same (d, |W|) must give the same expectation whatever X, i, W
    shape = Shape(2, 3)
    rng = random.Random(6)
    seen = set()
    for _ in range(8):
        x = random_valid_perm(shape, rng)
        target = (rng.randrange(3), rng.randrange(3))
        must = x.value_at(target)
        others = [v for v in range(3) if v != must]
        w = frozenset({must, rng.choice(others)})
        val = exact_expectation_logN(ShadeQuery(x, target, w))
        seen.add(round(val, 13))
    assert len(seen) == 1
    assert seen.pop() == pytest.approx(f_float(2, 2), abs=1e-12)


def test_singleton_w():
    q = random_query(Shape(2, 4), r=1, seed=3)
    assert exact_expectation_logN(q) == 0.0
    mean, stderr = mc_expectation_logN(q, 50, seed=3)
    assert mean == 0.0 and stderr == 0.0


def test_exact_budget_guard():
    with pytest.raises(ValueError):
        exact_expectation_logN(random_query(Shape(3, 6), seed=0))


def test_mc_deterministic_and_converges():
    q = random_query(Shape(2, 4), r=4, seed=9)
    a = mc_expectation_logN(q, 4000, seed=123)
    b = mc_expectation_logN(q, 4000, seed=123)
    assert a == b
    want = f_float(2, 4)
    hits = 0
    for seed in range(50):
        mean, stderr = mc_expectation_logN(q, 2000, seed=seed)
        assert stderr > 0
        if abs(mean - want) <= 4 * stderr:
            hits += 1
    assert hits >= 48  # 4 sigma misses should be very rare


def test_mc_rejects_tiny_sample_counts():
    q = random_query(Shape(2, 3), seed=0)
    with pytest.raises(ValueError):
        mc_expectation_logN(q, 1, seed=0)


def test_random_valid_perm_is_valid_and_varies():
    rng = random.Random(14)
    seen = set()
    for _ in range(20):
        p = random_valid_perm(Shape(2, 4), rng)
        assert validate_perm(p.values, p.shape).valid
        seen.add(p.values)
    assert len(seen) > 5


def test_random_query_reproducible():
    a = random_query(Shape(3, 4), r=3, seed=77)
    b = random_query(Shape(3, 4), r=3, seed=77)
    assert (a.x, a.target, a.w) == (b.x, b.target, b.w)
    assert len(a.w) == 3 and a.x.value_at(a.target) in a.w
    with pytest.raises(ValueError):
        random_query(Shape(2, 3), r=4, seed=0)


def test_histogram_total_is_ordering_count():
    for d, n in [(1, 4), (2, 3)]:
        q = random_query(Shape(d, n), seed=5)
        dist = shade_histogram(q)
        assert dist.total == math.factorial(n) ** d
        assert sum(dist.counts.values()) == dist.total


def test_exact_agrees_with_direct_average_d1():
    # brute-force the d=1 definition independently over all n! orderings
    shape = Shape(1, 4)
    q = random_query(shape, r=3, seed=31)
    logs = []
    for sig in permutations(range(4)):
        logs.append(math.log(shade_count(q, OrderingSpec((sig,)))))
    assert exact_expectation_logN(q) == pytest.approx(
        math.fsum(logs) / len(logs), abs=1e-15
    )
