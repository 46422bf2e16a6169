"""Exact d-permanent computation: the number of d-dimensional permutations
supported by a 0-1 array.

The count is obtained by depth-first backtracking over cells in row-major
order with per-line used-value bitmasks (see kernels). Counts are exact
Python ints. The traversal order is statically fixed, so node visits and
results are reproducible; with threads > 1 the search is split on the first
cell's candidate values and the partial counts summed, which leaves the total
independent of scheduling.
"""

from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from hdperm import kernels
from hdperm.core import PermTensor, Shape, SupportArray, all_ones_support


@lru_cache(maxsize=None)
def _line_table(shape: Shape):
    """Per-cell line ids (ncells x d int32) plus the allowed dtype template.

    Line id for direction k (0-based) = k * n^{d-1} + row-major rank of the
    d-1 fixed coordinates.
    """
    d, n = shape.d, shape.n
    per_dir = n ** (d - 1)
    table = np.empty((shape.ncells, d), dtype=np.int32)
    for rank, coords in enumerate(shape.cells()):
        for k in range(d):
            sub = coords[:k] + coords[k + 1 :]
            r = 0
            for c in sub:
                r = r * n + c
            table[rank, k] = k * per_dir + r
    table.setflags(write=False)
    return table


def _allowed_array(a: SupportArray):
    return np.array(a.masks, dtype=np.uint64)


def per_d(a: SupportArray, threads: int = 1, backend: Optional[str] = None) -> int:
    """Exact count of supported d-dimensional permutations.

    threads > 1 splits on the first cell's candidates; the result does not
    depend on it. backend forces a kernel ("cython"/"python") for tests and
    benchmarks.
    """
    kern = kernels.get(backend)
    allowed = _allowed_array(a)
    lines = _line_table(a.shape)
    full = a.shape.full_mask
    if threads <= 1:
        return int(kern.count_supported(allowed, lines, full))
    first = a.masks[0]
    bits = []
    while first:
        low = first & -first
        bits.append(low)
        first ^= low
    if len(bits) <= 1:
        return int(kern.count_supported(allowed, lines, full))
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(threads, len(bits))) as pool:
        parts = pool.map(
            lambda b: int(kern.count_supported(allowed, lines, b)), bits
        )
        return sum(parts)


def count_all(shape: Shape, threads: int = 1, backend: Optional[str] = None) -> int:
    """per_d of the all-ones support: the full count of order-n
    d-dimensional permutations."""
    return per_d(all_ones_support(shape), threads=threads, backend=backend)


def supports(a: SupportArray, p: PermTensor) -> bool:
    """True iff every value of p is allowed by a."""
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {p.shape}")
    return all((m >> v) & 1 for m, v in zip(a.masks, p.values))


def enumerate_perms(a: SupportArray, limit: Optional[int] = None) -> Iterator[PermTensor]:
    """Yield the supported permutations in deterministic order.

    Cells are filled row-major, candidate values tried in ascending order, so
    the stream sorts by the value tuple. Without a limit it yields exactly
    per_d(a) tensors.
    """
    if limit is not None and limit <= 0:
        raise ValueError("limit must be positive")
    shape = a.shape
    allowed = a.masks
    lines = _line_table(shape).tolist()
    ncells = shape.ncells
    nlines = shape.d * shape.n ** (shape.d - 1)
    used = [0] * nlines
    avail = [0] * ncells
    value = [0] * ncells
    chosen = [0] * ncells
    yielded = 0
    depth = 0
    avail[0] = allowed[0]
    while True:
        m = avail[depth]
        if m == 0:
            depth -= 1
            if depth < 0:
                return
            b = chosen[depth]
            for line in lines[depth]:
                used[line] ^= b
            continue
        b = m & -m
        avail[depth] = m ^ b
        value[depth] = b.bit_length() - 1
        if depth == ncells - 1:
            yield PermTensor(shape, tuple(value))
            yielded += 1
            if limit is not None and yielded >= limit:
                return
            continue
        chosen[depth] = b
        for line in lines[depth]:
            used[line] |= b
        depth += 1
        u = 0
        for line in lines[depth]:
            u |= used[line]
        avail[depth] = allowed[depth] & ~u
