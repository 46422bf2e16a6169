"""Compare the compiled counting kernel against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Each case counts the permutations of a full support array with both backends
and reports the best wall time over a few repeats. The compiled backend is
skipped (with a note) when the extension is not built.
"""

import time

from hdperm import Shape, all_ones_support
from hdperm.counting import per_d
from hdperm.kernels import BACKEND, get

CASES = [(2, 4), (2, 5), (3, 3), (3, 4)]
REPEATS = 3


def best_time(a, backend):
    vals = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        count = per_d(a, backend=backend)
        vals.append(time.perf_counter() - t0)
    return min(vals), count


def main():
    print(f"default backend: {BACKEND}")
    try:
        get("cython")
        have_cython = True
    except RuntimeError:
        have_cython = False
        print("compiled extension not built; timing the python backend only")

    header = f"{'case':>10} {'count':>12} {'python':>12}"
    if have_cython:
        header += f" {'cython':>12} {'speedup':>9}"
    print(header)
    for d, n in CASES:
        a = all_ones_support(Shape(d, n))
        t_py, count = best_time(a, "python")
        row = f"{f'd={d} n={n}':>10} {count:>12} {t_py:>11.4f}s"
        if have_cython:
            t_cy, count_cy = best_time(a, "cython")
            assert count_cy == count, "backends disagree"
            row += f" {t_cy:>11.4f}s {t_py / t_cy:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
