"""Kernel selection: the compiled extension when built, pure Python otherwise.

Both backends implement the same count_supported contract and are kept
behaviorally identical; benchmarks/bench_kernels.py compares them and the test
suite asserts equal counts.
"""

try:
    from hdperm import _ckernel as _active

    BACKEND = "cython"
except ImportError:  # extension not built; the fallback is always available
    from hdperm import _kernel_py as _active

    BACKEND = "python"

count_supported = _active.count_supported


def get(name=None):
    """Resolve a backend module by name ("cython" or "python"); None picks
    the active one. Raises if the compiled backend was requested but absent."""
    if name is None or name == BACKEND:
        return _active
    if name == "python":
        from hdperm import _kernel_py

        return _kernel_py
    if name == "cython":
        try:
            from hdperm import _ckernel

            return _ckernel
        except ImportError:
            raise RuntimeError("compiled kernel is not built") from None
    raise ValueError(f"unknown kernel backend {name!r}")
