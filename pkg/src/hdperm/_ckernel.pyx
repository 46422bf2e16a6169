# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernel; hot twin of _kernel_py with the same contract.

Iterative DFS, row-major cell order, one used-value bitmask per line. The
counter is a C uint64: the kernel counts visited leaves one at a time, so the
value cannot feasibly exceed 64 bits within any realistic runtime.
"""
from libc.stdlib cimport free, malloc

ctypedef unsigned long long u64


cdef inline int _popcount(u64 x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def count_supported(const u64[::1] allowed, const int[:, ::1] cell_lines, u64 root_mask):
    """See _kernel_py.count_supported; inputs are uint64/int32 arrays."""
    cdef Py_ssize_t ncells = allowed.shape[0]
    cdef int dirs = cell_lines.shape[1]
    cdef Py_ssize_t i
    cdef int k, nlines = 0
    for i in range(ncells):
        for k in range(dirs):
            if cell_lines[i, k] >= nlines:
                nlines = cell_lines[i, k] + 1

    cdef u64 *used = <u64 *> malloc(nlines * sizeof(u64))
    cdef u64 *avail = <u64 *> malloc(ncells * sizeof(u64))
    cdef u64 *chosen = <u64 *> malloc(ncells * sizeof(u64))
    if used == NULL or avail == NULL or chosen == NULL:
        free(used)
        free(avail)
        free(chosen)
        raise MemoryError()

    cdef u64 count = 0, m, b, u
    cdef Py_ssize_t depth = 0, last = ncells - 1
    with nogil:
        for i in range(nlines):
            used[i] = 0
        avail[0] = allowed[0] & root_mask
        while True:
            m = avail[depth]
            if m == 0:
                depth -= 1
                if depth < 0:
                    break
                b = chosen[depth]
                for k in range(dirs):
                    used[cell_lines[depth, k]] ^= b
                continue
            if depth == last:
                count += _popcount(m)
                avail[depth] = 0
                continue
            b = m & (~m + 1)
            avail[depth] = m ^ b
            chosen[depth] = b
            for k in range(dirs):
                used[cell_lines[depth, k]] |= b
            depth += 1
            u = 0
            for k in range(dirs):
                u |= used[cell_lines[depth, k]]
            avail[depth] = allowed[depth] & ~u

    free(used)
    free(avail)
    free(chosen)
    return count
