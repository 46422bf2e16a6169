"""Pure-Python counting kernel; fallback twin of the compiled _ckernel.

Same contract, same traversal: iterative depth-first search over cells in
row-major order, one bitmask of used values per line. Counts are native ints,
so this path is unbounded-precision by construction.
"""


def count_supported(allowed, cell_lines, root_mask):
    """Count assignments with one allowed value per cell and no repeats on
    any line.

    allowed: per-cell candidate bitmasks, row-major.
    cell_lines: for each cell, the ids of its d lines (ids are dense, shared
        across cells that lie on the same line).
    root_mask: extra filter on the first cell's candidates; lets callers
        split the search by first-cell value and sum partial counts.
    """
    allowed = [int(m) for m in allowed]
    cell_lines = [tuple(int(i) for i in row) for row in cell_lines]
    ncells = len(allowed)
    nlines = 1 + max(max(row) for row in cell_lines)
    used = [0] * nlines
    # avail[depth] = candidates not yet tried at this depth;
    # chosen[depth] = the bit currently assigned there (invariant: a value is
    # marked in used[line] iff exactly one assigned cell on that line holds it)
    avail = [0] * ncells
    chosen = [0] * ncells
    last = ncells - 1
    count = 0
    depth = 0
    avail[0] = allowed[0] & root_mask
    while True:
        m = avail[depth]
        if m == 0:
            depth -= 1
            if depth < 0:
                return count
            b = chosen[depth]
            for line in cell_lines[depth]:
                used[line] ^= b
            continue
        if depth == last:
            count += m.bit_count()
            avail[depth] = 0
            continue
        b = m & -m
        avail[depth] = m ^ b
        chosen[depth] = b
        for line in cell_lines[depth]:
            used[line] |= b
        depth += 1
        u = 0
        for line in cell_lines[depth]:
            u |= used[line]
        avail[depth] = allowed[depth] & ~u
