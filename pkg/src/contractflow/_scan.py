"""Row-chunked pairwise scans with an order-insensitive min reduction.

The O(N^2) pair evaluations in the contract and repar modules are split into
row blocks. Blocks may run on a thread pool capped by CONTRACTFLOW_THREADS
(numpy releases the GIL inside the block matmuls); results are combined in
block index order, so the reported minimum and witness are identical no
matter how many threads run.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def thread_count() -> int:
    raw = os.environ.get("CONTRACTFLOW_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pairwise_min(block_fn, n_rows: int, block: int = 64):
    """Minimize block_fn over row blocks.

    ``block_fn(i0, i1)`` returns a (i1 - i0, n) array with np.inf marking
    invalid pairs. Returns ``(min_value, i, j)`` with the lexicographically
    first witness among ties.
    """
    starts = list(range(0, n_rows, block))

    def one(i0):
        i1 = min(i0 + block, n_rows)
        vals = block_fn(i0, i1)
        flat = int(np.argmin(vals))
        r, c = divmod(flat, vals.shape[1])
        return float(vals[r, c]), i0 + r, c

    workers = thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, starts))
    else:
        results = [one(i0) for i0 in starts]

    best = results[0]
    for cand in results[1:]:
        if cand[0] < best[0]:
            best = cand
    return best
