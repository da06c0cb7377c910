"""Pure-numpy fallback for the neighbor-search kernels.

Blocked brute force: exact, vectorized, and bit-identical to the compiled
backend. Squared distances accumulate one coordinate at a time (the same
operation order the C kernel uses), and ties are resolved by ascending row
id, so both backends return the same ids and the same distance bits.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 256


def brute_query_batch(
    points: np.ndarray,
    queries: np.ndarray,
    exclude_ids: np.ndarray | None,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    p = points.shape[1]
    nq = queries.shape[0]
    out_ids = np.empty((nq, k), dtype=np.int64)
    out_d2 = np.empty((nq, k), dtype=np.float64)
    all_ids = np.arange(n, dtype=np.int64)

    for lo in range(0, nq, _BLOCK):
        hi = min(lo + _BLOCK, nq)
        block = queries[lo:hi]
        d2 = np.zeros((hi - lo, n), dtype=np.float64)
        for j in range(p):
            diff = points[:, j] - block[:, j, np.newaxis]
            d2 += diff * diff
        if exclude_ids is not None:
            d2[np.arange(hi - lo), exclude_ids[lo:hi]] = np.inf
        for r in range(hi - lo):
            row = d2[r]
            if k < n:
                part = np.argpartition(row, k - 1)
                kth = row[part[k - 1]]
                cand = np.flatnonzero(row <= kth)  # keep every boundary tie
            else:
                cand = all_ids
            cand = cand[np.lexsort((cand, row[cand]))][:k]
            out_ids[lo + r] = cand
            out_d2[lo + r] = row[cand]
    return out_ids, np.sqrt(out_d2)
