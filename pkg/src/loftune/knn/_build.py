"""Median-split kd-tree construction.

The tree is stored as flat arrays consumed by the compiled query kernel.
Splits choose the widest-extent dimension and partition at the median of
(coordinate, row id), so construction is fully deterministic; segments whose
bounding box has zero extent become leaves regardless of size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 32


@dataclass(frozen=True)
class KdTreeArrays:
    points: np.ndarray  # (n, p) rows reordered into leaf order, C-contiguous
    ids: np.ndarray  # (n,) original row id per tree position, int64
    node_start: np.ndarray
    node_end: np.ndarray
    node_left: np.ndarray  # -1 marks a leaf
    node_right: np.ndarray
    box_min: np.ndarray  # (nodes, p)
    box_max: np.ndarray


def build_kdtree(points: np.ndarray, leaf_size: int = LEAF_SIZE) -> KdTreeArrays:
    x = np.ascontiguousarray(points, dtype=np.float64)
    n = x.shape[0]
    order = np.arange(n, dtype=np.int64)

    starts: list[int] = []
    ends: list[int] = []
    lefts: list[int] = []
    rights: list[int] = []
    mins: list[np.ndarray] = []
    maxs: list[np.ndarray] = []

    def rec(start: int, end: int) -> int:
        idx = len(starts)
        starts.append(start)
        ends.append(end)
        lefts.append(-1)
        rights.append(-1)
        seg = order[start:end]
        lo = x[seg].min(axis=0)
        hi = x[seg].max(axis=0)
        mins.append(lo)
        maxs.append(hi)
        if end - start > leaf_size:
            dim = int(np.argmax(hi - lo))
            if hi[dim] > lo[dim]:
                order[start:end] = seg[np.lexsort((seg, x[seg, dim]))]
                mid = (start + end) // 2
                lefts[idx] = rec(start, mid)
                rights[idx] = rec(mid, end)
        return idx

    rec(0, n)
    return KdTreeArrays(
        points=np.ascontiguousarray(x[order]),
        ids=order.copy(),
        node_start=np.asarray(starts, dtype=np.int64),
        node_end=np.asarray(ends, dtype=np.int64),
        node_left=np.asarray(lefts, dtype=np.int64),
        node_right=np.asarray(rights, dtype=np.int64),
        box_min=np.ascontiguousarray(np.vstack(mins)),
        box_max=np.ascontiguousarray(np.vstack(maxs)),
    )
