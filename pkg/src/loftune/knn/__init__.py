"""Exact k-nearest-neighbor queries with deterministic tie-breaking.

Neighborhoods are exactly the k nearest rows under the (distance, row id)
order: among equidistant points the smaller row id wins. This fixes the
neighborhood cardinality (classic LOF lets ties enlarge it) so that results
are reproducible and neighbor lists for a whole k-grid can share one pass.

Two interchangeable backends produce identical results, bit for bit:

* compiled -- Cython kernels (kd-tree for p <= 20, brute force above, per
  the usual curse-of-dimensionality crossover); built at install time.
* pure -- blocked brute-force numpy, used when the extension is missing or
  when LOFTUNE_BACKEND=pure / build_index(backend="pure") asks for it.

Indexes are immutable after build; concurrent queries are safe.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..core import Dataset
from ..errors import DimensionMismatch, KTooLarge
from . import _pure
from ._build import build_kdtree

try:
    from . import _kdtree as _compiled
except ImportError:  # extension not built
    _compiled = None

TREE_MAX_DIM = 20


def compiled_available() -> bool:
    return _compiled is not None


def default_backend() -> str:
    env = os.environ.get("LOFTUNE_BACKEND")
    if env in ("compiled", "pure"):
        return env
    return "compiled" if compiled_available() else "pure"


@dataclass(frozen=True)
class NeighborList:
    """Neighbors of one query, ascending by (distance, id).

    When fewer than the requested k rows exist (k > n-1 under
    self-exclusion), the full list is returned and shortfall reports the
    difference; that case is not an error.
    """

    ids: np.ndarray
    distances: np.ndarray
    requested_k: int

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def shortfall(self) -> int:
        return self.requested_k - len(self.ids)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(d)) for i, d in zip(self.ids, self.distances)]


@dataclass(frozen=True)
class NeighborTable:
    """Per-row neighbor lists of uniform length k, self excluded.

    The length-j prefix of row i equals a direct j-nearest query for every
    j <= k, so one table serves a whole grid of neighborhood sizes.
    """

    ids: np.ndarray  # (n, k) int64
    distances: np.ndarray  # (n, k) float64

    @property
    def k(self) -> int:
        return self.ids.shape[1]

    def row(self, i: int) -> NeighborList:
        return NeighborList(self.ids[i], self.distances[i], self.k)

    def __len__(self) -> int:
        return self.ids.shape[0]

    def __iter__(self) -> Iterator[NeighborList]:
        return (self.row(i) for i in range(len(self)))


class NeighborIndex:
    """Search structure over a Dataset; built once, queried many times."""

    def __init__(self, data: Dataset, backend: str, kind: str, tree=None):
        self.data = data
        self.backend = backend
        self.kind = kind  # "kdtree" or "brute"
        self._tree = tree

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def p(self) -> int:
        return self.data.p

    def __repr__(self) -> str:
        return f"NeighborIndex(n={self.n}, p={self.p}, {self.backend}/{self.kind})"


def build_index(data: Dataset, *, backend: str | None = None) -> NeighborIndex:
    """Build a neighbor index; backend None resolves via LOFTUNE_BACKEND."""
    if backend is None:
        backend = default_backend()
    if backend not in ("compiled", "pure"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "compiled":
        if not compiled_available():
            raise RuntimeError("compiled backend requested but extension not built")
        if data.p <= TREE_MAX_DIM:
            return NeighborIndex(data, "compiled", "kdtree", tree=build_kdtree(data.rows))
        return NeighborIndex(data, "compiled", "brute")
    return NeighborIndex(data, "pure", "brute")


def _run_batch(index: NeighborIndex, queries: np.ndarray,
               exclude_ids: np.ndarray | None, k: int) -> tuple[np.ndarray, np.ndarray]:
    if index.backend == "compiled":
        if index.kind == "kdtree":
            t = index._tree
            return _compiled.tree_query_batch(
                t.points, t.ids, t.node_start, t.node_end, t.node_left,
                t.node_right, t.box_min, t.box_max, queries, exclude_ids, k)
        return _compiled.brute_query_batch(index.data.rows, queries, exclude_ids, k)
    return _pure.brute_query_batch(index.data.rows, queries, exclude_ids, k)


def query_many(index: NeighborIndex, queries: np.ndarray, k: int,
               exclude_ids: np.ndarray | None = None,
               threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Batch query: (ids, distances) arrays of shape (len(queries), k).

    k must not exceed the available point count (n, or n-1 when excluding).
    Rows are independent, so threads > 1 splits the batch across a thread
    pool; the kernels release the GIL and results do not depend on the
    thread count.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != index.p:
        raise DimensionMismatch(
            f"queries have dimension {queries.shape[-1] if queries.ndim else '?'},"
            f" index holds {index.p}-d points")
    available = index.n - (1 if exclude_ids is not None else 0)
    if k < 1 or k > available:
        raise KTooLarge(f"k={k} outside [1, {available}]")
    if exclude_ids is not None:
        exclude_ids = np.ascontiguousarray(exclude_ids, dtype=np.int64)
    nq = queries.shape[0]
    if threads <= 1 or nq < 2 * threads:
        return _run_batch(index, queries, exclude_ids, k)
    bounds = np.linspace(0, nq, threads + 1, dtype=int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]

    def work(span):
        a, b = span
        excl = None if exclude_ids is None else exclude_ids[a:b]
        return _run_batch(index, queries[a:b], excl, k)

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(work, chunks))
    ids = np.vstack([part[0] for part in parts])
    dists = np.vstack([part[1] for part in parts])
    return ids, dists


def query_k_nearest(index: NeighborIndex, query: np.ndarray, k: int,
                    exclude_id: int | None = None) -> NeighborList:
    """The k nearest rows to one query point, optionally excluding a row id.

    Requests beyond the available count return the full list with the
    shortfall recorded rather than raising.
    """
    q = np.asarray(query, dtype=np.float64).reshape(1, -1)
    if q.shape[1] != index.p:
        raise DimensionMismatch(f"query has dimension {q.shape[1]}, index holds {index.p}-d points")
    if k < 1:
        raise KTooLarge(f"k must be >= 1, got {k}")
    excl = None
    if exclude_id is not None:
        excl = np.asarray([exclude_id], dtype=np.int64)
    available = index.n - (1 if excl is not None else 0)
    effective = min(k, available)
    if effective == 0:
        return NeighborList(np.empty(0, dtype=np.int64), np.empty(0), k)
    ids, dists = query_many(index, q, effective, excl)
    return NeighborList(ids[0], dists[0], k)


def neighbor_lists_up_to_k(index: NeighborIndex, k_max: int,
                           threads: int = 1) -> NeighborTable:
    """Self-excluded neighbor lists of length k_max for every row."""
    if k_max < 1:
        raise KTooLarge(f"k_max must be >= 1, got {k_max}")
    if k_max > index.n - 1:
        raise KTooLarge(f"k_max={k_max} exceeds n-1={index.n - 1}")
    all_ids = np.arange(index.n, dtype=np.int64)
    ids, dists = query_many(index, index.data.rows, k_max, all_ids, threads=threads)
    return NeighborTable(ids, dists)
