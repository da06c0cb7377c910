"""Local outlier factor scores over a training set and for unseen points.

For row a with neighborhood N_k(a) (its k nearest rows, self excluded):

    k-distance(a) = distance to the k-th nearest neighbor
    reach-dist_k(a, b) = max(k-distance(b), d(a, b))
    lrd_k(a) = 1 / mean_{b in N_k(a)} reach-dist_k(a, b)
    LOF_k(a) = mean_{b in N_k(a)} lrd_k(b) / lrd_k(a)

Isolated points get LOF >> 1; interior points of uniform regions get ~1.

When all k neighbors coincide with the point itself the mean reachability
is zero, so it is floored at 1e-12 before inversion: lrd becomes large but
finite, co-duplicated points score near 1, and log scores stay usable.

Unseen points are scored in novelty mode: the query's neighborhood is its k
nearest *training* rows, neighbor lrd values are reused from training, and
the query's own lrd is computed from training k-distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset
from .errors import KOutOfRange
from .knn import NeighborIndex, NeighborTable, build_index, neighbor_lists_up_to_k, query_many

MEAN_REACH_FLOOR = 1e-12


@dataclass(frozen=True)
class LofScores:
    """Training scores at one neighborhood size, plus the per-row lrd and
    k-distance values novelty scoring needs."""

    k: int
    scores: np.ndarray
    lrd: np.ndarray
    kdist: np.ndarray


def _scores_from_table(ids: np.ndarray, dists: np.ndarray, k: int) -> LofScores:
    nid = ids[:, :k]
    nd = dists[:, :k]
    kdist = np.ascontiguousarray(nd[:, k - 1])
    reach = np.maximum(kdist[nid], nd)
    lrd = 1.0 / np.maximum(reach.mean(axis=1), MEAN_REACH_FLOOR)
    scores = lrd[nid].mean(axis=1) / lrd
    for a in (scores, lrd, kdist):
        a.flags.writeable = False
    return LofScores(k=k, scores=scores, lrd=lrd, kdist=kdist)


def _check_k(k: int, n: int) -> None:
    if not (1 <= k <= n - 1):
        raise KOutOfRange(f"k={k} outside [1, n-1] for n={n}")


def lof_train_scores(data: Dataset, k: int, *, backend: str | None = None,
                     threads: int = 1) -> LofScores:
    """LOF of every training row at neighborhood size k (self excluded)."""
    _check_k(k, data.n)
    index = build_index(data, backend=backend)
    table = neighbor_lists_up_to_k(index, k, threads=threads)
    return _scores_from_table(table.ids, table.distances, k)


def lof_scores_over_grid(data: Dataset, k_values: Sequence[int], *,
                         backend: str | None = None,
                         threads: int = 1) -> tuple[LofScores, ...]:
    """LOF scores for every k in an ascending grid.

    One neighbor pass at max(k_values) feeds all grid entries (length-k
    prefixes of the shared table), so element j is exactly what
    lof_train_scores(data, k_values[j]) returns.
    """
    ks = [int(k) for k in k_values]
    if not ks:
        raise KOutOfRange("k grid is empty")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise KOutOfRange(f"k grid must be strictly increasing: {ks}")
    _check_k(ks[0], data.n)
    _check_k(ks[-1], data.n)
    index = build_index(data, backend=backend)
    table = neighbor_lists_up_to_k(index, ks[-1], threads=threads)
    return tuple(_scores_from_table(table.ids, table.distances, k) for k in ks)


def table_for_dataset(data: Dataset, k_max: int, *, backend: str | None = None,
                      threads: int = 1) -> tuple[NeighborIndex, NeighborTable]:
    """Index + shared neighbor table, for callers that reuse both."""
    _check_k(k_max, data.n)
    index = build_index(data, backend=backend)
    return index, neighbor_lists_up_to_k(index, k_max, threads=threads)


def novelty_scores_from_lists(trained: LofScores, ids: np.ndarray,
                              dists: np.ndarray) -> np.ndarray:
    """Novelty LOF from precomputed per-query training-neighbor lists."""
    k = trained.k
    nid = ids[:, :k]
    nd = dists[:, :k]
    reach = np.maximum(trained.kdist[nid], nd)
    lrd_q = 1.0 / np.maximum(reach.mean(axis=1), MEAN_REACH_FLOOR)
    return trained.lrd[nid].mean(axis=1) / lrd_q


def lof_novelty_scores(train: Dataset | NeighborIndex, trained: LofScores,
                       queries: np.ndarray, *, threads: int = 1) -> np.ndarray:
    """Novelty LOF of each query row against a fixed training set."""
    index = train if isinstance(train, NeighborIndex) else build_index(train)
    if len(trained.scores) != index.n:
        raise ValueError("trained scores do not match the training set size")
    queries = np.ascontiguousarray(np.atleast_2d(np.asarray(queries, dtype=np.float64)))
    ids, dists = query_many(index, queries, trained.k, threads=threads)
    return novelty_scores_from_lists(trained, ids, dists)


def lof_novelty_score(train: Dataset | NeighborIndex, trained: LofScores,
                      query: np.ndarray) -> float:
    """Novelty LOF of a single p-vector."""
    return float(lof_novelty_scores(train, trained, np.asarray(query, dtype=np.float64).reshape(1, -1))[0])
