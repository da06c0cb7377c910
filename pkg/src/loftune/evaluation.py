"""Prediction on labeled validation data and the F1 / ROC-AUC metrics.

The anomaly class is the positive class everywhere. Predictions apply the
model's stored threshold to novelty scores (anomaly iff score >= threshold);
AUC is computed from the raw scores, so it depends only on the neighborhood
size, while F1 also depends on the contamination through the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .core import Dataset, TunedModel, TuningGrid
from .errors import DimensionMismatch, LengthMismatch, OneClassOnly
from .lof import (
    lof_scores_over_grid,
    lof_train_scores,
    novelty_scores_from_lists,
)
from .knn import build_index, query_many
from .projection import project
from .tuner import check_grid_feasible, descending_order


@dataclass(frozen=True)
class EvalReport:
    """Confusion counts and summary metrics for one validation run."""

    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    auc: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_tsv(self) -> str:
        header = "tp\tfp\ttn\tfn\tprecision\trecall\tf1\tauc"
        row = "\t".join([
            str(self.tp), str(self.fp), str(self.tn), str(self.fn),
            repr(self.precision), repr(self.recall), repr(self.f1), repr(self.auc),
        ])
        return f"{header}\n{row}\n"

    def __str__(self) -> str:
        return (
            f"tp={self.tp} fp={self.fp} tn={self.tn} fn={self.fn} "
            f"precision={self.precision:.6f} recall={self.recall:.6f} "
            f"f1={self.f1:.6f} auc={self.auc:.6f}"
        )


def _as_labels(values: Sequence[int] | np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be 1-d")
    return arr.astype(np.int64)


def f1_score(truth: Sequence[int] | np.ndarray,
             predicted: Sequence[int] | np.ndarray) -> float:
    """F1 on the anomaly class; 0.0 when precision + recall is zero."""
    t = _as_labels(truth, "truth")
    p = _as_labels(predicted, "predicted")
    if len(t) != len(p):
        raise LengthMismatch(f"truth has {len(t)} labels, predicted has {len(p)}")
    if len(t) == 0:
        raise LengthMismatch("need at least one label")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def roc_auc(truth: Sequence[int] | np.ndarray,
            scores: Sequence[float] | np.ndarray) -> float:
    """Probability a random anomaly outscores a random normal point.

    Ties count one half, which makes this the Mann-Whitney statistic (and
    the trapezoidal ROC integral). Computed via average ranks.
    """
    t = _as_labels(truth, "truth")
    s = np.asarray(scores, dtype=np.float64)
    if len(t) != len(s):
        raise LengthMismatch(f"truth has {len(t)} labels, scores has {len(s)}")
    n_pos = int(np.sum(t == 1))
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly(f"need both classes, got {n_pos} positives of {len(t)}")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_s = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = float(ranks[t == 1].sum())
    return (rank_sum - 0.5 * n_pos * (n_pos + 1)) / (n_pos * n_neg)


def novelty_scores(model: TunedModel, validation: Dataset, *,
                   threads: int = 1) -> np.ndarray:
    """Novelty LOF of validation rows, replaying the model's projection."""
    data = validation
    if model.projection is not None:
        if validation.p != model.projection.input_dim:
            raise DimensionMismatch(
                f"validation has dimension {validation.p}, "
                f"model projection expects {model.projection.input_dim}")
        data = project(validation, model.projection)
    elif validation.p != model.training_points.p:
        raise DimensionMismatch(
            f"validation has dimension {validation.p}, "
            f"model was trained on {model.training_points.p}-d points")
    trained = lof_train_scores(model.training_points, model.k_opt, threads=threads)
    index = build_index(model.training_points)
    ids, dists = query_many(index, data.rows, model.k_opt, threads=threads)
    return novelty_scores_from_lists(trained, ids, dists)


def predict(model: TunedModel, validation: Dataset, *, threads: int = 1) -> np.ndarray:
    """0/1 anomaly labels: score >= threshold."""
    if validation.n == 0:
        return np.empty(0, dtype=np.int64)
    scores = novelty_scores(model, validation, threads=threads)
    return (scores >= model.threshold).astype(np.int64)


def evaluate_model(model: TunedModel, validation: Dataset,
                   truth: Sequence[int] | np.ndarray, *,
                   threads: int = 1) -> EvalReport:
    """Score, threshold, and summarize against ground-truth labels."""
    t = _as_labels(truth, "truth")
    if len(t) != validation.n:
        raise LengthMismatch(f"{len(t)} labels for {validation.n} rows")
    scores = novelty_scores(model, validation, threads=threads)
    predicted = (scores >= model.threshold).astype(np.int64)
    tp = int(np.sum((t == 1) & (predicted == 1)))
    fp = int(np.sum((t == 0) & (predicted == 1)))
    tn = int(np.sum((t == 0) & (predicted == 0)))
    fn = int(np.sum((t == 1) & (predicted == 0)))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return EvalReport(tp=tp, fp=fp, tn=tn, fn=fn, precision=precision,
                      recall=recall, f1=f1, auc=roc_auc(t, scores))


@dataclass(frozen=True)
class GridPerformance:
    """Validation F1 per (c, k) cell and AUC per k, over a whole grid."""

    grid: TuningGrid
    f1: np.ndarray  # (len(contaminations), len(neighborhood_sizes))
    auc: np.ndarray  # (len(neighborhood_sizes),)

    def best_f1(self) -> float:
        return float(self.f1.max())

    def best_auc(self) -> float:
        return float(self.auc.max())

    def f1_at(self, c: float, k: int) -> float:
        return float(self.f1[self.grid.contaminations.index(c),
                             self.grid.neighborhood_sizes.index(k)])

    def auc_at(self, k: int) -> float:
        return float(self.auc[self.grid.neighborhood_sizes.index(k)])


def grid_performance(train: Dataset, grid: TuningGrid, validation: Dataset,
                     truth: Sequence[int] | np.ndarray, *,
                     backend: str | None = None,
                     threads: int = 1) -> GridPerformance:
    """Validation metrics at every grid cell (for tuned-vs-best comparisons).

    One neighbor pass per side: training lists at max k feed every train
    ranking, and one validation query at max k feeds every novelty scoring.
    """
    t = _as_labels(truth, "truth")
    if len(t) != validation.n:
        raise LengthMismatch(f"{len(t)} labels for {validation.n} rows")
    check_grid_feasible(grid, train.n)
    ks = grid.neighborhood_sizes
    per_k = lof_scores_over_grid(train, ks, backend=backend, threads=threads)
    index = build_index(train, backend=backend)
    v_ids, v_dists = query_many(index, validation.rows, ks[-1], threads=threads)

    f1 = np.empty((len(grid.contaminations), len(ks)))
    auc = np.empty(len(ks))
    for kj, trained in enumerate(per_k):
        v_scores = novelty_scores_from_lists(trained, v_ids, v_dists)
        auc[kj] = roc_auc(t, v_scores)
        ranked = trained.scores[descending_order(trained.scores)]
        for ci, c in enumerate(grid.contaminations):
            m = math.floor(c * train.n)
            threshold = ranked[m - 1]
            f1[ci, kj] = f1_score(t, (v_scores >= threshold).astype(np.int64))
    return GridPerformance(grid=grid, f1=f1, auc=auc)


def write_report(report: EvalReport, destination: str | Path | IO[str]) -> None:
    text = report.to_tsv()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
