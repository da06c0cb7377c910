"""Joint selection of contamination and neighborhood size from unlabeled data.

For every grid cell (c, k): rank the training LOF scores at k in descending
order (ties by ascending row id), take the top m = floor(c*n) rows as
predicted outliers and the next m as boundary inliers, and form the
standardized difference of the mean log scores

    T_{c,k} = (M_out - M_in) / sqrt((V_out + V_in) / m)

with unbiased variances. Per contamination, the best k maximizes T. To
compare across contaminations (whose T values live on different scales),
each T_{c, k_opt_c} is mapped to its quantile under a noncentral t
distribution with df = 2m - 2 and a noncentrality parameter built from the
same standardized-difference formula applied to the moments averaged over
the k grid; the contamination with the largest quantile wins.

Tie-breaking is everywhere "smallest parameter wins" after exact float
comparison. A zero-variance cell (both blocks constant) gets its variance
sum floored at 1e-100, which sends T far above every statistic a
non-degenerate cell can produce while keeping it finite; an all-equal cell
has zero mean gap as well and lands at T = 0.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .core import (
    CellStats,
    ContaminationStats,
    Dataset,
    LofScoreTable,
    TunedModel,
    TuningGrid,
)
from .errors import (
    ContaminationTooLarge,
    ContaminationTooSmall,
    GridInfeasible,
    KOutOfRange,
)
from .lof import LofScores, lof_scores_over_grid
from .nct import NctParams, noncentral_t_cdf
from .projection import ProjectionSpec

VARIANCE_FLOOR = 1e-100


def descending_order(scores: np.ndarray) -> np.ndarray:
    """Indices sorting scores descending, equal scores by ascending row id."""
    return np.argsort(-scores, kind="stable")


def split_out_in(scores: LofScores, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Log scores of the top-m (outlier) and next-m (inlier) ranked blocks."""
    n = len(scores.scores)
    if m < 2:
        raise ContaminationTooSmall(f"block size m={m} < 2")
    if 2 * m > n:
        raise ContaminationTooLarge(f"2m={2 * m} exceeds n={n}")
    order = descending_order(scores.scores)
    ranked = scores.scores[order]
    return np.log(ranked[:m]), np.log(ranked[m : 2 * m])


def _standardized_diff(m_out: float, m_in: float, v_out: float, v_in: float,
                       m: int) -> float:
    var_sum = max(v_out + v_in, VARIANCE_FLOOR)
    return (m_out - m_in) / math.sqrt(var_sum / m)


def t_statistic(out_logs: np.ndarray, in_logs: np.ndarray) -> float:
    """Standardized mean difference between two equal-size log-score blocks."""
    out_logs = np.asarray(out_logs, dtype=np.float64)
    in_logs = np.asarray(in_logs, dtype=np.float64)
    if out_logs.shape != in_logs.shape or out_logs.ndim != 1:
        raise ValueError("blocks must be 1-d and of equal length")
    m = len(out_logs)
    if m < 2:
        raise ValueError(f"blocks need at least 2 values, got {m}")
    return _standardized_diff(
        float(out_logs.mean()), float(in_logs.mean()),
        float(out_logs.var(ddof=1)), float(in_logs.var(ddof=1)), m,
    )


def select_k_for_c(cells: Sequence[CellStats]) -> CellStats:
    """The cell maximizing T among one contamination's rows; ties -> smaller k."""
    if not cells:
        raise ValueError("no cells to select from")
    best = cells[0]
    for cell in cells[1:]:
        if cell.t > best.t or (cell.t == best.t and cell.k < best.k):
            best = cell
    return best


def select_c(per_c: Sequence[ContaminationStats]) -> ContaminationStats:
    """The row with the largest noncentral-t quantile; ties -> smaller c."""
    if not per_c:
        raise ValueError("no contamination rows to select from")
    best = per_c[0]
    for row in per_c[1:]:
        if row.quantile > best.quantile or (
            row.quantile == best.quantile and row.c < best.c
        ):
            best = row
    return best


def check_grid_feasible(grid: TuningGrid, n: int) -> None:
    for c in grid.contaminations:
        m = math.floor(c * n)
        if m < 2:
            raise GridInfeasible(c, n, f"floor(c*n)={m} < 2")
        if 2 * m > n:
            raise GridInfeasible(c, n, f"2*floor(c*n)={2 * m} > n")
    if grid.neighborhood_sizes[-1] > n - 1:
        raise KOutOfRange(
            f"largest neighborhood size {grid.neighborhood_sizes[-1]} exceeds n-1={n - 1}"
        )


def build_score_table(grid: TuningGrid, n: int,
                      per_k_scores: Sequence[LofScores]) -> LofScoreTable:
    """All (c, k) cells plus the per-contamination selection rows."""
    ks = grid.neighborhood_sizes
    log_ranked = {}
    for sc in per_k_scores:
        ranked = sc.scores[descending_order(sc.scores)]
        log_ranked[sc.k] = np.log(ranked)

    cells: list[CellStats] = []
    per_c: list[ContaminationStats] = []
    for c in grid.contaminations:
        m = math.floor(c * n)
        rows_for_c: list[CellStats] = []
        for k in ks:
            logs = log_ranked[k]
            out = logs[:m]
            inn = logs[m : 2 * m]
            m_out = float(out.mean())
            m_in = float(inn.mean())
            v_out = float(out.var(ddof=1))
            v_in = float(inn.var(ddof=1))
            rows_for_c.append(CellStats(
                c=c, k=k, m=m, m_out=m_out, m_in=m_in, v_out=v_out, v_in=v_in,
                t=_standardized_diff(m_out, m_in, v_out, v_in, m),
            ))
        cells.extend(rows_for_c)

        # cross-contamination comparison: the noncentrality estimate uses
        # moments averaged over the whole k grid
        ncp = _standardized_diff(
            float(np.mean([r.m_out for r in rows_for_c])),
            float(np.mean([r.m_in for r in rows_for_c])),
            float(np.mean([r.v_out for r in rows_for_c])),
            float(np.mean([r.v_in for r in rows_for_c])),
            m,
        )
        df = float(2 * m - 2)
        best_cell = select_k_for_c(rows_for_c)
        quantile = noncentral_t_cdf(best_cell.t, NctParams(df=df, ncp=ncp))
        per_c.append(ContaminationStats(
            c=c, m=m, df=df, ncp=ncp, k_opt=best_cell.k,
            t_at_k_opt=best_cell.t, quantile=quantile,
        ))
    return LofScoreTable(cells=tuple(cells), per_c=tuple(per_c))


def tune(data: Dataset, grid: TuningGrid, *,
         projection: ProjectionSpec | None = None,
         backend: str | None = None, threads: int = 1) -> TunedModel:
    """Run the full tuning loop and package the result.

    data must already be projected when a projection is used; the
    projection spec rides along on the model so scoring can replay it on
    raw inputs. The
    returned threshold is the floor(c_opt*n)-th largest training score at
    k_opt, so exactly that many training rows are predicted anomalous.
    """
    check_grid_feasible(grid, data.n)
    if projection is not None and projection.output_dim != data.p:
        raise GridInfeasible(0.0, data.n, "projection output_dim != data dimension")
    per_k = lof_scores_over_grid(data, grid.neighborhood_sizes,
                                 backend=backend, threads=threads)
    table = build_score_table(grid, data.n, per_k)
    chosen = select_c(table.per_c)
    k_opt = chosen.k_opt
    m_opt = chosen.m
    scores_opt = per_k[grid.neighborhood_sizes.index(k_opt)].scores
    threshold = float(scores_opt[descending_order(scores_opt)[m_opt - 1]])
    return TunedModel(
        training_points=data,
        k_opt=int(k_opt),
        c_opt=float(chosen.c),
        threshold=threshold,
        projection=projection,
        score_table=table,
    )


def predicted_training_outliers(scores: np.ndarray, m: int) -> np.ndarray:
    """Row ids of the top-m training scores under the rank tie-break."""
    return descending_order(np.asarray(scores, dtype=np.float64))[:m]


def write_diagnostics(table: LofScoreTable, destination: str | Path | IO[str]) -> None:
    """Tab-separated diagnostics: one row per (c, k) cell with the per-c
    selection columns repeated."""
    per_c = {row.c: row for row in table.per_c}
    lines = ["c\tk\tm\tM_out\tM_in\tV_out\tV_in\tT\tdf\tncp\tquantile\tk_opt"]
    for cell in table.cells:
        row = per_c[cell.c]
        lines.append("\t".join([
            repr(cell.c), str(cell.k), str(cell.m),
            repr(cell.m_out), repr(cell.m_in),
            repr(cell.v_out), repr(cell.v_in), repr(cell.t),
            repr(row.df), repr(row.ncp), repr(row.quantile), str(row.k_opt),
        ]))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
