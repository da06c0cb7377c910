"""Shared domain types, dataset validation, and model persistence.

All types are immutable after construction (arrays are marked read-only), so
they are safe to share across threads. Reals are 64-bit floats throughout:
the tuning statistic subtracts nearly-equal log scores and 32-bit precision
would make the argmax selections tie-unstable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import (
    DatasetError,
    DeserializeFailure,
    EmptyDataset,
    InvalidGrid,
    InvariantViolation,
    IoFailure,
    NonFiniteValue,
    RaggedRows,
)

if TYPE_CHECKING:
    from .projection import ProjectionSpec

MODEL_FORMAT_VERSION = 1


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x p matrix of finite feature rows with stable row indices."""

    rows: np.ndarray

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.rows[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.rows.shape == other.rows.shape and bool(
            np.array_equal(self.rows, other.rows)
        )

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, p={self.p})"


def validate_dataset(raw: Iterable[Sequence[float]] | np.ndarray) -> Dataset:
    """Check shape and finiteness of raw rows and wrap them as a Dataset.

    Never raises anything but the structured errors below, for any
    finite-length input.

    Raises:
        EmptyDataset: no rows, or zero-width rows.
        RaggedRows: inconsistent row dimensions.
        NonFiniteValue: NaN/inf (or non-numeric) entry, with row and column.
    """
    if isinstance(raw, np.ndarray):
        if raw.ndim != 2:
            raise DatasetError(f"expected 2-d data, got {raw.ndim}-d")
        try:
            arr = raw.astype(np.float64, copy=True)
        except (TypeError, ValueError):
            raise NonFiniteValue(0, 0) from None
    else:
        rows = list(raw)
        if not rows:
            raise EmptyDataset("no rows")
        widths = []
        for r in rows:
            try:
                widths.append(len(r))
            except TypeError:
                widths.append(-1)  # scalar row
        for i, w in enumerate(widths):
            if w != widths[0]:
                raise RaggedRows(i, widths[0], w)
        if widths[0] <= 0:
            raise EmptyDataset("rows have zero width")
        arr = np.empty((len(rows), widths[0]), dtype=np.float64)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                try:
                    arr[i, j] = float(v)
                except (TypeError, ValueError):
                    raise NonFiniteValue(i, j) from None
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyDataset(f"empty shape {arr.shape}")
    finite = np.isfinite(arr)
    if not finite.all():
        i, j = np.argwhere(~finite)[0]
        raise NonFiniteValue(int(i), int(j))
    return Dataset(rows=_readonly(arr))


@dataclass(frozen=True)
class TuningGrid:
    """Candidate contamination values and neighborhood sizes.

    Both sequences must be non-empty and strictly increasing; contaminations
    live in (0, 0.5) because the tuning statistic needs two disjoint blocks
    of floor(c*n) points each. Size-dependent feasibility (floor(c*n) >= 2,
    2*floor(c*n) <= n) is checked at tune time.
    """

    contaminations: tuple[float, ...]
    neighborhood_sizes: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(float(c) for c in self.contaminations)
        ks = tuple(int(k) for k in self.neighborhood_sizes)
        object.__setattr__(self, "contaminations", cs)
        object.__setattr__(self, "neighborhood_sizes", ks)
        if not cs or not ks:
            raise InvalidGrid("contaminations and neighborhood_sizes must be non-empty")
        if any(not (0.0 < c < 0.5) for c in cs):
            raise InvalidGrid(f"contaminations must lie in (0, 0.5): {cs}")
        if any(b <= a for a, b in zip(cs, cs[1:])):
            raise InvalidGrid(f"contaminations must be strictly increasing: {cs}")
        if ks[0] < 1:
            raise InvalidGrid(f"neighborhood sizes must be >= 1: {ks}")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise InvalidGrid(f"neighborhood sizes must be strictly increasing: {ks}")


@dataclass(frozen=True)
class CellStats:
    """Per-(c, k) statistics of the log-LOF score blocks."""

    c: float
    k: int
    m: int  # floor(c * n)
    m_out: float  # mean log score, top-m block
    m_in: float  # mean log score, next-m block
    v_out: float
    v_in: float
    t: float


@dataclass(frozen=True)
class ContaminationStats:
    """Per-contamination selection row: k-averaged moments and the quantile."""

    c: float
    m: int
    df: float  # 2m - 2
    ncp: float
    k_opt: int
    t_at_k_opt: float
    quantile: float


@dataclass(frozen=True)
class LofScoreTable:
    """Diagnostics grid emitted by the tuner: all cells plus per-c rows."""

    cells: tuple[CellStats, ...]
    per_c: tuple[ContaminationStats, ...]

    def __post_init__(self):
        for cell in self.cells:
            if cell.v_out < 0 or cell.v_in < 0:
                raise InvariantViolation(f"negative variance in cell {cell}")
        for row in self.per_c:
            if row.df < 2:
                raise InvariantViolation(f"df < 2 in row {row}")
            if not (0.0 <= row.quantile <= 1.0):
                raise InvariantViolation(f"quantile outside [0,1] in row {row}")

    def cell(self, c: float, k: int) -> CellStats:
        for cs in self.cells:
            if cs.c == c and cs.k == k:
                return cs
        raise KeyError((c, k))


@dataclass(frozen=True, eq=False)
class TunedModel:
    """Persisted tuning result.

    training_points are post-projection when a projection was used; threshold
    is the LOF score of the rank-floor(c_opt*n) training point in descending
    score order, so exactly that many training points score >= threshold
    under the (score, row id) tie-break.
    """

    training_points: Dataset
    k_opt: int
    c_opt: float
    threshold: float
    projection: "ProjectionSpec | None" = None
    score_table: LofScoreTable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.k_opt < 1:
            raise InvariantViolation(f"k_opt must be >= 1, got {self.k_opt}")
        if not (0.0 < self.c_opt < 0.5):
            raise InvariantViolation(f"c_opt must be in (0, 0.5), got {self.c_opt}")
        if not (self.threshold > 0.0) or not math.isfinite(self.threshold):
            raise InvariantViolation(f"threshold must be positive, got {self.threshold}")
        if self.k_opt > self.training_points.n - 1:
            raise InvariantViolation(
                f"k_opt={self.k_opt} too large for n={self.training_points.n}"
            )
        if self.projection is not None and (
            self.projection.output_dim != self.training_points.p
        ):
            raise InvariantViolation(
                "projection output_dim does not match stored training dimension"
            )
        if self.score_table is not None:
            ks = {cell.k for cell in self.score_table.cells}
            cs = {cell.c for cell in self.score_table.cells}
            if self.k_opt not in ks or self.c_opt not in cs:
                raise InvariantViolation("(c_opt, k_opt) not on the tuning grid")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TunedModel):
            return NotImplemented
        return (
            self.k_opt == other.k_opt
            and self.c_opt == other.c_opt
            and self.threshold == other.threshold
            and self.training_points == other.training_points
            and self.projection == other.projection
            and self.score_table == other.score_table
        )


# ----------------------------------------------------------- persistence

# The model file is a self-describing JSON document. Floats serialize via
# repr (shortest round-trip), so reload is bit-for-bit exact.


def _model_to_tree(model: TunedModel) -> dict:
    tree: dict = {
        "format_version": MODEL_FORMAT_VERSION,
        "k_opt": model.k_opt,
        "c_opt": model.c_opt,
        "threshold": model.threshold,
        "training_points": {
            "n": model.training_points.n,
            "p": model.training_points.p,
            "values": model.training_points.rows.ravel().tolist(),
        },
    }
    if model.projection is not None:
        tree["projection"] = {
            "seed": model.projection.seed,
            "input_dim": model.projection.input_dim,
            "output_dim": model.projection.output_dim,
        }
    if model.score_table is not None:
        tree["score_table"] = {
            "cells": [
                {
                    "c": c.c, "k": c.k, "m": c.m,
                    "M_out": c.m_out, "M_in": c.m_in,
                    "V_out": c.v_out, "V_in": c.v_in, "T": c.t,
                }
                for c in model.score_table.cells
            ],
            "per_c": [
                {
                    "c": r.c, "m": r.m, "df": r.df, "ncp": r.ncp,
                    "k_opt": r.k_opt, "T": r.t_at_k_opt, "quantile": r.quantile,
                }
                for r in model.score_table.per_c
            ],
        }
    return tree


def save_model(model: TunedModel, destination: str | Path | IO[bytes] | None = None) -> bytes:
    """Serialize a model; write to destination when given, return the bytes."""
    payload = json.dumps(_model_to_tree(model), indent=1, allow_nan=False).encode("utf-8")
    if destination is not None:
        try:
            if hasattr(destination, "write"):
                destination.write(payload)
            else:
                Path(destination).write_bytes(payload)
        except OSError as exc:
            raise IoFailure(f"cannot write model: {exc}") from exc
    return payload


def _require(tree: dict, key: str, kind) -> object:
    if key not in tree:
        raise DeserializeFailure(f"missing field {key!r}")
    value = tree[key]
    if isinstance(value, bool):
        raise DeserializeFailure(f"field {key!r} has wrong type bool")
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise DeserializeFailure(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def load_model(source: str | Path | IO[bytes] | bytes) -> TunedModel:
    """Parse and re-validate a model produced by save_model.

    Structural invariants (dimensions, finiteness, threshold positivity,
    grid membership) are re-checked; the rank-count property of the
    threshold is established at tune time and not recomputed here.
    """
    if isinstance(source, bytes):
        payload = source
    elif hasattr(source, "read"):
        payload = source.read()
    else:
        try:
            payload = Path(source).read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read model: {exc}") from exc
    try:
        tree = json.loads(payload.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise DeserializeFailure("not valid UTF-8", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise DeserializeFailure(f"not valid JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(tree, dict):
        raise DeserializeFailure("top-level document must be an object")

    version = _require(tree, "format_version", int)
    if version != MODEL_FORMAT_VERSION:
        raise DeserializeFailure(
            f"unsupported format_version {version}, expected {MODEL_FORMAT_VERSION}"
        )
    k_opt = _require(tree, "k_opt", int)
    c_opt = _require(tree, "c_opt", float)
    threshold = _require(tree, "threshold", float)

    tp = _require(tree, "training_points", dict)
    n = _require(tp, "n", int)
    p = _require(tp, "p", int)
    values = _require(tp, "values", list)
    if len(values) != n * p:
        raise DeserializeFailure(
            f"training_points has {len(values)} values, expected n*p={n * p}"
        )
    try:
        arr = np.array(values, dtype=np.float64).reshape(n, p)
    except (ValueError, TypeError) as exc:
        raise DeserializeFailure(f"training_points values malformed: {exc}") from exc
    try:
        data = validate_dataset(arr)
    except Exception as exc:
        raise InvariantViolation(f"stored training points invalid: {exc}") from exc

    projection = None
    if "projection" in tree:
        from .errors import InvalidDims
        from .projection import make_projection

        block = _require(tree, "projection", dict)
        try:
            projection = make_projection(
                _require(block, "input_dim", int),
                _require(block, "output_dim", int),
                _require(block, "seed", int),
            )
        except InvalidDims as exc:
            raise InvariantViolation(f"stored projection invalid: {exc}") from exc

    table = None
    if "score_table" in tree:
        block = _require(tree, "score_table", dict)
        cells = tuple(
            CellStats(
                c=_require(c, "c", float), k=_require(c, "k", int),
                m=_require(c, "m", int),
                m_out=_require(c, "M_out", float), m_in=_require(c, "M_in", float),
                v_out=_require(c, "V_out", float), v_in=_require(c, "V_in", float),
                t=_require(c, "T", float),
            )
            for c in _require(block, "cells", list)
        )
        per_c = tuple(
            ContaminationStats(
                c=_require(r, "c", float), m=_require(r, "m", int),
                df=_require(r, "df", float), ncp=_require(r, "ncp", float),
                k_opt=_require(r, "k_opt", int), t_at_k_opt=_require(r, "T", float),
                quantile=_require(r, "quantile", float),
            )
            for r in _require(block, "per_c", list)
        )
        table = LofScoreTable(cells=cells, per_c=per_c)

    return TunedModel(
        training_points=data,
        k_opt=k_opt,
        c_opt=c_opt,
        threshold=threshold,
        projection=projection,
        score_table=table,
    )
