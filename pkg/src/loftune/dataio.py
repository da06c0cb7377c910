"""CSV reading/writing for the command-line pipeline.

Dialect: comma-separated, decimal point, UTF-8; an optional header is
detected by a non-numeric first row. Validation files carry a trailing
`label` column (0 normal, 1 anomaly); training and scoring files are
feature-only. Floats are written with repr so values round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import Dataset, validate_dataset
from .datagen import LabeledSet
from .errors import CsvParseError, IoFailure


def write_points_csv(path: str | Path, data: Dataset,
                     labels: np.ndarray | None = None) -> None:
    names = [f"f{j}" for j in range(data.p)]
    if labels is not None:
        names.append("label")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for i in range(data.n):
                row = [repr(float(v)) for v in data.rows[i]]
                if labels is not None:
                    row.append(str(int(labels[i])))
                writer.writerow(row)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_points_csv(path: str | Path, want_labels: bool = False
                    ) -> Dataset | LabeledSet:
    """Parse a feature CSV; with want_labels, split off the label column.

    The label column is the one named `label` when a header is present,
    else the last column. Parse errors report 1-based line numbers.
    """
    path = str(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]  # ignore blank lines
    if not rows:
        raise CsvParseError(path, 1, "file has no rows")

    header: list[str] | None = None
    first_line = 1
    if any(not _is_float(cell) for cell in rows[0]):
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        first_line = 2
        if not rows:
            raise CsvParseError(path, 2, "header but no data rows")

    label_col: int | None = None
    if want_labels:
        if header is not None:
            if "label" in header:
                label_col = header.index("label")
            else:
                raise CsvParseError(path, 1, "no `label` column in header")
        else:
            label_col = len(rows[0]) - 1

    width = len(rows[0])
    values = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CsvParseError(path, first_line + i,
                                f"expected {width} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise CsvParseError(path, first_line + i,
                                    f"field {j + 1} is not a number: {cell!r}") from None

    if label_col is None:
        return validate_dataset(values)
    labels = values[:, label_col]
    if not np.all((labels == 0.0) | (labels == 1.0)):
        bad = int(np.flatnonzero(~((labels == 0.0) | (labels == 1.0)))[0])
        raise CsvParseError(path, first_line + bad, "label must be 0 or 1")
    features = np.delete(values, label_col, axis=1)
    return LabeledSet(data=validate_dataset(features),
                      labels=labels.astype(np.int64))
