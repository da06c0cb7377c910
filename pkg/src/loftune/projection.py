"""Gaussian random projection for dimension reduction before neighbor search.

Entries are i.i.d. N(0, 1/d) so squared distances are preserved in
expectation (Johnson-Lindenstrauss); no post-scaling is needed. Matrices are
regenerated from (input_dim, output_dim, seed) rather than persisted: the
sampler is pinned to the Philox-4x64-10 counter-based generator with normals
drawn by inverse CDF from open-interval uniforms, so the same triple yields
the same matrix on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .core import Dataset
from .errors import DimensionMismatch, InvalidDims


@dataclass(frozen=True, eq=False)
class ProjectionSpec:
    """A d x p projection matrix plus the triple that regenerates it."""

    input_dim: int
    output_dim: int
    seed: int
    matrix: np.ndarray = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectionSpec):
            return NotImplemented
        return (
            self.input_dim == other.input_dim
            and self.output_dim == other.output_dim
            and self.seed == other.seed
            and bool(np.array_equal(self.matrix, other.matrix))
        )


def make_projection(p: int, d: int, seed: int) -> ProjectionSpec:
    """Deterministic Gaussian projection spec for 1 <= d <= p."""
    p = int(p)
    d = int(d)
    seed = int(seed)
    if not (1 <= d <= p):
        raise InvalidDims(f"need 1 <= d <= p, got d={d}, p={p}")
    gen = np.random.Generator(np.random.Philox(key=seed))
    # uniforms strictly inside (0, 1): 53-bit integers shifted by half a step
    u = (gen.integers(0, 1 << 53, size=(d, p)).astype(np.float64) + 0.5) * 2.0**-53
    matrix = ndtri(u) / np.sqrt(d)
    matrix.flags.writeable = False
    return ProjectionSpec(input_dim=p, output_dim=d, seed=seed, matrix=matrix)


def project(data: Dataset, spec: ProjectionSpec) -> Dataset:
    """Apply the projection: output row i = matrix @ row i."""
    if data.p != spec.input_dim:
        raise DimensionMismatch(
            f"data has dimension {data.p}, projection expects {spec.input_dim}"
        )
    out = np.ascontiguousarray(data.rows @ spec.matrix.T)
    out.flags.writeable = False
    return Dataset(rows=out)
