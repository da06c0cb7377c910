"""Synthetic anomaly-detection benchmarks with geometric ground truth.

Four generator families, all seed-deterministic, all with anomaly-free
training sets (sampling stays strictly inside the support) and validation
labels derived from exact membership tests against the generating geometry:

* polygons -- 1,600 points in two random convex polygons in the plane (one
  polygon three times denser), validated on the 100 x 100 mesh over
  [-10, 10]^2. Polygons have 5-10 vertices on circles of radius 1-4
  centered in [-6, 6]^2.
* balls -- 1,600 points in two 3-d balls (small one at the origin, large
  one at (5,5,5)), validated on 637 cube-mesh points. The 5^3 mesh spans a
  cube enclosing the small ball with 10% margin (exactly 98 of its points
  fall outside the ball), and the 8^3 mesh sits inside the large ball, so
  the validation split is 98/637 anomalous at every seed.
* hypersphere / hypercube mixtures -- 2-10 well-separated shapes in high
  dimension; validation points are drawn around a random shape, landing
  outside its boundary (uniformly in a 1.2x shell) with probability p_out.

Mixture draws pick a shape uniformly and sample uniformly inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, validate_dataset

POLYGON_TRAIN_N = 1600
POLYGON_MESH_SIDE = 100
BALLS_TRAIN_N = 1600
BALL_SMALL_RADIUS = 1.5
BALL_LARGE_RADIUS = 3.0
BALL_LARGE_CENTER = (5.0, 5.0, 5.0)
BALL_SMALL_MESH = 5  # 5^3 = 125 points, margin 1.1 -> 98 outside
BALL_LARGE_MESH = 8  # 8^3 = 512 points, inscribed -> all inside
BALL_SMALL_MARGIN = 1.1
DENSITY_RATIO = 3.0


@dataclass(frozen=True)
class LabeledSet:
    """Validation data plus 0/1 labels (1 = anomaly)."""

    data: Dataset
    labels: np.ndarray

    def __post_init__(self):
        if len(self.labels) != self.data.n:
            raise ValueError("labels length must equal row count")

    @property
    def anomaly_fraction(self) -> float:
        return float(self.labels.mean())


# ------------------------------------------------------------------ polygons


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray  # (v, 2), counter-clockwise

    def area(self) -> float:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Half-plane test; boundary counts as inside."""
        pts = np.atleast_2d(points)
        v = self.vertices
        edges = np.roll(v, -1, axis=0) - v
        rel = pts[:, np.newaxis, :] - v[np.newaxis, :, :]
        cross = edges[np.newaxis, :, 0] * rel[:, :, 1] - edges[np.newaxis, :, 1] * rel[:, :, 0]
        return np.all(cross >= 0.0, axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform interior points via an area-weighted triangle fan."""
        v = self.vertices
        a, b, c = v[0], v[1:-1], v[2:]
        areas = 0.5 * np.abs(
            (b[:, 0] - a[0]) * (c[:, 1] - a[1]) - (c[:, 0] - a[0]) * (b[:, 1] - a[1])
        )
        tri = rng.choice(len(areas), size=count, p=areas / areas.sum())
        r1 = np.sqrt(rng.random(count))
        r2 = rng.random(count)
        return (
            a * (1.0 - r1)[:, np.newaxis]
            + b[tri] * (r1 * (1.0 - r2))[:, np.newaxis]
            + c[tri] * (r1 * r2)[:, np.newaxis]
        )


def _random_polygon(rng: np.random.Generator) -> ConvexPolygon:
    v = int(rng.integers(5, 11))
    angles = np.sort(rng.random(v) * 2.0 * np.pi)
    radius = rng.uniform(1.0, 4.0)
    center = rng.uniform(-6.0, 6.0, size=2)
    verts = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return ConvexPolygon(vertices=verts)


def gen_polygons(seed: int) -> tuple[Dataset, LabeledSet]:
    """Two-polygon training set and the labeled [-10, 10]^2 validation mesh."""
    rng = np.random.default_rng(seed)
    dense, sparse = _random_polygon(rng), _random_polygon(rng)
    # counts proportional to density * area, dense polygon 3x the density
    w_dense = DENSITY_RATIO * dense.area()
    w_sparse = sparse.area()
    n_dense = int(round(POLYGON_TRAIN_N * w_dense / (w_dense + w_sparse)))
    n_dense = min(max(n_dense, 1), POLYGON_TRAIN_N - 1)
    train = np.vstack([
        dense.sample(rng, n_dense),
        sparse.sample(rng, POLYGON_TRAIN_N - n_dense),
    ])

    axis = np.linspace(-10.0, 10.0, POLYGON_MESH_SIDE)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    mesh = np.column_stack([gx.ravel(), gy.ravel()])
    inside = dense.contains(mesh) | sparse.contains(mesh)
    labels = (~inside).astype(np.int64)
    return (
        validate_dataset(train),
        LabeledSet(data=validate_dataset(mesh), labels=labels),
    )


def polygons_geometry(seed: int) -> tuple[ConvexPolygon, ConvexPolygon]:
    """The (dense, sparse) polygons a seed generates, for label auditing."""
    rng = np.random.default_rng(seed)
    return _random_polygon(rng), _random_polygon(rng)


# --------------------------------------------------------------------- balls


def _uniform_in_ball(rng: np.random.Generator, count: int, dim: int,
                     center: np.ndarray, radius: float) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return center + g * r[:, np.newaxis]


@dataclass(frozen=True)
class BallsGeometry:
    centers: np.ndarray  # (2, 3)
    radii: np.ndarray  # (2,)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.zeros(len(pts), dtype=bool)
        for center, radius in zip(self.centers, self.radii):
            inside |= np.linalg.norm(pts - center, axis=1) <= radius
        return inside


def balls_geometry() -> BallsGeometry:
    return BallsGeometry(
        centers=np.array([[0.0, 0.0, 0.0], list(BALL_LARGE_CENTER)]),
        radii=np.array([BALL_SMALL_RADIUS, BALL_LARGE_RADIUS]),
    )


def _cube_mesh(center: np.ndarray, half_side: float, side_points: int) -> np.ndarray:
    axis = np.linspace(-half_side, half_side, side_points)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    return center + np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def gen_balls(seed: int) -> tuple[Dataset, LabeledSet]:
    """Two-ball training set and the 637-point cube-mesh validation set."""
    rng = np.random.default_rng(seed)
    geo = balls_geometry()
    volumes = geo.radii**3
    n_small = int(round(BALLS_TRAIN_N * volumes[0] / volumes.sum()))
    train = np.vstack([
        _uniform_in_ball(rng, n_small, 3, geo.centers[0], float(geo.radii[0])),
        _uniform_in_ball(rng, BALLS_TRAIN_N - n_small, 3, geo.centers[1], float(geo.radii[1])),
    ])

    small_mesh = _cube_mesh(geo.centers[0], BALL_SMALL_MARGIN * float(geo.radii[0]),
                            BALL_SMALL_MESH)
    # large-ball cube sits inside the ball: corners at 0.95 * radius
    large_mesh = _cube_mesh(geo.centers[1], 0.95 * float(geo.radii[1]) / math.sqrt(3.0),
                            BALL_LARGE_MESH)
    mesh = np.vstack([small_mesh, large_mesh])
    labels = (~geo.contains(mesh)).astype(np.int64)
    return (
        validate_dataset(train),
        LabeledSet(data=validate_dataset(mesh), labels=labels),
    )


# ----------------------------------------------------- high-dim mixtures


@dataclass(frozen=True)
class MixtureGeometry:
    """Centers plus radii (spheres) or half-widths (cubes)."""

    kind: str  # "sphere" or "cube"
    centers: np.ndarray  # (m, dim)
    sizes: np.ndarray  # (m,)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.zeros(len(pts), dtype=bool)
        for center, size in zip(self.centers, self.sizes):
            if self.kind == "sphere":
                inside |= np.linalg.norm(pts - center, axis=1) <= size
            else:
                inside |= np.max(np.abs(pts - center), axis=1) <= size
        return inside


def _draw_mixture_geometry(rng: np.random.Generator, kind: str, dim: int) -> MixtureGeometry:
    count = int(rng.integers(2, 11))
    sizes = rng.uniform(2.0, 5.0, size=count)
    # resample center sets until shapes are comfortably separated
    for _ in range(1000):
        centers = rng.uniform(-50.0, 50.0, size=(count, dim))
        ok = True
        for i in range(count):
            for j in range(i + 1, count):
                gap = 1.5 * (sizes[i] + sizes[j])
                if kind == "sphere":
                    sep = np.linalg.norm(centers[i] - centers[j])
                else:
                    sep = np.max(np.abs(centers[i] - centers[j]))
                if sep < gap:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return MixtureGeometry(kind=kind, centers=centers, sizes=sizes)
    raise RuntimeError("could not separate mixture components")


def _sample_inside(rng: np.random.Generator, geo: MixtureGeometry,
                   which: np.ndarray) -> np.ndarray:
    dim = geo.centers.shape[1]
    out = np.empty((len(which), dim))
    for comp in np.unique(which):
        sel = which == comp
        count = int(sel.sum())
        center = geo.centers[comp]
        size = float(geo.sizes[comp])
        if geo.kind == "sphere":
            out[sel] = _uniform_in_ball(rng, count, dim, center, size)
        else:
            out[sel] = center + rng.uniform(-size, size, size=(count, dim))
    return out


def _sample_shell(rng: np.random.Generator, geo: MixtureGeometry,
                  which: np.ndarray, expand: float = 1.2) -> np.ndarray:
    """Uniform in the region between a shape and its 1.2x enlargement."""
    dim = geo.centers.shape[1]
    out = np.empty((len(which), dim))
    for comp in np.unique(which):
        sel = which == comp
        count = int(sel.sum())
        center = geo.centers[comp]
        size = float(geo.sizes[comp])
        if geo.kind == "sphere":
            g = rng.standard_normal((count, dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            u = rng.random(count)
            r = size * (1.0 + (expand**dim - 1.0) * u) ** (1.0 / dim)
            out[sel] = center + g * r[:, np.newaxis]
        else:
            # rejection from the enlarged cube; the inner cube holds a
            # (1/expand)^dim fraction of it, negligible in high dimension
            got = 0
            buf = np.empty((count, dim))
            while got < count:
                draw = center + rng.uniform(-expand * size, expand * size,
                                            size=(count - got, dim))
                keep = np.max(np.abs(draw - center), axis=1) > size
                kept = draw[keep]
                buf[got : got + len(kept)] = kept
                got += len(kept)
            out[sel] = buf
    return out


def _gen_mixture(kind: str, seed: int, dim: int, n_train: int, n_valid: int,
                 p_out: float) -> tuple[Dataset, LabeledSet, MixtureGeometry]:
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    geo = _draw_mixture_geometry(rng, kind, dim)
    count = len(geo.sizes)

    which = rng.integers(0, count, size=n_train)
    train = _sample_inside(rng, geo, which)

    which_v = rng.integers(0, count, size=n_valid)
    outside = rng.random(n_valid) < p_out
    valid = np.empty((n_valid, dim))
    if (~outside).any():
        valid[~outside] = _sample_inside(rng, geo, which_v[~outside])
    if outside.any():
        valid[outside] = _sample_shell(rng, geo, which_v[outside])
    labels = (~geo.contains(valid)).astype(np.int64)
    return (
        validate_dataset(train),
        LabeledSet(data=validate_dataset(valid), labels=labels),
        geo,
    )


def gen_hypersphere_mixture(seed: int, dim: int = 100, n_train: int = 100_000,
                            n_valid: int = 10_000, p_out: float = 0.05,
                            with_geometry: bool = False):
    """Mixture of 2-10 spheres; validation drawn around them, outside with
    probability p_out."""
    train, valid, geo = _gen_mixture("sphere", seed, dim, n_train, n_valid, p_out)
    return (train, valid, geo) if with_geometry else (train, valid)


def gen_hypercube_mixture(seed: int, dim: int = 100, n_train: int = 100_000,
                          n_valid: int = 10_000, p_out: float = 0.05,
                          with_geometry: bool = False):
    """Mixture of 2-10 axis-aligned cubes, same protocol as the spheres."""
    train, valid, geo = _gen_mixture("cube", seed, dim, n_train, n_valid, p_out)
    return (train, valid, geo) if with_geometry else (train, valid)
