"""Poisson point process sampling and fixed-radius neighbor queries.

Point sets live on rectangular windows. All sampling is a pure function of
(parameters, seed): per-trial and per-stream seeds are derived from a master
seed with a counter-based splitting scheme, so results never depend on
execution order or parallelism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Window",
    "PointSet",
    "GridIndex",
    "split_seed",
    "trial_seed",
    "sample_ppp",
    "build_grid_index",
    "neighbors_within",
    "save_points_csv",
    "load_points_xy",
]


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle in meters."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if not math.isfinite(v):
                raise ValueError("window coordinates must be finite")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("degenerate window: need x_max > x_min and y_max > y_min")

    @classmethod
    def square(cls, size: float, origin: tuple[float, float] = (0.0, 0.0)) -> "Window":
        x0, y0 = origin
        return cls(x0, y0, x0 + size, y0 + size)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def expand(self, margin: float) -> "Window":
        """Window grown by `margin` on all four sides."""
        if margin < 0:
            raise ValueError("margin must be >= 0")
        if margin == 0:
            return self
        return Window(self.x_min - margin, self.y_min - margin,
                      self.x_max + margin, self.y_max + margin)

    def contains(self, xy: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the closed rectangle."""
        xy = np.atleast_2d(xy)
        return ((xy[:, 0] >= self.x_min) & (xy[:, 0] <= self.x_max)
                & (xy[:, 1] >= self.y_min) & (xy[:, 1] <= self.y_max))


@dataclass(frozen=True)
class PointSet:
    """One realization of a planar point process on a window.

    `points` is an immutable (n, 2) float array; the row order is the sampling
    order and is the stable index space used everywhere downstream.
    """

    points: np.ndarray
    intensity: float
    window: Window
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pts.size and not self.window.contains(pts).all():
            raise ValueError("points fall outside the window")

    @property
    def n(self) -> int:
        return len(self.points)


def split_seed(seed: int, *key: int) -> int:
    """Derive a child seed from (seed, key) with a counter-based mixer.

    Identical inputs give identical outputs on every platform, which makes
    per-trial streams reproducible under any scheduling of the trials.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed for trial number `trial` under `master_seed`."""
    return split_seed(master_seed, trial)


def sample_ppp(intensity: float, window: Window, seed: int) -> PointSet:
    """Sample a homogeneous Poisson point process on `window`.

    The count is Poisson(intensity * area) and coordinates are i.i.d. uniform.
    Deterministic given (intensity, window, seed).
    """
    if not math.isfinite(intensity) or intensity < 0:
        raise ValueError(f"intensity must be finite and >= 0, got {intensity}")
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(intensity * window.area))
    xs = rng.uniform(window.x_min, window.x_max, size=count)
    ys = rng.uniform(window.y_min, window.y_max, size=count)
    return PointSet(np.column_stack([xs, ys]), intensity, window, int(seed))


@dataclass(frozen=True)
class GridIndex:
    """Uniform-grid spatial index over a point set.

    A point at (x, y) lives in bucket (floor(x / cell_size), floor(y / cell_size)).
    """

    cell_size: float
    buckets: dict = field(repr=False)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell_size)), int(math.floor(y / self.cell_size)))


def build_grid_index(points: PointSet, cell_size: float) -> GridIndex:
    """Bin all point indices into grid cells of side `cell_size`."""
    if not (cell_size > 0) or not math.isfinite(cell_size):
        raise ValueError(f"cell_size must be > 0, got {cell_size}")
    buckets: dict[tuple[int, int], np.ndarray] = {}
    if points.n:
        cells = np.floor(points.points / cell_size).astype(np.int64)
        order = np.lexsort((cells[:, 1], cells[:, 0]))
        sorted_cells = cells[order]
        change = np.flatnonzero(np.any(np.diff(sorted_cells, axis=0), axis=1)) + 1
        starts = np.concatenate([[0], change, [points.n]])
        for a, b in zip(starts[:-1], starts[1:]):
            cx, cy = sorted_cells[a]
            buckets[(int(cx), int(cy))] = np.sort(order[a:b])
    return GridIndex(cell_size=cell_size, buckets=buckets)


def neighbors_within(index: GridIndex, points: PointSet, query: tuple[float, float],
                     radius: float) -> np.ndarray:
    """Indices of all points with Euclidean distance <= radius from `query`.

    Closed-ball semantics: a point exactly at `radius` is included. Scans the
    ceil(radius / cell_size)-ring of cells around the query's cell.
    """
    if radius < 0 or not math.isfinite(radius):
        raise ValueError(f"radius must be >= 0, got {radius}")
    qx, qy = float(query[0]), float(query[1])
    cx, cy = index.cell_of(qx, qy)
    ring = int(math.ceil(radius / index.cell_size))
    candidates = []
    for dx in range(-ring, ring + 1):
        for dy in range(-ring, ring + 1):
            bucket = index.buckets.get((cx + dx, cy + dy))
            if bucket is not None:
                candidates.append(bucket)
    if not candidates:
        return np.empty(0, dtype=np.int64)
    cand = np.concatenate(candidates)
    d2 = np.sum((points.points[cand] - [qx, qy]) ** 2, axis=1)
    return np.sort(cand[d2 <= radius * radius])


def save_points_csv(points: PointSet, path) -> None:
    """Write `x,y` rows at 9 significant digits, one point per row."""
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for x, y in points.points:
            fh.write(f"{x:.9g},{y:.9g}\n")


def load_points_xy(path) -> np.ndarray:
    """Read an `x,y` CSV back into an (n, 2) array."""
    return np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2).reshape(-1, 2)
