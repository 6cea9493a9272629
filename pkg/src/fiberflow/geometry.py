"""Fibered subsets of R^kappa and exact point-to-fiber distances.

The quotient map pi: X -> Y is represented by its finite data: an ordered
list of base points sampled from Y together with one fiber geometry per base
point (the sample of pi^{-1}(y)).  A fiber is either a finite point set or a
finite union of line segments; distances to a fiber are computed exactly in
both cases (closest point on a segment via the clamped projection, no
sampling involved).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import GeometryError

Array = np.ndarray

DEFAULT_TAU_GEO = 1e-9


def _as_float_array(data, name: str) -> Array:
    arr = np.asarray(data, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise GeometryError(f"{name} contains non-finite coordinates")
    return arr


@dataclass(frozen=True, eq=False)
class PointSet:
    """Fiber sampled as a finite set of points, shape (n, kappa)."""

    points: Array

    def __post_init__(self):
        arr = _as_float_array(self.points, "PointSet.points")
        if arr.ndim != 2:
            raise GeometryError("PointSet.points must be a 2-d array (n, kappa)")
        object.__setattr__(self, "points", arr)

    @property
    def kappa(self) -> int:
        return self.points.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.points.shape[0] == 0

    def sample_points(self) -> Array:
        return self.points


@dataclass(frozen=True, eq=False)
class SegmentUnion:
    """Fiber given as a union of segments, shape (n, 2, kappa)."""

    segments: Array

    def __post_init__(self):
        arr = _as_float_array(self.segments, "SegmentUnion.segments")
        if arr.ndim != 3 or arr.shape[1] != 2:
            raise GeometryError("SegmentUnion.segments must have shape (n, 2, kappa)")
        object.__setattr__(self, "segments", arr)

    @property
    def kappa(self) -> int:
        return self.segments.shape[2]

    @property
    def is_empty(self) -> bool:
        return self.segments.shape[0] == 0

    def degenerate_segments(self) -> list[int]:
        """Indices of segments whose endpoints coincide."""
        if self.is_empty:
            return []
        gaps = np.linalg.norm(self.segments[:, 0] - self.segments[:, 1], axis=1)
        return [int(i) for i in np.nonzero(gaps == 0.0)[0]]

    def sample_points(self) -> Array:
        return self.segments.reshape(-1, self.kappa)


FiberGeometry = Union[PointSet, SegmentUnion]


class FiberDistance(NamedTuple):
    value: float
    witness: Array


def point_segment_closest(p: Array, a: Array, b: Array) -> tuple[float, Array]:
    """Exact distance from point `p` to segment `a`-`b`, with closest point."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a)), a.copy()
    s = float((p - a) @ ab) / denom
    s = min(1.0, max(0.0, s))
    closest = a + s * ab
    return float(np.linalg.norm(p - closest)), closest


def dist_to_fiber(p, fiber: FiberGeometry) -> FiberDistance:
    """Euclidean distance from `p` to the fiber, with a witness attaining it.

    Exact minimum over sample points, or over the exact point-to-segment
    distances when the fiber is a segment union.
    """
    p = np.asarray(p, dtype=float)
    if fiber.is_empty:
        raise GeometryError("cannot compute the distance to an empty fiber")
    if isinstance(fiber, PointSet):
        diffs = fiber.points - p[None, :]
        dists = np.linalg.norm(diffs, axis=1)
        k = int(np.argmin(dists))
        return FiberDistance(float(dists[k]), fiber.points[k].copy())
    best = None
    for a, b in fiber.segments:
        d, closest = point_segment_closest(p, a, b)
        if best is None or d < best[0]:
            best = (d, closest)
    return FiberDistance(best[0], best[1])


def fiber_distances_to_points(points: Array, fiber: FiberGeometry) -> Array:
    """Vector of exact distances from each row of `points` to the fiber."""
    if fiber.is_empty:
        raise GeometryError("cannot compute distances to an empty fiber")
    if isinstance(fiber, PointSet):
        diffs = points[:, None, :] - fiber.points[None, :, :]
        return np.linalg.norm(diffs, axis=2).min(axis=1)
    best = np.full(points.shape[0], np.inf)
    for a, b in fiber.segments:
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.linalg.norm(points - a[None, :], axis=1)
        else:
            s = np.clip((points - a[None, :]) @ ab / denom, 0.0, 1.0)
            closest = a[None, :] + s[:, None] * ab[None, :]
            d = np.linalg.norm(points - closest, axis=1)
        np.minimum(best, d, out=best)
    return best


def segment_segment_distance(p1: Array, q1: Array, p2: Array, q2: Array) -> float:
    """Minimal distance between segments p1-q1 and p2-q2 (any dimension)."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a == 0.0 and e == 0.0:
        return float(np.linalg.norm(r))
    if a == 0.0:
        t = min(1.0, max(0.0, f / e))
        return float(np.linalg.norm(p1 - (p2 + t * d2)))
    c = float(d1 @ r)
    if e == 0.0:
        s = min(1.0, max(0.0, -c / a))
        return float(np.linalg.norm(p1 + s * d1 - p2))
    b = float(d1 @ d2)
    denom = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom != 0.0 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm(p1 + s * d1 - (p2 + t * d2)))


def fiber_min_distance(fa: FiberGeometry, fb: FiberGeometry) -> float:
    """Minimal distance between two fibers (exact for points and segments)."""
    if fa.is_empty or fb.is_empty:
        raise GeometryError("cannot compute distance between empty fibers")
    if isinstance(fa, PointSet) and isinstance(fb, PointSet):
        diffs = fa.points[:, None, :] - fb.points[None, :, :]
        return float(np.linalg.norm(diffs, axis=2).min())
    if isinstance(fa, PointSet):
        return float(fiber_distances_to_points(fa.points, fb).min())
    if isinstance(fb, PointSet):
        return float(fiber_distances_to_points(fb.points, fa).min())
    best = np.inf
    for a1, b1 in fa.segments:
        for a2, b2 in fb.segments:
            best = min(best, segment_segment_distance(a1, b1, a2, b2))
    return float(best)


@dataclass(frozen=True, eq=False)
class FiberedSpace:
    """Finite sample of a fibered space: base points of Y plus one fiber each.

    Immutable after construction; all operations on it are pure, so instances
    are safe to share across worker processes.
    """

    kappa: int
    base_points: Array
    fibers: tuple[FiberGeometry, ...]

    def __post_init__(self):
        pts = _as_float_array(self.base_points, "base_points")
        if pts.ndim != 2 or pts.shape[1] != self.kappa:
            raise GeometryError(f"base_points must have shape (m, {self.kappa})")
        if pts.shape[0] == 0:
            raise GeometryError("base_points must be nonempty")
        if len(self.fibers) != pts.shape[0]:
            raise GeometryError("need exactly one fiber per base point")
        for i, fib in enumerate(self.fibers):
            if fib.kappa != self.kappa:
                raise GeometryError(f"fiber {i} has ambient dimension {fib.kappa} != {self.kappa}")
        object.__setattr__(self, "base_points", pts)
        object.__setattr__(self, "fibers", tuple(self.fibers))

    @property
    def n_base(self) -> int:
        return self.base_points.shape[0]

    def base_distance_matrix(self) -> Array:
        diffs = self.base_points[:, None, :] - self.base_points[None, :, :]
        return np.linalg.norm(diffs, axis=2)


@dataclass
class SpaceReport:
    """Outcome of the foliation checks; failures are carried, not raised."""

    bounded: bool
    duplicate_base_pairs: list[tuple[int, int]]
    empty_fibers: list[int]
    degenerate_segments: list[tuple[int, int]]
    overlaps: list[tuple[int, int, float]]
    tau_geo: float

    @property
    def ok(self) -> bool:
        return (
            self.bounded
            and not self.duplicate_base_pairs
            and not self.empty_fibers
            and not self.overlaps
            and not self.degenerate_segments
        )


def validate_space(space: FiberedSpace, tau_geo: float = DEFAULT_TAU_GEO) -> SpaceReport:
    """Check boundedness, base-point distinctness and fiber disjointness.

    Two fibers closer than `tau_geo` count as overlapping: the sampled
    quotient map would not foliate the ambient space.
    """
    bounded = bool(np.all(np.isfinite(space.base_points)))
    duplicates = []
    bd = space.base_distance_matrix()
    m = space.n_base
    for i in range(m):
        for j in range(i + 1, m):
            if bd[i, j] == 0.0:
                duplicates.append((i, j))
    empty = [i for i, fib in enumerate(space.fibers) if fib.is_empty]
    degenerate = []
    for i, fib in enumerate(space.fibers):
        if isinstance(fib, SegmentUnion):
            degenerate.extend((i, k) for k in fib.degenerate_segments())
        elif not fib.is_empty and not np.all(np.isfinite(fib.points)):
            bounded = False
    overlaps = []
    for i in range(m):
        if space.fibers[i].is_empty:
            continue
        for j in range(i + 1, m):
            if space.fibers[j].is_empty:
                continue
            d = fiber_min_distance(space.fibers[i], space.fibers[j])
            if d < tau_geo:
                overlaps.append((i, j, d))
    return SpaceReport(
        bounded=bounded,
        duplicate_base_pairs=duplicates,
        empty_fibers=empty,
        degenerate_segments=degenerate,
        overlaps=overlaps,
        tau_geo=tau_geo,
    )
