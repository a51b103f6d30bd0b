"""
Tube accommodation for equilateral chains.

Two constraints decide whether a walk can carry a tube of radius r:

* short range: every interior bend angle is at least 2*arctan(2r)
* long range: the doubly-critical self distance (dcsd) is strictly greater than 2r

Segment ``k`` joins ``v_k`` to ``v_{k+1}``. Adjacent segments share a vertex and are left to the
bend-angle constraint; every pair with ``j >= h + 2`` takes part in dcsd.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from thickwalk.exceptions import PreconditionViolation
from thickwalk.geom import Walk, bend_angles

# Relative threshold under which two segment directions count as parallel
PARALLEL_EPS = 1e-12
# Step for the one-sided increase test at segment endpoints
CRITICAL_STEP = 1e-6

Polyline = Union[Walk, np.ndarray]


@dataclass(frozen=True)
class ThicknessParams:
    """Tube radius and the derived minimum bend angle"""

    r: float
    theta_min: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r < 0:
            raise PreconditionViolation("ThicknessParams", "radius must be finite and non-negative", r=self.r)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta_min", 2.0 * math.atan(2.0 * self.r))

    @property
    def theta_min_degrees(self) -> float:
        return math.degrees(self.theta_min)

    @property
    def diameter(self) -> float:
        return 2.0 * self.r


@dataclass(frozen=True)
class DcsdResult:
    """
    Doubly-critical self distance.

    ``witness`` holds ((h, t_h), (j, t_j)): segment indices and parameters of the two points
    realizing ``distance``. It is None when no doubly-critical pair exists (distance is +inf).
    """

    distance: float
    witness: Optional[Tuple[Tuple[int, float], Tuple[int, float]]] = None

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.distance)

    def exceeds(self, cutoff: float) -> bool:
        return self.distance > cutoff


@dataclass(frozen=True)
class CriticalPair:
    h: int
    t_h: float
    j: int
    t_j: float
    distance: float

    def to_line(self) -> str:
        return f"{self.h} {self.t_h!r} {self.j} {self.t_j!r} {self.distance!r}"


def _vertices(walk: Polyline) -> np.ndarray:
    if isinstance(walk, Walk):
        return walk.vertices
    vertices = np.asarray(walk, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 3 or vertices.shape[0] < 3:
        raise PreconditionViolation("thickness", f"expected an (n+1, 3) polyline, got {vertices.shape}")
    return vertices


def _closest_parameters(p1, d1, p2, d2):
    """
    Closest points between segments p1 + s*d1 and p2 + t*d2, s, t in [0, 1], row-wise.

    Parallel rows take the midpoint of the overlap of their projections, which gives an
    interior witness whenever the overlap is not a single point.
    """
    offset = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, offset)
    f = np.einsum("ij,ij->i", d2, offset)
    denom = a * e - b * b
    parallel = denom <= PARALLEL_EPS * a * e

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.clip((b * f - c * e) / denom, 0.0, 1.0)
    lo = np.clip(np.minimum(-c, b - c) / a, 0.0, 1.0)
    hi = np.clip(np.maximum(-c, b - c) / a, 0.0, 1.0)
    s = np.where(parallel, 0.5 * (lo + hi), s)

    t = (b * s + f) / e
    s = np.where(t < 0.0, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(t > 1.0, np.clip((b - c) / a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    return s, t


def _non_decreasing(moving, fixed, direction) -> np.ndarray:
    # |moving + h*w - fixed|^2 >= |moving - fixed|^2 for the step h
    slope = 2.0 * np.einsum("ij,ij->i", moving - fixed, direction)
    return slope + CRITICAL_STEP * np.einsum("ij,ij->i", direction, direction) >= 0.0


def _locally_minimal(vertices, seg, param, point, other) -> np.ndarray:
    """Whether ``point`` (on segment ``seg`` at ``param``) is a turning point for ``other``"""
    last = vertices.shape[0] - 2
    ok = np.ones(seg.shape[0], dtype=bool)

    at_start = (param == 0.0) & (seg > 0)
    if at_start.any():
        idx = seg[at_start]
        back = vertices[idx - 1] - vertices[idx]
        ok[at_start] &= _non_decreasing(point[at_start], other[at_start], back)

    at_end = (param == 1.0) & (seg < last)
    if at_end.any():
        idx = seg[at_end]
        ahead = vertices[idx + 2] - vertices[idx + 1]
        ok[at_end] &= _non_decreasing(point[at_end], other[at_end], ahead)
    return ok


def _evaluate_pairs(vertices: np.ndarray, h: np.ndarray, j: np.ndarray):
    """Closest parameters, distances and the doubly-critical mask for segment pairs (h, j)"""
    starts = vertices[:-1]
    directions = np.diff(vertices, axis=0)
    s, t = _closest_parameters(starts[h], directions[h], starts[j], directions[j])
    x = starts[h] + s[:, None] * directions[h]
    y = starts[j] + t[:, None] * directions[j]
    distance = np.linalg.norm(x - y, axis=1)
    critical = _locally_minimal(vertices, h, s, x, y) & _locally_minimal(vertices, j, t, y, x)
    return s, t, distance, critical


def _all_pairs(segment_count: int):
    return np.triu_indices(segment_count, k=2)


def _reduce(vertices, h, j, cutoff: Optional[float] = None) -> DcsdResult:
    if h.size == 0:
        return DcsdResult(math.inf)
    s, t, distance, critical = _evaluate_pairs(vertices, h, j)
    if cutoff is not None:
        critical &= distance <= cutoff
    if not critical.any():
        return DcsdResult(math.inf)
    candidates = np.flatnonzero(critical)
    best = candidates[np.argmin(distance[candidates])]
    return DcsdResult(
        float(distance[best]),
        ((int(h[best]), float(s[best])), (int(j[best]), float(t[best]))),
    )


def min_bend_angle(walk: Walk) -> float:
    """Smallest interior bend angle of the walk"""
    return float(bend_angles(walk).min())


def segment_pair_critical_distance(walk: Polyline, h: int, j: int) -> Optional[float]:
    """Distance between segments h and j if their closest pair is doubly critical, else None"""
    vertices = _vertices(walk)
    segment_count = vertices.shape[0] - 1
    if not (0 <= h and j < segment_count):
        raise PreconditionViolation("segment_pair_critical_distance", "segment index out of range", h=h, j=j)
    if j < h + 2:
        raise PreconditionViolation("segment_pair_critical_distance",
                                    "segments must be non-adjacent with h < j", h=h, j=j)
    _, _, distance, critical = _evaluate_pairs(vertices, np.array([h]), np.array([j]))
    return float(distance[0]) if critical[0] else None


def critical_pairs(walk: Polyline, cutoff: Optional[float] = None) -> List[CriticalPair]:
    """Every doubly-critical segment pair, optionally limited to distance <= cutoff"""
    vertices = _vertices(walk)
    h, j = _all_pairs(vertices.shape[0] - 1)
    if h.size == 0:
        return []
    s, t, distance, critical = _evaluate_pairs(vertices, h, j)
    if cutoff is not None:
        critical &= distance <= cutoff
    return [
        CriticalPair(int(h[k]), float(s[k]), int(j[k]), float(t[k]), float(distance[k]))
        for k in np.flatnonzero(critical)
    ]


def format_witnesses(pairs: List[CriticalPair]) -> str:
    """Diagnostic dump, one 'h t_h j t_j distance' line per pair"""
    return "".join(pair.to_line() + "\n" for pair in pairs)


def dcsd(walk: Polyline) -> DcsdResult:
    """Reference O(n^2) dcsd over every non-adjacent segment pair"""
    vertices = _vertices(walk)
    h, j = _all_pairs(vertices.shape[0] - 1)
    return _reduce(vertices, h, j)


class SegmentGrid:
    """
    Uniform spatial hash over the segments of a polyline.

    Each segment is filed under every cell its bounding box touches. Two segments closer
    than the cell size always have filed cells that are 27-neighbours of each other, so
    ``candidate_pairs`` never misses a pair within ``cell_size``.
    """

    def __init__(self, vertices: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise PreconditionViolation("SegmentGrid", "cell size must be positive", cell_size=cell_size)
        self.cell_size = float(cell_size)
        self.segment_count = vertices.shape[0] - 1

        lower = np.floor(np.minimum(vertices[:-1], vertices[1:]) / self.cell_size).astype(np.int64)
        upper = np.floor(np.maximum(vertices[:-1], vertices[1:]) / self.cell_size).astype(np.int64)
        spans = upper - lower

        # Shift so that neighbour lookups (offset -1) stay non-negative
        origin = lower.min(axis=0) - 1
        self._extent = upper.max(axis=0) - origin + 2

        cells, owners = [], []
        segment_ids = np.arange(self.segment_count)
        for offset in itertools.product(*(range(int(m) + 1) for m in spans.max(axis=0))):
            offset = np.array(offset, dtype=np.int64)
            inside = np.all(offset <= spans, axis=1)
            cells.append(lower[inside] + offset - origin)
            owners.append(segment_ids[inside])
        keys = self._key(np.concatenate(cells))
        owners = np.concatenate(owners)

        order = np.argsort(keys, kind="stable")
        self._keys = keys[order]
        self._owners = owners[order]

    def _key(self, cells: np.ndarray) -> np.ndarray:
        ny, nz = self._extent[1], self._extent[2]
        return (cells[..., 0] * ny + cells[..., 1]) * nz + cells[..., 2]

    @property
    def entry_count(self) -> int:
        return int(self._keys.size)

    def candidate_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        """Sorted unique non-adjacent pairs (h, j), h < j - 1, filed in neighbouring cells"""
        found = []
        for delta in itertools.product((-1, 0, 1), repeat=3):
            shift = self._key(np.array(delta, dtype=np.int64))
            targets = self._keys + shift
            left = np.searchsorted(self._keys, targets, side="left")
            right = np.searchsorted(self._keys, targets, side="right")
            counts = right - left
            total = int(counts.sum())
            if total == 0:
                continue
            first = np.repeat(self._owners, counts)
            run_starts = np.repeat(np.cumsum(counts) - counts, counts)
            positions = np.repeat(left, counts) + (np.arange(total) - run_starts)
            second = self._owners[positions]
            keep = first < second - 1
            found.append(first[keep] * self.segment_count + second[keep])
        if not found:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        codes = np.unique(np.concatenate(found))
        return codes // self.segment_count, codes % self.segment_count


def dcsd_accelerated(walk: Polyline, cutoff: float) -> DcsdResult:
    """
    dcsd restricted to pairs within ``cutoff``.

    Exact whenever the true dcsd is at most ``cutoff``; otherwise +inf.
    """
    if not cutoff > 0:
        raise PreconditionViolation("dcsd_accelerated", "cutoff must be positive", cutoff=cutoff)
    vertices = _vertices(walk)
    grid = SegmentGrid(vertices, max(1.0, cutoff))
    h, j = grid.candidate_pairs()
    return _reduce(vertices, h, j, cutoff=cutoff)


# Cutoff used at r = 0, where only a self-intersection (dcsd = 0) fails the long-range test
_ZERO_RADIUS_CUTOFF = 1e-9


def long_range_ok(walk: Polyline, params: ThicknessParams) -> bool:
    cutoff = params.diameter if params.r > 0 else _ZERO_RADIUS_CUTOFF
    return dcsd_accelerated(walk, cutoff).distance > params.diameter


def accommodates_tube(walk: Walk, params: ThicknessParams) -> bool:
    """True iff dcsd > 2r and every bend angle is at least theta_min"""
    if min_bend_angle(walk) < params.theta_min:
        return False
    return long_range_ok(walk, params)
