"""
Closed polygons built from open walks, and isotopy-preserving vertex elimination.
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np

from thickwalk.config import config
from thickwalk.exceptions import DegenerateClosureError, PreconditionViolation
from thickwalk.geom import Walk

logger = logging.getLogger(__name__)

# Consecutive polygon vertices closer than this count as coincident
COINCIDENCE_TOL = 1e-12
# Relative size of the second principal extent under which a polygon is collinear
COLLINEAR_TOL = 1e-9
# Relative tolerance of the triangle-piercing test in reduce_polygon
REDUCTION_TOL = 1e-9
# Offset used to lift a collinear direct closure off its axis
DIRECT_PERTURBATION = 1e-9


class ClosedPolygon:
    """Vertices read cyclically: the last vertex joins back to the first"""

    __slots__ = ("_vertices",)

    def __init__(self, vertices):
        arr = np.array(vertices, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 3:
            raise PreconditionViolation("ClosedPolygon", f"need at least 3 vertices in 3D, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise PreconditionViolation("ClosedPolygon", "non-finite coordinate")
        gaps = np.linalg.norm(np.roll(arr, -1, axis=0) - arr, axis=1)
        if gaps.min() <= COINCIDENCE_TOL:
            raise PreconditionViolation("ClosedPolygon", "consecutive vertices coincide",
                                        vertex=int(np.argmin(gaps)))
        arr.flags.writeable = False
        self._vertices = arr

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    def __len__(self) -> int:
        return self._vertices.shape[0]

    def edges(self) -> np.ndarray:
        return np.roll(self._vertices, -1, axis=0) - self._vertices

    def reversed(self) -> "ClosedPolygon":
        return ClosedPolygon(self._vertices[::-1])

    def transformed(self, rotation=None, translation=None, scale: float = 1.0) -> "ClosedPolygon":
        """Similarity transform: scale, then rotate, then translate"""
        vertices = self._vertices * scale
        if rotation is not None:
            vertices = vertices @ np.asarray(rotation, dtype=np.float64).T
        if translation is not None:
            vertices = vertices + np.asarray(translation, dtype=np.float64)
        return ClosedPolygon(vertices)

    def __repr__(self) -> str:
        return f"ClosedPolygon(vertices={len(self)})"


def as_vertices(shape: Union[Walk, ClosedPolygon, np.ndarray]) -> np.ndarray:
    if isinstance(shape, (Walk, ClosedPolygon)):
        return shape.vertices
    vertices = np.asarray(shape, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise PreconditionViolation("as_vertices", f"expected an (m, 3) array, got {vertices.shape}")
    return vertices


def is_collinear(vertices: np.ndarray) -> bool:
    centered = vertices - vertices.mean(axis=0)
    extents = np.linalg.svd(centered, compute_uv=False)
    return bool(extents[1] <= COLLINEAR_TOL * max(extents[0], 1.0))


def closure_direct(walk: Union[Walk, np.ndarray]) -> ClosedPolygon:
    """Close the chain with the straight segment v_n -> v_0"""
    vertices = as_vertices(walk)
    if np.linalg.norm(vertices[-1] - vertices[0]) <= COINCIDENCE_TOL:
        raise DegenerateClosureError("coincident endpoints")
    if is_collinear(vertices):
        raise DegenerateClosureError("collinear polygon")
    return ClosedPolygon(vertices)


def perturbed_direct_closure(walk: Union[Walk, np.ndarray]) -> ClosedPolygon:
    """Direct closure that lifts a collinear chain's last vertex slightly off its axis"""
    vertices = as_vertices(walk)
    try:
        return closure_direct(vertices)
    except DegenerateClosureError as e:
        if e.details.get("reason") != "collinear polygon":
            raise
    axis = vertices[-1] - vertices[0]
    helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 * np.linalg.norm(axis) else np.array([1.0, 0.0, 0.0])
    offset = np.cross(axis, helper)
    lifted = vertices.copy()
    lifted[-1] += DIRECT_PERTURBATION * offset / np.linalg.norm(offset)
    return ClosedPolygon(lifted)


def bounding_sphere(walk: Union[Walk, np.ndarray]) -> Tuple[np.ndarray, float]:
    """Centroid of the vertices and the largest vertex distance from it"""
    vertices = as_vertices(walk)
    centroid = vertices.mean(axis=0)
    return centroid, float(np.linalg.norm(vertices - centroid, axis=1).max())


def closure_sphere(walk: Union[Walk, np.ndarray], point) -> ClosedPolygon:
    """Close the chain through ``point``: v_n -> point -> v_0"""
    vertices = as_vertices(walk)
    point = np.asarray(point, dtype=np.float64)
    centroid, bound = bounding_sphere(vertices)
    distance = float(np.linalg.norm(point - centroid))
    if distance <= bound:
        raise PreconditionViolation("closure_sphere", "closure point lies inside the bounding sphere",
                                    distance=distance, bound=bound)
    return ClosedPolygon(np.vstack([vertices, point]))


def closure_sphere_radius(walk: Union[Walk, np.ndarray], factor: Optional[float] = None) -> Tuple[np.ndarray, float]:
    factor = config.SPHERE_FACTOR if factor is None else factor
    if factor <= 1.0:
        raise PreconditionViolation("closure_sphere_radius", "sphere factor must exceed 1", factor=factor)
    centroid, bound = bounding_sphere(walk)
    return centroid, factor * bound


def sample_sphere_points(walk: Union[Walk, np.ndarray], count: int, rng: np.random.Generator,
                         factor: Optional[float] = None) -> np.ndarray:
    """``count`` area-uniform points on the closure sphere, as a (count, 3) array"""
    if count < 1:
        raise PreconditionViolation("sample_sphere_points", "count must be at least 1", count=count)
    centroid, radius = closure_sphere_radius(walk, factor)
    directions = rng.standard_normal((count, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return centroid + radius * directions


def _triangle_pierced(a, b, c, starts, ends, adjacent, tol) -> bool:
    e1 = b - a
    e2 = c - a
    normal = np.cross(e1, e2)
    normal /= np.linalg.norm(normal)

    ds = (starts - a) @ normal
    de = (ends - a) @ normal
    coplanar = (np.abs(ds) <= tol) & (np.abs(de) <= tol)
    if coplanar.any():
        return True

    touches = (np.minimum(ds, de) <= tol) & (np.maximum(ds, de) >= -tol) & ~adjacent
    if not touches.any():
        return False
    ds, de = ds[touches], de[touches]
    span = ds - de
    lam = np.clip(np.divide(ds, span, out=np.zeros_like(ds), where=span != 0), 0.0, 1.0)
    hits = starts[touches] + lam[:, None] * (ends[touches] - starts[touches])

    d00 = e1 @ e1
    d01 = e1 @ e2
    d11 = e2 @ e2
    rel = hits - a
    d20 = rel @ e1
    d21 = rel @ e2
    denom = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    inside = (v >= -tol) & (w >= -tol) & (v + w <= 1.0 + tol)
    return bool(inside.any())


def _removable(points: np.ndarray, k: int, tol: float) -> bool:
    m = points.shape[0]
    a, b, c = points[k - 1], points[k], points[(k + 1) % m]
    ba, bc = a - b, c - b
    cross_norm = np.linalg.norm(np.cross(ba, bc))
    if cross_norm <= REDUCTION_TOL * np.linalg.norm(ba) * np.linalg.norm(bc):
        # straight continuation drops out, a fold-back spike stays
        return bool(np.dot(ba, bc) < 0)

    edge_ids = np.arange(m)
    others = (edge_ids != (k - 1) % m) & (edge_ids != k)
    adjacent = (edge_ids == (k - 2) % m) | (edge_ids == (k + 1) % m)
    starts = points[others]
    ends = np.roll(points, -1, axis=0)[others]
    return not _triangle_pierced(a, b, c, starts, ends, adjacent[others], tol)


def reduce_polygon(polygon: Union[ClosedPolygon, np.ndarray]) -> ClosedPolygon:
    """
    Remove vertices whose triangle with its two neighbours no other edge pierces.

    Each removal is an ambient isotopy, so the knot type is unchanged. Near-misses count
    as piercing.
    """
    points = np.array(as_vertices(polygon), dtype=np.float64)
    scale = max(1.0, float(np.abs(points).max()))
    tol = REDUCTION_TOL * scale
    changed = True
    while changed and points.shape[0] > 3:
        changed = False
        k = 0
        while k < points.shape[0] and points.shape[0] > 3:
            if _removable(points, k, tol):
                points = np.delete(points, k, axis=0)
                changed = True
            else:
                k += 1
    return ClosedPolygon(points)
