"""
3D primitives for equilateral open chains: vectors, planes, reflections, bend angles
and the immutable Walk container.

Vectors are plain numpy float64 arrays of shape (3,). Walks hold an (n+1, 3) read-only
array rooted at the origin with unit edges.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import numpy.typing as npt

from thickwalk.exceptions import PreconditionViolation

Vec3 = npt.NDArray[np.float64]

# Relative tolerance on unit edge lengths
EDGE_TOLERANCE = 1e-9
# Tolerance on |normal| = 1
NORMAL_TOLERANCE = 1e-12
# How far a reflection plane may miss its pivot vertex
PLANE_TOLERANCE = 1e-9


def _readonly(values, shape_tail: Tuple[int, ...] = (3,)) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.shape[-len(shape_tail):] != shape_tail:
        raise PreconditionViolation("geom", f"expected trailing shape {shape_tail}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a finite 3-vector"""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise PreconditionViolation("vec3", "non-finite component", value=[x, y, z])
    return v


@dataclass(frozen=True, eq=False)
class Plane:
    """
    A reflection plane through ``point`` with unit ``normal``.

    Plane(p, u) and Plane(p, -u) are the same plane; every operation here only
    uses the normal quadratically so both give identical results.
    """

    point: Vec3
    normal: Vec3

    def __post_init__(self):
        point = _readonly(self.point)
        normal = _readonly(self.normal)
        if point.shape != (3,) or normal.shape != (3,):
            raise PreconditionViolation("Plane", "point and normal must be 3-vectors")
        if not (np.all(np.isfinite(point)) and np.all(np.isfinite(normal))):
            raise PreconditionViolation("Plane", "non-finite point or normal")
        if abs(float(np.linalg.norm(normal)) - 1.0) > NORMAL_TOLERANCE:
            raise PreconditionViolation("Plane", "normal is not unit length",
                                        norm=float(np.linalg.norm(normal)))
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "normal", normal)

    @classmethod
    def through(cls, point, direction) -> "Plane":
        """Plane through ``point`` whose normal is ``direction`` normalized"""
        direction = np.asarray(direction, dtype=np.float64)
        return cls(point, direction / np.linalg.norm(direction))

    def flipped(self) -> "Plane":
        return Plane(self.point, -self.normal)

    def signed_distance(self, p) -> float:
        return float(np.dot(np.asarray(p, dtype=np.float64) - self.point, self.normal))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Plane):
            return NotImplemented
        same_point = np.array_equal(self.point, other.point)
        return same_point and (np.array_equal(self.normal, other.normal)
                               or np.array_equal(self.normal, -other.normal))

    __hash__ = None


def reflect_point(p, plane: Plane) -> Vec3:
    """Mirror ``p`` through ``plane``: p - 2((p - q).u)u"""
    p = np.asarray(p, dtype=np.float64)
    return p - 2.0 * np.dot(p - plane.point, plane.normal) * plane.normal


def reflect_points(points: np.ndarray, plane: Plane) -> np.ndarray:
    """Row-wise reflect_point for an (m, 3) array"""
    offsets = (points - plane.point) @ plane.normal
    return points - 2.0 * offsets[:, None] * plane.normal


class Walk:
    """
    Equilateral open chain v_0 .. v_n with v_0 at the origin.

    Construction validates the invariants; walks produced by reflections skip the
    check because reflections are isometries.
    """

    __slots__ = ("_vertices",)

    def __init__(self, vertices: Iterable):
        arr = np.array(vertices, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise PreconditionViolation("Walk", f"vertices must have shape (n+1, 3), got {arr.shape}")
        if arr.shape[0] < 3:
            raise PreconditionViolation("Walk", "a walk needs at least 2 edges", vertices=arr.shape[0])
        if not np.all(np.isfinite(arr)):
            raise PreconditionViolation("Walk", "non-finite coordinate")
        if np.any(arr[0] != 0.0):
            raise PreconditionViolation("Walk", "first vertex must be the origin", first=arr[0].tolist())
        lengths = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        worst = int(np.argmax(np.abs(lengths - 1.0)))
        if abs(lengths[worst] - 1.0) > EDGE_TOLERANCE:
            raise PreconditionViolation("Walk", "edge is not unit length",
                                        edge=worst, length=float(lengths[worst]))
        arr.flags.writeable = False
        self._vertices = arr

    @classmethod
    def _trusted(cls, vertices: np.ndarray) -> "Walk":
        walk = cls.__new__(cls)
        vertices.flags.writeable = False
        walk._vertices = vertices
        return walk

    @classmethod
    def from_edges(cls, edges) -> "Walk":
        """Walk whose i-th edge is the i-th row of ``edges`` (rows are normalized)"""
        edges = np.asarray(edges, dtype=np.float64)
        edges = edges / np.linalg.norm(edges, axis=1)[:, None]
        vertices = np.zeros((edges.shape[0] + 1, 3))
        np.cumsum(edges, axis=0, out=vertices[1:])
        return cls(vertices)

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def n(self) -> int:
        """Number of edges"""
        return self._vertices.shape[0] - 1

    def edges(self) -> np.ndarray:
        return np.diff(self._vertices, axis=0)

    def reversed(self) -> "Walk":
        """Same chain traversed from v_n to v_0, re-rooted at the origin"""
        flipped = self._vertices[::-1] - self._vertices[-1]
        return Walk._trusted(np.ascontiguousarray(flipped))

    def transformed(self, rotation) -> "Walk":
        """Rigidly rotated copy; translations are absorbed by the origin rooting"""
        rotation = np.asarray(rotation, dtype=np.float64)
        return Walk._trusted(self._vertices @ rotation.T)

    def renormalized(self) -> "Walk":
        """Rebuild the vertices from unit-normalized edges to remove rounding drift"""
        edges = self.edges()
        edges /= np.linalg.norm(edges, axis=1)[:, None]
        vertices = np.zeros_like(self._vertices)
        np.cumsum(edges, axis=0, out=vertices[1:])
        return Walk._trusted(vertices)

    def __len__(self) -> int:
        return self._vertices.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Walk):
            return NotImplemented
        return np.array_equal(self._vertices, other._vertices)

    def __hash__(self) -> int:
        return hash(self._vertices.tobytes())

    def __repr__(self) -> str:
        return f"Walk(n={self.n}, end={self._vertices[-1].tolist()})"


def reflect_tail(walk: Walk, i: int, plane: Plane) -> Walk:
    """Reflect v_{i+1} .. v_n through ``plane``, which must pass through v_i"""
    n = walk.n
    if not 1 <= i <= n - 1:
        raise PreconditionViolation("reflect_tail", f"vertex index {i} outside 1..{n - 1}", index=i)
    miss = abs(plane.signed_distance(walk.vertices[i]))
    if miss > PLANE_TOLERANCE:
        raise PreconditionViolation("reflect_tail", "plane does not pass through the pivot vertex",
                                    index=i, distance=miss)
    vertices = walk.vertices.copy()
    vertices[i + 1:] = reflect_points(vertices[i + 1:], plane)
    return Walk._trusted(vertices)


def bend_angle(walk: Walk, i: int) -> float:
    """Interior angle at v_i between v_{i-1} - v_i and v_{i+1} - v_i; pi when straight"""
    n = walk.n
    if not 1 <= i <= n - 1:
        raise PreconditionViolation("bend_angle", f"vertex index {i} outside 1..{n - 1}", index=i)
    v = walk.vertices
    cosine = float(np.dot(v[i - 1] - v[i], v[i + 1] - v[i]))
    return math.acos(min(1.0, max(-1.0, cosine)))


def bend_angles(walk: Walk) -> np.ndarray:
    """All interior bend angles, index k holding the angle at v_{k+1}"""
    v = walk.vertices
    incoming = v[:-2] - v[1:-1]
    outgoing = v[2:] - v[1:-1]
    cosines = np.einsum("ij,ij->i", incoming, outgoing)
    return np.arccos(np.clip(cosines, -1.0, 1.0))


def format_walk(walk: Walk, r: float) -> str:
    """Walk text block: header 'n=<edges> r=<radius>' then one 'x y z' line per vertex"""
    lines = [f"n={walk.n} r={float(r)!r}"]
    for x, y, z in walk.vertices.tolist():
        lines.append(f"{x!r} {y!r} {z!r}")
    return "\n".join(lines) + "\n"


def parse_walk(text: str) -> Tuple[Walk, float]:
    """Inverse of format_walk for a single block"""
    lines = [line for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise PreconditionViolation("parse_walk", "empty walk block")
    try:
        fields = dict(item.split("=", 1) for item in lines[0].split())
        n = int(fields["n"])
        r = float(fields["r"])
    except (KeyError, ValueError) as e:
        raise PreconditionViolation("parse_walk", f"bad header {lines[0]!r}: {e}")
    if len(lines) != n + 2:
        raise PreconditionViolation("parse_walk", f"header says {n} edges but found {len(lines) - 1} vertices")
    try:
        coords = [[float(token) for token in line.split()] for line in lines[1:]]
    except ValueError as e:
        raise PreconditionViolation("parse_walk", f"bad coordinate line: {e}")
    return Walk(coords), r


def parse_walks(text: str):
    """Yield (walk, r) for every block in a concatenation of Walk text blocks"""
    block = []
    for line in text.splitlines():
        if line.startswith("n=") and block:
            yield parse_walk("\n".join(block))
            block = []
        if line.strip():
            block.append(line)
    if block:
        yield parse_walk("\n".join(block))
