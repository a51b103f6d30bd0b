"""
Planar crossing diagrams of closed polygons.

A diagram is stored as a signed Gauss code: the crossings met while walking once around
the polygon, each marked over or under. Crossing labels are 0..c-1 in order of first
appearance.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from thickwalk.config import config
from thickwalk.exceptions import DiagramFailureError, PreconditionViolation
from thickwalk.knots.polygon import ClosedPolygon, as_vertices

logger = logging.getLogger(__name__)

# Projected features closer than this make a projection non-generic
PROJECTION_TOL = 1e-9

GaussEntry = Tuple[int, bool]


@dataclass(frozen=True)
class CrossingDiagram:
    """``gauss_code`` holds (label, is_over) entries; ``signs[label]`` is +1 or -1"""

    gauss_code: Tuple[GaussEntry, ...] = ()
    signs: Tuple[int, ...] = ()

    def __post_init__(self):
        seen: Dict[int, List[bool]] = {}
        for label, over in self.gauss_code:
            seen.setdefault(label, []).append(bool(over))
        if set(seen) != set(range(len(self.signs))):
            raise PreconditionViolation("CrossingDiagram", "labels must be 0..c-1 with one sign each",
                                        labels=sorted(seen), crossings=len(self.signs))
        for label, marks in seen.items():
            if sorted(marks) != [False, True]:
                raise PreconditionViolation("CrossingDiagram", "each crossing must appear once over and once under",
                                            label=label)
        if any(sign not in (1, -1) for sign in self.signs):
            raise PreconditionViolation("CrossingDiagram", "crossing signs must be +1 or -1")

    @classmethod
    def from_code(cls, code: Sequence[GaussEntry], signs: Dict[int, int]) -> "CrossingDiagram":
        """Build a diagram from arbitrary labels, relabelling by first appearance"""
        relabel: Dict[int, int] = {}
        for label, _ in code:
            relabel.setdefault(label, len(relabel))
        new_code = tuple((relabel[label], bool(over)) for label, over in code)
        new_signs = [0] * len(relabel)
        for old, new in relabel.items():
            new_signs[new] = signs[old]
        return cls(new_code, tuple(new_signs))

    @property
    def crossing_count(self) -> int:
        return len(self.signs)

    def arc_incidence(self) -> List[Tuple[int, int, int]]:
        """
        Per crossing label: (over arc, incoming under arc, outgoing under arc).

        Arcs run between consecutive under-passes; arc k starts at the k-th under entry.
        """
        c = self.crossing_count
        incidence: List[List[int]] = [[0, 0, 0] for _ in range(c)]
        unders_seen = 0
        for label, over in self.gauss_code:
            if over:
                incidence[label][0] = (unders_seen - 1) % c
            else:
                incidence[label][1] = (unders_seen - 1) % c
                incidence[label][2] = unders_seen % c
                unders_seen += 1
        return [tuple(entry) for entry in incidence]

    @property
    def crossings(self) -> List[Tuple[int, int, int]]:
        """(over arc, incoming under arc, sign) per crossing"""
        return [(over, incoming, self.signs[label])
                for label, (over, incoming, _) in enumerate(self.arc_incidence())]

    def to_text(self) -> str:
        return " ".join(f"{'O' if over else 'U'}{label + 1}{'+' if self.signs[label] > 0 else '-'}"
                        for label, over in self.gauss_code)


def _cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def projection_basis(direction) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-handed (e1, e2, d) with d the unit viewing direction"""
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1), d


def _project(vertices: np.ndarray, direction) -> Optional[CrossingDiagram]:
    """Diagram seen from +direction (greater depth is over), or None if the view is not generic"""
    e1, e2, d = projection_basis(direction)
    xy = vertices @ np.stack([e1, e2]).T
    depth = vertices @ d
    m = xy.shape[0]

    if pdist(xy).min() <= PROJECTION_TOL:
        return None

    seg = np.roll(xy, -1, axis=0) - xy
    lengths = np.linalg.norm(seg, axis=1)
    following = np.roll(seg, -1, axis=0)
    folded = (np.abs(_cross2(seg, following)) <= PROJECTION_TOL * lengths * np.roll(lengths, -1)) \
        & (np.einsum("ij,ij->i", seg, following) < 0)
    if folded.any():
        return None

    i, j = np.triu_indices(m, k=2)
    keep = ~((i == 0) & (j == m - 1))
    i, j = i[keep], j[keep]
    if i.size == 0:
        return CrossingDiagram()

    p, r = xy[i], seg[i]
    q, s = xy[j], seg[j]
    qp = q - p
    denom = _cross2(r, s)
    parallel = np.abs(denom) <= PROJECTION_TOL * lengths[i] * lengths[j]

    if parallel.any():
        rp, sp, qpp, lp = r[parallel], s[parallel], qp[parallel], lengths[i][parallel]
        on_line = np.abs(_cross2(qpp, rp)) <= PROJECTION_TOL * lp
        lam0 = np.einsum("ij,ij->i", qpp, rp) / lp ** 2
        lam1 = np.einsum("ij,ij->i", qpp + sp, rp) / lp ** 2
        slack = PROJECTION_TOL / lp
        overlapping = (np.maximum(lam0, lam1) >= -slack) & (np.minimum(lam0, lam1) <= 1 + slack)
        if (on_line & overlapping).any():
            return None

    general = ~parallel
    i, j, p, r, q, s, qp, denom = (x[general] for x in (i, j, p, r, q, s, qp, denom))
    t = _cross2(qp, s) / denom
    u = _cross2(qp, r) / denom
    slack_i = PROJECTION_TOL / lengths[i]
    slack_j = PROJECTION_TOL / lengths[j]
    hits = (t > -slack_i) & (t < 1 + slack_i) & (u > -slack_j) & (u < 1 + slack_j)
    near_vertex = (t < slack_i) | (t > 1 - slack_i) | (u < slack_j) | (u > 1 - slack_j)
    if (hits & near_vertex).any():
        return None

    i, j, t, u, r, s, p = (x[hits] for x in (i, j, t, u, r, s, p))
    if i.size == 0:
        return CrossingDiagram()

    dz = np.roll(depth, -1) - depth
    depth_i = depth[i] + t * dz[i]
    depth_j = depth[j] + u * dz[j]
    if np.any(np.abs(depth_i - depth_j) <= PROJECTION_TOL):
        return None
    points = p + t[:, None] * r
    if points.shape[0] > 1 and pdist(points).min() <= PROJECTION_TOL:
        return None

    i_over = depth_i > depth_j
    over_dir = np.where(i_over[:, None], r, s)
    under_dir = np.where(i_over[:, None], s, r)
    signs = np.where(_cross2(over_dir, under_dir) > 0, 1, -1)

    occurrences = []
    for k in range(i.size):
        occurrences.append((int(i[k]), float(t[k]), k, bool(i_over[k])))
        occurrences.append((int(j[k]), float(u[k]), k, not bool(i_over[k])))
    occurrences.sort()
    code = [(label, over) for _, _, label, over in occurrences]
    return CrossingDiagram.from_code(code, {k: int(signs[k]) for k in range(i.size)})


def random_direction(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def project_to_diagram(polygon: ClosedPolygon, direction, rng: np.random.Generator,
                       max_retries: Optional[int] = None) -> CrossingDiagram:
    """
    Orthogonal projection of ``polygon`` along ``direction``.

    A non-generic view is retried along fresh uniform directions, ``max_retries`` times at most.
    """
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise PreconditionViolation("project_to_diagram", "direction must be a unit vector")
    vertices = as_vertices(polygon)
    retries = config.DIAGRAM_RETRIES if max_retries is None else max_retries
    diagram = _project(vertices, direction)
    attempt = 0
    while diagram is None:
        if attempt >= retries:
            raise DiagramFailureError(retries)
        attempt += 1
        diagram = _project(vertices, random_direction(rng))
    return diagram


def _drop(code: List[GaussEntry], positions: Sequence[int]) -> None:
    for position in sorted(set(positions), reverse=True):
        del code[position]


def _remove_kink(code: List[GaussEntry]) -> bool:
    length = len(code)
    for position in range(length):
        following = (position + 1) % length
        if following != position and code[position][0] == code[following][0]:
            _drop(code, [position, following])
            return True
    return False


def _remove_bigon(code: List[GaussEntry], signs: Dict[int, int]) -> bool:
    length = len(code)
    if length < 4:
        return False
    positions: Dict[int, List[int]] = {}
    for position, (label, _) in enumerate(code):
        positions.setdefault(label, []).append(position)
    for position in range(length):
        following = (position + 1) % length
        (a, a_over), (b, b_over) = code[position], code[following]
        if a == b or a_over != b_over or signs[a] == signs[b]:
            continue
        other_a = next(p for p in positions[a] if p != position)
        other_b = next(p for p in positions[b] if p != following)
        if (other_a - other_b) % length in (1, length - 1):
            _drop(code, [position, following, other_a, other_b])
            return True
    return False


def simplify_diagram(diagram: CrossingDiagram) -> CrossingDiagram:
    """Reidemeister I and II reductions on the Gauss code until none applies"""
    code = list(diagram.gauss_code)
    signs = dict(enumerate(diagram.signs))
    while code and (_remove_kink(code) or _remove_bigon(code, signs)):
        pass
    return CrossingDiagram.from_code(code, signs)
