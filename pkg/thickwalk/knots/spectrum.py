import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from sentry_sdk import logger as sentry_logger

from thickwalk.config import config
from thickwalk.exceptions import DiagramFailureError, PreconditionViolation
from thickwalk.geom import Walk
from thickwalk.knots.diagram import project_to_diagram, random_direction, simplify_diagram
from thickwalk.knots.polygon import ClosedPolygon, closure_sphere, reduce_polygon, sample_sphere_points
from thickwalk.knots.table import UNCLASSIFIED, UNKNOT, KnotClass, classify

logger = logging.getLogger(__name__)

STRONG = "strong"
DOMINANT = "dominant"
WEAK = "weak"
NONE = "none"

# Fewer vertices than this cannot form a knot
STICK_NUMBER = 6


def _rank_key(item: Tuple[KnotClass, int]):
    knot, count = item
    return -count, not knot.is_unknot, knot.name


@dataclass
class KnotSpectrum:
    """Closure counts per knot class"""

    counts: Dict[KnotClass, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, knot: KnotClass, count: int = 1) -> None:
        self.counts[knot] = self.counts.get(knot, 0) + count

    def merge(self, other: "KnotSpectrum") -> "KnotSpectrum":
        merged = KnotSpectrum(dict(self.counts))
        for knot, count in other.counts.items():
            merged.add(knot, count)
        return merged

    def fraction(self, knot: KnotClass) -> float:
        total = self.total
        return self.counts.get(knot, 0) / total if total else 0.0

    def ranked(self) -> List[Tuple[KnotClass, int]]:
        """Classes by decreasing count, the unknot first among ties, then by name"""
        return sorted(self.counts.items(), key=_rank_key)

    def to_text(self) -> str:
        total = self.total
        return "".join(
            f"{knot.name} {knot.determinant} {knot.secondary} {count} {count / total:.4f}\n"
            for knot, count in self.ranked()
        )


@dataclass(frozen=True)
class DominanceVerdict:
    level: str
    winner: KnotClass
    fraction: float
    runner_up_fraction: float = 0.0

    def satisfies(self, criterion: str) -> bool:
        """Whether the winner meets ``criterion`` on its own terms"""
        if criterion == STRONG:
            return self.fraction >= 0.9
        if criterion == DOMINANT:
            return self.fraction > 2 * self.runner_up_fraction
        if criterion == WEAK:
            return self.fraction > 0.5
        raise PreconditionViolation("DominanceVerdict.satisfies", f"unknown criterion {criterion!r}")

    def is_knotted(self, criterion: str = WEAK) -> bool:
        # failed diagrams (determinant 0) never count as knotted
        return self.satisfies(criterion) and not self.winner.is_unknot and self.winner.determinant > 0


def dominance(spectrum: KnotSpectrum) -> DominanceVerdict:
    """Strongest dominance level the most frequent class reaches"""
    total = spectrum.total
    if total < 1:
        raise PreconditionViolation("dominance", "empty spectrum")
    ranked = spectrum.ranked()
    winner, count = ranked[0]
    runner_up = ranked[1][1] if len(ranked) > 1 else 0
    fraction = count / total
    if fraction >= 0.9:
        level = STRONG
    elif count > 2 * runner_up:
        level = DOMINANT
    elif fraction > 0.5:
        level = WEAK
    else:
        level = NONE
    return DominanceVerdict(level, winner, fraction, runner_up / total)


def classify_polygon(polygon: Union[ClosedPolygon, np.ndarray], rng: np.random.Generator,
                     reduce: bool = True, simplify: bool = True) -> KnotClass:
    """Knot type of a closed polygon seen along a random direction"""
    if reduce:
        polygon = reduce_polygon(polygon)
    elif not isinstance(polygon, ClosedPolygon):
        polygon = ClosedPolygon(polygon)
    if len(polygon) < STICK_NUMBER:
        return UNKNOT
    diagram = project_to_diagram(polygon, random_direction(rng), rng)
    if simplify:
        diagram = simplify_diagram(diagram)
    return classify(diagram)


def spectrum_of_polygons(polygons, rng: np.random.Generator, reduce: bool = True) -> KnotSpectrum:
    """Classify each polygon in order; diagram failures are tallied as unclassified"""
    spectrum = KnotSpectrum()
    failures = 0
    for polygon in polygons:
        try:
            spectrum.add(classify_polygon(polygon, rng, reduce=reduce))
        except DiagramFailureError:
            failures += 1
            spectrum.add(UNCLASSIFIED)
    if failures:
        sentry_logger.warning(
            'Diagram failures while building knot spectrum',
            attributes={'knots.failures': failures, 'knots.closures': spectrum.total}
        )
    return spectrum


def knot_spectrum(walk: Union[Walk, np.ndarray], closures: Optional[int], rng: np.random.Generator,
                  reduce: bool = True) -> KnotSpectrum:
    """Spectrum over ``closures`` uniform sphere closures of an open chain"""
    closures = config.KNOT_CLOSURES if closures is None else closures
    if closures < 1:
        raise PreconditionViolation("knot_spectrum", "at least one closure is needed", closures=closures)
    points = sample_sphere_points(walk, closures, rng)
    return spectrum_of_polygons((closure_sphere(walk, point) for point in points), rng, reduce)
