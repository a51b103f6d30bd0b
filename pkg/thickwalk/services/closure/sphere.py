from typing import List, Optional

import numpy as np

from thickwalk.config import config
from thickwalk.geom import Walk
from thickwalk.knots.polygon import ClosedPolygon, closure_sphere, sample_sphere_points
from .base import BaseClosure


class SphereClosure(BaseClosure):
    """Closures through uniform points of a sphere around the walk"""

    _closure_name = "sphere"

    def __init__(self, factor: Optional[float] = None):
        self.factor = config.SPHERE_FACTOR if factor is None else factor

    def close(self, walk: Walk, rng: np.random.Generator, count: Optional[int] = None) -> List[ClosedPolygon]:
        count = config.KNOT_CLOSURES if count is None else count
        points = sample_sphere_points(walk, count, rng, self.factor)
        return [closure_sphere(walk, point) for point in points]
