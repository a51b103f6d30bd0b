from typing import List, Optional

import numpy as np

from thickwalk.geom import Walk
from thickwalk.knots.polygon import ClosedPolygon, perturbed_direct_closure
from .base import BaseClosure


class DirectClosure(BaseClosure):
    """Single closure joining the two ends by a straight segment"""

    _closure_name = "direct"

    def close(self, walk: Walk, rng: np.random.Generator, count: Optional[int] = None) -> List[ClosedPolygon]:
        # the closure is deterministic, one polygon whatever the count
        return [perturbed_direct_closure(walk)]
