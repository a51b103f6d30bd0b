from abc import ABC, abstractmethod
from typing import List, Optional

import numpy as np

from thickwalk.geom import Walk
from thickwalk.knots.polygon import ClosedPolygon
from thickwalk.knots.spectrum import KnotSpectrum, spectrum_of_polygons


class BaseClosure(ABC):

    _closure_name = "base"

    @abstractmethod
    def close(self, walk: Walk, rng: np.random.Generator, count: int) -> List[ClosedPolygon]:
        """
        Turn an open walk into the closed polygons whose knot types make up its spectrum.
        """
        pass

    def spectrum(self, walk: Walk, rng: np.random.Generator, count: Optional[int] = None,
                 reduce: bool = True) -> KnotSpectrum:
        return spectrum_of_polygons(self.close(walk, rng, count), rng, reduce=reduce)

    @property
    def name(self) -> str:
        return self._closure_name
