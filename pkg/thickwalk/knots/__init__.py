from thickwalk.knots.diagram import CrossingDiagram, project_to_diagram, simplify_diagram
from thickwalk.knots.invariants import alexander_at, alexander_polynomial
from thickwalk.knots.polygon import (
    ClosedPolygon,
    closure_direct,
    closure_sphere,
    reduce_polygon,
    sample_sphere_points,
)
from thickwalk.knots.spectrum import (
    DominanceVerdict,
    KnotSpectrum,
    classify_polygon,
    dominance,
    knot_spectrum,
)
from thickwalk.knots.table import KNOT_TABLE, UNCLASSIFIED, UNKNOT, KnotClass, classify, knot_class

__all__ = [
    "KNOT_TABLE",
    "UNCLASSIFIED",
    "UNKNOT",
    "ClosedPolygon",
    "CrossingDiagram",
    "DominanceVerdict",
    "KnotClass",
    "KnotSpectrum",
    "alexander_at",
    "alexander_polynomial",
    "classify",
    "classify_polygon",
    "closure_direct",
    "closure_sphere",
    "dominance",
    "knot_class",
    "knot_spectrum",
    "project_to_diagram",
    "reduce_polygon",
    "sample_sphere_points",
    "simplify_diagram",
]
