"""
Knot classes and the lookup table keyed by (|Delta(-1)|, |Delta(-2)|).
"""
from dataclasses import dataclass
from typing import Dict, Tuple

from thickwalk.knots.diagram import CrossingDiagram
from thickwalk.knots.invariants import Coefficients, alexander_polynomial, evaluate_polynomial

# Normalized Alexander polynomials, ascending coefficients
KNOT_TABLE: Dict[str, Coefficients] = {
    "0_1": (1,),
    "3_1": (1, -1, 1),
    "4_1": (1, -3, 1),
    "5_1": (1, -1, 1, -1, 1),
    "5_2": (2, -3, 2),
    "6_1": (2, -5, 2),
    "6_2": (1, -3, 3, -3, 1),
    "6_3": (1, -3, 5, -3, 1),
    "7_1": (1, -1, 1, -1, 1, -1, 1),
    "7_2": (3, -5, 3),
    "7_3": (2, -3, 3, -3, 2),
    "7_4": (4, -7, 4),
    "7_5": (2, -4, 5, -4, 2),
    "7_6": (1, -5, 7, -5, 1),
    "7_7": (1, -5, 9, -5, 1),
    "3_1#3_1": (1, -2, 3, -2, 1),
    "3_1#4_1": (1, -4, 5, -4, 1),
}


@dataclass(frozen=True, order=True)
class KnotClass:
    determinant: int
    secondary: int
    name: str

    @property
    def is_unknot(self) -> bool:
        return self.name == "0_1"

    @property
    def is_classified(self) -> bool:
        return self.determinant > 0 and not self.name.startswith("unclassified")

    def __str__(self) -> str:
        return self.name


def invariants_of(coefficients: Coefficients) -> Tuple[int, int]:
    return abs(evaluate_polynomial(coefficients, -1)), abs(evaluate_polynomial(coefficients, -2))


def _build_lookup() -> Dict[Tuple[int, int], KnotClass]:
    lookup: Dict[Tuple[int, int], KnotClass] = {}
    for name, coefficients in KNOT_TABLE.items():
        key = invariants_of(coefficients)
        if key in lookup:
            raise ValueError(f"knot table collision: {name} and {lookup[key].name} share invariants {key}")
        lookup[key] = KnotClass(key[0], key[1], name)
    return lookup


INVARIANT_LOOKUP = _build_lookup()

UNKNOT = INVARIANT_LOOKUP[(1, 1)]
# Closures whose diagram could not be built
UNCLASSIFIED = KnotClass(0, 0, "unclassified")


def knot_class(name: str) -> KnotClass:
    return INVARIANT_LOOKUP[invariants_of(KNOT_TABLE[name])]


def classify_invariants(determinant: int, secondary: int) -> KnotClass:
    found = INVARIANT_LOOKUP.get((determinant, secondary))
    if found is not None:
        return found
    return KnotClass(determinant, secondary, f"unclassified({determinant},{secondary})")


def classify(diagram: CrossingDiagram) -> KnotClass:
    """Name the knot type of a diagram from its Alexander invariants"""
    if diagram.crossing_count < 3:
        return UNKNOT
    return classify_invariants(*invariants_of(alexander_polynomial(diagram)))
