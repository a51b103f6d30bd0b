import numpy as np
import pytest
from scipy.stats import kstest

from thickwalk.exceptions import DegenerateClosureError, DiagramFailureError, PreconditionViolation
from thickwalk.knots import (
    KNOT_TABLE,
    UNCLASSIFIED,
    UNKNOT,
    ClosedPolygon,
    CrossingDiagram,
    KnotSpectrum,
    alexander_at,
    alexander_polynomial,
    classify,
    classify_polygon,
    closure_direct,
    closure_sphere,
    dominance,
    knot_class,
    knot_spectrum,
    project_to_diagram,
    reduce_polygon,
    sample_sphere_points,
    simplify_diagram,
)
from thickwalk.knots.diagram import random_direction
from thickwalk.knots.invariants import knot_determinant
from thickwalk.knots.polygon import closure_sphere_radius, perturbed_direct_closure
from thickwalk.knots.spectrum import DOMINANT, NONE, STRONG, WEAK
from thickwalk.knots.table import INVARIANT_LOOKUP, invariants_of
from thickwalk.sampler import make_rng

# O1 U2 O3 U1 O2 U3, all crossings positive
TREFOIL_CODE = [(1, True), (2, False), (3, True), (1, False), (2, True), (3, False)]
# U1 O2 U3 O1 U4 O3 U2 O4
FIGURE_EIGHT_CODE = [(1, False), (2, True), (3, False), (1, True), (4, False), (3, True), (2, False), (4, True)]

EXPECTED_INVARIANTS = {
    "0_1": (1, 1), "3_1": (3, 7), "4_1": (5, 11), "5_1": (5, 31), "5_2": (7, 16),
    "6_1": (9, 20), "6_2": (11, 59), "6_3": (13, 67), "7_1": (7, 127), "7_2": (11, 25),
    "7_3": (13, 76), "7_4": (15, 34), "7_5": (17, 94), "7_6": (19, 95), "7_7": (21, 103),
    "3_1#3_1": (9, 49), "3_1#4_1": (15, 77),
}


def spectrum_of(counts):
    return KnotSpectrum({knot_class(name): count for name, count in counts.items()})


# table

def test_knot_table_invariants():
    assert {name: invariants_of(coefficients) for name, coefficients in KNOT_TABLE.items()} == EXPECTED_INVARIANTS


def test_knot_table_keys_are_unique():
    assert len(INVARIANT_LOOKUP) == len(KNOT_TABLE)
    assert knot_class("3_1").determinant == 3
    assert UNKNOT.is_unknot
    assert not UNCLASSIFIED.is_classified


# diagrams and invariants

def test_trefoil_gauss_code():
    diagram = CrossingDiagram.from_code(TREFOIL_CODE, {1: 1, 2: 1, 3: 1})
    assert diagram.crossing_count == 3
    assert alexander_polynomial(diagram) == (1, -1, 1)
    assert knot_determinant(diagram) == 3
    assert alexander_at(diagram, -2) == 7
    assert classify(diagram).name == "3_1"


@pytest.mark.parametrize("signs", [(1, 1, -1, -1), (-1, -1, 1, 1), (1, -1, 1, -1)])
def test_figure_eight_determinant_ignores_signs(signs):
    diagram = CrossingDiagram.from_code(FIGURE_EIGHT_CODE, dict(zip((1, 2, 3, 4), signs)))
    assert alexander_at(diagram, -1) == 5


def test_diagram_validation():
    with pytest.raises(PreconditionViolation):
        CrossingDiagram(((0, True), (0, True)), (1,))
    with pytest.raises(PreconditionViolation):
        CrossingDiagram(((0, True), (0, False)), (2,))
    with pytest.raises(PreconditionViolation):
        CrossingDiagram(((0, True), (1, False)), (1, 1))


def test_small_diagrams_are_unknots():
    kink = CrossingDiagram.from_code([(5, True), (5, False)], {5: 1})
    assert alexander_polynomial(kink) == (1,)
    assert alexander_at(kink, -1) == 1
    assert classify(kink) == UNKNOT


def test_simplify_removes_kinks_and_bigons():
    # a kink followed by a cancelling pair of opposite crossings
    code = [(1, True), (1, False), (2, True), (3, True), (3, False), (2, False)]
    diagram = CrossingDiagram.from_code(code, {1: 1, 2: 1, 3: -1})
    assert simplify_diagram(diagram).crossing_count == 0


def test_simplify_keeps_the_trefoil():
    diagram = CrossingDiagram.from_code(TREFOIL_CODE, {1: 1, 2: 1, 3: 1})
    assert simplify_diagram(diagram) == diagram


def test_projection_of_planar_polygon_has_no_crossings(rng):
    square = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], dtype=float)
    diagram = project_to_diagram(ClosedPolygon(square), np.array([0.0, 0.0, 1.0]), rng)
    assert diagram.crossing_count == 0


def test_projection_requires_unit_direction(trefoil_polygon, rng):
    with pytest.raises(PreconditionViolation):
        project_to_diagram(ClosedPolygon(trefoil_polygon), np.array([0.0, 0.0, 2.0]), rng)


def test_projection_retries_degenerate_directions(rng):
    # seen along x, the first edge collapses to a point
    polygon = ClosedPolygon([(0, 0, 0), (1, 0, 0), (1, 1, 0), (2, 1, 0), (2, 2, 1), (0, 2, 1)])
    diagram = project_to_diagram(polygon, np.array([1.0, 0.0, 0.0]), rng)
    assert diagram.crossing_count >= 0
    with pytest.raises(DiagramFailureError):
        project_to_diagram(polygon, np.array([1.0, 0.0, 0.0]), rng, max_retries=0)


@pytest.mark.parametrize("fixture,name", [
    ("unknot_polygon", "0_1"),
    ("trefoil_polygon", "3_1"),
    ("figure_eight_polygon", "4_1"),
    ("granny_polygon", "3_1#3_1"),
])
def test_classify_polygon_names_known_knots(request, fixture, name, rng):
    polygon = request.getfixturevalue(fixture)
    for _ in range(5):
        assert classify_polygon(polygon, rng).name == name


@pytest.mark.parametrize("fixture,name,determinant", [
    ("unknot_polygon", "0_1", 1),
    ("trefoil_polygon", "3_1", 3),
    ("figure_eight_polygon", "4_1", 5),
    ("granny_polygon", "3_1#3_1", 9),
])
def test_classification_is_the_same_from_every_direction(request, fixture, name, determinant, rng):
    polygon = reduce_polygon(request.getfixturevalue(fixture))
    for _ in range(50):
        diagram = simplify_diagram(project_to_diagram(polygon, random_direction(rng), rng))
        assert classify(diagram).name == name
        assert knot_determinant(diagram) == determinant


def test_classification_survives_similarity_transforms(trefoil_polygon, rng):
    rotation, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    moved = ClosedPolygon(trefoil_polygon).transformed(rotation=rotation, translation=[4.0, -2.0, 7.0], scale=2.5)
    assert classify_polygon(moved, rng).name == "3_1"
    assert classify_polygon(ClosedPolygon(trefoil_polygon).reversed(), rng).name == "3_1"


def test_classification_with_and_without_reduction(figure_eight_polygon, rng):
    assert classify_polygon(figure_eight_polygon, rng, reduce=False).name == "4_1"
    assert classify_polygon(figure_eight_polygon, rng, reduce=True).name == "4_1"


def test_reduction_keeps_knotted_polygons_knotted(trefoil_polygon, unknot_polygon):
    reduced = reduce_polygon(trefoil_polygon)
    assert 6 <= len(reduced) < len(trefoil_polygon)
    assert len(reduce_polygon(unknot_polygon)) == 3


# closures

def test_direct_closure(open_trefoil, straight10):
    assert len(closure_direct(open_trefoil)) == len(open_trefoil)
    with pytest.raises(DegenerateClosureError) as error:
        closure_direct(straight10)
    assert error.value.details["reason"] == "collinear polygon"
    loop = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)], dtype=float)
    with pytest.raises(DegenerateClosureError):
        closure_direct(loop)


def test_perturbed_direct_closure_handles_straight_walks(straight10, rng):
    polygon = perturbed_direct_closure(straight10)
    assert len(polygon) == 11
    assert classify_polygon(polygon, rng) == UNKNOT


def test_sphere_points_lie_outside_the_walk(open_trefoil, rng):
    points = sample_sphere_points(open_trefoil, 50, rng)
    assert points.shape == (50, 3)
    centroid = open_trefoil.mean(axis=0)
    bound = np.linalg.norm(open_trefoil - centroid, axis=1).max()
    assert np.allclose(np.linalg.norm(points - centroid, axis=1), 3.0 * bound)
    polygon = closure_sphere(open_trefoil, points[0])
    assert len(polygon) == len(open_trefoil) + 1


def test_sphere_points_are_area_uniform(open_trefoil, rng):
    centroid, radius = closure_sphere_radius(open_trefoil)
    points = sample_sphere_points(open_trefoil, 4000, rng)
    heights = (points - centroid)[:, 2] / radius
    # an area-uniform point has a uniform height on [-1, 1]
    assert kstest(heights, "uniform", args=(-1.0, 2.0)).pvalue > 0.001
    assert heights.mean() == pytest.approx(0.0, abs=0.05)


def test_sphere_closure_rejects_inside_points(open_trefoil):
    with pytest.raises(PreconditionViolation):
        closure_sphere(open_trefoil, open_trefoil.mean(axis=0))


def test_sphere_points_require_factor_above_one(open_trefoil, rng):
    with pytest.raises(PreconditionViolation):
        sample_sphere_points(open_trefoil, 5, rng, factor=1.0)


# spectrum and dominance

def test_open_trefoil_spectrum_is_strongly_trefoil(open_trefoil, rng):
    spectrum = knot_spectrum(open_trefoil, 100, rng)
    assert spectrum.total == 100
    verdict = dominance(spectrum)
    assert verdict.winner.name == "3_1"
    assert verdict.level == STRONG
    assert verdict.is_knotted()


def test_trefoil_with_a_small_gap_closes_to_a_trefoil(gapped_trefoil, rng):
    spectrum = knot_spectrum(gapped_trefoil, 100, rng)
    assert spectrum.counts.get(knot_class("3_1"), 0) >= 90
    verdict = dominance(spectrum)
    assert verdict.winner.name == "3_1"
    assert verdict.level == STRONG


def test_sphere_closures_can_disagree_with_the_direct_closure(trefoil_polygon, rng):
    # the ends are one edge apart, so the direct closure is the trefoil polygon itself
    assert classify_polygon(closure_direct(trefoil_polygon), rng).name == "3_1"
    spectrum = knot_spectrum(trefoil_polygon, 100, rng)
    # closures whose far triangle is pierced by a strand untie it
    assert spectrum.fraction(UNKNOT) > 0
    assert spectrum.fraction(knot_class("3_1")) < 1.0
    assert dominance(spectrum).winner.name == "3_1"


def test_spectrum_is_reproducible(open_trefoil):
    first = knot_spectrum(open_trefoil, 20, make_rng(4)).to_text()
    assert knot_spectrum(open_trefoil, 20, make_rng(4)).to_text() == first


def test_knot_spectrum_requires_closures(open_trefoil, rng):
    with pytest.raises(PreconditionViolation):
        knot_spectrum(open_trefoil, 0, rng)


@pytest.mark.parametrize("counts,level,winner", [
    ({"0_1": 95, "3_1": 5}, STRONG, "0_1"),
    ({"3_1": 70, "4_1": 30}, DOMINANT, "3_1"),
    ({"3_1": 55, "4_1": 45}, WEAK, "3_1"),
    ({"3_1": 40, "0_1": 35, "4_1": 25}, NONE, "3_1"),
])
def test_dominance_levels(counts, level, winner):
    verdict = dominance(spectrum_of(counts))
    assert verdict.level == level
    assert verdict.winner.name == winner


def test_dominance_ties_prefer_the_unknot():
    verdict = dominance(spectrum_of({"3_1": 50, "0_1": 50}))
    assert verdict.winner == UNKNOT
    assert verdict.level == NONE
    assert not verdict.is_knotted()


def test_dominance_of_empty_spectrum():
    with pytest.raises(PreconditionViolation):
        dominance(KnotSpectrum())


def test_unclassified_winner_is_not_knotted():
    spectrum = KnotSpectrum({UNCLASSIFIED: 80, UNKNOT: 20})
    assert not dominance(spectrum).is_knotted()


def test_spectrum_text_and_merge():
    spectrum = spectrum_of({"3_1": 3}).merge(spectrum_of({"3_1": 1, "0_1": 4}))
    assert spectrum.total == 8
    assert spectrum.to_text() == "0_1 1 1 4 0.5000\n3_1 3 7 4 0.5000\n"
