import math

import numpy as np
import pytest

from thickwalk.exceptions import PreconditionViolation
from thickwalk.geom import Walk
from thickwalk.models.chain import ChainConfig
from thickwalk.sampler import DOUBLE, SINGLE, make_rng, propose_move, run_chain
from thickwalk.thickness import (
    SegmentGrid,
    ThicknessParams,
    accommodates_tube,
    critical_pairs,
    dcsd,
    dcsd_accelerated,
    format_witnesses,
    long_range_ok,
    min_bend_angle,
    segment_pair_critical_distance,
)

PERPENDICULAR = np.array([(0, 0, 0), (1, 0, 0), (0.5, -0.5, 0.3), (0.5, 0.5, 0.3)], dtype=float)
DIVERGING = np.array([(0, 0, 0), (1, 0, 0), (1.5, 0, 2), (2.5, 0, 3)], dtype=float)

THETA_MIN_DEGREES = [0, 23, 44, 62, 77, 90, 100, 109, 116, 122, 127]


@pytest.mark.parametrize("k,expected", list(enumerate(THETA_MIN_DEGREES)))
def test_theta_min_follows_radius(k, expected):
    assert round(ThicknessParams(k / 10).theta_min_degrees) == expected


def test_thickness_params_rejects_bad_radius():
    with pytest.raises(PreconditionViolation):
        ThicknessParams(-0.1)
    with pytest.raises(PreconditionViolation):
        ThicknessParams(math.inf)


def test_straight_walk_has_no_critical_pair(straight10):
    result = dcsd(straight10)
    assert result.distance == math.inf
    assert result.witness is None
    assert not result.is_finite


def test_hairpin_dcsd_and_witness(hairpin):
    result = dcsd(hairpin)
    assert result.distance == pytest.approx(0.5)
    (h, s), (j, t) = result.witness
    assert (h, j) == (0, 3)
    assert s == pytest.approx(0.5)
    assert t == pytest.approx(0.5)


def test_hairpin_endpoint_pair_is_not_critical(hairpin):
    # segment 0's closest point is its far end, and stepping onto segment 1 gets closer still
    assert segment_pair_critical_distance(hairpin, 0, 2) is None
    assert segment_pair_critical_distance(hairpin, 0, 3) == pytest.approx(0.5)


def test_perpendicular_segments_meet_at_interior_points():
    assert segment_pair_critical_distance(PERPENDICULAR, 0, 2) == pytest.approx(0.3)
    (h, s), (j, t) = dcsd(PERPENDICULAR).witness
    assert (h, j) == (0, 2)
    assert s == pytest.approx(0.5)
    assert t == pytest.approx(0.5)


def test_diverging_segments_are_not_doubly_critical():
    assert segment_pair_critical_distance(DIVERGING, 0, 2) is None


def test_segment_pair_rejects_adjacent_segments(hairpin):
    with pytest.raises(PreconditionViolation):
        segment_pair_critical_distance(hairpin, 1, 2)
    with pytest.raises(PreconditionViolation):
        segment_pair_critical_distance(hairpin, 0, 4)


def test_dcsd_is_invariant_under_rigid_motion_and_reversal(random_walks):
    rotation, _ = np.linalg.qr(np.arange(9, dtype=float).reshape(3, 3) + np.eye(3) * 5)
    for walk in random_walks(5, 40):
        expected = dcsd(walk).distance
        assert dcsd(walk.transformed(rotation)).distance == pytest.approx(expected, rel=1e-9)
        assert dcsd(walk.reversed()).distance == pytest.approx(expected, rel=1e-9)


def test_reversal_maps_the_witness_pair(hairpin):
    (h, _), (j, _) = dcsd(hairpin).witness
    (h2, _), (j2, _) = dcsd(hairpin.reversed()).witness
    last = hairpin.n - 1
    assert (h2, j2) == (last - j, last - h)


def test_accelerated_dcsd_matches_reference(random_walks):
    for walk in random_walks(8, 60):
        reference = dcsd(walk)
        for cutoff in (0.2, 0.6, 1.5):
            fast = dcsd_accelerated(walk, cutoff)
            if reference.distance <= cutoff:
                assert fast.distance == pytest.approx(reference.distance, rel=1e-12)
            else:
                assert fast.distance == math.inf


@pytest.mark.parametrize("r", [0.1, 0.5])
def test_accelerated_dcsd_agrees_on_sampled_walks_and_proposals(r):
    params = ThicknessParams(r)
    rng = make_rng(17, 1)
    walks, _ = run_chain(ChainConfig(n=60, r=r, seed=17, samples=4, burn_in=100, stride=30))
    candidates = [
        propose_move(walk, params, rng, kind)[1]
        for walk in walks
        for kind in (SINGLE, DOUBLE) * 5
    ]
    for walk in walks + candidates:
        reference = dcsd(walk)
        fast = dcsd_accelerated(walk, 2 * r)
        assert (fast.distance > 2 * r) == (reference.distance > 2 * r)
        if reference.distance <= 2 * r:
            assert fast.distance == pytest.approx(reference.distance, abs=1e-9)


def test_accelerated_dcsd_requires_positive_cutoff(hairpin):
    with pytest.raises(PreconditionViolation):
        dcsd_accelerated(hairpin, 0.0)


def test_segment_grid_finds_every_close_pair(random_walks):
    walk = random_walks(1, 80)[0]
    h, j = SegmentGrid(walk.vertices, 1.0).candidate_pairs()
    found = set(zip(h.tolist(), j.tolist()))
    for pair in critical_pairs(walk, cutoff=1.0):
        assert (pair.h, pair.j) in found
    assert all(a < b - 1 for a, b in found)


def test_long_range_threshold(hairpin):
    assert long_range_ok(hairpin, ThicknessParams(0.2))
    assert not long_range_ok(hairpin, ThicknessParams(0.3))
    # dcsd equal to the diameter fails
    assert not long_range_ok(hairpin, ThicknessParams(0.25))


def test_accommodates_tube_needs_both_constraints(hairpin, corner_walk, straight10):
    assert accommodates_tube(straight10, ThicknessParams(1.0))
    assert accommodates_tube(corner_walk, ThicknessParams(0.5))
    assert not accommodates_tube(corner_walk, ThicknessParams(0.6))
    # the hairpin's tight bend fails before its long-range distance does
    assert min_bend_angle(hairpin) == pytest.approx(math.acos(0.875))
    assert not accommodates_tube(hairpin, ThicknessParams(0.2))
    assert accommodates_tube(hairpin, ThicknessParams(0.1))


@pytest.mark.parametrize("r", [0.3, 0.6])
def test_thick_walks_stay_thick_for_smaller_radii(r):
    walks, _ = run_chain(ChainConfig(n=40, r=r, seed=13, samples=5, burn_in=100, stride=20))
    for walk in walks:
        assert accommodates_tube(walk, ThicknessParams(r))
        for smaller in (0.0, 0.25 * r, 0.5 * r, 0.9 * r):
            assert accommodates_tube(walk, ThicknessParams(smaller))


def test_every_walk_accommodates_radius_zero(random_walks):
    assert all(accommodates_tube(walk, ThicknessParams(0.0)) for walk in random_walks(5))


def test_witness_dump_lists_each_pair(hairpin):
    pairs = critical_pairs(hairpin)
    lines = format_witnesses(pairs).splitlines()
    assert len(lines) == len(pairs)
    assert lines[0].split()[0] == "0"


def test_critical_pairs_cutoff(hairpin):
    assert critical_pairs(hairpin, cutoff=0.4) == []
    assert [(p.h, p.j) for p in critical_pairs(hairpin, cutoff=0.6)] == [(0, 3)]


def test_dcsd_accepts_raw_polylines():
    with pytest.raises(PreconditionViolation):
        dcsd(np.zeros((2, 3)))
    assert dcsd(Walk([(0, 0, 0), (1, 0, 0), (1, 1, 0)])).distance == math.inf
