import math

import numpy as np
import pytest

from thickwalk.geom import Walk
from thickwalk.sampler import make_rng, straight_walk

# Keeps x_2 of the hairpin one unit from both x_1 and x_3
HAIRPIN_BULGE = math.sqrt(0.9375)


def torus_trefoil_at(t: np.ndarray) -> np.ndarray:
    return np.column_stack([
        (2 + np.cos(3 * t)) * np.cos(2 * t),
        (2 + np.cos(3 * t)) * np.sin(2 * t),
        np.sin(3 * t),
    ])


def torus_trefoil(count: int = 40) -> np.ndarray:
    return torus_trefoil_at(2 * np.pi * np.arange(count) / count)


def open_torus_trefoil(count: int = 40, gap: float = 0.02) -> np.ndarray:
    """Trefoil sampled over [0, 2pi - gap] with its ends left apart"""
    return torus_trefoil_at((2 * np.pi - gap) * np.arange(count) / (count - 1))


def figure_eight(count: int = 120) -> np.ndarray:
    t = 2 * np.pi * np.arange(count) / count
    return np.column_stack([
        (2 + np.cos(2 * t)) * np.cos(3 * t),
        (2 + np.cos(2 * t)) * np.sin(3 * t),
        np.sin(4 * t),
    ])


def with_tails(core: np.ndarray, reach: float) -> np.ndarray:
    """Open chain: straight +x tails from both ends of ``core`` out to x = reach"""
    head = np.array([reach, core[0, 1], core[0, 2]])
    tail = np.array([reach, core[-1, 1], core[-1, 2]])
    return np.vstack([head, core, tail])


@pytest.fixture
def rng():
    return make_rng(20240101)


@pytest.fixture
def straight10() -> Walk:
    return straight_walk(10)


@pytest.fixture
def corner_walk() -> Walk:
    """Right angle at v_1, straight at v_2"""
    return Walk([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 2, 0)])


@pytest.fixture
def hairpin() -> Walk:
    """Planar hairpin whose first and last edges are antiparallel and 0.5 apart"""
    return Walk([
        (0, 0, 0),
        (1, 0, 0),
        (1 + HAIRPIN_BULGE, 0.25, 0),
        (1, 0.5, 0),
        (0, 0.5, 0),
    ])


@pytest.fixture
def open_trefoil() -> np.ndarray:
    return with_tails(torus_trefoil(40), 20.0)


@pytest.fixture
def gapped_trefoil() -> np.ndarray:
    """Open trefoil without tails, its ends about 0.13 apart"""
    return open_torus_trefoil(40)


@pytest.fixture
def trefoil_polygon() -> np.ndarray:
    return torus_trefoil(40)


@pytest.fixture
def figure_eight_polygon() -> np.ndarray:
    return figure_eight(120)


@pytest.fixture
def unknot_polygon() -> np.ndarray:
    t = 2 * np.pi * np.arange(24) / 24
    return np.column_stack([3 * np.cos(t), 2 * np.sin(t), 0.5 * np.sin(2 * t)])


@pytest.fixture
def granny_polygon() -> np.ndarray:
    """Two trefoils joined by their tails; the second is the first mirrored through x = 5"""
    first = with_tails(torus_trefoil(40), 5.0)
    second = first[1:-1][::-1].copy()
    second[:, 0] = 10.0 - second[:, 0]
    return np.vstack([first, second])


@pytest.fixture
def random_walks():
    """Freely jointed walks of 100 edges, some of which fold back on themselves"""
    generator = make_rng(99)

    def build(count: int, n: int = 100):
        return [Walk.from_edges(generator.standard_normal((n, 3))) for _ in range(count)]

    return build
