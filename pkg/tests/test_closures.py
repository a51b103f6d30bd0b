import pytest

from thickwalk.exceptions import InvalidConfigError
from thickwalk.services.closure import CLOSURES, get_closure, register_closure
from thickwalk.services.closure.base import BaseClosure
from thickwalk.services.closure.direct import DirectClosure
from thickwalk.services.closure.sphere import SphereClosure


def test_default_closures_are_registered():
    assert set(CLOSURES) == {"direct", "sphere"}
    assert isinstance(get_closure("direct"), DirectClosure)
    assert get_closure("sphere").name == "sphere"


def test_unknown_closure():
    with pytest.raises(InvalidConfigError) as error:
        get_closure("minimally-interfering")
    assert error.value.status_code == 400
    assert error.value.details["field"] == "closure"


def test_base_class_is_not_registered():
    register_closure(BaseClosure)
    assert "base" not in CLOSURES


def test_direct_closure_gives_one_polygon(open_trefoil, rng):
    polygons = get_closure("direct").close(open_trefoil, rng, 50)
    assert len(polygons) == 1
    spectrum = get_closure("direct").spectrum(open_trefoil, rng)
    assert spectrum.total == 1
    assert spectrum.ranked()[0][0].name == "3_1"


def test_sphere_closure_count_and_factor(open_trefoil, rng):
    polygons = SphereClosure(factor=5.0).close(open_trefoil, rng, 7)
    assert len(polygons) == 7
    spectrum = get_closure("sphere").spectrum(open_trefoil, rng, 30)
    assert spectrum.total == 30
