import math

import numpy as np
import pytest

from molab.descriptors import Descriptor, as_descriptor
from molab.geometry import Box, BoxSet


def test_sin_bounds_are_exact():
    p = Descriptor.sin(2, 1, 1)
    dom = BoxSet.interval(0, math.pi, False)
    assert p.sup(dom) == pytest.approx(3.0)
    assert p.inf(dom) == pytest.approx(2.0)
    assert p.sup(Box.interval(0, 1)) == pytest.approx(2 + math.sin(1))


def test_affine_and_const():
    a = Descriptor("affine", {"c0": 1.0, "c": [2.0]})
    assert a(np.array([0.5]))[0] == pytest.approx(2.0)
    assert a.sup(Box.interval(0, 1)) == pytest.approx(3.0)
    assert as_descriptor(2.5)(np.array([7.0]))[0] == 2.5


def test_piecewise_integral_and_breaks():
    d = Descriptor.piecewise([(Box.interval(0, 1), 3.0), (Box.interval(2, 3), 1.0)])
    assert d.is_piecewise_constant
    assert d.integrate(Box.interval(0.5, 2.5)) == pytest.approx(1.5 + 0.5)
    assert set(d.breaks(0)) >= {0.0, 1.0, 2.0, 3.0}


def test_reciprocal_integral_diverges_over_its_pole():
    d = Descriptor.reciprocal(0, 1, 0)
    assert d.integrate(Box.interval(1, 2)) == pytest.approx(math.log(2))
    assert math.isinf(d.integrate(Box.interval(-1, 1)))
    assert math.isinf(d.sup(Box.interval(-1, 1)))


def test_json_round_trip_keeps_infinity():
    d = Descriptor.reciprocal(3, 1, 0)
    back = Descriptor.from_json(d.to_json())
    assert back(np.array([0.5]))[0] == pytest.approx(5.0)
    assert math.isinf(back.params["at_value"])


def test_bad_descriptors():
    with pytest.raises(ValueError):
        Descriptor("spline", {})
    with pytest.raises(ValueError):
        Descriptor.from_json({"v": 2})
    with pytest.raises(ValueError):
        Descriptor.reciprocal(1, -1, 0)
