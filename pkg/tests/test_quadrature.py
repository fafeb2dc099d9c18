import math

import numpy as np
import pytest

from molab.quadrature import integrate_1d, integrate_2d


def test_polynomial_is_exact():
    r = integrate_1d(lambda x: 3 * x ** 2, 0, 2, 1e-12)
    assert r.ok and r.value == pytest.approx(8.0, abs=1e-12)


def test_reciprocal_meets_tolerance():
    r = integrate_1d(lambda x: 1 / x, 1, 2, 1e-10)
    assert r.ok and abs(r.value - math.log(2)) < 1e-10


def test_smooth_peak():
    r = integrate_1d(lambda x: np.exp(-100 * x ** 2), -1, 1, 1e-10)
    assert abs(r.value - math.sqrt(math.pi / 100) * math.erf(10)) < 1e-9


def test_budget_exhaustion_reports_suspect_point():
    with np.errstate(divide="ignore"):
        r = integrate_1d(lambda x: 1 / np.abs(x - 0.3) ** 1.5, 0.3, 1, 1e-10, budget=2000)
    assert r.status in ("budget", "nonfinite", "min_width")
    assert r.suspect is not None and abs(r.suspect - 0.3) < 1e-2


def test_empty_interval():
    assert integrate_1d(np.sin, 1, 1, 1e-8).value == 0.0


def test_two_dimensional():
    r = integrate_2d(lambda p: p[:, 0] * p[:, 1] ** 2, (0, 0), (1, 2), 1e-10)
    assert r.ok and r.value == pytest.approx(4 / 3, abs=1e-10)
    r = integrate_2d(lambda p: np.exp(p[:, 0] + p[:, 1]), (0, 0), (1, 1), 1e-9)
    assert r.value == pytest.approx((math.e - 1) ** 2, abs=1e-8)
