import math

import numpy as np
import pytest

from molab.descriptors import Descriptor
from molab.families import make_orlicz, make_phi1, make_phi2, make_variable_exponent
from molab.functions import PiecewiseFunction, Singularity, combine
from molab.geometry import Box, BoxSet
from molab.luxemburg import luxemburg_norm, membership_probe, norm_modular_convergence_check
from molab.modular import Accuracy, modular


def chi(a, b, v=1.0):
    return PiecewiseFunction.indicator(BoxSet.interval(a, b), v)


def random_simple(rng, lo, hi, k=3):
    edges = np.sort(rng.uniform(lo, hi, 2 * k))
    pieces = [(float(rng.uniform(-2, 2)), Box((float(edges[2 * i]),), (float(edges[2 * i + 1]),)))
              for i in range(k)]
    return PiecewiseFunction.simple(pieces)


def test_square_norm_of_interval():
    r = luxemburg_norm(make_orlicz("power", 2.0), chi(0, 4), tol=1e-6)
    assert abs(r.value - 2.0) <= 1e-6
    assert r.bracket[1] - r.bracket[0] <= 1e-6 and r.membership == "in_E"


def test_phi1_norm_is_log_two():
    r = luxemburg_norm(make_phi1(), chi(1, 2), tol=1e-6)
    assert abs(r.value - math.log(2)) <= 1e-6
    assert r.modular_at_value.value <= 1.0 + 1e-8


def test_zero_norm():
    r = luxemburg_norm(make_phi1(), PiecewiseFunction.zero(1))
    assert r.value == 0 and r.bracket == (0.0, 0.0)


def test_nonlinear_family_uses_bisection():
    phi = make_orlicz("exp")
    r = luxemburg_norm(phi, chi(0, 1), tol=1e-7)
    # (e^{1/λ} - 1) = 1  ⇔  λ = 1/ln 2
    assert abs(r.value - 1 / math.log(2)) <= 1e-7
    assert r.bracket[0] <= 1 / math.log(2) <= r.bracket[1] + 1e-12


def test_infinite_norm_over_dense_poles():
    phi = make_phi2(8)
    f = PiecewiseFunction.bump(Box((0.3,), (0.4,)), Box((0.25,), (0.45,)), 0.5)
    r = luxemburg_norm(phi, f)
    assert math.isinf(r.value) and r.membership == "not_in_L"


def test_bad_tolerance_and_unbounded_support():
    with pytest.raises(ValueError):
        luxemburg_norm(make_phi1(), chi(1, 2), tol=0)
    # supports are finite unions of bounded boxes, so unbounded ones are refused at construction
    with pytest.raises(ValueError):
        BoxSet.interval(0, math.inf)


def test_membership_examples():
    assert membership_probe(make_phi1(), chi(1, 2)) == "in_E"
    assert membership_probe(make_phi1(), chi(-1, 1)) == "not_in_L"

    def g(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        with np.errstate(divide="ignore"):
            return np.where(inside, -np.log(np.where(inside, x, 1.0)), 0.0)
    f = PiecewiseFunction.opaque(g, BoxSet.interval(0, 1), singularities=[Singularity(0.0, "log", 1.0, side="right")])
    assert membership_probe(make_orlicz("exp"), f) == "in_L_only"


def test_delta2_families_never_in_L_only(rng):
    line = BoxSet.interval(-5, 5, False)
    families = [make_phi1(), make_phi2(8), make_variable_exponent(Descriptor.sin(2, 1, 1), line)]
    for phi in families:
        for _ in range(5):
            f = random_simple(rng, -3, 3)
            verdict = membership_probe(phi, f, schedule=(0.01, 0.5, 4.0, 100.0))
            assert verdict in ("in_E", "not_in_L")


def test_homogeneity_and_triangle(rng):
    phi = make_variable_exponent(Descriptor.sin(2, 1, 1), BoxSet.interval(-5, 5, False))
    tol = 1e-6
    for _ in range(6):
        f = random_simple(rng, -3, 3)
        g = random_simple(rng, -3, 3)
        c = float(rng.uniform(-3, 3))
        nf = luxemburg_norm(phi, f, tol=tol).value
        ncf = luxemburg_norm(phi, combine([(c, f)]), tol=tol).value
        assert abs(ncf - abs(c) * nf) <= 2 * tol * max(1.0, abs(c))
        ng = luxemburg_norm(phi, g, tol=tol).value
        nsum = luxemburg_norm(phi, combine([(1.0, f), (1.0, g)]), tol=tol).value
        assert nsum <= nf + ng + 3 * tol


def test_unit_ball_at_reported_value(rng):
    phi = make_orlicz("exp")
    for _ in range(5):
        f = random_simple(rng, 0, 4)
        r = luxemburg_norm(phi, f, tol=1e-6)
        check = modular(phi, f, scale=1 / r.value, acc=Accuracy(abs_err=1e-10))
        assert check.value <= 1 + check.err + 1e-9


def test_convergence_report_scaled_indicators():
    phi = make_phi1()
    f = chi(1, 2)
    seq = [chi(1, 2, 1 - 1 / n) for n in range(1, 41)]
    rep = norm_modular_convergence_check(phi, f, seq)
    assert rep.ok
    last = rep.rows[-1]
    assert last.norm == pytest.approx(math.log(2) / 40, abs=1e-6)
    for lam, v in last.modulars.items():
        assert v == pytest.approx(lam * math.log(2) / 40, rel=1e-6)


def test_convergence_report_constant_and_shrinking():
    phi = make_phi1()
    f = chi(1, 2)
    rep = norm_modular_convergence_check(phi, f, [f] * 4)
    assert rep.ok and all(r.norm == 0 and all(v == 0 for v in r.modulars.values()) for r in rep.rows)

    seq = [chi(1, 1 + 1 / n) for n in (1, 10, 100, 1000, 10000)]
    rep = norm_modular_convergence_check(phi, PiecewiseFunction.zero(1), seq)
    assert rep.ok and rep.norm_vanishes and all(rep.modular_vanishes.values())
    assert rep.rows[-1].norm == pytest.approx(math.log(1 + 1e-4), abs=1e-6)


def test_convergence_report_rejects_bad_norm_list():
    with pytest.raises(ValueError):
        norm_modular_convergence_check(make_phi1(), chi(1, 2), [chi(1, 2)], norms=[0.0, 1.0])
