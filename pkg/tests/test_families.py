import math
from fractions import Fraction

import numpy as np
import pytest

from molab.descriptors import Descriptor
from molab.families import (Delta2Certificate, Delta2Rejection, check_double_phase_delta2, delta2_grid,
                            family_from_json, level_set_decomposition, make_double_phase, make_orlicz,
                            make_phi1, make_phi2, make_variable_exponent, make_weighted_linear,
                            validate_mo_function, verify_delta2)
from molab.geometry import BoxSet

UNIT = BoxSet.interval(0, 1, False)
ZERO_PI = BoxSet.interval(0, math.pi, False)


def ev(phi, x, t):
    return float(phi(np.array([x]), np.array([t]))[0])


def test_phi1_values():
    phi = make_phi1()
    assert ev(phi, 2, 3) == 1.5
    assert ev(phi, -0.5, 1) == 2.0
    assert ev(phi, 0.0, 5) == 0.0
    assert ev(phi, 7.0, 0) == 0.0
    (pole,) = phi.poles
    assert (pole.location, pole.order, pole.coefficient, pole.side) == (0.0, 1.0, 1.0, "both")


def test_phi2_values():
    one = make_phi2(1)
    assert ev(one, 0.75, 1) == pytest.approx(1.0)
    phi = make_phi2(8)
    assert ev(phi, 2.0, 3.5) == 3.5
    assert ev(phi, -1.0, 2.0) == 2.0
    lowest = min(p.location for p in phi.poles)
    assert ev(phi, 0.5 * lowest, 1.0) == 0.0
    assert phi.dense_singular_interval == (0.0, 1.0)
    assert phi.truncated().dense_singular_interval is None


def test_phi2_poles_follow_calkin_wilf():
    phi = make_phi2(4)
    assert [Fraction(p.location).limit_denominator(100) for p in phi.poles] == \
        [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4)]
    assert [p.coefficient for p in phi.poles] == [4.0 ** -n for n in range(1, 5)]
    assert all(p.side == "right" for p in phi.poles)


def test_phi2_is_deterministic():
    a, b = make_phi2(8), make_phi2(8)
    assert a.poles == b.poles


def test_phi2_rejects_bad_truncation():
    with pytest.raises(ValueError):
        make_phi2(0)


def test_declared_pole_bound_holds_near_pole():
    phi = make_phi2(8)
    for pole in phi.poles:
        x = pole.location + np.logspace(-8, -2, 20)
        t = 1.7
        assert np.all(phi(x, np.full(x.size, t)) >= t * pole.coefficient / (x - pole.location) * (1 - 1e-12))


def test_variable_exponent_values_and_delta2():
    sq = make_variable_exponent(Descriptor.const(2), UNIT)
    assert ev(sq, 0.5, 3) == pytest.approx(4.5)
    var = make_variable_exponent(Descriptor.sin(2, 1, 1), ZERO_PI)
    assert ev(var, math.pi / 2, 2) == pytest.approx(8 / 3)
    assert var.delta2.C == pytest.approx(8.0)
    with pytest.raises(ValueError):
        make_variable_exponent(Descriptor.const(0.5), UNIT)


def test_double_phase_values():
    dp = make_double_phase(Descriptor.const(2), Descriptor.const(3), Descriptor.const(1), UNIT)
    assert ev(dp, 0.3, 2) == pytest.approx(12.0)
    assert ev(dp, 0.3, 0) == 0.0
    plain = make_double_phase(Descriptor.sin(2, 0.5, 1), Descriptor.const(4), Descriptor.const(0), UNIT)
    assert ev(plain, 0.3, 1.7) == pytest.approx(1.7 ** (2 + 0.5 * math.sin(0.3)))
    with pytest.raises(ValueError):
        make_double_phase(Descriptor.const(3), Descriptor.const(2), Descriptor.const(1), UNIT)
    with pytest.raises(ValueError):
        make_double_phase(Descriptor.const(2), Descriptor.const(3), Descriptor.const(-1), UNIT)


def test_double_phase_clauses():
    cert = check_double_phase_delta2(Descriptor.const(2), Descriptor.const(3), Descriptor.const(1), UNIT)
    assert isinstance(cert, Delta2Certificate) and cert.clause == "i" and cert.C == 8
    same = check_double_phase_delta2(Descriptor.const(2), Descriptor.const(2), Descriptor.const(1), UNIT)
    assert isinstance(same, Delta2Certificate) and same.clause == "i"
    # r blows up at 0 but a vanishes there, so only clause (ii) applies
    dom = BoxSet.interval(0, 2, False)
    a = Descriptor.piecewise([(BoxSet.interval(1, 2).boxes[0], 1.0)])
    ii = check_double_phase_delta2(Descriptor.const(2), Descriptor.reciprocal(3, 1, 0), a, dom)
    assert isinstance(ii, Delta2Certificate) and ii.clause == "ii"
    bad = check_double_phase_delta2(Descriptor.const(2), Descriptor.reciprocal(3, 1, 0), Descriptor.const(1), UNIT)
    assert isinstance(bad, Delta2Rejection) and bad.clause == "ii"


@pytest.mark.parametrize("phi", [
    make_phi1(), make_phi2(8), make_orlicz("power", 3.0), make_orlicz("exp"),
    make_variable_exponent(Descriptor.sin(2, 1, 1), ZERO_PI),
    make_double_phase(Descriptor.const(2), Descriptor.sin(3, 1, 1), Descriptor.sin(1, 0.5, 2), ZERO_PI),
    make_weighted_linear(Descriptor.sin(2, 1, 3)),
])
def test_definition_one_validation(phi):
    assert validate_mo_function(phi).ok


@pytest.mark.parametrize("phi", [
    make_phi1(), make_phi2(8), make_variable_exponent(Descriptor.sin(2, 1, 1), ZERO_PI),
    make_double_phase(Descriptor.const(2), Descriptor.const(3), Descriptor.const(1), UNIT),
])
def test_attached_delta2_certificates_verify(phi):
    assert verify_delta2(phi, phi.delta2).passed


def test_delta2_constant_too_small_fails():
    sq = make_variable_exponent(Descriptor.const(2), UNIT)
    assert verify_delta2(sq, Delta2Certificate(4.0)).passed
    report = verify_delta2(sq, Delta2Certificate(3.9))
    assert not report.passed and report.worst_excess > 0


def test_exp_orlicz_has_no_delta2():
    assert make_orlicz("exp").delta2 is None


def test_level_sets_of_phi1():
    phi = make_phi1()
    ls = level_set_decomposition(phi, BoxSet.interval(1, 2, False), 20, 0.01)
    assert len(ls.sets) == 1 and ls.sets[0].volume == pytest.approx(1.0)
    ls = level_set_decomposition(phi, BoxSet.interval(0.1, 10, False), 20, 0.01)
    assert ls.sets[0].volume >= 9.0 - 0.02
    assert len(ls.sets) == 10
    for i, a in enumerate(ls.sets):
        for b in ls.sets[i + 1:]:
            assert (a & b).volume == 0
    assert level_set_decomposition(phi, BoxSet.empty(1, False), 5, 0.1).sets == []
    with pytest.raises(ValueError):
        level_set_decomposition(make_orlicz(), BoxSet.interval(0, 1, False), 5, 0.1)


def test_family_files_round_trip():
    for phi in (make_phi2(3), make_variable_exponent(Descriptor.sin(2, 1, 1), ZERO_PI)):
        back = family_from_json(phi.to_json())
        x = np.linspace(0.05, 0.95, 50)
        assert np.allclose(back(x, np.full(50, 1.3)), phi(x, np.full(50, 1.3)))
    with pytest.raises(ValueError, match="'family'"):
        family_from_json({"famly": "phi1"})
    with pytest.raises(ValueError, match="'domain'"):
        family_from_json({"family": "variable_exponent", "p": {"kind": "const", "v": 2}})


def test_delta2_grid_samples_near_poles():
    x, t = delta2_grid(make_phi1())
    assert np.min(np.abs(x[x != 0])) < 1e-6
    assert t[0] == 0.0
