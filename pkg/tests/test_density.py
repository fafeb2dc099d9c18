import math

import numpy as np
import pytest

from molab.descriptors import Descriptor
from molab.families import make_phi1, make_phi2, make_variable_exponent
from molab.functions import PiecewiseFunction, combine
from molab.geometry import Box, BoxSet
from molab.luxemburg import luxemburg_norm
from molab.modular import check_certificate
from molab.rationals import least_index_rational
from molab.density import (PreconditionError, approximate_in_E, approximate_indicator, measure_convergence_check,
                           smooth_urysohn, witness_nondensity)
from molab.singular import estimate_singular_set


def chi(a, b, v=1.0):
    return PiecewiseFunction.indicator(BoxSet.interval(a, b), v)


@pytest.fixture(scope="module")
def phi1_trace():
    phi = make_phi1()
    sing = estimate_singular_set(phi, BoxSet.interval(-2, 2, False), 1e-2)
    return approximate_indicator(phi, BoxSet.interval(1, 2), BoxSet.interval(-10, 10, False), sing,
                                 n_max=32, tol=0.05)


def square_family(lo, hi):
    omega = BoxSet.interval(lo, hi, False)
    phi = make_variable_exponent(Descriptor.const(2), omega)
    return phi, omega, estimate_singular_set(phi, omega, 0.05)


def test_urysohn_single_interval():
    f = smooth_urysohn(BoxSet.interval(1, 2), BoxSet.interval(0.5, 2.5, False))
    assert f(1.5) == pytest.approx(1.0)
    assert f(0.5) == 0.0
    assert 0 < f(0.75) < 1
    xs = np.linspace(0, 3, 3001)
    vals = f(xs)
    assert vals.min() >= 0 and vals.max() <= 1
    assert np.all(vals[(xs >= 1) & (xs <= 2)] == 1.0)
    assert f.kind == "smooth_composite"


def test_urysohn_two_plateaus():
    k = BoxSet.of([Box.interval(0, 1), Box.interval(3, 4)], True)
    u = BoxSet.of([Box.interval(-1, 2), Box.interval(2.5, 5)], False)
    f = smooth_urysohn(k, u)
    assert f(0.5) == 1.0 and f(3.5) == 1.0
    assert f(2.25) == 0.0
    assert f.support.difference(u).volume == 0


def test_urysohn_is_continuous_with_continuous_differences():
    f = smooth_urysohn(BoxSet.interval(1, 2), BoxSet.interval(0.5, 2.5, False))
    h = 1e-5
    for edge in f.breaks():
        x = np.array([edge - 2 * h, edge - h, edge, edge + h, edge + 2 * h])
        v = f(x)
        d = np.diff(v)
        assert np.max(np.abs(d)) < 1e-3 and np.max(np.abs(np.diff(d))) < 1e-3


def test_urysohn_precondition():
    with pytest.raises(ValueError):
        smooth_urysohn(BoxSet.interval(0, 3), BoxSet.interval(0.5, 2.5, False))


def test_phi1_trace_converges(phi1_trace):
    tr = phi1_trace
    assert tr.converged and tr.final_dist <= 0.05 and tr.converged_at <= 32
    d = tr.dists
    assert all(b <= a + 1e-9 for a, b in zip(d[1:], d[2:]))
    assert all(s.containment_ok for s in tr.steps)


def test_phi1_trace_respects_volume_budget_and_chain(phi1_trace):
    for s in phi1_trace.steps:
        if s.m_n is not None:
            assert s.vol_shell < 1.0 / s.m_n + 1e-12
        assert s.dist_n.value <= s.approx_norm + s.chain_norm + 3e-7


def test_phi1_precondition_on_pole():
    phi = make_phi1()
    sing = estimate_singular_set(phi, BoxSet.interval(-2, 2, False), 1e-2)
    with pytest.raises(PreconditionError):
        approximate_indicator(phi, BoxSet.interval(-1, 1), BoxSet.interval(-10, 10, False), sing)


def test_positive_singular_measure_is_refused():
    phi = make_phi2(8)
    sing = estimate_singular_set(phi, BoxSet.interval(-1, 2, False), 0.05)
    with pytest.raises(PreconditionError):
        approximate_indicator(phi, BoxSet.interval(2, 3), BoxSet.interval(1.5, 4, False), sing)


def test_square_exponent_trace():
    phi, omega, sing = square_family(-1, 2)
    tr = approximate_indicator(phi, BoxSet.interval(0, 1), omega, sing, n_max=128, tol=0.01, stop_on_converge=True)
    assert tr.converged and tr.final_dist <= 0.01
    for s in tr.steps:
        # ‖f - χ_K‖ is at most the norm of the shell indicator, sqrt of its volume
        assert s.dist_n.value <= math.sqrt(s.vol_shell) + 1e-6


def test_approximate_in_E_combination():
    phi, omega, sing = square_family(-1, 5)
    f = PiecewiseFunction.simple([(2.0, Box.interval(0, 1)), (-1.0, Box.interval(3, 4))])
    tr = approximate_in_E(phi, f, omega, sing, tol=0.2)
    assert tr.converged
    g = combine([(1.0, f), (-1.0, tr.steps[-1].f_n)])
    assert luxemburg_norm(phi, g, tol=1e-6).value <= 0.2 + 1e-6


def test_approximate_in_E_trivial_and_bad_component():
    phi, omega, sing = square_family(-1, 5)
    tr = approximate_in_E(phi, PiecewiseFunction.zero(1), omega, sing, tol=0.1)
    assert tr.converged and tr.steps[-1].f_n.is_zero

    phi1 = make_phi1()
    s1 = estimate_singular_set(phi1, BoxSet.interval(-2, 2, False), 1e-2)
    bad = PiecewiseFunction.simple([(1.0, Box.interval(1, 2)), (3.0, Box.interval(-0.5, 0.5))])
    with pytest.raises(PreconditionError, match="component"):
        approximate_in_E(phi1, bad, BoxSet.interval(-10, 10, False), s1, tol=0.1)


def test_witness_excludes_plateau_bump():
    phi = make_phi2(8)
    f = PiecewiseFunction.bump(Box.interval(0.45, 0.55), Box.interval(0.4, 0.6))
    w = witness_nondensity(phi, f, BoxSet.interval(0.25, 0.5))
    assert w.kind == "excluded"
    assert check_certificate(w.certificate)
    assert w.pole.location == 0.5
    q, _ = least_index_rational(w.ball.lo[0], w.ball.hi[0])
    assert float(q) == w.pole.location
    xs = np.linspace(w.ball.lo[0], w.ball.hi[0], 1000)
    assert np.abs(f(xs)).min() >= 0.25 - 1e-9


def test_witness_distance_bound_for_zero():
    w = witness_nondensity(make_phi2(8), PiecewiseFunction.zero(1), BoxSet.interval(0.25, 0.5))
    assert w.kind == "distance_bound"
    assert w.gap >= 0.75 and w.norm_lower_bound >= 0.25


def test_witness_none_found_for_phi1_trace(phi1_trace):
    # target S' = {0}: no ball around the pole where |f| >= 1/4, and the target has no volume
    w = witness_nondensity(make_phi1(), phi1_trace.steps[-1].f_n, BoxSet.empty(1), singular=[0.0])
    assert w.kind == "none_found"


def test_measure_examples(phi1_trace):
    region = BoxSet.interval(0, 1, False)
    rep = measure_convergence_check([chi(0, 1 / n) for n in (1, 2, 4, 10)], PiecewiseFunction.zero(1), region, 0.5)
    assert rep.volumes == pytest.approx([1.0, 0.5, 0.25, 0.1], abs=1e-3)
    f = chi(0, 1)
    assert measure_convergence_check([f] * 3, f, region, 0.1).volumes == [0.0, 0.0, 0.0]
    tr = phi1_trace
    chik = PiecewiseFunction.indicator(BoxSet.interval(1, 2))
    rep = measure_convergence_check([s.f_n for s in tr.steps], chik, BoxSet.interval(0, 3, False), 1e-3)
    assert rep.volumes[-1] < 0.5 * rep.volumes[0]
