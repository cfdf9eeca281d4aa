import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from legapprox.contact import standard_contact
from legapprox.errors import CommutativityFailure, Escape, LegApproxError
from legapprox.geometry import circle, polyline, sample_curve
from legapprox.ode import (
    LegendrianODE,
    dopri_solve,
    gronwall_bound,
    integrate_along_curve,
    integrate_over_domain,
    period,
    period_map,
)
from legapprox.pipeline import reduced_ode
from legapprox.runge import build_spray

from conftest import fixture_basis, fixture_set

PATH = polyline([0, 0.6 + 0.2j, 1.1 - 0.3j])


def ode(f, **kw):
    return LegendrianODE(lambda z, w, t: f(z, w) + 0 * w, **kw)


def test_zero_field_keeps_value():
    out = integrate_along_curve(ode(lambda z, w: 0 * w), PATH, 0.3 - 0.1j)
    assert np.allclose(out.w, 0.3 - 0.1j, atol=1e-15)


def test_constant_field():
    c = 0.7 - 0.2j
    out = integrate_along_curve(ode(lambda z, w: c + 0 * w), sample_curve(PATH, 33), 1.0)
    assert np.max(np.abs(out.w - (1.0 + c * (out.z - out.z[0])))) <= 1e-12


def test_linear_field_is_exponential():
    out = integrate_along_curve(ode(lambda z, w: w), sample_curve(PATH, 33), 0.5j, tol=1e-12)
    exact = 0.5j * np.exp(out.z - out.z[0])
    assert np.max(np.abs(out.w - exact)) <= 1e-9


def test_discrete_residual_small():
    o = ode(lambda z, w: z * w)
    out = integrate_along_curve(o, sample_curve(PATH, 401), 1.0)
    assert out.discrete_residual(o) <= 1e-5


def test_escape_reported():
    with pytest.raises(Escape):
        integrate_along_curve(ode(lambda z, w: w * w, w_radius=2.0), polyline([0, 1]), 1.5)


def test_dopri_matches_closed_form_at_outputs():
    s = np.linspace(0, 2, 11)
    out, _ = dopri_solve(lambda s_, w: -w, np.array([1.0 + 0j]), s, tol=1e-12)
    assert np.max(np.abs(out[:, 0] - np.exp(-s))) <= 1e-10


@pytest.mark.parametrize("f, exact", [
    (lambda z, w: 0 * w, lambda z: 0 * z + 0.2),
    (lambda z, w: 1 + 0 * w, lambda z: 0.2 + z),
    (lambda z, w: w, lambda z: 0.2 * np.exp(z)),
    (lambda z, w: z * w, lambda z: 0.2 * np.exp(z * z / 2)),
])
def test_domain_flows_commute(f, exact):
    Z, wxy, wyx = integrate_over_domain(ode(f), 0j, 0.8, 0.6, 0.2, tol=1e-11)
    assert np.max(np.abs(wxy - exact(Z))) <= 1e-8
    assert np.max(np.abs(wxy - wyx)) <= 1e-8


def test_antiholomorphic_field_fails_commutativity():
    with pytest.raises(CommutativityFailure):
        integrate_over_domain(ode(lambda z, w: np.conj(z) + 0 * w), 0j, 1.0, 1.0, 0.0)


def test_period_residue():
    o = ode(lambda z, w: 1 / (2j * math.pi * z))
    assert abs(period(o, circle(0.0, 1.0)) - 1) <= 1e-10


def test_period_exact_form():
    assert abs(period(ode(lambda z, w: z + 0 * w), circle(0.3, 0.7))) <= 1e-12


def test_period_needs_closed_curve():
    with pytest.raises(LegApproxError):
        period(ode(lambda z, w: 0 * w), PATH)


@pytest.mark.parametrize("name", ["annulus", "pants"])
def test_standard_period_map_is_identity(name, rng):
    B = fixture_basis(name)
    sp = build_spray(B, S=fixture_set(name))
    o = reduced_ode(standard_contact(1), sp)
    l = B.rank
    assert np.max(np.abs(period_map(o, B, np.zeros(l)).values)) <= 1e-13
    T = 0.1 * (rng.uniform(-1, 1, (6, l)) + 1j * rng.uniform(-1, 1, (6, l)))
    assert np.max(np.abs(period_map(o, B, T).values - T)) <= 1e-10


def test_lipschitz_estimate_of_linear_field():
    o = ode(lambda z, w: 3 * w, w_radius=1.0)
    assert abs(o.estimate_lipschitz(np.array([0.0, 1j])) - 4.5) <= 1e-9


def test_gronwall_examples():
    assert gronwall_bound(0.0, 1.0, 0.5, 10.0) == 0.5
    assert gronwall_bound(2.0, 1.5, 0.1, 1.0) == pytest.approx(0.15 * math.e ** 2)
    with pytest.raises(ValueError):
        gronwall_bound(1.0, 0.5, 0.1, 1.0)


@settings(max_examples=20, deadline=None)
@given(a=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       k=st.floats(-3, 3), b=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       w0=st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
       dw=st.floats(1e-3, 0.5))
def test_gronwall_holds_for_random_linear_fields(a, k, b, w0, dw):
    # |a e^{ikz}| = |a| on the real segment, so c = |a|
    o = ode(lambda z, w: a * np.exp(1j * k * z) * w + b * z ** 2)
    seg = sample_curve(polyline([0, 1.5]), 16)
    u = integrate_along_curve(o, seg, w0, tol=1e-12)
    v = integrate_along_curve(o, seg, w0 + dw, tol=1e-12)
    dist = np.abs(seg.z - seg.z[0]) if hasattr(seg, "z") else np.abs(u.z - u.z[0])
    bound = np.array([gronwall_bound(abs(a), 1.0, dw, d) for d in dist])
    assert np.all(np.abs(u.w - v.w) <= bound * (1 + 1e-8) + 1e-12)
