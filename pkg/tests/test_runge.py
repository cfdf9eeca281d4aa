import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from legapprox.errors import MissingAnchor, PoleOnPath
from legapprox.geometry import bounded_complement_anchors, circle, polyline, sample_curve
from legapprox.runge import (
    RationalFunction,
    build_spray,
    cauchy_kernel,
    contour_integral,
    fixed_quadrature,
    holomorphic_approximate,
)

from conftest import fixture_basis, fixture_set

TWO_PI_I = 2j * math.pi


def test_residue():
    assert abs(contour_integral(lambda z: 1 / (TWO_PI_I * z), circle(0.0, 1.0)) - 1) <= 1e-10


def test_exact_primitive():
    assert abs(contour_integral(lambda z: z, circle(0.0, 1.0))) <= 1e-12


def test_pole_outside():
    assert abs(contour_integral(lambda z: 1 / (TWO_PI_I * (z - 3)), circle(0.0, 1.0))) <= 1e-12


def test_sampled_curve_integral():
    smp = sample_curve(polyline([0, 1, 1 + 1j]), 65)
    assert abs(contour_integral(lambda z: np.ones_like(z), smp) - (1 + 1j)) <= 1e-12


def test_pole_on_path():
    with pytest.raises(PoleOnPath):
        contour_integral(lambda z: 1 / (z - 1), circle(0.0, 1.0), poles=[1.0])


def test_vector_integrand():
    v = contour_integral(lambda z: np.stack([z ** -1, z ** -2], axis=-1), circle(0.0, 1.0))
    assert np.allclose(v, [TWO_PI_I, 0], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       r=st.floats(0.3, 2.0))
def test_kernel_winding(a, r):
    # winding of circle(0, r) around a, away from the path
    if abs(abs(a) - r) < 0.05:
        return
    v = contour_integral(cauchy_kernel(a), circle(0.0, r))
    assert abs(v - (1.0 if abs(a) < r else 0.0)) <= 1e-9


def test_rational_derivative_matches_closed_form():
    f = RationalFunction([1, 2, 0.5], ((0.3j, 0.5, [1.0, -0.2j]), (-2.0, 1.0, [0.7])), 0.1, 1.5)
    z = np.array([1 + 1j, -0.5, 2j, 0.9])
    u = (z - 0.1) / 1.5
    want = (2 + 2 * 0.5 * u) / 1.5
    want += 1.0 * (-0.5 / (z - 0.3j) ** 2) - 0.2j * (-2 * 0.25 / (z - 0.3j) ** 3)
    want += 0.7 * (-1.0 / (z + 2.0) ** 2)
    assert np.allclose(f.derivative(z), want, rtol=1e-13)


def test_rational_json_round_trip():
    f = RationalFunction([1, 2j], ((0.3j, 0.5, [1.0, -0.2j]),), 0.1, 1.5)
    g = RationalFunction.from_json(f.to_json())
    z = np.array([1 + 1j, -0.5])
    assert np.allclose(f(z), g(z), rtol=0, atol=1e-15)


def test_approximate_identity_on_disc():
    S = fixture_set("disc")
    z = S.sample_points(64, interior=64)
    fit = holomorphic_approximate(z, z, degree=8)
    assert fit.residual <= 1e-12


def test_approximate_conj_on_circle():
    th = 2 * np.pi * np.arange(128) / 128
    z = np.exp(1j * th)
    fit = holomorphic_approximate(z, np.conj(z), anchors=[0.0], degree=4, K=2, center=0.0, scale=1.0)
    assert fit.residual <= 1e-10
    assert abs(fit.function(np.array([2.0]))[0] - 0.5) <= 1e-10


def test_approximate_bump_on_fig1_off_sample():
    S = fixture_set("fig1")
    anchors = bounded_complement_anchors(S)
    target = lambda z: 1 + 0.1 * np.exp(-((z - 0.5) ** 2) / 4)  # noqa: E731
    z = S.sample_points(160, interior=64)
    fit = holomorphic_approximate(z, target(z), anchors=anchors, degree=24)
    assert fit.residual <= 1e-8
    # fresh points, exact target
    z2 = S.sample_points(320, interior=128, seed=1)
    assert np.max(np.abs(fit.function(z2) - target(z2))) <= 1e-8
    # refining the degree does not make it worse
    finer = holomorphic_approximate(z, target(z), anchors=anchors, degree=32)
    assert finer.residual <= fit.residual * 1.01


def test_spray_annulus_is_residue_kernel():
    B = fixture_basis("annulus")
    sp = build_spray(B, anchors=[0.0])
    z = np.array([0.7, 1.3j])
    assert np.allclose(sp.functions(z)[:, 0], 1 / (TWO_PI_I * z), rtol=1e-12)
    assert abs(sp.period_matrix[0, 0] - 1) <= 1e-12


def test_spray_two_holes_separate():
    c1, c2 = circle(-1.0, 0.5), circle(1.0, 0.5)
    sp = build_spray([c1, c2], anchors=[-1.0, 1.0])
    assert np.allclose(sp.period_matrix, np.eye(2), atol=1e-12)
    assert np.allclose(sp.raw_matrix, np.eye(2), atol=1e-12)


def test_spray_overlapping_winding():
    big, small = circle(0.0, 2.5), circle(-1.0, 0.5)
    sp = build_spray([big, small], anchors=[-1.0, 1.0])
    W = np.array([[contour_integral(cauchy_kernel(a), c) for a in (-1.0, 1.0)] for c in (big, small)])
    assert np.allclose(W, [[1, 1], [1, 0]], atol=1e-12)
    assert np.allclose(sp.raw_matrix, W, atol=1e-12)
    assert np.allclose(sp.period_matrix, np.eye(2), atol=1e-12)


def test_spray_missing_anchor():
    with pytest.raises(MissingAnchor):
        build_spray([circle(0.0, 1.0)], anchors=[])


@pytest.mark.parametrize("name", ["annulus", "pants", "fig1", "chain3"])
def test_spray_fixed_budget_periods(name):
    S, B = fixture_set(name), fixture_basis(name)
    sp = build_spray(B, S=S)
    P = np.array([fixed_quadrature(sp.functions, c, 2048) for c in B.cycles])
    assert np.max(np.abs(P - np.eye(B.rank))) <= 1e-8


def test_family_spray_vanishes_at_points():
    from legapprox.homology import curve_family_with_interpolation

    S = fixture_set("fig1")
    A = [-2.3 + 0.4j, 2.2 - 0.5j]
    fam = curve_family_with_interpolation(S, A, basis=fixture_basis("fig1"))
    sp = build_spray(fam, S=S, vanish_at=A)
    assert np.max(np.abs(sp.period_matrix - np.eye(len(fam.members)))) <= 1e-8
    assert np.max(np.abs(sp.functions(np.array(A)))) <= 1e-8
