import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from legapprox import expressions as ex
from legapprox.contact import (
    ContactForm,
    FiberCurve,
    arens_identity,
    contact_check,
    contact_coefficient,
    isotropy_residual,
    matrix_completion,
    normal_form,
    residual_classes,
    standard_contact,
    tube_extension,
)
from legapprox.errors import NotContact, NotHolomorphic, NotLegendrianAxis, RankDrop
from legapprox.geometry import bounded_complement_anchors

from conftest import fixture_set


def wedge_oracle(coeffs):
    """η ∧ dη on (∂z, ∂w, ∂y) for n = 1, by direct exterior algebra."""
    X = [ex.z, ex.w, ex.y]
    a = [ex.parse(coeffs.get(k, "0")) for k in ("dz", "dw", "dy")]
    d = lambda i, j: sp.diff(a[j], X[i]) - sp.diff(a[i], X[j])  # noqa: E731
    return sp.expand(a[0] * d(1, 2) - a[1] * d(0, 2) + a[2] * d(0, 1))


def test_standard_contact_unit_coefficient():
    beta = standard_contact(1)
    z = np.array([0.3, -1j, 2.0])
    zeta = np.array([[0.1, 0.2], [0.5j, -0.3], [0, 0]])
    assert np.allclose(np.abs(contact_coefficient(beta, z, zeta)), 1.0)
    assert contact_check(beta, S=fixture_set("disc")) == pytest.approx(1.0)


def test_standard_contact_n2_nonvanishing_constant():
    beta = standard_contact(2)
    rng = np.random.default_rng(1)
    zeta = rng.normal(size=(20, 4)) * 0.3
    c = contact_coefficient(beta, rng.normal(size=20), zeta)
    assert np.allclose(c, c[0]) and abs(c[0]) > 0.5


def test_dw_alone_is_not_contact():
    beta = ContactForm(1, {"dw": "1"})
    with pytest.raises(NotContact):
        contact_check(beta, S=fixture_set("disc"))
    assert contact_check(beta, S=fixture_set("disc"), raise_on_fail=False) == 0.0


def test_perturbed_form_matches_wedge_oracle():
    coeffs = {"dw": "1", "dz": "-y", "dy": "0.1*w"}
    oracle = sp.lambdify([ex.z, ex.w, ex.y], wedge_oracle(coeffs))
    beta = ContactForm(1, coeffs)
    rng = np.random.default_rng(2)
    zeta = (rng.uniform(-0.35, 0.35, (200, 2)) + 1j * rng.uniform(-0.35, 0.35, (200, 2)))
    z = rng.normal(size=200)
    got = contact_coefficient(beta, z, zeta)
    want = oracle(z, zeta[:, 0], zeta[:, 1])
    assert np.allclose(np.abs(got), np.abs(want), atol=1e-12)
    # min |1 + 0.1 y| over |zeta| <= 1/2 is 0.95
    assert contact_check(beta, S=fixture_set("disc")) == pytest.approx(0.95, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(lam=st.complex_numbers(min_magnitude=0.2, max_magnitude=3, allow_nan=False, allow_infinity=False),
       n=st.integers(1, 3))
def test_coefficient_scales_with_power_n_plus_one(lam, n):
    beta = standard_contact(n)
    scaled = beta.with_coeffs([lam * e for e in beta.exprs])
    z = np.array([0.2 + 0.1j])
    zeta = np.full((1, 2 * n), 0.1 + 0.05j)
    a = contact_coefficient(beta, z, zeta)
    b = contact_coefficient(scaled, z, zeta)
    assert np.allclose(b, lam ** (n + 1) * a, rtol=1e-10)


def test_fiber_conjugate_rejected():
    with pytest.raises(NotHolomorphic):
        ContactForm(1, {"dw": "1", "dz": "-conj(y)"})


def test_cr_residual_small_for_holomorphic_fiber():
    beta = ContactForm(1, {"dw": "1 + w*y", "dz": "-y + conj(z)*w**2"})
    assert beta.cr_residual(np.array([0.3]), np.array([[0.1, 0.2j]])) <= 1e-8


def _fc(s, z, dz, w, y):
    return FiberCurve(s, z, dz, np.column_stack([w, y]))


def test_isotropy_zero_fiber():
    s = np.linspace(0, 1, 20)
    z = s + 0j
    assert isotropy_residual(_fc(s, z, np.ones(20), 0 * z, 0 * z), standard_contact(1)) == 0.0


def test_isotropy_exact_primitive():
    s = np.linspace(0, 1, 50)
    z = s + 0j
    fc = FiberCurve(s, z, np.ones(50), np.column_stack([z ** 2 / 2, z]), np.column_stack([z, np.ones(50)]))
    assert isotropy_residual(fc, standard_contact(1)) < 1e-15


def test_isotropy_w_equals_z():
    s = np.linspace(0, 1, 50)
    z = s + 0j
    fc = FiberCurve(s, z, np.ones(50), np.column_stack([z, 0 * z]), np.column_stack([np.ones(50), 0 * z]))
    assert isotropy_residual(fc, standard_contact(1)) == pytest.approx(1.0)


def test_completion_constant():
    fc = matrix_completion(np.array([[1.0, 0.0]]))
    assert np.allclose(fc.B[0], np.eye(2))


def test_completion_circle():
    th = np.linspace(0, 2 * np.pi, 257)
    A = np.stack([np.array([[np.cos(t), np.sin(t)]]) for t in th])
    fc = matrix_completion(A, points=np.exp(1j * th), closed=True)
    assert np.allclose(fc.B[:, :, 0], np.column_stack([np.cos(th), np.sin(th)]), atol=1e-12)
    assert fc.identity_residual <= 1e-10


def test_completion_random_loop_p4():
    rng = np.random.default_rng(3)
    c = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    th = np.linspace(0, 2 * np.pi, 401)
    A = np.stack([(np.array([1, 0, 0, 0]) + 0.4 * (c[0] * np.cos(t) + c[1] * np.sin(t) + c[2] * np.cos(2 * t)))[None]
                  for t in th])
    fc = matrix_completion(A, points=np.exp(1j * th), closed=True)
    target = np.zeros((1, 4))
    target[0, 0] = 1
    assert np.max(np.abs(A @ fc.B - target)) <= 1e-10


def test_completion_holonomy_is_undone():
    th = np.linspace(0, 2 * np.pi, 801)
    A = np.stack([np.array([[1.0, np.exp(1j * t), np.exp(2j * t)]]) / np.sqrt(3) for t in th])
    fc = matrix_completion(A, points=np.exp(1j * th), closed=True)
    assert fc.holonomy > 1e-6
    assert fc.identity_residual <= 1e-10
    assert np.max(np.abs(fc.B[-1] - fc.B[0])) <= 1e-10


def test_completion_rank_drop():
    with pytest.raises(RankDrop):
        matrix_completion(np.array([[[0.0, 0.0]]]))


def test_arens_trivial():
    pts = np.linspace(0.1, 0.9, 30) + 0j
    r = arens_identity([lambda z: np.ones_like(z)], pts)
    assert r.exact and np.allclose(r.g[0](pts), 1)
    r = arens_identity([lambda z: z, lambda z: 1 - z], pts)
    assert r.exact and r.residual <= 1e-12


def test_arens_annulus():
    S = fixture_set("annulus")
    pts = S.sample_points(128, interior=64)
    r = arens_identity([lambda z: z, lambda z: z - 1 + 0.3 * z ** 2], pts, anchors=bounded_complement_anchors(S),
                       exact_first=False)
    assert r.residual <= 1e-8


def test_tube_extension_axis():
    x = np.linspace(0, 1, 30) + 0j
    f = np.column_stack([x, 0 * x, 0 * x])
    dfV = np.tile([1, 0, 0], (30, 1)).astype(complex)
    T = tube_extension(f, dfV, points=x)
    for k in range(30):
        assert np.allclose(T(k, np.zeros(2)), f[k], atol=0)
        assert np.linalg.matrix_rank(T.jacobian(k, dfV[k])) == 3


def test_tube_extension_legendrian_circle():
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    p = np.exp(1j * th)
    eps = 0.2
    f = np.column_stack([p, eps * (p ** 3 / 6 - 1 / (2 * p)), eps * np.cos(2 * th)])
    dfV = np.column_stack([1j * p, eps * (1j * p ** 3 / 2 + 1j / (2 * p)), -2 * eps * np.sin(2 * th)])
    T = tube_extension(f, dfV, points=p, closed=True)
    for k in range(0, 200, 7):
        assert np.linalg.matrix_rank(T.jacobian(k, dfV[k]), tol=1e-8) == 3


def test_normal_form_standard_is_identity():
    nf = normal_form(standard_contact(1), fixture_set("annulus"))
    assert sp.simplify(nf.h - 1) == 0
    assert nf.change == sp.eye(2)
    assert not nf.residual_terms


def test_normal_form_scalar_divisor():
    nf = normal_form(ContactForm(1, {"dw": "2", "dz": "-2*y"}), fixture_set("annulus"))
    assert sp.simplify(nf.h - 2) == 0
    assert nf.change == sp.eye(2)


def test_normal_form_perturbed():
    beta = ContactForm(1, {"dw": "1", "dz": "-y", "dy": "0.05*w"})
    S = fixture_set("annulus")
    nf = normal_form(beta, S)
    assert nf.residual_terms
    red = nf.reduced
    z = S.sample_points(32)
    c = red.evaluate(z, np.zeros((len(z), 2)))
    assert np.max(np.abs(c[:, [0, 2]])) <= 1e-9
    assert np.allclose(c[:, 1], 1.0)
    # dz coefficient is -y plus second order terms
    h = 1e-4
    for e, lin in (([h, 0], 0.0), ([0, h], -1.0)):
        zeta = np.array(e, complex)
        d = (red.coefficient(0, z, zeta[None]) - red.coefficient(0, z, -zeta[None])) / (2 * h)
        assert np.allclose(d, lin, atol=1e-6)
    classes = residual_classes(nf)
    assert sum(len(v) for v in classes.values()) >= 1


def test_normal_form_rejects_non_legendrian_axis():
    with pytest.raises(NotLegendrianAxis):
        normal_form(ContactForm(1, {"dw": "1", "dz": "1 - y"}), fixture_set("disc"))


def test_reduced_form_stays_contact():
    beta = ContactForm(1, {"dw": "1 + z*w", "dz": "-y*(1 + z) + w**2", "dy": "z"})
    nf = normal_form(beta, fixture_set("disc"))
    assert contact_check(nf.reduced, S=fixture_set("disc"), fiber_fraction=0.2) > 0.5
