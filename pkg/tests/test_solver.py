import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import root

from legapprox.errors import CertificateFailed, InsufficientSampling, NoConvergence
from legapprox.solver import (
    PolydiscSpec,
    certify_schedule,
    degree_certificate,
    delta_schedule,
    solve_periods,
)


def test_schedule_halves_to_floor():
    ds = list(delta_schedule())
    assert ds[0] == 0.1 and len(ds) == 10
    assert np.allclose(np.array(ds[1:]) / ds[:-1], 0.5)
    assert ds[-1] >= 1e-4


@settings(max_examples=15, deadline=None)
@given(delta=st.floats(1e-4, 0.5), l=st.integers(1, 3))
def test_polydisc_samples_on_boundary(delta, l):
    spec = PolydiscSpec.build(delta, l)
    assert spec.on_boundary()
    assert len(spec.samples) <= 4096 + 64
    assert set(np.unique(spec.facets)) == set(range(l))


@pytest.mark.parametrize("l", [1, 2, 3])
def test_identity_margin_is_delta(l):
    spec = PolydiscSpec.build(0.1, l)
    cert = degree_certificate(lambda T: T, spec)
    assert cert and cert.margin == pytest.approx(0.1)


def test_shift_certified_and_solved():
    d, c = 0.1, np.array([0.03, -0.03j])
    cert = degree_certificate(lambda T: T + c, PolydiscSpec.build(d, 2))
    assert cert and cert.margin == pytest.approx(0.7 * d, abs=1e-12)
    rep = solve_periods(lambda T: T + c, l=2)
    assert np.allclose(rep.t0, -c, atol=1e-12) and rep.certified


def test_reflection_not_certified():
    cert = degree_certificate(lambda T: -T, PolydiscSpec.build(0.1, 1))
    assert not cert and cert.sup_defect == pytest.approx(0.2)


def test_reflection_rejected_by_schedule():
    with pytest.raises(CertificateFailed):
        solve_periods(lambda T: -T, l=1)


def test_guard_spoils_fast_oscillation():
    d = 0.1
    with pytest.raises(InsufficientSampling):
        degree_certificate(lambda T: T + 0.5 * d * (T / d) ** 40, PolydiscSpec.build(d, 1))


def test_schedule_picks_first_working_delta():
    # defect 20δ² is below δ only once δ < 0.05
    spec, cert = certify_schedule(lambda T: T + 20 * T ** 2, 1)
    assert spec.delta == pytest.approx(0.025) and cert


def _quadratic(T):
    T = np.atleast_2d(T)
    out = T + 0.02 * (1 + 1j) + 2.0 * T ** 2
    out[:, 0] += 0.5 * T[:, 1] * T[:, 0]
    return out


def test_quadratic_against_independent_root():
    rep = solve_periods(_quadratic, l=2, target=1e-13)

    def real_sys(x):
        t = x[:2] + 1j * x[2:]
        v = _quadratic(t[None])[0]
        return np.concatenate([v.real, v.imag])

    sol = root(real_sys, np.zeros(4), tol=1e-15)
    oracle = sol.x[:2] + 1j * sol.x[2:]
    assert np.max(np.abs(rep.t0 - oracle)) <= 1e-10
    assert rep.residual <= 1e-13


def test_no_convergence_when_target_unreachable():
    # the zero sits outside the polydisc the iterates are projected onto
    with pytest.raises(NoConvergence) as info:
        solve_periods(lambda T: T + 0.05, l=1, delta=0.01, certify=False)
    assert info.value.best_residual == pytest.approx(0.04)


@settings(max_examples=25, deadline=None)
@given(c=st.lists(st.complex_numbers(max_magnitude=0.02, allow_nan=False, allow_infinity=False), min_size=1,
                  max_size=3),
       q=st.floats(-1.0, 1.0))
def test_small_perturbations_are_solved_inside(c, q):
    c = np.array(c)
    P = lambda T: T + c + q * np.atleast_2d(T) ** 2  # noqa: E731
    rep = solve_periods(P, l=len(c), target=1e-12)
    assert rep.certified and rep.residual <= 1e-12
    assert np.max(np.abs(rep.t0)) <= rep.delta_used
    assert np.max(np.abs(P(rep.t0[None])[0])) <= 1e-12
