import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from legapprox.errors import EpsilonTooLarge, UnderSampled, ValidationError
from legapprox.geometry import (
    Island,
    PiecewiseCurve,
    admissible_set_from_json,
    build_admissible_set,
    circle,
    polyline,
    regular_neighborhood,
    sample_curve,
    segment,
)
from legapprox import raster

from conftest import fixture_set


def test_disc_is_simply_connected():
    S = fixture_set("disc")
    assert S.connected and S.n_holes == 0
    assert S.euler_characteristic() == 1


def test_annulus_records_one_hole():
    S = fixture_set("annulus")
    assert S.n_holes == 1 and S.euler_characteristic() == 0


def test_fig1_configuration():
    S = fixture_set("fig1")
    assert len(S.islands) == 2 and len(S.arcs) == 3
    assert S.connected
    assert S.euler_characteristic() == -1


def test_pieces_share_endpoints_exactly():
    c = polyline([0, 1, 1 + 1j, 1j], closed=True)
    for a, b in zip(c.pieces[:-1], c.pieces[1:]):
        assert a.end == b.start
    assert c.pieces[-1].end == c.pieces[0].start


def test_gap_between_pieces_rejected():
    with pytest.raises(ValidationError):
        PiecewiseCurve((segment(0, 1), segment(1.1, 2)))


def test_non_immersion_rejected():
    with pytest.raises(ValidationError):
        PiecewiseCurve((segment(1, 1),))


def test_sample_unit_circle():
    k = 8
    smp = sample_curve(circle(0.0, 1.0), 4 * k)
    assert np.allclose(smp.points[:-1], np.exp(2j * np.pi * np.arange(4 * k) / (4 * k)), atol=1e-14)
    assert abs(np.sum(np.diff(smp.points))) < 1e-14


def test_sample_segment():
    smp = sample_curve(PiecewiseCurve((segment(0, 1),)), 2)
    assert np.allclose(smp.points, [0, 1])
    assert np.allclose(np.diff(smp.points), [1])


def test_undersampled_curved_piece():
    with pytest.raises(UnderSampled):
        sample_curve(circle(0.0, 1.0), 4)


def test_fig1_boundary_length_matches_fine_quadrature():
    S = fixture_set("fig1")
    for _, c in S.boundary_curves():
        smp = sample_curve(c, 512)
        fine = c.dense(per_unit_length=4000)
        assert abs(smp.discrete_length - np.sum(np.abs(np.diff(fine)))) < 1e-3 * c.length
        # shared endpoints at piece boundaries
        for k in smp.piece_starts[1:-1]:
            assert np.isfinite(smp.points[k])


def test_regular_neighborhood_disc():
    N = regular_neighborhood(fixture_set("disc"), 0.1)
    assert N(1.05) and not N(1.2)


def test_islands_too_close_for_eps():
    S = build_admissible_set([Island(circle(-1.0, 0.5)), Island(circle(1.0, 0.5))],
                             [(PiecewiseCurve((segment(-0.5, 0.5),)), [(0, 0), (1, 0)])])
    with pytest.raises(EpsilonTooLarge):
        regular_neighborhood(S, 0.6)


def test_fig1_neighborhood_keeps_homotopy_rank():
    S = fixture_set("fig1")
    eps, h = 0.02, 0.005
    minx, miny, maxx, maxy = S.bounds()
    grid = raster.Grid((minx - 2 * eps, miny - 2 * eps, maxx + 2 * eps, maxy + 2 * eps), h)
    mask = raster.neighborhood_mask(grid, S, eps)
    assert raster.count_components(mask) == 1
    assert raster.bounded_holes(mask) == 2


def test_json_round_trip():
    S = fixture_set("fig1")
    T = admissible_set_from_json(S.to_json())
    assert len(T.islands) == 2 and len(T.arcs) == 3
    assert T.euler_characteristic() == S.euler_characteristic()


def test_hole_outside_island_rejected():
    with pytest.raises(ValidationError):
        build_admissible_set([Island(circle(0.0, 1.0), (circle(3.0, 0.5, orientation=-1),))], [])


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.2, 5.0), c=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       n=st.integers(4, 64))
def test_circle_samples_close_up(r, c, n):
    smp = sample_curve(circle(c, r), 4 * n)
    assert smp.points[-1] == smp.points[0]
    assert smp.closure_defect <= 1e-12 * max(1.0, r)
    assert abs(smp.discrete_length - 2 * np.pi * r) < 2 * np.pi * r * (np.pi / (4 * n)) ** 2


@settings(max_examples=25, deadline=None)
@given(pts=st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=2, max_size=8, unique=True))
def test_polyline_length_additive(pts):
    pts = np.array(pts)
    if np.min(np.abs(np.diff(pts))) < 1e-3:
        return
    c = polyline(pts)
    assert abs(c.length - np.sum(np.abs(np.diff(pts)))) < 1e-9 * max(1.0, c.length)
    assert c.breaks[0] == 0 and c.breaks[-1] == 1 and np.all(np.diff(c.breaks) > 0)
