import networkx as nx
import numpy as np
import pytest

from legapprox.errors import ResolutionTooCoarse
from legapprox.geometry import circle
from legapprox.homology import (
    build_homology_basis,
    classify_bridges,
    curve_family_with_interpolation,
    default_cell,
    default_epsilon,
    runge_check,
)
from legapprox.raster import winding_number

from conftest import fixture_basis, fixture_set

SUITE = ["disc", "annulus", "pants", "fig1", "chain3"]


def euler_count(S):
    """Independent count: islands minus their holes, minus arcs glued at both ends."""
    chi = sum(1 - len(isl.holes) for isl in S.islands)
    chi -= sum(1 for arc in S.arcs if len(arc.attached) == 2)
    return chi


def graph_cycle_rank(S):
    g = nx.MultiGraph()
    g.add_nodes_from(range(len(S.islands)))
    for arc in S.arcs:
        att = arc.attached
        if len(att) == 2:
            g.add_edge(att[0].island, att[1].island)
    cyc = g.number_of_edges() - g.number_of_nodes() + nx.number_connected_components(g)
    return cyc + sum(len(isl.holes) for isl in S.islands)


@pytest.mark.parametrize("name,rank", [("disc", 0), ("annulus", 1), ("pants", 2), ("three_holes", 3),
                                       ("fig1", 2), ("chain3", 1), ("disc_with_loop", 1),
                                       ("disc_with_whisker", 0)])
def test_rank_matches_euler_characteristic(name, rank):
    S = fixture_set(name)
    B = fixture_basis(name)
    assert B.rank == rank == 1 - euler_count(S) == graph_cycle_rank(S)


def test_bridge_coloring_fig1():
    col = classify_bridges(fixture_set("fig1"))
    assert len(col.black) == 1 and len(col.red) == 2


def test_bridge_coloring_chain3():
    col = classify_bridges(fixture_set("chain3"))
    assert len(col.black) == 2 and len(col.red) == 1


def test_loop_arc_is_not_a_bridge():
    col = classify_bridges(fixture_set("disc_with_loop"))
    assert not col.bridges and len(col.case2) == 1


@pytest.mark.parametrize("name", SUITE)
def test_cycles_pass_through_base_point(name):
    B = fixture_basis(name)
    for c in B.cycles:
        assert c.closed
        assert abs(c.start - B.base_point) < 1e-12


@pytest.mark.parametrize("name", SUITE)
def test_runge_at_two_resolutions(name):
    S, B = fixture_set(name), fixture_basis(name)
    h = default_cell(S)
    eps = default_epsilon(S, h)
    assert runge_check(S, B.cycles, eps, h=h)
    assert runge_check(S, B.cycles, eps, h=h / 2)
    assert B.runge_certified or B.rank == 0


@pytest.mark.parametrize("name", SUITE)
def test_private_arcs_avoid_other_cycles(name):
    B = fixture_basis(name)
    h = B.cell
    for k in range(B.rank):
        z = B.private_curve(k).dense(per_unit_length=8 / h)
        for m, c in enumerate(B.cycles):
            if m != k:
                w = c.dense(per_unit_length=8 / h)
                assert np.min(np.abs(z[:, None] - w[None, :])) > h


def test_annulus_cycle_is_core_circle():
    B = fixture_basis("annulus")
    z = B.cycles[0].dense(per_unit_length=50)
    assert abs(winding_number(z, 0.0)) == 1


def test_runge_check_core_circle():
    S = fixture_set("annulus")
    assert runge_check(S, [circle(0.0, 1.2)], 0.1, h=0.02)


def test_runge_check_trapped_disc():
    S = fixture_set("disc")
    assert not runge_check(S, [circle(0.0, 0.5)], 0.1, h=0.02)


def test_runge_check_resolution_guard():
    with pytest.raises(ResolutionTooCoarse):
        runge_check(fixture_set("disc"), [], 0.01, h=0.02)


def test_family_disc_single_point_is_empty():
    fam = curve_family_with_interpolation(fixture_set("disc"), [0.3 + 0.1j])
    assert len(fam.members) == 0


def test_family_annulus_splits_cycle():
    S, B = fixture_set("annulus"), fixture_basis("annulus")
    c = B.cycles[0]
    on = complex(c(np.array([0.4]))[0])
    fam = curve_family_with_interpolation(S, [on], basis=B)
    split = [m for m in fam.members if not m.closed]
    assert len(split) == 2


def test_family_fig1_two_interior_points():
    S = fixture_set("fig1")
    B = fixture_basis("fig1")
    A = [-2.3 + 0.4j, 2.2 - 0.5j]
    fam = curve_family_with_interpolation(S, A, basis=B)
    assert fam.connected
    ends = {complex(round(m.end.real, 9), round(m.end.imag, 9)) for m in fam.members if not m.closed}
    for a in A:
        assert complex(round(a.real, 9), round(a.imag, 9)) in ends
    eps = default_epsilon(S, B.cell)
    assert runge_check(S, fam.members, eps, h=B.cell)


def test_basis_survives_repeated_families():
    # routing an interpolation family must not leave obstacles in the basis
    S = fixture_set("fig1")
    B = build_homology_basis(S)
    A = [-2.3 + 0.4j, 2.2 - 0.5j]
    first = curve_family_with_interpolation(S, A, basis=B)
    second = curve_family_with_interpolation(S, A, basis=B)
    assert len(first.members) == len(second.members)
