"""Built-in admissible sets used by tests, demos and the CLI."""

import numpy as np

from .geometry import (
    Island,
    PiecewiseCurve,
    build_admissible_set,
    circle,
    segment,
    CurvePiece,
)


def disc(radius=1.0):
    return build_admissible_set([Island(circle(0.0, radius))], [])


def annulus(inner=0.5, outer=2.0):
    return build_admissible_set([Island(circle(0.0, outer), (circle(0.0, inner, orientation=-1),))], [])


def pair_of_pants():
    holes = (circle(-1.3, 0.5, orientation=-1), circle(1.3, 0.5, orientation=-1))
    return build_admissible_set([Island(circle(0.0, 3.0), holes)], [])


def three_holes():
    holes = tuple(circle(1.6 * np.exp(2j * np.pi * k / 3 + 0.5j), 0.45, orientation=-1) for k in range(3))
    return build_admissible_set([Island(circle(0.0, 3.0), holes)], [])


def fig1():
    """Two discs joined by three bridges."""
    left, right = Island(circle(-2.0, 1.0)), Island(circle(2.0, 1.0))
    h = np.sqrt(3) / 2
    bridges = [
        (PiecewiseCurve((segment(-1.0, 1.0),)), [(0, 0), (1, 0)]),
        (PiecewiseCurve((segment(-1.5 + 1j * h, 1.5 + 1j * h),)), [(0, 0), (1, 0)]),
        (PiecewiseCurve((segment(-1.5 - 1j * h, 1.5 - 1j * h),)), [(0, 0), (1, 0)]),
    ]
    return build_admissible_set([left, right], bridges)


def _half_ellipse(a, b, y0):
    """Upper half of an ellipse from (-a, y0) to (a, y0), traversed left to right."""

    def f(u):
        th = np.pi * (1.0 - u)
        return a * np.cos(th) + 1j * (y0 + b * np.sin(th))

    def df(u):
        th = np.pi * (1.0 - u)
        return np.pi * (a * np.sin(th) - 1j * b * np.cos(th))

    return CurvePiece(f, df, "arc", complex(-a, y0), complex(a, y0))


def chain3():
    """Three discs in a row; two black bridges and one red bridge arching over."""
    isl = [Island(circle(c, 1.0)) for c in (-4.0, 0.0, 4.0)]
    arcs = [
        (PiecewiseCurve((segment(-3.0, -1.0),)), [(0, 0), (1, 0)]),
        (PiecewiseCurve((segment(1.0, 3.0),)), [(1, 0), (2, 0)]),
        (PiecewiseCurve((_half_ellipse(4.0, 2.5, 1.0),)), [(0, 0), (2, 0)]),
    ]
    return build_admissible_set(isl, arcs)


def disc_with_loop():
    """One disc with an arc leaving and re-entering it (a non-bridge arc)."""
    a, b = np.exp(0.25j * np.pi), np.exp(-0.25j * np.pi)
    # semicircle outside the disc through 2
    c, r = 1.0 / np.sqrt(2), 1.0 / np.sqrt(2)
    arc = PiecewiseCurve((segment(a, a + 0.6), ) + (CurvePiece(
        lambda u: (c + 0.6) + r * np.exp(1j * np.pi * (0.5 - u)),
        lambda u: -1j * np.pi * r * np.exp(1j * np.pi * (0.5 - u)), "arc",
        a + 0.6, b + 0.6),) + (segment(b + 0.6, b),))
    return build_admissible_set([Island(circle(0.0, 1.0))], [(arc, [(0, 0), (0, 0)])])


def disc_with_whisker():
    """One disc with an arc attached at one end only."""
    arc = PiecewiseCurve((segment(1.0, 2.0),))
    return build_admissible_set([Island(circle(0.0, 1.0))], [(arc, [(0, 0), None])])


def unit_circle():
    """The circle as an admissible set with no interior."""
    return build_admissible_set([], [(circle(0.0, 1.0), [])])


FIXTURES = {
    "disc": disc,
    "annulus": annulus,
    "pants": pair_of_pants,
    "three_holes": three_holes,
    "fig1": fig1,
    "chain3": chain3,
    "disc_with_loop": disc_with_loop,
    "disc_with_whisker": disc_with_whisker,
    "circle": unit_circle,
}


def get_fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
