"""Planar admissible sets: curves, islands, arcs and their discretizations.

A curve is a chain of parametric pieces ``[0, 1] -> C``.  Pieces know their
own derivative, so quadrature and ODE stepping can evaluate the curve
anywhere, not only at stored samples.  Global curve parameters ``s`` are
proportional to piece length.
"""

from __future__ import annotations

import bisect

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import networkx as nx
import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import polygonize, polylabel, unary_union

from .errors import (
    DanglingAttachment,
    DisjointnessViolation,
    EpsilonTooLarge,
    TangencyViolation,
    UnderSampled,
    ValidationError,
)

GAP_TOL = 1e-12
ATTACH_TOL = 1e-7
CLOSURE_TOL = 1e-12
MIN_ANGLE_DEG = 15.0
ANCHOR_CLEARANCE = 0.02

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _as_complex(points):
    arr = np.asarray(points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr.astype(float)
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex).ravel()


class CurvePiece:
    """One smooth parametric piece ``u -> z(u)`` on ``[0, 1]``."""

    def __init__(self, func: Callable, dfunc: Callable, kind: str = "generic",
                 start: complex | None = None, end: complex | None = None,
                 meta: dict | None = None):
        self._func = func
        self._dfunc = dfunc
        self.kind = kind
        self.start = complex(func(np.array([0.0]))[0]) if start is None else complex(start)
        self.end = complex(func(np.array([1.0]))[0]) if end is None else complex(end)
        self.meta = meta or {}

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        z = np.asarray(self._func(np.atleast_1d(u)), dtype=complex).copy()
        uu = np.atleast_1d(u)
        z[uu == 0.0] = self.start
        z[uu == 1.0] = self.end
        return z if u.ndim else z[0]

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        d = np.asarray(self._dfunc(np.atleast_1d(u)), dtype=complex)
        return d if u.ndim else d[0]

    @cached_property
    def length(self) -> float:
        panels = 8
        edges = np.linspace(0.0, 1.0, panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            u = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
            total += 0.5 * (b - a) * np.sum(_GL_WEIGHTS * np.abs(self.derivative(u)))
        return float(total)

    @cached_property
    def min_speed(self) -> float:
        u = np.linspace(0.0, 1.0, 257)
        return float(np.min(np.abs(self.derivative(u))))

    @property
    def is_straight(self) -> bool:
        return self.kind == "segment"

    def restrict(self, u0: float, u1: float) -> "CurvePiece":
        f, df, span = self._func, self._dfunc, u1 - u0
        start = self(np.array([u0]))[0]
        end = self(np.array([u1]))[0]
        return CurvePiece(lambda u: f(u0 + span * u), lambda u: span * df(u0 + span * u),
                          self.kind, start, end, dict(self.meta))

    def reversed(self) -> "CurvePiece":
        f, df = self._func, self._dfunc
        return CurvePiece(lambda u: f(1.0 - u), lambda u: -df(1.0 - u), self.kind,
                          self.end, self.start, dict(self.meta))

    def with_endpoints(self, start: complex, end: complex) -> "CurvePiece":
        return CurvePiece(self._func, self._dfunc, self.kind, start, end, dict(self.meta))


def segment(a: complex, b: complex) -> CurvePiece:
    a, b = complex(a), complex(b)
    return CurvePiece(lambda u: a + (b - a) * u, lambda u: np.full(u.shape, b - a, complex),
                      "segment", a, b)


def circle_arc(center: complex, radius: float, theta0: float, theta1: float) -> CurvePiece:
    c, r, span = complex(center), float(radius), theta1 - theta0

    def f(u):
        return c + r * np.exp(1j * (theta0 + span * u))

    def df(u):
        return 1j * span * r * np.exp(1j * (theta0 + span * u))

    piece = CurvePiece(f, df, "arc")
    piece.meta.update(center=c, radius=r, theta0=theta0, theta1=theta1)
    return piece


def spline_piece(points, periodic: bool = False) -> CurvePiece:
    """Cubic spline through ``points`` in chord-length parameterization."""
    z = _as_complex(points)
    if len(z) == 2:
        return segment(z[0], z[1])
    if periodic and z[0] != z[-1]:
        z = np.append(z, z[0])
    chord = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
    if np.any(np.diff(chord) <= 0):
        raise ValidationError("repeated consecutive points in curve data")
    u = chord / chord[-1]
    bc = "periodic" if periodic else "not-a-knot"
    spline = CubicSpline(u, np.column_stack([z.real, z.imag]), bc_type=bc)
    dspline = spline.derivative()

    def f(t):
        v = spline(t)
        return v[:, 0] + 1j * v[:, 1]

    def df(t):
        v = dspline(t)
        return v[:, 0] + 1j * v[:, 1]

    piece = CurvePiece(f, df, "spline", z[0], z[-1])
    piece.meta["points"] = z
    return piece


@dataclass(frozen=True)
class PiecewiseCurve:
    """Chain of smooth pieces sharing endpoints; optionally closed."""

    pieces: tuple
    closed: bool = False
    min_speed_floor: float = 1e-9

    def __post_init__(self):
        pieces = list(self.pieces)
        if not pieces:
            raise ValidationError("curve without pieces")
        for k in range(1, len(pieces)):
            gap = abs(pieces[k].start - pieces[k - 1].end)
            if gap > 1e-9 * max(1.0, abs(pieces[k].start)):
                raise ValidationError(f"gap {gap:.3e} between curve pieces {k - 1} and {k}")
            if gap:
                pieces[k] = pieces[k].with_endpoints(pieces[k - 1].end, pieces[k].end)
        if self.closed:
            gap = abs(pieces[-1].end - pieces[0].start)
            if gap > 1e-9 * max(1.0, abs(pieces[0].start)):
                raise ValidationError(f"closed curve does not close (gap {gap:.3e})")
            pieces[-1] = pieces[-1].with_endpoints(pieces[-1].start, pieces[0].start)
        for k, p in enumerate(pieces):
            if p.min_speed <= self.min_speed_floor:
                raise ValidationError(f"piece {k} is not an immersion")
        object.__setattr__(self, "pieces", tuple(pieces))

    # -- basic geometry
    @cached_property
    def piece_lengths(self) -> np.ndarray:
        return np.array([p.length for p in self.pieces])

    @property
    def length(self) -> float:
        return float(self.piece_lengths.sum())

    @cached_property
    def breaks(self) -> np.ndarray:
        """Global parameters of piece boundaries, ``breaks[0] = 0``, ``breaks[-1] = 1``."""
        b = np.concatenate([[0.0], np.cumsum(self.piece_lengths)]) / self.length
        b[-1] = 1.0
        return b

    @property
    def start(self) -> complex:
        return self.pieces[0].start

    @property
    def end(self) -> complex:
        return self.pieces[-1].end

    def _locate(self, s):
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, len(self.pieces) - 1)
        width = self.breaks[idx + 1] - self.breaks[idx]
        u = np.clip((s - self.breaks[idx]) / width, 0.0, 1.0)
        return idx, u, width

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        idx, u, _ = self._locate(s)
        out = np.empty(u.shape, complex)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.pieces[k](u[m])
        return out[0] if scalar else out

    def derivative(self, s):
        scalar = np.ndim(s) == 0
        idx, u, width = self._locate(s)
        out = np.empty(u.shape, complex)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.pieces[k].derivative(u[m]) / width[m]
        return out[0] if scalar else out

    @cached_property
    def _break_list(self):
        return [float(b) for b in self.breaks]

    def point_and_tangent(self, s: float):
        """``(h(s), h'(s))`` for a scalar parameter with a single piece lookup."""
        s = min(max(float(s), 0.0), 1.0)
        br = self._break_list
        k = min(max(bisect.bisect_right(br, s) - 1, 0), len(self.pieces) - 1)
        width = br[k + 1] - br[k]
        u = np.array([min(max((s - br[k]) / width, 0.0), 1.0)])
        piece = self.pieces[k]
        # raw parametrization: endpoint snapping would put a jump just inside the piece
        return complex(piece._func(u)[0]), complex(piece.derivative(u)[0]) / width

    def dense(self, per_unit_length: float = 200.0, minimum: int = 16) -> np.ndarray:
        chunks = []
        for p in self.pieces:
            m = max(minimum, int(math.ceil(p.length * per_unit_length)))
            if p.is_straight:
                m = 1
            chunks.append(p(np.linspace(0.0, 1.0, m + 1))[:-1])
        chunks.append(np.array([self.end]))
        return np.concatenate(chunks)

    @cached_property
    def signed_area(self) -> float:
        z = self.dense()
        return 0.5 * float(np.sum((np.conj(z[:-1]) * z[1:]).imag))

    @property
    def orientation(self) -> int:
        if not self.closed:
            return 0
        return 1 if self.signed_area > 0 else -1

    # -- derived curves
    def reversed(self) -> "PiecewiseCurve":
        return PiecewiseCurve(tuple(p.reversed() for p in reversed(self.pieces)), self.closed)

    def restrict(self, s0: float, s1: float) -> "PiecewiseCurve":
        """Sub-curve between global parameters ``s0 < s1``."""
        if not 0.0 <= s0 < s1 <= 1.0:
            raise ValueError("need 0 <= s0 < s1 <= 1")
        out = []
        for k, p in enumerate(self.pieces):
            a, b = self.breaks[k], self.breaks[k + 1]
            lo, hi = max(a, s0), min(b, s1)
            if hi - lo <= 1e-14:
                continue
            u0, u1 = (lo - a) / (b - a), (hi - a) / (b - a)
            out.append(p if (u0 == 0.0 and u1 == 1.0) else p.restrict(u0, u1))
        return PiecewiseCurve(tuple(out), False)

    def cyclic_restrict(self, s0: float, s1: float) -> "PiecewiseCurve":
        """Forward sub-arc of a closed curve from ``s0`` to ``s1`` (wrapping past 1)."""
        if s1 > s0:
            return self.restrict(s0, s1)
        parts = []
        if s0 < 1.0:
            parts.append(self.restrict(s0, 1.0))
        if s1 > 0.0:
            parts.append(self.restrict(0.0, s1))
        return concat(parts)

    def nearest(self, z: complex) -> tuple[float, float]:
        """Global parameter and distance of the curve point closest to ``z``."""
        s = np.linspace(0.0, 1.0, 4001)
        d = np.abs(self(s) - z)
        k = int(np.argmin(d))
        lo, hi = s[max(k - 1, 0)], s[min(k + 1, len(s) - 1)]
        from scipy.optimize import minimize_scalar

        res = minimize_scalar(lambda t: abs(self(t) - z), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        best = min((float(res.x), float(res.fun)), (float(s[k]), float(d[k])), key=lambda x: x[1])
        return best

    def to_json(self, per_unit_length: float = 50.0) -> dict:
        pieces = []
        for p in self.pieces:
            if p.is_straight:
                pts = [p.start, p.end]
            else:
                m = max(16, int(math.ceil(p.length * per_unit_length)))
                pts = p(np.linspace(0.0, 1.0, m + 1))
            pieces.append({"points": [[float(z.real), float(z.imag)] for z in pts]})
        return {"pieces": pieces, "closed": bool(self.closed)}


def concat(curves: Sequence[PiecewiseCurve], closed: bool = False) -> PiecewiseCurve:
    pieces = []
    for c in curves:
        pieces.extend(c.pieces)
    return PiecewiseCurve(tuple(pieces), closed)


def circle(center: complex = 0.0, radius: float = 1.0, theta0: float = 0.0,
           orientation: int = 1) -> PiecewiseCurve:
    return PiecewiseCurve((circle_arc(center, radius, theta0, theta0 + orientation * 2 * np.pi),), True)


def polyline(points, closed: bool = False) -> PiecewiseCurve:
    z = list(_as_complex(points))
    if closed and z[0] != z[-1]:
        z.append(z[0])
    return PiecewiseCurve(tuple(segment(a, b) for a, b in zip(z[:-1], z[1:])), closed)


def curve_from_json(data: dict) -> PiecewiseCurve:
    closed = bool(data.get("closed", False))
    raw = data["pieces"]
    single_periodic = closed and len(raw) == 1
    pieces = []
    for item in raw:
        pts = _as_complex(item["points"])
        if item.get("kind") == "polyline" or (len(pts) == 2):
            pieces.extend(segment(a, b) for a, b in zip(pts[:-1], pts[1:]))
        else:
            pieces.append(spline_piece(pts, periodic=single_periodic))
    return PiecewiseCurve(tuple(pieces), closed)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class CurveSamples:
    """Discretization of a curve: points, parameters, increments and tangents."""

    points: np.ndarray
    params: np.ndarray
    tangents: np.ndarray
    closed: bool
    piece_starts: np.ndarray
    source: PiecewiseCurve | None = None
    closure_tol: float = CLOSURE_TOL

    @property
    def dz(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def n_intervals(self) -> int:
        return len(self.points) - 1

    @property
    def closure_defect(self) -> float:
        return float(abs(np.sum(self.dz))) if self.closed else 0.0

    @property
    def discrete_length(self) -> float:
        return float(np.sum(np.abs(self.dz)))

    def evaluate(self, s):
        if self.source is not None:
            return self.source(s)
        return _hermite(self, s)[0]

    def derivative(self, s):
        if self.source is not None:
            return self.source.derivative(s)
        return _hermite(self, s)[1]


def _hermite(samples: CurveSamples, s):
    s = np.atleast_1d(np.asarray(s, float))
    k = np.clip(np.searchsorted(samples.params, s, side="right") - 1, 0, len(samples.params) - 2)
    s0, s1 = samples.params[k], samples.params[k + 1]
    h = s1 - s0
    x = (s - s0) / h
    p0, p1 = samples.points[k], samples.points[k + 1]
    m0, m1 = samples.tangents[k] * h, samples.tangents[k + 1] * h
    h00 = 2 * x**3 - 3 * x**2 + 1
    h10 = x**3 - 2 * x**2 + x
    h01 = -2 * x**3 + 3 * x**2
    h11 = x**3 - x**2
    z = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
    dz = ((6 * x**2 - 6 * x) * p0 + (3 * x**2 - 4 * x + 1) * m0
          + (-6 * x**2 + 6 * x) * p1 + (3 * x**2 - 2 * x) * m1) / h
    return z, dz


def sample_curve(curve: PiecewiseCurve, n: int) -> CurveSamples:
    """Length-proportional samples; ``n`` intervals for closed curves, ``n`` points for open ones.

    Curved pieces receive at least 8 intervals and an even count (composite
    Simpson); straight pieces at least one.
    """
    n_int = n if curve.closed else n - 1
    curved = [not p.is_straight for p in curve.pieces]
    minimum = sum(8 if c else 1 for c in curved)
    if n_int < minimum:
        raise UnderSampled(f"{n} samples below the minimum for {len(curve.pieces)} pieces",
                           minimum=minimum)
    frac = curve.piece_lengths / curve.length
    counts = []
    for c, f in zip(curved, frac):
        m = int(round(n_int * f))
        if c:
            m = max(8, m + (m % 2))
        else:
            m = max(1, m)
            if m > 1 and m % 2:
                m += 1
        counts.append(m)
    pts, prm, tan, starts = [], [], [], []
    for k, (p, m) in enumerate(zip(curve.pieces, counts)):
        u = np.linspace(0.0, 1.0, m + 1)[:-1]
        a, b = curve.breaks[k], curve.breaks[k + 1]
        starts.append(sum(len(x) for x in pts))
        pts.append(p(u))
        prm.append(a + (b - a) * u)
        tan.append(p.derivative(u) / (b - a))
    pts.append(np.array([curve.end]))
    prm.append(np.array([1.0]))
    tan.append(np.array([curve.pieces[-1].derivative(np.array([1.0]))[0] / (1.0 - curve.breaks[-2])]))
    points = np.concatenate(pts)
    if curve.closed:
        points[-1] = points[0]
    return CurveSamples(points, np.concatenate(prm), np.concatenate(tan), curve.closed,
                        np.array(starts + [len(points) - 1]), curve)


# ---------------------------------------------------------------------------
# admissible sets


@dataclass(frozen=True)
class Island:
    outer: PiecewiseCurve
    holes: tuple = ()
    vertex: complex | None = None
    anchor_points: tuple = ()

    @cached_property
    def polygon(self) -> Polygon:
        ring = lambda c: [(z.real, z.imag) for z in c.dense()]
        return Polygon(ring(self.outer), [ring(h) for h in self.holes])

    @property
    def boundaries(self) -> tuple:
        return (self.outer,) + tuple(self.holes)


@dataclass(frozen=True)
class Attachment:
    island: int
    boundary: int
    point: complex
    param: float


@dataclass(frozen=True)
class Arc:
    curve: PiecewiseCurve
    ends: tuple = (None, None)

    @property
    def attached(self) -> tuple:
        return tuple(e for e in self.ends if e is not None)


@dataclass(frozen=True)
class AdmissibleSet:
    islands: tuple
    arcs: tuple
    connected: bool
    feature_size: float
    min_angle_deg: float = MIN_ANGLE_DEG

    @cached_property
    def geometry(self):
        parts = [isl.polygon for isl in self.islands]
        parts += [LineString([(z.real, z.imag) for z in a.curve.dense()]) for a in self.arcs]
        return unary_union(parts)

    @property
    def n_holes(self) -> int:
        return sum(len(isl.holes) for isl in self.islands)

    def euler_characteristic(self) -> int:
        """Cell-count Euler characteristic, independent of any basis construction."""
        chi = sum(1 - len(isl.holes) for isl in self.islands)
        for arc in self.arcs:
            if arc.curve.closed:
                chi += 0
            else:
                chi += 1 - len(arc.attached)
        return chi

    def bounds(self):
        return self.geometry.bounds

    def contains(self, z, tol: float = 1e-9) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        pts = shapely.points(z.real, z.imag)
        return shapely.distance(self.geometry, pts) <= tol

    def boundary_curves(self):
        for i, isl in enumerate(self.islands):
            for j, c in enumerate(isl.boundaries):
                yield (i, j), c

    def sample_points(self, per_curve: int = 256, interior: int = 0, seed: int = 0) -> np.ndarray:
        """Points covering ``S``: boundary and arc samples plus optional interior jitter."""
        chunks = []
        for _, c in self.boundary_curves():
            chunks.append(sample_curve(c, max(per_curve, 16 * len(c.pieces))).points)
        for arc in self.arcs:
            n = max(per_curve, 16 * len(arc.curve.pieces))
            chunks.append(sample_curve(arc.curve, n).points)
        if interior and self.islands:
            rng = np.random.default_rng(seed)
            for isl in self.islands:
                minx, miny, maxx, maxy = isl.polygon.bounds
                got = []
                while sum(len(g) for g in got) < interior:
                    cand = rng.uniform(minx, maxx, 4 * interior) + 1j * rng.uniform(miny, maxy, 4 * interior)
                    inside = shapely.contains_xy(isl.polygon, cand.real, cand.imag)
                    got.append(cand[inside])
                chunks.append(np.concatenate(got)[:interior])
        return np.concatenate(chunks)

    def to_json(self) -> dict:
        islands = []
        for isl in self.islands:
            islands.append({
                "outer": isl.outer.to_json(),
                "holes": [h.to_json() for h in isl.holes],
                "vertex": [isl.vertex.real, isl.vertex.imag],
            })
        arcs = []
        for arc in self.arcs:
            ends = [("free" if e is None else {"island": e.island, "boundary": e.boundary})
                    for e in arc.ends]
            arcs.append({"curve": arc.curve.to_json(), "ends": ends})
        return {"islands": islands, "arcs": arcs}


def _angle_between(t1: complex, t2: complex) -> float:
    c = abs((t1 * np.conj(t2)).real) / (abs(t1) * abs(t2))
    return math.degrees(math.acos(min(1.0, c)))


def _linestring(curve: PiecewiseCurve) -> LineString:
    return LineString([(z.real, z.imag) for z in curve.dense()])


def _noding_line(arc: "Arc") -> LineString:
    """Arc polyline extended slightly into the islands it attaches to.

    The dense boundary polygons only approximate the true boundary, so the
    extension guarantees the arc crosses them and faces close up.
    """
    z = list(arc.curve.dense())
    reach = 1e-3 * max(arc.curve.length, 1.0)
    if len(arc.ends) == 2 and arc.ends[0] is not None:
        t = arc.curve.derivative(0.0)
        z.insert(0, z[0] - reach * t / abs(t))
    if len(arc.ends) == 2 and arc.ends[1] is not None:
        t = arc.curve.derivative(1.0)
        z.append(z[-1] + reach * t / abs(t))
    return LineString([(w.real, w.imag) for w in z])


def _pick_anchors(boundary: PiecewiseCurve, avoid: list, vertex: complex | None = None) -> tuple:
    cand = np.linspace(0.0, 1.0, 400, endpoint=False)

    def clearance(s):
        if not avoid:
            return np.full(np.shape(s), 0.5)
        d = np.abs(np.subtract.outer(np.atleast_1d(s), np.asarray(avoid)))
        return np.min(np.minimum(d, 1.0 - d), axis=1)

    ok = clearance(cand) >= ANCHOR_CLEARANCE
    if ok.sum() < 2:
        raise ValidationError("cannot place boundary anchors away from attachments")
    # a: closest admissible point to the vertex keeps connectors short
    if vertex is not None:
        d = np.abs(boundary(cand) - vertex)
        d[~ok] = np.inf
        sa = float(cand[int(np.argmin(d))])
    else:
        sa = float(cand[ok][0])
    target = (sa + 0.5) % 1.0
    rest = cand[ok & (np.abs(cand - sa) > 1e-9)]
    dist = np.minimum(np.abs(rest - target), 1.0 - np.abs(rest - target))
    sb = float(rest[int(np.argmin(dist))])
    return (boundary(sa), boundary(sb), sa, sb)


def build_admissible_set(islands: Sequence, arcs: Sequence, tolerances: dict | None = None,
                         require_connected: bool = False) -> AdmissibleSet:
    """Validate islands and arcs and return an :class:`AdmissibleSet`.

    ``islands`` items are :class:`Island`; ``arcs`` items are ``(curve, ends)``
    pairs (or :class:`Arc`) where each end is ``None`` for a free end or an
    ``(island, boundary)`` pair.  Boundary 0 is the outer boundary.
    """
    tol = {"min_angle_deg": MIN_ANGLE_DEG, "attach_tol": ATTACH_TOL}
    tol.update(tolerances or {})

    islands = list(islands)
    # orientation: outer positive, holes negative
    fixed = []
    for isl in islands:
        outer = isl.outer if isl.outer.orientation > 0 else isl.outer.reversed()
        holes = tuple(h if h.orientation < 0 else h.reversed() for h in isl.holes)
        if not outer.closed or not all(h.closed for h in holes):
            raise ValidationError("island boundaries must be closed curves")
        fixed.append(Island(outer, holes, isl.vertex, isl.anchor_points))
    islands = fixed

    for k, isl in enumerate(islands):
        shell = Polygon([(z.real, z.imag) for z in isl.outer.dense()])
        if not shell.is_valid:
            raise ValidationError(f"island {k}: outer boundary is not a Jordan curve")
        hole_polys = [Polygon([(z.real, z.imag) for z in h.dense()]) for h in isl.holes]
        for j, hp in enumerate(hole_polys):
            if not shell.contains(hp):
                raise ValidationError(f"island {k}: hole {j} not strictly inside the outer boundary")
            for jj in range(j):
                if hp.intersects(hole_polys[jj]):
                    raise DisjointnessViolation(f"island {k}: holes {jj} and {j} intersect")
    for a in range(len(islands)):
        for b in range(a):
            if islands[a].polygon.intersects(islands[b].polygon):
                raise DisjointnessViolation(f"islands {b} and {a} intersect")

    built_arcs = []
    for k, item in enumerate(arcs):
        curve, ends = (item.curve, item.ends) if isinstance(item, Arc) else item
        ends = list(ends) if ends is not None else []
        if curve.closed:
            if any(e is not None for e in ends):
                raise ValidationError(f"arc {k}: closed curves cannot be attached")
            built_arcs.append(Arc(curve, ()))
            continue
        ends = (ends + [None, None])[:2]
        out = []
        for side, e in enumerate(ends):
            point = curve.start if side == 0 else curve.end
            if e is None:
                out.append(None)
                continue
            if isinstance(e, Attachment):
                i, j = e.island, e.boundary
            else:
                i, j = e
            if not (0 <= i < len(islands)) or not (0 <= j < len(islands[i].boundaries)):
                raise DanglingAttachment(f"arc {k}: unknown boundary ({i}, {j})")
            bcurve = islands[i].boundaries[j]
            s, dist = bcurve.nearest(point)
            if dist > tol["attach_tol"]:
                raise DanglingAttachment(f"arc {k} end {side} is {dist:.2e} away from boundary ({i}, {j})",
                                         distance=dist)
            t_arc = curve.derivative(0.0 if side == 0 else 1.0)
            t_bnd = bcurve.derivative(s)
            ang = _angle_between(t_arc, t_bnd)
            if ang < tol["min_angle_deg"]:
                raise TangencyViolation(f"arc {k} end {side} meets boundary at {ang:.1f} deg", angle=ang)
            # the arc must leave the island, not enter it
            probe = point + 1e-6 * curve.length * t_arc / abs(t_arc) * (1 if side == 0 else -1)
            if islands[i].polygon.contains(Point(probe.real, probe.imag)):
                raise ValidationError(f"arc {k} end {side} enters island {i}")
            out.append(Attachment(i, j, point, s))
        built_arcs.append(Arc(curve, tuple(out)))

    lines = [_linestring(a.curve) for a in built_arcs]
    for a in range(len(lines)):
        for b in range(a):
            if lines[a].intersects(lines[b]):
                raise DisjointnessViolation(f"arcs {b} and {a} intersect")
    for k, arc in enumerate(built_arcs):
        s = np.linspace(0.0, 1.0, 2001)[1:-1] if not arc.curve.closed else np.linspace(0, 1, 2001)
        z = arc.curve(s)
        pts = shapely.points(z.real, z.imag)
        for i, isl in enumerate(islands):
            inside = shapely.intersects(isl.polygon, pts)
            if np.any(inside):
                raise DisjointnessViolation(f"arc {k} meets island {i} away from its endpoints")
        for side, e in enumerate(arc.ends):
            if e is None and not arc.curve.closed:
                point = arc.curve.start if side == 0 else arc.curve.end
                for i, isl in enumerate(islands):
                    if isl.polygon.distance(Point(point.real, point.imag)) <= tol["attach_tol"]:
                        raise DanglingAttachment(f"arc {k}: free end touches island {i}")

    # anchors and vertices
    final = []
    for i, isl in enumerate(islands):
        vertex = isl.vertex
        if vertex is None:
            c = polylabel(isl.polygon, tolerance=1e-4 * math.sqrt(isl.polygon.area))
            vertex = complex(c.x, c.y)
        if not isl.polygon.contains(Point(vertex.real, vertex.imag)):
            raise ValidationError(f"island {i}: vertex is not an interior point")
        anchors = list(isl.anchor_points)
        if not anchors:
            for j, bcurve in enumerate(isl.boundaries):
                avoid = [e.param for arc in built_arcs for e in arc.attached if (e.island, e.boundary) == (i, j)]
                anchors.append(_pick_anchors(bcurve, avoid, complex(vertex)))
        else:
            given, anchors = anchors, []
            for j, pair in enumerate(given):
                a, b = complex(pair[0]), complex(pair[1])
                if abs(a - b) < ATTACH_TOL:
                    raise ValidationError(f"island {i}: anchors on boundary {j} coincide")
                anchors.append((a, b, isl.boundaries[j].nearest(a)[0], isl.boundaries[j].nearest(b)[0]))
        final.append(Island(isl.outer, isl.holes, complex(vertex), tuple(anchors)))

    graph = nx.Graph()
    graph.add_nodes_from(("island", i) for i in range(len(final)))
    for k, arc in enumerate(built_arcs):
        att = arc.attached
        if not att:
            graph.add_node(("arc", k))
        elif len(att) == 1:
            pass
        else:
            graph.add_edge(("island", att[0].island), ("island", att[1].island))
    connected = graph.number_of_nodes() > 0 and nx.is_connected(graph)
    if require_connected and not connected:
        from .errors import DisconnectedSet

        raise DisconnectedSet("admissible set is not connected")

    feature = _feature_size(final, built_arcs)
    return AdmissibleSet(tuple(final), tuple(built_arcs), connected, feature, tol["min_angle_deg"])


def _feature_size(islands, arcs) -> float:
    polys = [isl.polygon for isl in islands]
    lines = [_linestring(a.curve) for a in arcs]
    sizes = [math.inf]
    for a in range(len(polys)):
        for b in range(a):
            sizes.append(polys[a].distance(polys[b]))
    for k, arc in enumerate(arcs):
        touched = {e.island for e in arc.attached}
        for i, p in enumerate(polys):
            if i not in touched:
                sizes.append(lines[k].distance(p))
        for kk in range(k):
            sizes.append(lines[k].distance(lines[kk]))
    for isl in islands:
        for h in isl.holes:
            hp = Polygon([(z.real, z.imag) for z in h.dense()])
            sizes.append(2 * _inradius(hp))
            sizes.append(hp.exterior.distance(LineString(isl.polygon.exterior.coords)))
    # bounded faces of the complement (regions enclosed by arcs and islands)
    boundary_lines = [LineString(p.exterior.coords) for p in polys]
    for p in polys:
        boundary_lines += [LineString(r.coords) for r in p.interiors]
    faces = list(polygonize(unary_union(boundary_lines + [_noding_line(a) for a in arcs])))
    union = unary_union(polys) if polys else None
    for f in faces:
        rp = f.representative_point()
        if union is None or not union.contains(rp):
            if union is not None:
                f = f.difference(union)
            if not f.is_empty:
                sizes.append(2 * _inradius(f))
    return float(min(sizes))


def _inradius(poly) -> float:
    if poly.geom_type == "MultiPolygon":
        return max(_inradius(g) for g in poly.geoms)
    c = polylabel(poly, tolerance=1e-4 * max(math.sqrt(poly.area), 1e-12))
    return float(poly.exterior.distance(c)) if not poly.interiors else float(poly.boundary.distance(c))


def bounded_complement_anchors(S: AdmissibleSet) -> list[complex]:
    """One deep point in each bounded component of ``C minus S``."""
    polys = [isl.polygon for isl in S.islands]
    lines = [LineString(p.exterior.coords) for p in polys]
    for p in polys:
        lines += [LineString(r.coords) for r in p.interiors]
    lines += [_noding_line(a) for a in S.arcs]
    union = unary_union(polys) if polys else None
    anchors = []
    for f in polygonize(unary_union(lines)):
        rp = f.representative_point()
        if union is not None and union.contains(rp):
            continue
        region = f.difference(union) if union is not None else f
        if region.is_empty:
            continue
        if region.geom_type == "MultiPolygon":
            region = max(region.geoms, key=lambda g: g.area)
        c = polylabel(region, tolerance=1e-5 * math.sqrt(region.area))
        anchors.append(complex(c.x, c.y))
    return anchors


class RegularNeighborhood:
    """Membership predicate for ``S_eps = {p : dist(p, S) < eps}``."""

    def __init__(self, S: AdmissibleSet, eps: float):
        self.S = S
        self.eps = float(eps)

    def distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        return shapely.distance(self.S.geometry, shapely.points(z.real, z.imag))

    def __call__(self, z):
        inside = self.distance(z) < self.eps
        return bool(inside[0]) if np.ndim(z) == 0 else inside


def regular_neighborhood(S: AdmissibleSet, eps: float) -> RegularNeighborhood:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if 2 * eps >= S.feature_size:
        raise EpsilonTooLarge(f"eps={eps} too large for feature size {S.feature_size:.4g}",
                              feature_size=S.feature_size)
    return RegularNeighborhood(S, eps)


# ---------------------------------------------------------------------------
# JSON


def _parse_end(e):
    if e == "free" or e is None:
        return None
    return (int(e["island"]), int(e["boundary"]))


def admissible_set_from_json(data: dict, tolerances: dict | None = None) -> AdmissibleSet:
    islands = []
    for item in data.get("islands", []):
        vertex = item.get("vertex")
        islands.append(Island(
            curve_from_json(item["outer"]),
            tuple(curve_from_json(h) for h in item.get("holes", [])),
            complex(*vertex) if vertex is not None else None,
        ))
    arcs = []
    for item in data.get("arcs", []):
        curve = curve_from_json(item["curve"])
        arcs.append((curve, [_parse_end(e) for e in item.get("ends", [])]))
    return build_admissible_set(islands, arcs, tolerances)


def load_admissible_set(path, tolerances: dict | None = None) -> AdmissibleSet:
    with open(path, encoding="utf-8") as fh:
        return admissible_set_from_json(json.load(fh), tolerances)
