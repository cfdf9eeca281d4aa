"""Connected homology bases and interpolation-aware curve families.

Cycles are assembled from three kinds of building blocks:

* connectors ``A_ij``: raster shortest paths from a boundary anchor ``a_ij``
  to the island vertex ``q_i``;
* hole loops: closed raster paths through ``q_i`` winding once around a hole;
* ports: a boundary sub-arc from an attachment point to ``a_ij`` (avoiding
  the second anchor ``b_ij``) followed by the connector.

Every cycle is rerouted through the vertex of island 0 along the tree of
black bridges, so the union of all cycles is connected.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from shapely.geometry import Polygon
from shapely.ops import polylabel

from .errors import DisconnectedSet, ResolutionTooCoarse, RoutingFailure
from .geometry import AdmissibleSet, PiecewiseCurve, concat, polyline
from . import raster

DEFAULT_CELLS = 256
CLEARANCE_CELLS = 3
SLOT_CELLS = 16


@dataclass(frozen=True)
class BridgeColoring:
    black: frozenset
    red: frozenset
    case1: frozenset = frozenset()
    case2: frozenset = frozenset()

    @property
    def bridges(self):
        return self.black | self.red


def classify_bridges(S: AdmissibleSet) -> BridgeColoring:
    """Split arcs by attachment type and pick the lexicographically first spanning tree of bridges."""
    if not S.connected:
        raise DisconnectedSet("admissible set is not connected")
    case1, case2, bridges = set(), set(), []
    for k, arc in enumerate(S.arcs):
        att = arc.attached
        if len(att) == 1:
            case1.add(k)
        elif len(att) == 2:
            if att[0].island == att[1].island:
                case2.add(k)
            else:
                bridges.append(k)
    uf = nx.utils.UnionFind(range(len(S.islands)))
    black, red = set(), set()
    for k in bridges:
        i, j = (e.island for e in S.arcs[k].attached)
        if uf[i] != uf[j]:
            uf.union(i, j)
            black.add(k)
        else:
            red.add(k)
    return BridgeColoring(frozenset(black), frozenset(red), frozenset(case1), frozenset(case2))


# ---------------------------------------------------------------------------
# routing inside islands


class _IslandRouter:
    def __init__(self, S, i, h):
        isl = S.islands[i]
        self.S, self.i, self.h = S, i, h
        self.q = isl.vertex
        self.grid = raster.Grid(isl.polygon.bounds, h)
        inside = self.grid.inside(isl.polygon)
        self.margin = CLEARANCE_CELLS * h
        depth = self.grid.distance_from(~inside)
        self.inside = inside & (depth >= self.margin)
        qd = isl.polygon.exterior.distance(_pt(self.q))
        for hole in isl.polygon.interiors:
            qd = min(qd, hole.distance(_pt(self.q)))
        radius = min(SLOT_CELLS * h, 0.6 * (qd - self.margin))
        if radius < 4 * h:
            raise RoutingFailure(f"island {i}: vertex too close to the boundary for the raster spacing",
                                 island=i, cell=h)
        self.slot_radius = radius
        n = max(8, int(2 * math.pi * radius / (4.2 * h)))
        slots = self.q + radius * np.exp(2j * np.pi * np.arange(n) / n)
        iy, ix = self.grid.index(slots)
        self.slot_cells = list(zip(iy.tolist(), ix.tolist()))
        self.slots = [self.grid.center(a, b) for a, b in self.slot_cells]
        self.slot_used = [False] * n
        self.slot_reserved = [False] * n
        self.disc = np.abs(self.grid.centers - self.q) < radius - 1.5 * h
        self.obstacles = np.zeros(self.grid.shape, bool)
        self.hole_centers = []
        for ring in isl.polygon.interiors:
            c = polylabel(Polygon(ring), tolerance=1e-3 * h)
            self.hole_centers.append(complex(c.x, c.y))

    def free(self):
        dist = self.grid.distance_from(self.obstacles)
        return self.inside & ~self.disc & (dist > CLEARANCE_CELLS * self.h)

    def add_obstacle(self, curve):
        self.obstacles |= self.grid.mark_curves([curve])

    def _finish(self, pts, exact_head, exact_tail):
        mid = raster.simplify_path(np.asarray(pts), 0.5 * self.h)
        return polyline(list(exact_head) + list(mid) + list(exact_tail))

    def route_from(self, start, entry, need_neighbors=False, reserve=False):
        """Path from ``start`` (through the cell of ``entry``) to ``q`` via a free slot."""
        free = self.free()
        n = len(self.slots)
        if abs(entry - self.q) < self.slot_radius:
            # inside the slot disc: go straight along an unused slot direction
            ang = np.angle(entry - self.q)
            k = int(round(ang / (2 * np.pi) * n)) % n
            taken = [m for m in range(n) if self.slot_used[m] or self.slot_reserved[m]]
            gaps = [abs((ang - 2 * np.pi * m / n + np.pi) % (2 * np.pi) - np.pi) for m in taken]
            if k in taken or (gaps and min(gaps) < np.pi / n):
                raise RoutingFailure(f"island {self.i}: point {entry:.4g} is too close to existing curves",
                                     island=self.i)
            self.slot_used[k] = True
            head = [start] if abs(start - entry) < 1e-15 else [start, entry]
            curve = polyline(head + [self.q])
            self.add_obstacle(curve)
            return curve, k
        ok = []
        for k in range(n):
            if self.slot_used[k] or self.slot_reserved[k]:
                continue
            if need_neighbors and (self.slot_used[(k - 1) % n] or self.slot_used[(k + 1) % n]
                                   or self.slot_reserved[(k - 1) % n] or self.slot_reserved[(k + 1) % n]):
                continue
            if free[self.slot_cells[k]]:
                ok.append(k)
        src = tuple(int(v[0]) for v in self.grid.index([entry]))
        if not free[src]:
            raise RoutingFailure(f"island {self.i}: start point {entry:.4g} is blocked", island=self.i)
        found = raster.shortest_path(self.grid, free, src, [self.slot_cells[k] for k in ok])
        if found is None:
            raise RoutingFailure(f"island {self.i}: no free route to the vertex", island=self.i)
        pts, pos = found
        k = ok[pos]
        self.slot_used[k] = True
        if reserve:
            self.slot_reserved[(k - 1) % n] = self.slot_reserved[(k + 1) % n] = True
        head = [start] if abs(start - entry) < 1e-15 else [start, entry]
        curve = self._finish(pts[1:-1] if len(pts) > 2 else [], head, [self.slots[k], self.q])
        self.add_obstacle(curve)
        return curve, k

    def hole_loop(self, j, k):
        """Closed path from ``q`` around hole ``j`` leaving and returning next to slot ``k``."""
        n = len(self.slots)
        out, back = (k - 1) % n, (k + 1) % n
        if self.slot_used[out] or self.slot_used[back]:
            raise RoutingFailure(f"island {self.i}: no slots left around hole {j}", island=self.i)
        self.slot_reserved[out] = self.slot_reserved[back] = False
        free = self.free()
        for s in (out, back):
            if not free[self.slot_cells[s]]:
                raise RoutingFailure(f"island {self.i}: slot next to hole {j} is blocked", island=self.i)
        center = self.hole_centers[j - 1]
        pts = raster.shortest_odd_loop(self.grid, free, self.slot_cells[out], self.slot_cells[back],
                                       center, center - self.q)
        if pts is None:
            raise RoutingFailure(f"island {self.i}: cannot encircle hole {j}", island=self.i)
        self.slot_used[out] = self.slot_used[back] = True
        mid = raster.simplify_path(pts[1:-1], 0.5 * self.h)
        ring = [self.q, self.slots[out]] + list(mid) + [self.slots[back], self.q]
        for m, c in enumerate(self.hole_centers):
            w = raster.winding_number(np.array(ring), c)
            if abs(w) != (1 if m == j - 1 else 0):
                raise RoutingFailure(f"island {self.i}: loop around hole {j} has winding {w} about hole {m + 1}",
                                     island=self.i)
        curve = polyline(ring, closed=True)
        self.add_obstacle(curve)
        return curve


def _pt(z):
    from shapely.geometry import Point

    return Point(z.real, z.imag)


class Router:
    """Connectors, ports and tree paths for one admissible set at raster spacing ``h``."""

    def __init__(self, S: AdmissibleSet, h: float, coloring: BridgeColoring):
        self.S, self.h, self.coloring = S, h, coloring
        self.islands = [_IslandRouter(S, i, h) for i in range(len(S.islands))]
        self.connectors = {}
        self.connector_slot = {}
        self.loops = {}
        for i, isl in enumerate(S.islands):
            order = list(range(1, len(isl.boundaries))) + [0]
            for j in order:
                self._connector(i, j, reserve=j > 0)
            for j in range(1, len(isl.boundaries)):
                self.loops[(i, j)] = self.islands[i].hole_loop(j, self.connector_slot[(i, j)])
        self.tree = nx.MultiGraph()
        self.tree.add_nodes_from(range(len(S.islands)))
        for k in sorted(coloring.black):
            a, b = S.arcs[k].attached
            self.tree.add_edge(a.island, b.island, key=k)

    def _connector(self, i, j, reserve):
        isl = self.S.islands[i]
        a, _, sa, _ = isl.anchor_points[j]
        bc = isl.boundaries[j]
        t = bc.derivative(sa)
        inward = 1j * t / abs(t)
        r = self.islands[i]
        entry = a + inward * (r.margin + 2 * self.h)
        curve, k = r.route_from(a, entry, need_neighbors=reserve, reserve=reserve)
        self.connectors[(i, j)] = curve
        self.connector_slot[(i, j)] = k

    def port(self, i, j, s_x, x=None):
        """Path from the boundary point with parameter ``s_x`` on ``Γ_ij`` to ``q_i``.

        ``x`` pins the exact start point (arc endpoints sit within the attachment tolerance).
        """
        isl = self.S.islands[i]
        _, _, sa, sb = isl.anchor_points[j]
        bc = isl.boundaries[j]
        fwd_len = (sa - s_x) % 1.0
        if (sb - s_x) % 1.0 < fwd_len:
            arc = bc.cyclic_restrict(sa, s_x).reversed()
        else:
            arc = bc.cyclic_restrict(s_x, sa)
        if x is not None:
            first = arc.pieces[0].with_endpoints(x, arc.pieces[0].end)
            arc = PiecewiseCurve((first,) + arc.pieces[1:])
        return concat([arc, self.connectors[(i, j)]])

    def tour(self, i, j):
        """Closed path ``q_i -> a_ij -> around Γ_ij -> a_ij -> q_i``."""
        isl = self.S.islands[i]
        sa = isl.anchor_points[j][2]
        bc = isl.boundaries[j]
        loop = concat([bc.restrict(sa, 1.0), bc.restrict(0.0, sa)]) if sa > 0 else bc
        conn = self.connectors[(i, j)]
        return concat([conn.reversed(), loop, conn], closed=True)

    def bridge_hop(self, k, from_island):
        arc = self.S.arcs[k]
        e0, e1 = arc.ends
        if e0.island == from_island:
            return concat([self.port(e0.island, e0.boundary, e0.param, e0.point).reversed(), arc.curve,
                           self.port(e1.island, e1.boundary, e1.param, e1.point)])
        return concat([self.port(e1.island, e1.boundary, e1.param, e1.point).reversed(), arc.curve.reversed(),
                       self.port(e0.island, e0.boundary, e0.param, e0.point)])

    def tree_path(self, i0, i1):
        """Path ``q_i0 -> q_i1`` along black bridges, or ``None`` when ``i0 == i1``."""
        if i0 == i1:
            return None
        nodes = nx.shortest_path(self.tree, i0, i1)
        hops = []
        for u, v in zip(nodes[:-1], nodes[1:]):
            k = min(self.tree[u][v])
            hops.append(self.bridge_hop(k, u))
        return concat(hops)


# ---------------------------------------------------------------------------
# homology basis


@dataclass(frozen=True)
class HomologyBasis:
    cycles: tuple
    base_point: complex
    private_arcs: tuple
    runge_certified: bool
    kinds: tuple = ()
    cell: float = 0.0
    router: Router | None = field(default=None, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return len(self.cycles)

    def private_curve(self, k) -> PiecewiseCurve:
        s0, s1 = self.private_arcs[k]
        return self.cycles[k].restrict(s0, s1)

    def to_json(self, samples: int = 400) -> dict:
        s = np.linspace(0.0, 1.0, samples + 1)
        cycles, ranges = [], []
        for c, (s0, s1) in zip(self.cycles, self.private_arcs):
            z = c(s)
            cycles.append([[float(p.real), float(p.imag)] for p in z])
            ranges.append([int(math.ceil(s0 * samples)), int(math.floor(s1 * samples))])
        return {
            "cycles": cycles,
            "base_point": [self.base_point.real, self.base_point.imag],
            "private_arcs": ranges,
            "runge_certified": bool(self.runge_certified),
            "kinds": list(self.kinds),
        }


def default_cell(S: AdmissibleSet, cells: int = DEFAULT_CELLS) -> float:
    minx, miny, maxx, maxy = S.bounds()
    return max(maxx - minx, maxy - miny) / cells


def default_epsilon(S: AdmissibleSet, h: float) -> float:
    minx, miny, maxx, maxy = S.bounds()
    eps = min(S.feature_size / 4, 0.1 * max(maxx - minx, maxy - miny))
    return max(eps, 2.5 * h)


def _compose(parts):
    """Concatenate closed-path parts; returns the curve and the parameter span of the marked part."""
    pieces, span = [], None
    for p, marked in parts:
        if p is None:
            continue
        n0 = len(pieces)
        pieces.extend(p.pieces)
        if marked:
            span = (n0, len(pieces))
    curve = PiecewiseCurve(tuple(pieces), True)
    b = curve.breaks
    s0, s1 = b[span[0]], b[span[1]]
    w = s1 - s0
    return curve, (s0 + 0.2 * w, s1 - 0.2 * w)


def build_homology_basis(S: AdmissibleSet, cells: int = DEFAULT_CELLS, certify: bool = True) -> HomologyBasis:
    """Connected basis of closed curves through the vertex of island 0, with private arcs."""
    if not S.connected:
        raise DisconnectedSet("admissible set is not connected")
    h = default_cell(S, cells)
    if not S.islands:
        closed = [a.curve for a in S.arcs if a.curve.closed]
        if closed:
            c = closed[0]
            basis = HomologyBasis((c,), c.start, ((0.2, 0.8),), True, ("loop",), h)
        else:
            basis = HomologyBasis((), S.arcs[0].curve.start, (), True, (), h)
        if certify and basis.cycles:
            basis = _certify(S, basis, h)
        return basis

    coloring = classify_bridges(S)
    router = Router(S, h, coloring)
    q1 = S.islands[0].vertex
    cycles, privs, kinds = [], [], []

    def add(parts, base_island, kind):
        parts = [(router.tree_path(0, base_island), False)] + parts + [(router.tree_path(base_island, 0), False)]
        c, span = _compose(parts)
        cycles.append(c)
        privs.append(span)
        kinds.append(kind)

    for i, isl in enumerate(S.islands):
        for j in range(1, len(isl.boundaries)):
            loop = router.loops[(i, j)]
            # the private part is the raster stretch between the two slot segments
            inner = PiecewiseCurve(loop.pieces[1:-1], False)
            add([(PiecewiseCurve(loop.pieces[:1]), False), (inner, True),
                 (PiecewiseCurve(loop.pieces[-1:]), False)], i, "hole")
    for k in sorted(coloring.case2):
        e0, e1 = S.arcs[k].ends
        i = e0.island
        add([(router.port(i, e0.boundary, e0.param, e0.point).reversed(), False), (S.arcs[k].curve, True),
             (router.port(i, e1.boundary, e1.param, e1.point), False)], i, "loop-arc")
    for k in sorted(coloring.red):
        e0, e1 = S.arcs[k].ends
        i0, i1 = e0.island, e1.island
        add([(router.port(i0, e0.boundary, e0.param, e0.point).reversed(), False), (S.arcs[k].curve, True),
             (router.port(i1, e1.boundary, e1.param, e1.point), False), (router.tree_path(i1, i0), False)], i0, "bridge")
    for k, arc in enumerate(S.arcs):
        if arc.curve.closed:
            raise RoutingFailure("closed arcs are only supported when there are no islands")

    basis = HomologyBasis(tuple(cycles), q1, tuple(privs), False, tuple(kinds), h, router)
    _check_private(basis, h)
    if certify:
        basis = _certify(S, basis, h)
    return basis


def _check_private(basis: HomologyBasis, h: float):
    for k in range(basis.rank):
        z = basis.private_curve(k).dense(per_unit_length=4 / h)
        for m, c in enumerate(basis.cycles):
            if m == k:
                continue
            w = c.dense(per_unit_length=4 / h)
            d = _min_distance(z, w)
            if d <= CLEARANCE_CELLS * h:
                raise RoutingFailure(f"private arc of cycle {k} comes within {d:.3g} of cycle {m}",
                                     cycle=k, other=m, distance=d)


def _min_distance(a, b):
    from scipy.spatial import cKDTree

    tree = cKDTree(np.column_stack([b.real, b.imag]))
    d, _ = tree.query(np.column_stack([a.real, a.imag]))
    return float(d.min())


def _certify(S, basis, h):
    eps = default_epsilon(S, h)
    ok = runge_check(S, basis.cycles, eps, h=h) and runge_check(S, basis.cycles, eps, h=h / 2)
    return HomologyBasis(basis.cycles, basis.base_point, basis.private_arcs, ok, basis.kinds, basis.cell,
                         basis.router)


def runge_check(S: AdmissibleSet, curves, eps: float, h: float | None = None, cells: int | None = None) -> bool:
    """True iff no component of the rasterized ``S_eps`` minus the curves is trapped away from its boundary."""
    if h is None:
        h = default_cell(S, cells or DEFAULT_CELLS)
    if eps < 2 * h:
        raise ResolutionTooCoarse(f"eps={eps:.3g} is below two raster cells ({h:.3g})", eps=eps, cell=h)
    minx, miny, maxx, maxy = S.bounds()
    grid = raster.Grid((minx - eps, miny - eps, maxx + eps, maxy + eps), h)
    region = raster.neighborhood_mask(grid, S, eps)
    barrier = grid.mark_curves(list(curves))
    return raster.trapped_components(region, barrier) == 0


# ---------------------------------------------------------------------------
# curve families


@dataclass(frozen=True)
class CurveFamily:
    members: tuple
    interp_points: tuple
    connected: bool
    runge_certified: bool = False
    base_point: complex = 0j


def _hits(curve: PiecewiseCurve, p: complex, tol: float) -> list:
    """All global parameters where the curve passes through ``p`` (within ``tol``)."""
    out = []
    b = curve.breaks
    ends = np.array([pc.start for pc in curve.pieces] + [curve.end])
    for k in np.flatnonzero(np.abs(ends - p) <= tol):
        out.append(float(b[k]))
    from scipy.optimize import minimize_scalar

    for k, pc in enumerate(curve.pieces):
        u = np.linspace(0.0, 1.0, 257)
        d = np.abs(pc(u) - p)
        for m in range(1, len(u) - 1):
            if d[m] <= d[m - 1] and d[m] <= d[m + 1] and d[m] < 10 * tol + 2 * pc.length / 256:
                res = minimize_scalar(lambda t: abs(pc(t) - p), bounds=(u[m - 1], u[m + 1]), method="bounded",
                                      options={"xatol": 1e-14})
                if res.fun <= tol:
                    out.append(float(b[k] + res.x * (b[k + 1] - b[k])))
    out.sort()
    merged = []
    for s in out:
        if not merged or s - merged[-1] > 1e-9:
            merged.append(s)
    return merged


def _split(curve: PiecewiseCurve, params) -> list:
    cuts = sorted({0.0, 1.0} | {s for s in params if 1e-9 < s < 1 - 1e-9})
    if curve.closed and len(cuts) == 2 and not any(1e-9 < s < 1 - 1e-9 for s in params):
        return [curve]
    return [curve.restrict(a, b) for a, b in zip(cuts[:-1], cuts[1:])]


def _key(c: PiecewiseCurve):
    s = np.linspace(0.0, 1.0, 7)
    z = np.round(c(s), 7)
    return tuple(z), tuple(z[::-1])


def curve_family_with_interpolation(S: AdmissibleSet, A, basis: HomologyBasis | None = None,
                                    cells: int = DEFAULT_CELLS) -> CurveFamily:
    """Arcs and closed curves whose union is connected, Runge and contains every point of ``A``."""
    if basis is None:
        basis = build_homology_basis(S, cells=cells)
    h = basis.cell or default_cell(S, cells)
    tol = 1e-9 * max(1.0, max(abs(v) for v in S.bounds()))
    base = basis.base_point
    A = [complex(a) for a in A]
    if not all(_in_set(S, a) for a in A):
        raise RoutingFailure("interpolation points must lie in the admissible set")
    if basis.rank == 0 and not S.arcs and len(A) <= 1:
        # nothing to connect: the base point moves onto the single point of A
        base = A[0] if A else base
        return CurveFamily((), tuple(A), True, True, base)
    # routing marks new paths as obstacles; keep the basis reusable
    router = copy.deepcopy(basis.router)
    pts = [base] + A
    for arc in S.arcs:
        if not arc.curve.closed:
            pts += [arc.curve.start, arc.curve.end]
    # anchors and vertices actually traversed by the basis
    if router is not None:
        for (i, j), conn in router.connectors.items():
            if any(_hits(c, conn(0.5), tol) for c in basis.cycles):
                pts += [conn.start, conn.end]
    uniq = []
    for p in pts:
        if all(abs(p - u) > tol for u in uniq):
            uniq.append(p)
    pts = uniq

    members, seen = [], set()

    def add(curve):
        k, rk = _key(curve)
        if k in seen or rk in seen:
            return
        seen.add(k)
        members.append(curve)

    def add_split(curve):
        cuts = [s for p in pts for s in _hits(curve, p, tol)]
        for part in _split(curve, cuts):
            add(part)

    for c in basis.cycles:
        add_split(c)
    covered = [c for c in basis.cycles]
    for k, arc in enumerate(S.arcs):
        if arc.curve.closed:
            continue
        mid = arc.curve(0.5)
        if any(_hits(c, mid, 1e-7) for c in covered):
            continue
        parts = []
        e0, e1 = arc.ends
        if e0 is not None:
            parts.append(router.port(e0.island, e0.boundary, e0.param, e0.point).reversed())
        parts.append(arc.curve)
        if e1 is not None:
            parts.append(router.port(e1.island, e1.boundary, e1.param, e1.point))
        path = concat(parts)
        if e0 is not None and e0.island != 0:
            path = concat([router.tree_path(0, e0.island), path])
        elif e0 is None and e1 is not None and e1.island != 0:
            path = concat([path, router.tree_path(e1.island, 0)])
        covered.append(path)
        add_split(path)

    on_family = lambda p: any(_hits(c, p, tol) for c in members)
    for a in A:
        if abs(a - base) <= tol or on_family(a):
            continue
        lam = _route_point(S, router, a, tol)
        if lam is None:
            raise RoutingFailure(f"cannot connect {a} to the curve family")
        add(lam)
        # Λ_a may pass through points of A already present; no further split is needed
    grid_ok = _family_connected(S, members, h)
    eps = default_epsilon(S, h)
    runge = runge_check(S, members, eps, h=h) if members else True
    return CurveFamily(tuple(members), tuple(pts), grid_ok, runge, base)


def _in_set(S, a, tol=1e-7):
    if S.contains(a, tol=tol)[0]:
        return True
    if not S.contains(a, tol=1e-3)[0]:
        return False
    curves = [c for _, c in S.boundary_curves()] + [arc.curve for arc in S.arcs]
    return any(c.nearest(a)[1] <= tol for c in curves)


def _route_point(S, router, a, tol):
    if router is None:
        return None
    for i, isl in enumerate(S.islands):
        for j, bc in enumerate(isl.boundaries):
            s, d = bc.nearest(a)
            if d <= 1e-7:
                r = router.islands[i]
                t = bc.derivative(s)
                entry = a + 1j * t / abs(t) * (r.margin + 2 * router.h)
                c, _ = r.route_from(a, entry)
                c = c.reversed()
                return concat([router.tree_path(0, i), c]) if i else c
        if isl.polygon.contains(_pt(a)):
            r = router.islands[i]
            c, _ = r.route_from(a, a)
            c = c.reversed()
            return concat([router.tree_path(0, i), c]) if i else c
    return None


def _family_connected(S, members, h):
    if not members:
        return True
    g = nx.Graph()
    for k, c in enumerate(members):
        g.add_node(k)
    ends = [(c.start, c.end) for c in members]
    for k, c in enumerate(members):
        for m in range(k):
            if any(abs(p - q) < 1e-7 for p in ends[k] for q in ends[m]):
                g.add_edge(k, m)
            elif _min_distance(c.dense(per_unit_length=2 / h), members[m].dense(per_unit_length=2 / h)) < 1e-7:
                g.add_edge(k, m)
    return nx.is_connected(g)
