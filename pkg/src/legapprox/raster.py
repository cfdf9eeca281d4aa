"""Raster helpers: grids, curve rasterization, flood fill and grid shortest paths."""

from __future__ import annotations

import math

import numpy as np
import shapely
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


class Grid:
    """Cell-centred grid covering ``bounds`` (minx, miny, maxx, maxy) with spacing ``h``."""

    def __init__(self, bounds, h: float, pad: int = 4):
        minx, miny, maxx, maxy = bounds
        self.h = float(h)
        self.x0 = minx - pad * h
        self.y0 = miny - pad * h
        self.nx = int(math.ceil((maxx - minx) / h)) + 2 * pad + 1
        self.ny = int(math.ceil((maxy - miny) / h)) + 2 * pad + 1
        xs = self.x0 + h * np.arange(self.nx)
        ys = self.y0 + h * np.arange(self.ny)
        self.centers = xs[None, :] + 1j * ys[:, None]

    @property
    def shape(self):
        return (self.ny, self.nx)

    def index(self, z):
        z = np.asarray(z, complex)
        ix = np.clip(np.rint((z.real - self.x0) / self.h).astype(int), 0, self.nx - 1)
        iy = np.clip(np.rint((z.imag - self.y0) / self.h).astype(int), 0, self.ny - 1)
        return iy, ix

    def center(self, iy, ix):
        return self.x0 + self.h * ix + 1j * (self.y0 + self.h * iy)

    def mark_curves(self, curves) -> np.ndarray:
        """Cells traversed by the curves (8-connected along each curve)."""
        img = np.zeros(self.shape, bool)
        for c in curves:
            n = max(16, int(math.ceil(4 * c.length / self.h)))
            iy, ix = self.index(c(np.linspace(0.0, 1.0, n + 1)))
            img[iy, ix] = True
        return img

    def mark_points(self, z) -> np.ndarray:
        img = np.zeros(self.shape, bool)
        iy, ix = self.index(np.atleast_1d(z))
        img[iy, ix] = True
        return img

    def distance_from(self, mask: np.ndarray) -> np.ndarray:
        """Euclidean distance (in length units) from each cell centre to the nearest marked cell."""
        if not mask.any():
            return np.full(self.shape, np.inf)
        return ndimage.distance_transform_edt(~mask) * self.h

    def inside(self, geometry) -> np.ndarray:
        return shapely.contains_xy(geometry, self.centers.real, self.centers.imag)


def set_mask(grid: Grid, S) -> np.ndarray:
    """Cells belonging to the admissible set (filled islands plus boundary and arc cells)."""
    mask = np.zeros(grid.shape, bool)
    for isl in S.islands:
        mask |= grid.inside(isl.polygon)
    mask |= grid.mark_curves([c for _, c in S.boundary_curves()])
    mask |= grid.mark_curves([a.curve for a in S.arcs])
    return mask


def neighborhood_mask(grid: Grid, S, eps: float) -> np.ndarray:
    return grid.distance_from(set_mask(grid, S)) < eps


def trapped_components(region: np.ndarray, barrier: np.ndarray) -> int:
    """Number of 4-connected components of ``region minus barrier`` not touching the region's boundary.

    Components lying within 1.5 cells of the barrier are ignored.
    """
    free = region & ~barrier
    labels, n = ndimage.label(free, structure=_FOUR)
    if n == 0:
        return 0
    outside = ~region
    outside[0, :] = outside[-1, :] = outside[:, 0] = outside[:, -1] = True
    touching = ndimage.binary_dilation(outside, structure=_FOUR) & free
    ok = set(np.unique(labels[touching]).tolist())
    # pockets hugging the barrier (apexes where curves meet) are raster artifacts
    depth = ndimage.distance_transform_edt(~barrier)
    deepest = ndimage.maximum(depth, labels, index=np.arange(1, n + 1))
    return int(sum(1 for k in range(1, n + 1) if k not in ok and deepest[k - 1] > 1.5))


def count_components(mask: np.ndarray, eight: bool = True) -> int:
    return int(ndimage.label(mask, structure=_EIGHT if eight else _FOUR)[1])


def bounded_holes(mask: np.ndarray) -> int:
    """Bounded 4-connected components of the complement of ``mask``."""
    comp = ~mask
    labels, n = ndimage.label(comp, structure=_FOUR)
    edge = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    return int(n - np.count_nonzero(edge > 0))


def _edges(free: np.ndarray, h: float):
    ny, nx = free.shape
    idx = np.arange(ny * nx).reshape(ny, nx)
    us, vs, ws = [], [], []
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        src = (slice(0, ny - dy), slice(max(0, -dx), nx - max(0, dx)))
        tgt = (slice(dy, ny), slice(max(0, dx), nx - max(0, -dx)))
        m = free[src] & free[tgt]
        us.append(idx[src][m])
        vs.append(idx[tgt][m])
        ws.append(np.full(int(m.sum()), h * math.hypot(dx, dy)))
    return np.concatenate(us), np.concatenate(vs), np.concatenate(ws)


def _walk(pred, target):
    path = [target]
    while pred[path[-1]] >= 0:
        path.append(pred[path[-1]])
    return path[::-1]


def shortest_path(grid: Grid, free: np.ndarray, source, targets):
    """Grid shortest path from cell ``source`` to the nearest reachable cell in ``targets``.

    Returns ``(path_points, target_position)`` or ``None`` when no target is reachable.
    """
    u, v, w = _edges(free, grid.h)
    n = free.size
    graph = coo_matrix((w, (u, v)), shape=(n, n)).tocsr()
    s = source[0] * grid.nx + source[1]
    dist, pred = dijkstra(graph, directed=False, indices=s, return_predecessors=True)
    best, best_k = math.inf, None
    for k, (iy, ix) in enumerate(targets):
        d = dist[iy * grid.nx + ix]
        if d < best:
            best, best_k = d, k
    if best_k is None:
        return None
    t = targets[best_k][0] * grid.nx + targets[best_k][1]
    cells = np.array(_walk(pred, t))
    return grid.centers.ravel()[cells], best_k


def shortest_odd_loop(grid: Grid, free: np.ndarray, source, target, ray_origin: complex, ray_dir: complex):
    """Shortest grid path from ``source`` to ``target`` crossing the ray an odd number of times."""
    u, v, w = _edges(free, grid.h)
    z = grid.centers.ravel()
    d = ray_dir / abs(ray_dir)

    def side(p):
        rel = (p - ray_origin) * np.conj(d)
        return rel.imag >= 0, rel.real > 0

    su, au = side(z[u])
    sv, av = side(z[v])
    cross = (su != sv) & au & av
    n = free.size
    uu = np.concatenate([np.where(cross, u, u), np.where(cross, u + n, u + n)])
    vv = np.concatenate([np.where(cross, v + n, v), np.where(cross, v, v + n)])
    ww = np.concatenate([w, w])
    graph = coo_matrix((ww, (uu, vv)), shape=(2 * n, 2 * n)).tocsr()
    s = source[0] * grid.nx + source[1]
    t = target[0] * grid.nx + target[1] + n
    dist, pred = dijkstra(graph, directed=False, indices=s, return_predecessors=True)
    if not np.isfinite(dist[t]):
        return None
    nodes = np.array(_walk(pred, t)) % n
    return z[nodes]


def simplify_path(points: np.ndarray, tol: float) -> np.ndarray:
    """Douglas-Peucker simplification keeping the endpoints; drops repeated points."""
    pts = [points[0]]
    for p in points[1:]:
        if abs(p - pts[-1]) > 1e-12:
            pts.append(p)
    if len(pts) < 3:
        return np.array(pts)
    line = shapely.LineString(np.column_stack([np.real(pts), np.imag(pts)]))
    simple = line.simplify(tol, preserve_topology=True)
    xy = np.asarray(simple.coords)
    return xy[:, 0] + 1j * xy[:, 1]


def winding_number(points: np.ndarray, center: complex) -> int:
    """Winding number of the closed polyline ``points`` around ``center``."""
    p = np.asarray(points) - center
    if p[0] != p[-1]:
        p = np.append(p, p[0])
    return int(round(np.sum(np.angle(p[1:] / p[:-1])) / (2 * np.pi)))
