"""Contour integrals, rational least-squares approximation and period-normalized sprays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from shapely.geometry import MultiPoint

from .errors import IllConditioned, MissingAnchor, PoleOnPath, SingularPeriodMatrix
from .geometry import CurveSamples, PiecewiseCurve, bounded_complement_anchors

DEFAULT_DEGREE = 24
DEFAULT_POLE_ORDER = 12
COND_CAP = 1e13
PERIOD_COND_CAP = 1e10

# ---------------------------------------------------------------------------
# quadrature


def _weighted(f, piece, u):
    g = np.asarray(f(piece(u)), complex)
    d = piece.derivative(u)
    return g * (d.reshape(d.shape + (1,) * (g.ndim - 1)))


def _piece_integral(f, piece, panels):
    """Composite Simpson rule on one curve piece with ``panels`` (even) subintervals."""
    u = np.linspace(0.0, 1.0, panels + 1)
    g = _weighted(f, piece, u)
    wts = np.ones(panels + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    return np.tensordot(wts, g, axes=(0, 0)) / (3.0 * panels)


def _periodic_integral(f, piece, n):
    u = np.arange(n) / n
    return np.mean(_weighted(f, piece, u), axis=0)


def _size(v):
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def _integrate_piece(f, piece, periodic, tol, max_panels):
    n = 16
    if periodic:
        prev = _periodic_integral(f, piece, n)
        while True:
            n *= 2
            cur = _periodic_integral(f, piece, n)
            err = _size(cur - prev)
            if err <= tol * max(1.0, _size(cur)) or n >= max_panels:
                return cur, err
            prev = cur
    if piece.is_straight and piece.kind == "segment":
        n = 8
    prev = _piece_integral(f, piece, n)
    while True:
        n *= 2
        cur = _piece_integral(f, piece, n)
        err = _size(cur - prev) / 15.0
        if err <= tol * max(1.0, _size(cur)) or n >= max_panels:
            return cur + (cur - prev) / 15.0, err
        prev = cur


_GL16 = np.polynomial.legendre.leggauss(16)


def fixed_quadrature(f, curve: PiecewiseCurve, samples: int = 2048):
    """``∫ f dz`` with a fixed budget of ``samples`` nodes on the curve.

    A closed one-piece curve gets the periodic trapezoid rule; otherwise
    16-point Gauss-Legendre panels are spread over the pieces by length.
    """
    if curve.closed and len(curve.pieces) == 1:
        return _periodic_integral(f, curve.pieces[0], samples)
    x, wq = _GL16
    panels = np.maximum(1, np.floor(samples / 16 * curve.piece_lengths / curve.length)).astype(int)
    total = 0
    for piece, m in zip(curve.pieces, panels):
        edges = np.linspace(0.0, 1.0, m + 1)
        u = (0.5 * (edges[1:] - edges[:-1])[:, None] * (x[None, :] + 1) + edges[:-1, None]).ravel()
        g = _weighted(f, piece, u)
        wts = np.tile(wq, m) * 0.5 / m
        total = total + np.tensordot(wts, g, axes=(0, 0))
    return total


def _check_poles(curve, poles, exclusion):
    if not poles:
        return
    z = curve.dense(per_unit_length=400)
    for a in poles:
        d = float(np.min(np.abs(z - a)))
        if d <= exclusion:
            raise PoleOnPath(f"path passes within {d:.3g} of the pole {a}", pole=a, distance=d)


def contour_integral(f, cycle, poles=(), exclusion: float = 1e-6, tol: float = 1e-14,
                     max_panels: int = 1 << 14, return_error: bool = False):
    """``∫ f dz`` along a curve (closed or not), with a Richardson error estimate.

    ``cycle`` is a :class:`PiecewiseCurve` or :class:`CurveSamples`.  Pieces are
    integrated independently by composite Simpson with panel doubling; a
    closed single-piece curve uses the periodic trapezoid rule instead.
    """
    if isinstance(cycle, CurveSamples):
        if cycle.source is None:
            return _sampled_integral(f, cycle, poles, exclusion, return_error)
        cycle = cycle.source
    _check_poles(cycle, poles, exclusion)
    periodic = cycle.closed and len(cycle.pieces) == 1
    total, err = 0j, 0.0
    for p in cycle.pieces:
        v, e = _integrate_piece(f, p, periodic, tol, max_panels)
        total = total + v
        err += e
    total = complex(total) if np.ndim(total) == 0 else np.asarray(total, complex)
    return (total, float(err)) if return_error else total


def _sampled_integral(f, samples, poles, exclusion, return_error):
    z = samples.points
    for a in poles:
        d = float(np.min(np.abs(z - a)))
        if d <= exclusion:
            raise PoleOnPath(f"samples pass within {d:.3g} of the pole {a}", pole=a, distance=d)
    g = f(z) * samples.tangents
    s = samples.params
    full = np.trapezoid(g, s)
    half = np.trapezoid(g[::2], s[::2]) if len(s) % 2 == 1 else full
    err = abs(full - half) / 3.0
    return (complex(full), float(err)) if return_error else complex(full)


# ---------------------------------------------------------------------------
# rational functions


@dataclass(frozen=True)
class RationalFunction:
    """``Σ c_k ((z-center)/scale)^k + Σ_j Σ_k d_jk (r_j/(z-a_j))^k``."""

    poly: np.ndarray
    poles: tuple = ()
    center: complex = 0j
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "poly", np.asarray(self.poly, complex))
        object.__setattr__(self, "poles", tuple((complex(a), float(r), np.asarray(d, complex))
                                                for a, r, d in self.poles))
        # simple poles are evaluated together by broadcasting
        simple = [(a, r * d[0]) for a, r, d in self.poles if len(d) == 1]
        object.__setattr__(self, "_simple_a", np.array([a for a, _ in simple], complex))
        object.__setattr__(self, "_simple_c", np.array([c for _, c in simple], complex))
        object.__setattr__(self, "_higher", tuple(p for p in self.poles if len(p[2]) > 1))

    def _simple(self, z, power):
        if not len(self._simple_a):
            return 0
        out = np.zeros(z.shape, complex)
        flat, res = z.reshape(-1), out.reshape(-1)
        for i in range(0, len(flat), 2048):
            q = 1.0 / (flat[i:i + 2048, None] - self._simple_a)
            res[i:i + 2048] = (q ** power) @ self._simple_c
        return out

    @property
    def anchors(self):
        return [a for a, _, _ in self.poles]

    def __call__(self, z):
        z = np.asarray(z, complex)
        u = (z - self.center) / self.scale
        out = np.zeros(z.shape, complex)
        for c in self.poly[::-1]:
            out = out * u + c
        out = out + self._simple(z, 1)
        for a, r, d in self._higher:
            v = r / (z - a)
            acc = np.zeros(z.shape, complex)
            for c in d[::-1]:
                acc = acc * v + c
            out += acc * v
        return out

    def derivative(self, z):
        z = np.asarray(z, complex)
        u = (z - self.center) / self.scale
        out = np.zeros(z.shape, complex)
        k = np.arange(len(self.poly))
        dpoly = (k[1:] * self.poly[1:]) / self.scale
        for c in dpoly[::-1]:
            out = out * u + c
        out = out - self._simple(z, 2)
        for a, r, d in self._higher:
            v = r / (z - a)
            acc = np.zeros(z.shape, complex)
            for kk in range(len(d), 0, -1):
                acc = acc * v + kk * d[kk - 1]
            # d/dz v^k = -k v^{k+1} / r
            out += -acc * v * v / r
        return out

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        center, scale = (other.center, other.scale) if not len(self.poly) else (self.center, self.scale)
        if len(self.poly) and len(other.poly) and (abs(self.center - other.center) > 1e-15
                                                   or abs(self.scale - other.scale) > 1e-15):
            raise ValueError("rational functions use different polynomial scalings")
        n = max(len(self.poly), len(other.poly))
        poly = np.zeros(n, complex)
        poly[:len(self.poly)] += self.poly
        poly[:len(other.poly)] += other.poly
        poles = {}
        for a, r, d in list(self.poles) + list(other.poles):
            if a in poles:
                r0, d0 = poles[a]
                if abs(r0 - r) > 1e-15:
                    raise ValueError("pole groups use different radii")
                m = max(len(d0), len(d))
                acc = np.zeros(m, complex)
                acc[:len(d0)] += d0
                acc[:len(d)] += d
                poles[a] = (r0, acc)
            else:
                poles[a] = (r, np.array(d, complex))
        return RationalFunction(poly, tuple((a, r, d) for a, (r, d) in poles.items()), center, scale)

    def __mul__(self, s) -> "RationalFunction":
        s = complex(s)
        return RationalFunction(self.poly * s, tuple((a, r, d * s) for a, r, d in self.poles), self.center,
                                self.scale)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        pair = lambda c: [float(c.real), float(c.imag)]
        return {
            "poly": [pair(c) for c in self.poly],
            "center": pair(self.center),
            "scale": self.scale,
            "poles": [{"anchor": pair(a), "radius": r, "coeffs": [pair(c) for c in d]} for a, r, d in self.poles],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RationalFunction":
        cpx = lambda p: complex(p[0], p[1])
        poles = tuple((cpx(p["anchor"]), float(p.get("radius", 1.0)), [cpx(c) for c in p["coeffs"]])
                      for p in data.get("poles", []))
        return cls([cpx(c) for c in data.get("poly", [])], poles, cpx(data.get("center", [0, 0])),
                   float(data.get("scale", 1.0)))


def cauchy_kernel(a: complex) -> RationalFunction:
    """``1/(2πi (z-a))``."""
    return RationalFunction([], ((a, 1.0, [1.0 / (2j * math.pi)]),))


# ---------------------------------------------------------------------------
# least-squares fitting


@dataclass(frozen=True)
class Approximation:
    function: RationalFunction
    residual: float
    deriv_residual: float
    condition: float


def _columns(z, center, scale, degree, anchors, radii, K):
    u = (z - center) / scale
    cols = [u ** k for k in range(degree + 1)]
    dcols = [k * u ** (k - 1) / scale if k else np.zeros_like(u) for k in range(degree + 1)]
    for a, r in zip(anchors, radii):
        v = r / (z - a)
        for k in range(1, K + 1):
            cols.append(v ** k)
            dcols.append(-k * v ** (k + 1) / r)
    return np.column_stack(cols), np.column_stack(dcols)


def holomorphic_approximate(z, values, anchors=(), degree: int = DEFAULT_DEGREE, K: int = DEFAULT_POLE_ORDER,
                            tangents=None, dvalues=None, deriv_weight: float | None = None,
                            center: complex | None = None, scale: float | None = None,
                            cond_cap: float = COND_CAP) -> Approximation:
    """Least-squares fit in the basis ``((z-c)/R)^k`` and ``(r_j/(z-a_j))^k``.

    ``dvalues`` are derivatives of the target along ``tangents`` (unit or
    not); when given they enter the fit as extra rows weighted by
    ``deriv_weight``.  The achieved sup residuals are reported, not enforced.
    """
    z = np.asarray(z, complex).ravel()
    f = np.asarray(values, complex).ravel()
    if center is None:
        center = complex(np.mean(z.real), np.mean(z.imag))
    if scale is None:
        scale = float(np.max(np.abs(z - center))) or 1.0
    anchors = [complex(a) for a in anchors]
    radii = [float(np.min(np.abs(z - a))) for a in anchors]
    if any(r <= 0 for r in radii):
        raise PoleOnPath("an anchor coincides with a sample point")
    V, dV = _columns(z, center, scale, degree, anchors, radii, K)
    rows, rhs = [V], [f]
    if dvalues is not None:
        t = np.asarray(tangents, complex).ravel()
        wgt = deriv_weight if deriv_weight is not None else scale / max(degree, 1)
        rows.append(wgt * dV * t[:, None])
        rhs.append(wgt * np.asarray(dvalues, complex).ravel())
    M, b = np.vstack(rows), np.concatenate(rhs)
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    coef, _, rank, sv = linalg.lstsq(M / norms, b, lapack_driver="gelsd")
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > cond_cap:
        raise IllConditioned(f"least-squares condition {cond:.3g} exceeds {cond_cap:.3g}", condition=cond)
    coef = coef / norms
    poly = coef[:degree + 1]
    poles, k0 = [], degree + 1
    for a, r in zip(anchors, radii):
        poles.append((a, r, coef[k0:k0 + K]))
        k0 += K
    fn = RationalFunction(poly, tuple(poles), center, scale)
    res = float(np.max(np.abs(fn(z) - f))) if len(z) else 0.0
    dres = 0.0
    if dvalues is not None:
        dres = float(np.max(np.abs(fn.derivative(z) * t - np.asarray(dvalues, complex).ravel())))
    return Approximation(fn, res, dres, cond)


# ---------------------------------------------------------------------------
# sprays


@dataclass(frozen=True)
class Spray:
    xi: tuple
    period_matrix: np.ndarray
    raw_matrix: np.ndarray
    condition: float
    members: tuple = field(default=(), repr=False)

    def __post_init__(self):
        # sprays built from simple poles only are evaluated as one matrix product
        fast = None
        if self.xi and all(isinstance(x, RationalFunction) and not np.any(x.poly) and not x._higher
                           for x in self.xi):
            poles = sorted({a for x in self.xi for a in x._simple_a}, key=lambda a: (a.real, a.imag))
            pos = {a: k for k, a in enumerate(poles)}
            C = np.zeros((len(poles), len(self.xi)), complex)
            for j, x in enumerate(self.xi):
                for a, c in zip(x._simple_a, x._simple_c):
                    C[pos[a], j] += c
            fast = (np.array(poles, complex), C)
        object.__setattr__(self, "_fast", fast)

    @property
    def size(self) -> int:
        return len(self.xi)

    def y_dy(self, z, t):
        """``(y, ∂y/∂z)`` in one pass."""
        z = np.asarray(z, complex)
        t = np.asarray(t, complex)
        if self._fast is None:
            return self.y(z, t), self.dy(z, t)
        poles, C = self._fast
        q = 1.0 / (z[..., None] - poles)
        F = q @ C
        dF = -(q * q) @ C
        if t.ndim == 1:
            return F @ t, dF @ t
        return np.einsum("...i,...i->...", F, t), np.einsum("...i,...i->...", dF, t)

    def y(self, z, t):
        """``Σ t_i ξ_i(z)``; linear in ``t``."""
        z = np.asarray(z, complex)
        t = np.asarray(t, complex)
        vals = np.stack([x(z) for x in self.xi], axis=-1) if self.xi else np.zeros(z.shape + (0,))
        return vals @ t if t.ndim == 1 else np.einsum("...i,...i->...", vals, t)

    def dy(self, z, t):
        z = np.asarray(z, complex)
        t = np.asarray(t, complex)
        vals = np.stack([x.derivative(z) for x in self.xi], axis=-1) if self.xi else np.zeros(z.shape + (0,))
        return vals @ t if t.ndim == 1 else np.einsum("...i,...i->...", vals, t)

    def functions(self, z):
        """Matrix ``[ξ_j(z_k)]``."""
        z = np.asarray(z, complex)
        return np.stack([x(z) for x in self.xi], axis=-1)


def _members(obj):
    if hasattr(obj, "cycles"):
        return list(obj.cycles)
    if hasattr(obj, "members"):
        return list(obj.members)
    return list(obj)


def _constrained_combination(members, anchors, vanish_at, tol, cond_cap, S=None, offset=0.1):
    """Minimum-norm combination of Cauchy kernels with prescribed periods and zeros.

    Kernels sit at the hole anchors and along the convex hull of the data
    pushed outwards by ``offset`` times the extent; the rows are the member
    integrals followed by point evaluations at ``vanish_at``, and the
    right-hand sides are ``(e_j, 0)``.
    """
    m = len(members)
    parts = [c.dense() for c in members] + [np.array(vanish_at, complex)]
    if S is not None:
        parts.append(S.sample_points(128))
    pts = np.concatenate(parts)
    hull = MultiPoint(np.column_stack([pts.real, pts.imag])).convex_hull
    extent = float(np.max(np.abs(pts - np.mean(pts)))) or 1.0
    d = offset * 2 * extent
    ring_curve = hull.buffer(d).exterior
    n_ring = max(m + len(vanish_at) + 8, int(ring_curve.length / (0.5 * d)))
    ring = np.array([complex(*ring_curve.interpolate(u, normalized=True).coords[0])
                     for u in (np.arange(n_ring) + 0.5) / n_ring])
    poles = np.array(list(anchors) + list(ring), complex)

    def kernels(z):
        return 1.0 / (2j * math.pi * (np.asarray(z, complex)[..., None] - poles))

    rows = [np.asarray(contour_integral(kernels, c, tol=tol), complex) for c in members]
    if vanish_at:
        rows.extend(kernels(np.array(vanish_at)))
    C = np.array(rows)
    norms = np.linalg.norm(C, axis=0)
    norms[norms == 0] = 1.0
    Cn = C / norms
    sv = np.linalg.svd(Cn, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularPeriodMatrix(f"constraint matrix condition {cond:.3g} exceeds {cond_cap:.3g}",
                                   condition=cond)
    rhs = np.zeros((C.shape[0], m), complex)
    rhs[:m] = np.eye(m)
    M = np.linalg.pinv(Cn) @ rhs / norms[:, None]
    return [cauchy_kernel(a) for a in poles], C[:m], M, cond


def build_spray(basis, anchors=None, S=None, K: int = DEFAULT_POLE_ORDER, cond_cap: float = PERIOD_COND_CAP,
                tol: float = 1e-14, vanish_at=()) -> Spray:
    """Functions ``ξ_j`` with ``∫_{C_i} ξ_j dz = δ_ij`` over the members of ``basis``.

    Closed members are separated by Cauchy kernels at the ``anchors`` (one
    per bounded complementary component); open members add polynomial
    candidates, whose integrals are terminal values.
    """
    members = _members(basis)
    m = len(members)
    if m == 0:
        return Spray((), np.zeros((0, 0)), np.zeros((0, 0)), 1.0, ())
    if anchors is None:
        if S is None:
            raise MissingAnchor("anchors are required when no admissible set is given")
        anchors = bounded_complement_anchors(S)
    anchors = [complex(a) for a in anchors]
    n_closed = sum(1 for c in members if c.closed)
    if len(anchors) < n_closed:
        raise MissingAnchor(f"{n_closed} closed members need as many anchors, got {len(anchors)}",
                            needed=n_closed, given=len(anchors))
    vanish_at = tuple(complex(a) for a in vanish_at)
    if n_closed == m and not vanish_at:
        candidates = [cauchy_kernel(a) for a in anchors[:m]]
        R = np.array([[contour_integral(phi, c, poles=phi.anchors, tol=tol) for phi in candidates]
                      for c in members])
        cond = float(np.linalg.cond(R))
        if not np.isfinite(cond) or cond > cond_cap:
            raise SingularPeriodMatrix(f"raw period matrix condition {cond:.3g} exceeds {cond_cap:.3g}",
                                       condition=cond)
        M = np.linalg.inv(R)
    else:
        candidates, R, M, cond = _constrained_combination(members, anchors, vanish_at, tol, cond_cap, S)
    xi = []
    for j in range(m):
        acc = None
        for k, phi in enumerate(candidates):
            if M[k, j] == 0:
                continue
            term = phi * M[k, j]
            acc = term if acc is None else acc + term
        xi.append(acc)
    # re-measure: all ξ_j at once through the candidate values
    poles = [a for phi in candidates for a in phi.anchors]

    def stacked(z):
        z = np.asarray(z, complex)
        vals = np.stack([phi(z) for phi in candidates], axis=-1) if n_closed == m and not vanish_at \
            else 1.0 / (2j * math.pi * (z[..., None] - np.asarray(poles)))
        return vals @ M

    P = np.array([contour_integral(stacked, c, poles=poles, tol=tol) for c in members])
    return Spray(tuple(xi), P, R, cond, tuple(members))
