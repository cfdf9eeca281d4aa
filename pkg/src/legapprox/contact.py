"""Contact forms on the trivial tube ``S x rho B^{2n}``.

A form is ``a_z dz + a_w dw + a_y dy + Σ a_j dzeta_j`` with sympy
coefficients in ``z, zbar`` (base) and ``w, y, zeta3, ...`` (fiber).  The
fiber dependence must be holomorphic; base dependence may be smooth.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy import linalg

from . import expressions as ex
from .errors import (
    ApproximationFailure,
    CommonZero,
    ExpressionError,
    HolonomyMismatch,
    MissingTangents,
    NotContact,
    NotHolomorphic,
    NotLegendrianAxis,
    RankDrop,
)

CONTACT_THRESHOLD = 1e-6
DEFAULT_SMOOTHNESS = 10


def coefficient_names(n: int) -> list:
    return ["dz", "dw", "dy"] + [f"dzeta{k}" for k in range(3, 2 * n + 1)]


def _lambdify(expr, args):
    f = sp.lambdify(args, expr, modules="numpy", cse=True)
    if not isinstance(expr, sp.MatrixBase) and not (expr.free_symbols & set(args)):
        c = complex(expr)
        return lambda *a: np.full(np.broadcast(*a).shape, c, dtype=complex)
    return f


class ContactForm:
    """A 1-form on the tube with fiberwise holomorphic coefficients."""

    def __init__(self, n: int, coeffs: dict, rho: float = 1.0, smoothness_class: int | None = DEFAULT_SMOOTHNESS,
                 name: str = ""):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.n = n
        self.rho = float(rho)
        self.smoothness_class = smoothness_class
        self.name = name
        self.names = coefficient_names(n)
        self.fiber = ex.fiber_symbols(n)
        self.coords = [ex.z] + self.fiber
        self.args = [ex.z, ex.zbar] + self.fiber
        unknown = set(coeffs) - set(self.names)
        if unknown:
            raise ExpressionError(f"unknown differentials {sorted(unknown)}")
        exprs = []
        for nm in self.names:
            e = coeffs.get(nm, 0)
            e = ex.parse(e, n) if isinstance(e, str) else sp.sympify(e)
            exprs.append(e)
        allowed = set(self.args)
        bad_fiber = {ex.bar(s) for s in self.fiber}
        for nm, e in zip(self.names, exprs):
            free = e.free_symbols
            if free & bad_fiber:
                raise NotHolomorphic(f"coefficient of {nm} depends on conjugated fiber variables")
            if free - allowed:
                raise ExpressionError(f"coefficient of {nm} uses unknown symbols {sorted(map(str, free - allowed))}")
        self.exprs = exprs
        self._fns = [_lambdify(e, self.args) for e in exprs]
        self._dfns = {}

    # -- construction helpers
    @classmethod
    def from_json(cls, data) -> "ContactForm":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        return cls(int(data["n"]), dict(data.get("coeffs", {})), float(data.get("rho", 1.0)),
                   data.get("smoothness", DEFAULT_SMOOTHNESS), data.get("name", ""))

    def to_json(self) -> dict:
        return {"n": self.n, "rho": self.rho, "smoothness": self.smoothness_class,
                "coeffs": {nm: ex.to_text(e) for nm, e in zip(self.names, self.exprs) if e != 0}}

    def with_coeffs(self, exprs, smoothness_class=None, name=None) -> "ContactForm":
        return ContactForm(self.n, dict(zip(self.names, exprs)), self.rho,
                           self.smoothness_class if smoothness_class is None else smoothness_class,
                           self.name if name is None else name)

    def __repr__(self):
        terms = " + ".join(f"({e})*{nm}" for nm, e in zip(self.names, self.exprs) if e != 0)
        return f"ContactForm(n={self.n}, {terms or '0'})"

    # -- evaluation
    def _split(self, z, zeta):
        z = np.asarray(z, complex)
        zeta = np.asarray(zeta, complex)
        if zeta.shape[-1] != 2 * self.n:
            raise ValueError(f"fiber points need {2 * self.n} components")
        z, _ = np.broadcast_arrays(z, zeta[..., 0])
        cols = [zeta[..., k] for k in range(2 * self.n)]
        cols = [np.broadcast_to(c, z.shape) for c in cols]
        return [z, np.conj(z)] + cols

    def coefficient(self, k, z, zeta):
        k = self.names.index(k) if isinstance(k, str) else k
        return np.asarray(self._fns[k](*self._split(z, zeta)), complex)

    def evaluate(self, z, zeta) -> np.ndarray:
        """Coefficients ``(a_z, a_w, a_y, a_zeta3, ...)`` stacked on the last axis."""
        args = self._split(z, zeta)
        return np.stack([np.broadcast_to(np.asarray(f(*args), complex), args[0].shape) for f in self._fns],
                        axis=-1)

    def partial(self, k: int, i: int):
        """Callable for the holomorphic partial of coefficient ``k`` in coordinate ``i`` (0 is ``z``)."""
        key = (k, i)
        if key not in self._dfns:
            self._dfns[key] = _lambdify(sp.diff(self.exprs[k], self.coords[i]), self.args)
        return self._dfns[key]

    def pair(self, z, zeta, dz, dzeta):
        """``β_{(z, zeta)}(dz, dzeta)``."""
        c = self.evaluate(z, zeta)
        v = np.concatenate([np.asarray(dz, complex)[..., None], np.asarray(dzeta, complex)], axis=-1)
        return np.sum(c * v, axis=-1)

    def restrict_axis(self):
        """Coefficient expressions at ``zeta = 0``."""
        zero = {s: 0 for s in self.fiber}
        return [e.xreplace(zero) for e in self.exprs]

    def cr_residual(self, z, zeta, step: float = 1e-5) -> float:
        """Largest fiberwise ``|∂a/∂conj(zeta_j)|`` estimated by central differences."""
        zeta = np.asarray(zeta, complex)
        worst = 0.0
        for j in range(2 * self.n):
            e = np.zeros(2 * self.n)
            e[j] = step
            dx = (self.evaluate(z, zeta + e) - self.evaluate(z, zeta - e)) / (2 * step)
            dy = (self.evaluate(z, zeta + 1j * e) - self.evaluate(z, zeta - 1j * e)) / (2 * step)
            worst = max(worst, float(np.max(np.abs(0.5 * (dx + 1j * dy)))))
        return worst


def standard_contact(n: int) -> ContactForm:
    """``dw - y dz - Σ_{i>=2} y_i dx_i`` with ``x_i = zeta_{2i-1}``, ``y_i = zeta_{2i}``."""
    coeffs = {"dw": "1", "dz": "-y"}
    for i in range(2, n + 1):
        coeffs[f"dzeta{2 * i - 1}"] = f"-zeta{2 * i}"
    return ContactForm(n, coeffs, name=f"standard(n={n})")


# ---------------------------------------------------------------------------
# the contact condition


def pfaffian(M: np.ndarray) -> np.ndarray:
    """Pfaffian of antisymmetric matrices stacked on the leading axes (even size)."""
    m = M.shape[-1]
    if m == 0:
        return np.ones(M.shape[:-2], complex)
    if m % 2:
        return np.zeros(M.shape[:-2], complex)
    total = np.zeros(M.shape[:-2], complex)
    for j in range(1, m):
        keep = [k for k in range(m) if k not in (0, j)]
        sub = M[..., keep, :][..., :, keep]
        total = total + (-1) ** (j - 1) * M[..., 0, j] * pfaffian(sub)
    return total


def contact_coefficient(beta: ContactForm, z, zeta) -> np.ndarray:
    """Coefficient of ``β ∧ (dβ)^n / n!`` against ``dz ∧ dw ∧ dy ∧ dzeta_3 ∧ ...``."""
    args = beta._split(z, zeta)
    shape = args[0].shape
    m = 2 * beta.n + 1
    a = beta.evaluate(z, zeta)
    D = np.zeros(shape + (m, m), complex)
    for i in range(m):
        for j in range(m):
            D[..., i, j] = np.broadcast_to(beta.partial(j, i)(*args), shape)
    omega = D - np.swapaxes(D, -1, -2)
    total = np.zeros(shape, complex)
    for k in range(m):
        keep = [i for i in range(m) if i != k]
        sub = omega[..., keep, :][..., :, keep]
        total = total + (-1) ** k * a[..., k] * pfaffian(sub)
    return total


def fiber_grid(n: int, radius: float, count: int = 64, seed: int = 0) -> np.ndarray:
    """Fiber sample points: the origin, ``±r`` and ``±r/2`` along each real and imaginary axis, and random ball points."""
    pts = [np.zeros(2 * n, complex)]
    for k in range(2 * n):
        for s in (1, -1, 1j, -1j, 0.5, -0.5, 0.5j, -0.5j):
            e = np.zeros(2 * n, complex)
            e[k] = s * radius
            pts.append(e)
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, 4 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / (4 * n))
    g *= r
    pts.extend(g[:, :2 * n] + 1j * g[:, 2 * n:])
    return np.array(pts)


def contact_check(beta: ContactForm, points=None, zeta=None, S=None, threshold: float = CONTACT_THRESHOLD,
                  fiber_fraction: float = 0.5, raise_on_fail: bool = True) -> float:
    """Minimum modulus of the contact coefficient on a base-by-fiber grid."""
    if points is None:
        points = S.sample_points(64, interior=32) if S is not None else np.array([0j])
    points = np.asarray(points, complex).ravel()
    if zeta is None:
        zeta = fiber_grid(beta.n, fiber_fraction * beta.rho, count=24)
    zeta = np.asarray(zeta, complex).reshape(-1, 2 * beta.n)
    Z = np.repeat(points, len(zeta))
    F = np.tile(zeta, (len(points), 1))
    c = np.abs(contact_coefficient(beta, Z, F))
    k = int(np.argmin(c))
    val = float(c[k])
    if raise_on_fail and not val > threshold:
        raise NotContact(f"contact coefficient {val:.3g} at z={Z[k]:.4g}", min_modulus=val, z=complex(Z[k]),
                         zeta=F[k].tolist())
    return val


# ---------------------------------------------------------------------------
# isotropy


@dataclass
class FiberCurve:
    """A curve in the tube: base points with tangents and fiber values (optionally their derivatives)."""

    s: np.ndarray
    z: np.ndarray
    dz: np.ndarray | None
    zeta: np.ndarray
    dzeta: np.ndarray | None = None


def _fiber_curve(f, n):
    if isinstance(f, FiberCurve):
        return f
    z = np.asarray(f.z, complex)
    dz = getattr(f, "dz", None)
    zeta = getattr(f, "zeta", None)
    if zeta is None:
        w = np.asarray(f.w, complex)
        yv = np.zeros_like(w) if f.y is None else np.asarray(f.y, complex)
        zeta = np.zeros((len(z), 2 * n), complex)
        zeta[:, 0], zeta[:, 1] = w, yv
    return FiberCurve(np.asarray(f.s, float), z, dz, zeta, getattr(f, "dzeta", None))


def isotropy_residual(f, beta: ContactForm) -> float:
    """Largest ``|β(df · ṗ)| / |ṗ|`` over the samples of ``f``.

    Missing fiber derivatives are obtained from cubic splines in the curve
    parameter; base tangents must be supplied.
    """
    fc = _fiber_curve(f, beta.n)
    if fc.dz is None:
        raise MissingTangents("base tangents are required")
    dz = np.asarray(fc.dz, complex)
    dzeta = fc.dzeta
    if dzeta is None:
        from scipy.interpolate import CubicSpline

        if len(fc.s) < 4:
            raise MissingTangents("need fiber derivatives or at least 4 samples")
        dzeta = CubicSpline(fc.s, fc.zeta, axis=0)(fc.s, 1)
    val = beta.pair(fc.z, fc.zeta, dz, dzeta)
    return float(np.max(np.abs(val) / np.abs(dz)))


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class FrameCompletion:
    B: np.ndarray
    inverse: np.ndarray
    lipschitz: float
    holonomy: float = 0.0
    repair_bound: float = 0.0
    identity_residual: float = 0.0


def _polar(M):
    U, _, Vh = np.linalg.svd(M, full_matrices=False)
    return U @ Vh


def matrix_completion(A, points=None, closed: bool = False, floor: float = 1e-8, holonomy_tol: float = 1e-8,
                      strict: bool = False) -> FrameCompletion:
    """Invertible ``B(p_k)`` with ``A(p_k) B(p_k) = (I_m, 0)`` along an ordered traversal.

    The first ``m`` columns are ``A^H (A A^H)^{-1}``; the kernel columns are an
    orthonormal frame carried from sample to sample by projection and polar
    re-orthonormalization.  On closed traversals the frame's holonomy is
    undone by a linear twist ``exp(-s L)``; ``strict`` turns a mismatch into
    an error instead.
    """
    A = np.asarray(A, complex)
    if A.ndim == 2:
        A = A[None]
    N, m, p = A.shape
    sv = np.linalg.svd(A, compute_uv=False)
    smin = sv[:, -1]
    if np.min(smin) < floor:
        k = int(np.argmin(smin))
        raise RankDrop(f"smallest singular value {smin[k]:.3g} at sample {k}", sample=k, sigma=float(smin[k]))
    AH = np.conj(np.swapaxes(A, -1, -2))
    P = AH @ np.linalg.inv(A @ AH)
    K = np.empty((N, p, p - m), complex)
    if p > m:
        K[0] = linalg.null_space(A[0])
        for k in range(1, N):
            proj = np.eye(p) - P[k] @ A[k]
            K[k] = _polar(proj @ K[k - 1])
    holonomy = repair = 0.0
    if closed and p > m and N > 1:
        U = np.conj(K[0]).T @ K[-1]
        holonomy = float(np.linalg.norm(U - np.eye(p - m), 2))
        if holonomy > holonomy_tol:
            if strict:
                raise HolonomyMismatch(f"frame holonomy {holonomy:.3g}", holonomy=holonomy)
            L = linalg.logm(U)
            repair = float(np.linalg.norm(L, 2))
            if points is not None:
                pts = np.asarray(points, complex)
                seg = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
                frac = seg / seg[-1] if seg[-1] > 0 else np.linspace(0, 1, N)
            else:
                frac = np.linspace(0.0, 1.0, N)
            for k in range(N):
                K[k] = K[k] @ linalg.expm(-frac[k] * L)
    B = np.concatenate([P, K], axis=-1)
    inv = np.linalg.inv(B)
    lip = 0.0
    if points is not None and N > 1:
        pts = np.asarray(points, complex)
        d = np.abs(np.diff(pts))
        ok = d > 0
        jumps = np.linalg.norm(np.diff(B, axis=0), axis=(1, 2))
        lip = float(np.max(jumps[ok] / d[ok])) if ok.any() else 0.0
    target = np.zeros((m, p))
    target[:, :m] = np.eye(m)
    resid = float(np.max(np.abs(A @ B - target)))
    return FrameCompletion(B, inv, lip, holonomy, repair, resid)


# ---------------------------------------------------------------------------
# Arens identity


@dataclass
class ArensResult:
    g: list
    residual: float
    h_min: float = 1.0
    exact: bool = False
    approximations: list = field(default_factory=list)


def arens_identity(fs, points, anchors=(), floor: float = 1e-8, exact_first: bool = True, degree: int = 24,
                   K: int = 12, h_floor: float = 1e-3) -> ArensResult:
    """Holomorphic ``G_i`` with ``Σ f_i G_i = 1`` on the sample points.

    Constant solutions are tried first by least squares.  Otherwise the smooth
    solution ``conj(f_i) / Σ|f_j|^2`` is approximated holomorphically and
    normalized by ``h = Σ f_j g_j``.
    """
    from .runge import holomorphic_approximate

    pts = np.asarray(points, complex).ravel()
    F = np.stack([np.broadcast_to(np.asarray(f(pts), complex), pts.shape) for f in fs], axis=-1)
    q = np.sum(np.abs(F) ** 2, axis=-1)
    if np.min(q) < floor:
        k = int(np.argmin(q))
        raise CommonZero(f"functions nearly vanish together at {pts[k]:.4g}", z=complex(pts[k]), value=float(q[k]))
    if exact_first:
        c, *_ = np.linalg.lstsq(F, np.ones(len(pts), complex), rcond=None)
        res = float(np.max(np.abs(F @ c - 1)))
        if res <= 1e-12:
            g = [(lambda z, v=v: np.full(np.shape(z), v, complex)) for v in c]
            return ArensResult(g, res, 1.0, True)
    gbar = np.conj(F) / q[:, None]
    approx = [holomorphic_approximate(pts, gbar[:, i], anchors=anchors, degree=degree, K=K)
              for i in range(len(fs))]
    gt = np.stack([a.function(pts) for a in approx], axis=-1)
    h = np.sum(F * gt, axis=-1)
    hmin = float(np.min(np.abs(h)))
    if hmin < h_floor:
        raise ApproximationFailure(f"normalizer |h| drops to {hmin:.3g}", h_min=hmin)
    funcs = [a.function for a in approx]

    def make(i):
        def G(z):
            z = np.asarray(z, complex)
            hz = sum(np.asarray(f(z), complex) * fn(z) for f, fn in zip(fs, funcs))
            return funcs[i](z) / hz
        return G

    g = [make(i) for i in range(len(fs))]
    res = float(np.max(np.abs(sum(F[:, i] * g[i](pts) for i in range(len(fs))) - 1)))
    return ArensResult(g, res, hmin, False, approx)


# ---------------------------------------------------------------------------
# tube extension


@dataclass(frozen=True)
class TubeExtension:
    points: np.ndarray
    f: np.ndarray
    frame: np.ndarray
    radius: float
    min_singular: float

    def __call__(self, k, zeta):
        """``F(x_k, zeta) = f(x_k) + Φ(x_k) zeta``."""
        return self.f[k] + self.frame[k] @ np.asarray(zeta, complex)

    def jacobian(self, k, dfV):
        return np.column_stack([dfV, self.frame[k]])


def tube_extension(f, dfV, points=None, closed: bool = False, floor: float = 1e-8) -> TubeExtension:
    """Fiberwise-linear extension ``F(x, zeta) = f(x) + Φ(x) zeta`` with ``Φ`` complementary to ``df(V)``."""
    f = np.asarray(f, complex)
    d = np.asarray(dfV, complex)
    if np.min(np.linalg.norm(d, axis=-1)) < floor:
        raise RankDrop("df(V) vanishes somewhere: not an immersion")
    frame = matrix_completion(np.conj(d)[:, None, :], points=points, closed=closed, floor=floor)
    Phi = frame.B[:, :, 1:]
    J = np.concatenate([d[:, :, None], Phi], axis=-1)
    smin = float(np.min(np.linalg.svd(J, compute_uv=False)[:, -1]))
    if smin < floor:
        raise RankDrop(f"extension Jacobian is singular (sigma={smin:.3g})", sigma=smin)
    lip = frame.lipschitz
    radius = math.inf if lip == 0 else 0.5 * smin / lip
    return TubeExtension(np.asarray(points) if points is not None else None, f, Phi, radius, smin)


# ---------------------------------------------------------------------------
# normal form


@dataclass
class NormalFormResult:
    h: sp.Expr
    change: sp.Matrix
    reduced: ContactForm
    residual_terms: dict
    frame_vector: np.ndarray
    axis_residual: float = 0.0
    b_min: float = 0.0

    def change_at(self, z):
        """Sampled ``B(p)`` (fiber-linear change ``zeta = B(p) zeta''``)."""
        f = _lambdify(self.change, [ex.z, ex.zbar])
        z = np.atleast_1d(np.asarray(z, complex))
        return np.stack([np.asarray(f(v, np.conj(v)), complex) for v in z])

    def h_at(self, z, zeta):
        f = _lambdify(self.h, self.reduced.args)
        return np.asarray(f(*self.reduced._split(z, zeta)), complex)


def _transversal_frame(a, samples, candidates=None, normalize=True):
    """Holomorphic ``B`` with ``a · B = (1, 0, ..., 0)`` built from a constant vector ``u``.

    ``u`` maximizes ``min |a(p) · u|`` over the samples among a few candidates.
    With ``normalize=False`` the first column is ``u`` itself and
    ``a · B = (a · u, 0, ..., 0)``.
    """
    m = len(a)
    fa = _lambdify(sp.Matrix([a]), [ex.z, ex.zbar])
    vals = np.stack([np.asarray(fa(v, np.conj(v)), complex).reshape(-1) for v in samples])
    cands = [np.eye(m)[k] for k in range(m)]
    mean = np.mean(vals, axis=0)
    if np.linalg.norm(mean) > 0:
        cands.append(np.conj(mean) / np.linalg.norm(mean))
    if candidates is not None:
        cands.extend(candidates)
    best, u = -1.0, None
    for k, c in enumerate(cands):
        score = float(np.min(np.abs(vals @ c)))
        # coordinate vectors keep the expressions small; others must win clearly
        if score > (best if k < m else 2.0 * best) + 1e-12:
            best, u = score, c
    if best <= 0:
        raise CommonZero("fiber coefficients vanish on the axis")
    # orthonormal complement of u, columns v_j
    V = linalg.null_space(np.conj(u)[None, :])
    u_s = sp.Matrix([_num(c) for c in u])
    au = sum(a[i] * u_s[i] for i in range(m))
    cols = [u_s / au if normalize else u_s]
    for j in range(V.shape[1]):
        v = sp.Matrix([_num(c) for c in V[:, j]])
        av = sum(a[i] * v[i] for i in range(m))
        cols.append(v - u_s * av / au)
    return sp.Matrix.hstack(*cols), best


def _num(c):
    c = complex(c)
    if abs(c.imag) < 1e-15:
        c = complex(c.real, 0.0)
    if abs(c.real) < 1e-15:
        c = complex(0.0, c.imag)
    if c.imag == 0:
        r = c.real
        return sp.Integer(int(r)) if r == int(r) else sp.Float(r)
    return sp.sympify(c)


def _pull_back(exprs, fiber, B, new_fiber):
    """Coefficients of ``β`` after ``zeta = B(z) zeta'`` (base ``z`` fixed)."""
    m = len(fiber)
    sub = {fiber[i]: sum(B[i, k] * new_fiber[k] for k in range(m)) for i in range(m)}
    a = [e.xreplace(sub) for e in exprs]
    az, af = a[0], a[1:]
    new_f = [sum(af[i] * B[i, k] for i in range(m)) for k in range(m)]
    dB = B.diff(ex.z)
    extra = sum(af[i] * sum(dB[i, k] * new_fiber[k] for k in range(m)) for i in range(m))
    return [az + extra] + new_f


def _taylor_terms(expr, fiber, order=2):
    """Taylor coefficients at the fiber origin up to ``order``, keyed by exponent tuples."""
    zero = {s: 0 for s in fiber}
    out = {}
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(len(fiber)), deg):
            d = expr
            for i in combo:
                d = sp.diff(d, fiber[i])
            c = d.xreplace(zero)
            powers = [combo.count(i) for i in range(len(fiber))]
            denom = math.prod(math.factorial(p) for p in powers)
            c = c / denom
            if c != 0:
                out[tuple(powers)] = c
    return out


def normal_form(beta: ContactForm, S=None, samples=None, axis_tol: float = 1e-9, b_floor: float = 1e-8
                ) -> NormalFormResult:
    """Two-step fiber-linear reduction to ``dw - y dz + (higher order)``.

    Step one moves the axis coefficients to ``dw``; step two divides by the
    ``dw`` coefficient ``h`` and rotates the fiber so that the linear part of
    the ``dz`` coefficient becomes ``-y``.
    """
    if samples is None:
        samples = S.sample_points(48, interior=16) if S is not None else np.array([0j, 0.5, 0.5j])
    samples = np.asarray(samples, complex).ravel()
    n, fiber = beta.n, beta.fiber
    m = 2 * n
    axis = beta.restrict_axis()
    fz = _lambdify(axis[0], [ex.z, ex.zbar])
    axis_res = float(np.max(np.abs(np.broadcast_to(fz(samples, np.conj(samples)), samples.shape))))
    if axis_res > axis_tol:
        raise NotLegendrianAxis(f"dz coefficient on the axis reaches {axis_res:.3g}", residual=axis_res)

    # step 1
    B1, _ = _transversal_frame(axis[1:], samples, normalize=False)
    primed = [sp.Symbol(f"_p{k}") for k in range(m)]
    c1 = _pull_back(beta.exprs, fiber, B1, primed)
    h = c1[1]
    scaled = [sp.together(e / h) if e != 0 else e for e in c1]
    # step 2: linear part of the dz coefficient
    zero = {s: 0 for s in primed}
    b = [sp.diff(scaled[0], primed[j]).xreplace(zero) for j in range(m)]
    bprime = [-bj for bj in b[1:]]
    C, bmin = _transversal_frame(bprime, samples)
    col0 = sp.Matrix([1] + [b[0] * C[i, 0] for i in range(m - 1)])
    rest = sp.Matrix.vstack(sp.zeros(1, m - 1), C)
    Bt = sp.Matrix.hstack(col0, rest)
    c2 = _pull_back(scaled, primed, Bt, fiber)
    reduced = beta.with_coeffs(c2, None if beta.smoothness_class is None else beta.smoothness_class - 2,
                               f"reduced({beta.name})")
    h_new = h.xreplace({primed[i]: sum(Bt[i, k] * fiber[k] for k in range(m)) for i in range(m)})

    # remainder: β_red - (dw - y dz + linear zeta dzeta terms)
    terms = {}
    model = [-fiber[1], sp.Integer(1), sp.Integer(0)] + [0] * (m - 2)
    for k, nm in enumerate(reduced.names):
        tt = _taylor_terms(c2[k], fiber, order=2)
        base = _taylor_terms(sp.sympify(model[k]), fiber, order=2)
        diff = {}
        for key in set(tt) | set(base):
            v = sp.cancel(sp.sympify(tt.get(key, 0) - base.get(key, 0)))
            if v.is_number and abs(complex(v)) < 1e-13:
                v = sp.Integer(0)
            if nm.startswith("dzeta") and sum(key) == 1 and all(key[i] == 0 for i in (0, 1)):
                continue  # c_{jk} zeta_k dzeta_j belongs to the model
            if v != 0:
                diff[key] = v
        if diff:
            terms[nm] = diff
    return NormalFormResult(h_new, B1 * Bt, reduced, terms, np.array([0]), axis_res, bmin)


def residual_classes(result: NormalFormResult) -> dict:
    """Group remainder monomials into the classes ``y dzeta_j``, ``zeta_j dy``, ``O(|zeta|) dw``, ``O(|zeta|^2) dz``."""
    out = {"y dzeta": [], "zeta dy": [], "O(zeta) dw": [], "O(zeta^2) dz": [], "other": []}
    for nm, terms in result.residual_terms.items():
        for key in terms:
            deg = sum(key)
            if nm == "dw" and deg >= 1:
                out["O(zeta) dw"].append(key)
            elif nm == "dz" and deg >= 2:
                out["O(zeta^2) dz"].append(key)
            elif nm == "dy" and deg >= 1:
                out["zeta dy"].append(key)
            elif nm.startswith("dzeta") and deg >= 1 and key[1] >= 1:
                out["y dzeta"].append(key)
            else:
                out["other"].append((nm, key))
    return out
