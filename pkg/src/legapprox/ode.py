"""The reduced Legendrian equation ``dw = V(p, w, t) dz``: integration, periods and bounds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CommutativityFailure, Escape, LegApproxError, StepUnderflow
from .geometry import CurveSamples, PiecewiseCurve, sample_curve

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

DEFAULT_TOL = 1e-12


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    error: float = 0.0


def dopri_solve(F: Callable, w0, s_out, breaks=(), tol: float = DEFAULT_TOL, radius: float = math.inf,
                h0: float | None = None, min_step: float = 1e-14, stats: StepStats | None = None):
    """Integrate ``dw/ds = F(s, w)`` for a batch of complex states from ``s_out[0]`` to ``s_out[-1]``.

    Steps land exactly on every output parameter and every break (where the
    right-hand side may be discontinuous).  The accepted step error is kept
    below ``tol * h * max(1, |w|)``.  Returns the states at ``s_out`` with
    shape ``(len(s_out),) + w0.shape`` and the accumulated error estimate.
    """
    w = np.array(w0, dtype=complex, copy=True)
    s_out = np.asarray(s_out, float)
    stops = np.unique(np.concatenate([s_out, [b for b in breaks if s_out[0] < b < s_out[-1]]]))
    record = np.searchsorted(stops, s_out)
    out = np.empty((len(s_out),) + w.shape, complex)
    out[0] = w
    span = s_out[-1] - s_out[0]
    h = h0 if h0 else max(span / 64, 1e-6 * span) if span > 0 else 0.0
    stats = stats or StepStats()
    s = stops[0]
    k_idx = 1
    if len(stops) == 1:
        return out, 0.0
    k1 = F(s, w)
    while k_idx < len(stops):
        target = stops[k_idx]
        step = min(h, target - s)
        last = step >= target - s - 1e-15 * max(1.0, abs(target))
        if last:
            step = target - s
        ks = [k1]
        for i in range(1, 7):
            acc = w.copy()
            for j, a in enumerate(_A[i]):
                if a:
                    acc = acc + step * a * ks[j]
            si = s + _C[i] * step
            if _C[i] == 1.0:
                # left limit: the end of a step may sit on a break of the curve
                si = np.nextafter(s + step, s)
            ks.append(F(si, acc))
        w5 = w + step * sum(b * k for b, k in zip(_B5, ks) if b)
        err_vec = step * sum(e * k for e, k in zip(_E, ks) if e)
        err = float(np.max(np.abs(err_vec))) if err_vec.size else 0.0
        scale = max(1.0, float(np.max(np.abs(w5)))) if w5.size else 1.0
        budget = tol * step * scale
        if not np.all(np.isfinite(w5)):
            err = math.inf
        if err <= budget:
            s = target if last else s + step
            w = w5
            k1 = ks[6]
            stats.accepted += 1
            stats.error += err
            if w.size and np.max(np.abs(w)) > radius:
                raise Escape(f"solution left the disc of radius {radius:g} at s={s:.6g}", s=float(s),
                             value=complex(w.ravel()[np.argmax(np.abs(w.ravel()))]))
            if last:
                hit = np.flatnonzero(record == k_idx)
                for m in hit:
                    out[m] = w
                k_idx += 1
                if k_idx < len(stops) and stops[k_idx - 1] in breaks:
                    k1 = F(s, w)
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (budget / err) ** 0.25))
            if not last or fac < 1:
                h = step * fac
            else:
                h = max(h, step * fac)
        else:
            stats.rejected += 1
            fac = 0.2 if not math.isfinite(err) else max(0.1, 0.9 * (budget / err) ** 0.25)
            h = step * fac
            if h < min_step * max(1.0, span):
                raise StepUnderflow(f"step size underflow at s={s:.6g}", s=float(s))
    return out, stats.error


# ---------------------------------------------------------------------------
# the reduced equation


@dataclass
class LegendrianODE:
    """``dw = V(z, w, t) dz``; ``V`` is vectorized over ``z`` and ``w`` with ``t`` of shape ``(..., l)``."""

    V: Callable
    w_radius: float = math.inf
    t_radius: float = math.inf
    lipschitz_c: float | None = None
    y: Callable | None = None
    name: str = ""

    def __call__(self, z, w, t):
        return self.V(z, w, t)

    def estimate_lipschitz(self, z_samples, t=None, n_w: int = 9, safety: float = 1.5) -> float:
        """Largest sampled difference quotient in ``w`` (times ``safety``), stored on the instance."""
        r = self.w_radius if math.isfinite(self.w_radius) else 1.0
        g = np.linspace(-r, r, n_w)
        ws = (g[:, None] + 1j * g[None, :]).ravel()
        ws = ws[np.abs(ws) <= r]
        z = np.asarray(z_samples, complex).ravel()
        t = np.zeros(0) if t is None else np.asarray(t, complex)
        best = 0.0
        dw = 1e-3 * r
        for wv in ws:
            zz = z
            a = self.V(zz, np.full(z.shape, wv), t)
            b = self.V(zz, np.full(z.shape, wv + dw), t)
            best = max(best, float(np.max(np.abs(np.asarray(b) - np.asarray(a)))) / dw)
        self.lipschitz_c = safety * best
        return self.lipschitz_c


def _curve_of(curve):
    if isinstance(curve, CurveSamples):
        return curve.source, curve.params, curve
    return curve, None, None


@dataclass
class LegendrianSample:
    s: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    w: np.ndarray
    t: np.ndarray
    y: np.ndarray | None = None
    error: float = 0.0
    tol: float = DEFAULT_TOL
    steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def terminal(self):
        return self.w[-1]

    def discrete_residual(self, ode: LegendrianODE) -> float:
        """Largest ``|Δw - ½(V_k + V_{k+1}) Δz|`` over consecutive samples."""
        V = ode.V(self.z, self.w, self.t)
        dz = np.diff(self.z)
        return float(np.max(np.abs(np.diff(self.w) - 0.5 * (V[1:] + V[:-1]) * dz))) if len(dz) else 0.0

    def to_csv(self, path, extra_header: dict | None = None):
        with open(path, "w", newline="") as fh:
            t = np.atleast_1d(self.t)
            head = {"t": " ".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in t), "tol": self.tol}
            head.update(extra_header or {})
            fh.write("# " + ", ".join(f"{k}={v}" for k, v in head.items()) + "\n")
            wr = csv.writer(fh)
            cols = ["s", "re_z", "im_z", "re_w", "im_w"]
            if self.y is not None:
                cols += ["re_y", "im_y"]
            wr.writerow(cols)
            for k in range(len(self.s)):
                row = [self.s[k], self.z[k].real, self.z[k].imag, self.w[k].real, self.w[k].imag]
                if self.y is not None:
                    row += [self.y[k].real, self.y[k].imag]
                wr.writerow([f"{v:.17g}" for v in row])


def _rhs(ode, curve, t):
    t = np.asarray(t, complex)

    def F(s, w):
        z, dz = curve.point_and_tangent(s)
        return ode.V(np.full(np.shape(w), z), w, t) * dz

    return F


def _rhs_batch(ode, curve, t):
    """Batched over leading axis of ``w`` and ``t`` (shape ``(B,)`` and ``(B, l)``)."""
    t = np.asarray(t, complex)

    def F(s, w):
        z, dz = curve.point_and_tangent(s)
        return ode.V(np.full(w.shape, z), w, t) * dz

    return F


def integrate_along_curve(ode: LegendrianODE, curve, w0=0j, t=(), tol: float = DEFAULT_TOL,
                          n_out: int | None = None, s_out=None) -> LegendrianSample:
    """Solve ``d/ds w = V(h(s), w, t) h'(s)`` along a curve from ``w(0) = w0``.

    ``curve`` is a :class:`PiecewiseCurve` or :class:`CurveSamples`; outputs are
    recorded at the sample parameters (or ``n_out`` uniform ones).
    """
    src, params, _ = _curve_of(curve)
    if src is None:
        raise LegApproxError("integration needs curve samples with a source curve")
    if s_out is not None:
        params = np.asarray(s_out, float)
    if params is None:
        params = np.linspace(0.0, 1.0, (n_out or 64) + 1)
    stats = StepStats()
    F = _rhs(ode, src, t)
    out, err = dopri_solve(F, np.asarray(w0, complex), params, breaks=tuple(src.breaks[1:-1]), tol=tol,
                           radius=ode.w_radius, stats=stats)
    z = src(params)
    y = ode.y(z, np.asarray(t, complex)) if ode.y is not None else None
    return LegendrianSample(np.asarray(params), z, src.derivative(params), out, np.asarray(t, complex), y, err,
                            tol, stats.accepted)


def integrate_batch(ode: LegendrianODE, curve: PiecewiseCurve, w0, t, tol: float = DEFAULT_TOL):
    """Terminal values ``w(1)`` for a batch: ``w0`` shape ``(B,)``, ``t`` shape ``(B, l)``."""
    w0 = np.asarray(w0, complex)
    stats = StepStats()
    out, err = dopri_solve(_rhs_batch(ode, curve, t), w0, np.array([0.0, 1.0]),
                           breaks=tuple(curve.breaks[1:-1]), tol=tol, radius=ode.w_radius, stats=stats)
    return out[-1], err


def integrate_over_domain(ode: LegendrianODE, corner: complex, width: float, height: float, w0=0j, t=(),
                          nx: int = 8, ny: int = 8, tol: float = DEFAULT_TOL, comm_tol: float | None = None):
    """Solution on a rectangle grid built from the two real flows ``∂w/∂x = V`` and ``∂w/∂y = iV``.

    Returns ``(grid_z, w_xy, w_yx)``: the grid and the solutions from the
    x-then-y and y-then-x orders.  Raises :class:`CommutativityFailure` when
    they disagree by more than ``comm_tol``.
    """
    t = np.asarray(t, complex)
    xs = corner.real + np.linspace(0.0, width, nx + 1)
    ys = corner.imag + np.linspace(0.0, height, ny + 1)
    Z = xs[None, :] + 1j * ys[:, None]
    ux = np.linspace(0.0, 1.0, nx + 1)
    uy = np.linspace(0.0, 1.0, ny + 1)

    def flow(base, direction, length, w_start, u_out):
        # base: (B,) start points; integrate along base + s*length*direction
        def F(s, w):
            return ode.V(base + s * length * direction, w, t) * (length * direction)

        out, _ = dopri_solve(F, w_start, u_out, tol=tol, radius=ode.w_radius)
        return out

    w0 = complex(w0)
    # x first along the bottom edge, then each column upwards
    bottom = flow(np.array([corner]), 1.0, width, np.array([w0]), ux)[:, 0]
    w_xy = flow(Z[0, :], 1j, height, bottom, uy)
    # y first along the left edge, then each row rightwards
    left = flow(np.array([corner]), 1j, height, np.array([w0]), uy)[:, 0]
    w_yx = flow(Z[:, 0], 1.0, width, left, ux).T
    diff = float(np.max(np.abs(w_xy - w_yx)))
    if comm_tol is None:
        comm_tol = 10 * tol * (width + height) * max(1.0, float(np.max(np.abs(w_xy))))
    if diff > comm_tol:
        raise CommutativityFailure(f"flow orders differ by {diff:.3g} (tolerance {comm_tol:.3g})",
                                   discrepancy=diff, tolerance=comm_tol)
    return Z, w_xy, w_yx


def period(ode: LegendrianODE, cycle, w0=0j, t=(), tol: float = DEFAULT_TOL) -> complex:
    """``w(1) - w(0)`` along a closed curve."""
    src = cycle.source if isinstance(cycle, CurveSamples) else cycle
    if not src.closed:
        raise LegApproxError("period needs a closed curve")
    out = integrate_along_curve(ode, src, w0, t, tol=tol, n_out=1)
    return complex(out.w[-1] - out.w[0])


@dataclass(frozen=True)
class PeriodVector:
    values: np.ndarray
    cycle_ids: tuple
    t: np.ndarray
    estimated_error: np.ndarray


def _members(family):
    if hasattr(family, "cycles"):
        return list(family.cycles)
    if hasattr(family, "members"):
        return list(family.members)
    return list(family)


def period_map(ode: LegendrianODE, family, t, w_init=None, tol: float = DEFAULT_TOL) -> PeriodVector:
    """Per-member periods ``w(1) - w(0)`` (terminal values for arcs) at one or many ``t``.

    ``t`` has shape ``(l,)`` or ``(B, l)``; values then have shape ``(l,)`` or ``(B, l)``.
    """
    members = _members(family)
    t = np.asarray(t, complex)
    single = t.ndim == 1
    T = t[None, :] if single else t
    B = T.shape[0]
    vals = np.zeros((B, len(members)), complex)
    errs = np.zeros(len(members))
    failures = []
    for k, c in enumerate(members):
        w0 = np.zeros(B, complex) if w_init is None else np.full(B, complex(w_init[k]))
        try:
            wT, e = integrate_batch(ode, c, w0, T, tol=tol)
        except LegApproxError as exc:
            exc.member = k
            failures.append(exc)
            continue
        vals[:, k] = wT - w0
        errs[k] = e
    if failures:
        first = failures[0]
        first.failed_members = [f.member for f in failures]
        raise first
    return PeriodVector(vals[0] if single else vals, tuple(range(len(members))), t, errs)


def gronwall_bound(c: float, c0: float, dw0: float, dist: float) -> float:
    """``c0 * |w0 - w1| * exp(c |z - z0|)``."""
    if min(c, dw0, dist) < 0 or c0 < 1:
        raise ValueError("need c, dw0, dist >= 0 and c0 >= 1")
    return c0 * dw0 * math.exp(c * dist)
