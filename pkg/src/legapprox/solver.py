"""Solving ``P(t) = 0`` on a polydisc for period maps close to the identity.

Degree one is certified by proximity: if ``‖P(t) - t‖∞ < δ`` on the whole
boundary of the polydisc then the straight homotopy from the identity never
hits zero there.  Between samples we guard with a Lipschitz estimate of
``P - id`` times the covering radius of the sample set.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import CertificateFailed, InsufficientSampling, NoConvergence

DELTA_START = 0.1
DELTA_FLOOR = 1e-4
SAMPLES_PER_DIM = 32
MAX_SAMPLES = 4096
GUARD_SAFETY = 1.5


def as_batched(P):
    """Wrap ``P`` so it maps ``(B, l)`` arrays to ``(B, l)`` arrays."""

    def call(T):
        T = np.atleast_2d(np.asarray(T, complex))
        try:
            out = np.asarray(P(T), complex)
            if out.shape == T.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.stack([np.asarray(P(t), complex).reshape(-1) for t in T])

    return call


@dataclass
class PolydiscSpec:
    delta: float
    l: int
    samples: np.ndarray
    facets: np.ndarray
    covering_radius: float

    @classmethod
    def build(cls, delta: float, l: int, per_dim: int = SAMPLES_PER_DIM, max_samples: int = MAX_SAMPLES,
              refine: int = 1) -> "PolydiscSpec":
        """Boundary samples of ``{max |t_i| = δ}``, facet by facet.

        On facet ``i`` the angle of ``t_i`` is sampled uniformly and the other
        coordinates on a square grid pushed radially into the disc.
        """
        if l < 1:
            raise ValueError("polydisc dimension must be positive")
        if l == 1:
            m, q = per_dim * refine, 0
        else:
            q = int((max_samples / l) ** (1.0 / (2 * l - 1)))
            q = max(3, min(per_dim, q)) * refine
            m = q
        theta = 2 * np.pi * np.arange(m) / m
        ring = delta * np.exp(1j * theta)
        if l == 1:
            pts = ring[:, None]
            fac = np.zeros(m, int)
            cover = delta * math.pi / m
        else:
            g = np.linspace(-delta, delta, q)
            X, Y = np.meshgrid(g, g)
            disc = (X + 1j * Y).ravel()
            r = np.abs(disc)
            disc = np.where(r > delta, disc * delta / np.maximum(r, 1e-300), disc)
            disc = np.unique(np.round(disc, 15))
            others = np.array(np.meshgrid(*([disc] * (l - 1)), indexing="ij")).reshape(l - 1, -1).T
            blocks, fac = [], []
            for i in range(l):
                T = np.empty((m * len(others), l), complex)
                T[:, i] = np.repeat(ring, len(others))
                rest = [j for j in range(l) if j != i]
                T[:, rest] = np.tile(others, (m, 1))
                blocks.append(T)
                fac.append(np.full(len(T), i))
            pts = np.concatenate(blocks)
            fac = np.concatenate(fac)
            half = delta / (q - 1) * math.sqrt(2)
            cover = math.sqrt((delta * math.pi / m) ** 2 + (l - 1) * half ** 2)
        return cls(float(delta), l, pts, fac, float(cover))

    def on_boundary(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.max(np.abs(self.samples), axis=1) - self.delta) <= tol * max(1.0, self.delta)))


@dataclass
class Certificate:
    certified: bool
    margin: float
    sup_defect: float
    guard: float
    lipschitz: float
    delta: float
    samples: int

    def __bool__(self):
        return self.certified


def _lipschitz(T, D, radius):
    X = np.concatenate([T.real, T.imag], axis=1)
    tree = cKDTree(X)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return 0.0
    dx = np.linalg.norm(X[pairs[:, 0]] - X[pairs[:, 1]], axis=1)
    dd = np.max(np.abs(D[pairs[:, 0]] - D[pairs[:, 1]]), axis=1)
    ok = dx > 0
    return float(np.max(dd[ok] / dx[ok])) if ok.any() else 0.0


def degree_certificate(P, spec: PolydiscSpec, values: np.ndarray | None = None) -> Certificate:
    """Proximity certificate for degree one of ``P`` on the polydisc boundary.

    Returns a falsy certificate when ``sup ‖P - id‖∞ >= δ`` on the samples;
    raises InsufficientSampling when only the between-sample guard spoils it.
    """
    T = spec.samples
    V = as_batched(P)(T) if values is None else np.asarray(values, complex)
    if not np.all(np.isfinite(V)):
        raise CertificateFailed("period map is not finite on the boundary")
    D = V - T
    sup = float(np.max(np.abs(D)))
    lip = _lipschitz(T, D, 2.5 * spec.covering_radius)
    guard = GUARD_SAFETY * lip * spec.covering_radius
    margin = spec.delta - sup - guard
    cert = Certificate(margin > 0, margin, sup, guard, lip, spec.delta, len(T))
    if not cert.certified and sup < spec.delta:
        raise InsufficientSampling(
            f"sampling guard {guard:.3g} exceeds the remaining margin {spec.delta - sup:.3g}",
            guard=guard, sup_defect=sup, delta=spec.delta)
    return cert


@dataclass
class SolveReport:
    t0: np.ndarray
    residual: float
    certified: bool
    margin: float
    iterations: int
    delta_used: float
    target: float
    success: bool
    newton_steps: int = 0
    history: list = field(default_factory=list)
    certificate: Certificate | None = None

    def to_json(self) -> dict:
        return {
            "t0": [[float(v.real), float(v.imag)] for v in np.atleast_1d(self.t0)],
            "residual": self.residual,
            "target": self.target,
            "success": self.success,
            "certificate": {"certified": self.certified, "margin": self.margin,
                            **({k: v for k, v in asdict(self.certificate).items() if k not in ("certified", "margin")}
                               if self.certificate else {})},
            "iterations": self.iterations,
            "newton_steps": self.newton_steps,
            "delta_used": self.delta_used,
            "history": [float(h) for h in self.history],
        }


def delta_schedule(start: float = DELTA_START, floor: float = DELTA_FLOOR):
    d = start
    while d >= floor * (1 - 1e-12):
        yield d
        d /= 2


def certify_schedule(P, l: int, schedule=None, per_dim: int = SAMPLES_PER_DIM, max_samples: int = MAX_SAMPLES):
    """First δ of the schedule that passes the certificate."""
    Pb = as_batched(P)
    last = None
    for d in (schedule if schedule is not None else delta_schedule()):
        spec = PolydiscSpec.build(d, l, per_dim, max_samples)
        try:
            cert = degree_certificate(Pb, spec)
        except InsufficientSampling as exc:
            last = exc
            continue
        if cert:
            return spec, cert
        last = cert
    if isinstance(last, Exception):
        raise CertificateFailed(f"no δ in the schedule certifies degree one ({last})")
    raise CertificateFailed("no δ in the schedule certifies degree one",
                            sup_defect=None if last is None else last.sup_defect)


def _project(t, delta):
    r = np.abs(t)
    return np.where(r > delta, t * delta / np.maximum(r, 1e-300), t)


def solve_periods(P, delta: float | None = None, target: float = 1e-10, l: int | None = None, max_iter: int = 60,
                  schedule=None, per_dim: int = SAMPLES_PER_DIM, max_samples: int = MAX_SAMPLES,
                  stall_ratio: float = 0.25, certify: bool = True) -> SolveReport:
    """Find ``t0`` in the polydisc with ``‖P(t0)‖∞ <= target``.

    Damped fixed-point steps ``t <- t - P(t)`` are used while they contract
    well; otherwise a central-difference Newton step is taken.  Iterates are
    projected back onto the closed polydisc.
    """
    Pb = as_batched(P)
    if l is None:
        raise ValueError("dimension l is required")
    cert = None
    if certify:
        if delta is None:
            spec, cert = certify_schedule(Pb, l, schedule, per_dim, max_samples)
            delta = spec.delta
        else:
            cert = degree_certificate(Pb, PolydiscSpec.build(delta, l, per_dim, max_samples))
            if not cert:
                raise CertificateFailed(f"degree certificate fails at δ={delta:g}", sup_defect=cert.sup_defect,
                                        delta=delta)
    elif delta is None:
        delta = DELTA_START

    t = np.zeros(l, complex)
    r = Pb(t[None])[0]
    res = float(np.max(np.abs(r)))
    best_t, best = t.copy(), res
    history = [res]
    it = newton = 0
    while res > target and it < max_iter:
        it += 1
        cand = _project(t - r, delta)
        rc = Pb(cand[None])[0]
        rc_norm = float(np.max(np.abs(rc)))
        if rc_norm > stall_ratio * res:
            # finite-difference Newton from t
            h = max(1e-7 * delta, 1e-6 * max(res, 1e-12) ** 0.5 * delta) if res > 0 else 1e-7 * delta
            h = min(h, 1e-4 * delta)
            pts = [t]
            for j in range(l):
                e = np.zeros(l, complex)
                e[j] = h
                pts += [t + e, t - e]
            vals = Pb(np.array(pts))
            J = np.column_stack([(vals[1 + 2 * j] - vals[2 + 2 * j]) / (2 * h) for j in range(l)])
            try:
                step = np.linalg.solve(J, vals[0])
            except np.linalg.LinAlgError:
                step = vals[0]
            cn = _project(t - step, delta)
            rn = Pb(cn[None])[0]
            rn_norm = float(np.max(np.abs(rn)))
            newton += 1
            if rn_norm < rc_norm:
                cand, rc, rc_norm = cn, rn, rn_norm
        t, r, res = cand, rc, rc_norm
        history.append(res)
        if res < best:
            best_t, best = t.copy(), res
        if len(history) > 6 and min(history[-4:]) >= 0.999 * min(history[:-4]):
            break
    if best > target:
        raise NoConvergence(f"residual {best:.3g} above target {target:.3g} after {it} iterations",
                            best_residual=best, t=best_t.tolist(), iterations=it)
    return SolveReport(best_t, best, bool(cert) if cert is not None else False,
                       cert.margin if cert is not None else float("nan"), max(it, 1), float(delta), target, True,
                       newton, history, cert)
