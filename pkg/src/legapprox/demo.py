"""Scenario library: Legendrian loops thickened to annuli, and the two-island set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import _lambdify, standard_contact
from .errors import Escape, NotLegendrianInput, StageError
from .expressions import z as Z_SYM, zbar as ZBAR_SYM
from .fixtures import get_fixture
from .ode import dopri_solve
from .pipeline import PipelineConfig, PipelineReport, mergelyan_pipeline


@dataclass
class Laurent:
    """``Σ c_k p^k`` for ``k`` in ``powers``."""

    powers: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def fit(cls, values, cutoff: float = 1e-14) -> "Laurent":
        # samples at p = exp(2πik/M); the Nyquist mode is dropped
        values = np.asarray(values, complex)
        M = len(values)
        c = np.fft.fft(values) / M
        k = np.fft.fftfreq(M, 1.0 / M).astype(int)
        keep = (np.abs(c) > cutoff * max(1.0, float(np.max(np.abs(c))))) & (np.abs(k) < M // 2)
        return cls(k[keep], c[keep])

    def __call__(self, p):
        p = np.asarray(p, complex)
        return np.sum(self.coeffs * p[..., None] ** self.powers, axis=-1)

    def derivative(self, p):
        p = np.asarray(p, complex)
        return np.sum(self.coeffs * self.powers * p[..., None] ** (self.powers - 1), axis=-1)

    def extreme_powers(self):
        return (int(self.powers.min()), int(self.powers.max())) if len(self.powers) else (0, 0)


def _dtheta(values):
    M = len(values)
    k = np.fft.fftfreq(M, 1.0 / M)
    k[np.abs(k) >= M // 2] = 0
    k = k.reshape((M,) + (1,) * (np.ndim(values) - 1))
    return np.fft.ifft(1j * k * np.fft.fft(values, axis=0), axis=0)


def _loop_samples(loop, M):
    if callable(loop):
        th = 2 * np.pi * np.arange(M) / M
        arr = np.column_stack([np.asarray(v, complex) * np.ones(M) for v in loop(th)])
    else:
        arr = np.asarray(loop, complex)
    if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 16:
        raise NotLegendrianInput("loop must be sampled as an (M, 3) array of (z, w, y) with M >= 16")
    return arr


def loop_isotropy(arr) -> float:
    """``max |w' - y z'| / max |z'|`` on uniformly sampled loop data."""
    d = _dtheta(arr[:, :2])
    scale = float(np.max(np.abs(d[:, 0])))
    return float(np.max(np.abs(d[:, 1] - arr[:, 2] * d[:, 0]))) / max(scale, 1e-300)


def _winding(f, r, n=2048):
    v = f(r * np.exp(2j * np.pi * np.arange(n + 1) / n))
    return int(round(float(np.sum(np.diff(np.unwrap(np.angle(v))))) / (2 * np.pi)))


def _has_zero(f, r0, r1, floor=1e-6, n=2048):
    """True if the Laurent polynomial ``f`` vanishes on ``r0 <= |p| <= r1`` (argument principle)."""
    for r in (r0, r1):
        if float(np.min(np.abs(f(r * np.exp(2j * np.pi * np.arange(n) / n))))) < floor:
            return True
    # only p = 0 can be a pole, and it lies inside the inner circle
    return _winding(f, r1, n) != _winding(f, r0, n)


def _circle_values(report: PipelineReport, r: float, theta, tol: float):
    """Fiber values ``(w, y)`` in the original tube coordinates on ``|p| = r`` at angles ``theta``."""
    art = report.artifacts
    ode, nf, base = art["ode"], art["normal_form"], complex(art["base"])
    t0 = np.asarray(report.t0, complex)
    V = ode.V
    w = np.zeros(1, complex)
    if abs(r - abs(base)) > 0:
        a, b = base, r * base / abs(base)

        def radial(s, w_):
            return V(np.full(w_.shape, a + s * (b - a)), w_, t0) * (b - a)

        w = dopri_solve(radial, w, np.array([0.0, 1.0]), tol=tol, radius=ode.w_radius)[0][-1]
    phi0 = math.atan2(base.imag, base.real)
    rel = np.mod(np.asarray(theta) - phi0, 2 * np.pi)
    order = np.argsort(rel)
    s_out = np.concatenate([[0.0], rel[order], [2 * np.pi]])
    s_out, inv = np.unique(s_out, return_inverse=True)

    def around(s, w_):
        p = r * np.exp(1j * (phi0 + s))
        return V(np.full(w_.shape, p), w_, t0) * 1j * p

    vals = dopri_solve(around, w, s_out, tol=tol, radius=ode.w_radius)[0][:, 0]
    vals = vals[inv]
    period = abs(vals[-1] - vals[0])
    wv = np.empty(len(rel), complex)
    wv[order] = vals[1:-1]
    p = r * np.exp(1j * np.asarray(theta))
    yv = ode.y(p, t0) if ode.y is not None and len(t0) else np.zeros(len(p), complex)
    Bf = _lambdify(nf.change, [Z_SYM, ZBAR_SYM])
    out = np.empty((len(p), 2), complex)
    for k, pk in enumerate(p):
        B = np.asarray(Bf(pk, np.conj(pk)), complex).reshape(2, 2)
        out[k] = B[:, 0] * wv[k] + B[:, 1] * yv[k]
    return out, float(period)


def annulus_demo(loop, rho: float = 1.3, samples: int = 256, input_tol: float = 1e-6, defect: float = 0.0,
                 tolerances: dict | None = None, max_shrink: int = 6, seed: int = 0) -> PipelineReport:
    """Thicken a Legendrian loop in standard contact space to a holomorphic Legendrian annulus.

    ``loop`` is either a callable ``theta -> (z, w, y)`` or an ``(M, 3)`` array
    sampled at ``theta_k = 2πk/M``.  The loop data is turned into Laurent
    series ``Z, W`` and the tube ``(p, w, y) -> (Z, W + w, W'/Z' + y/Z')``,
    which pulls the standard form back to ``dw - y dz``; the pipeline then
    runs on the unit circle.  ``rho`` is halved towards 1 until ``Z'`` has
    no zeros on the closed annulus and the solution stays in its fiber ball.
    """
    arr = _loop_samples(loop, samples)
    M = len(arr)
    iso = loop_isotropy(arr)
    if iso > input_tol:
        raise NotLegendrianInput(f"loop isotropy residual {iso:.3g} exceeds {input_tol:.3g}", residual=iso)
    Zl, Wl = Laurent.fit(arr[:, 0]), Laurent.fit(arr[:, 1])
    dz_loop = _dtheta(arr[:, 0])
    if float(np.min(np.abs(dz_loop))) < 1e-8 * float(np.max(np.abs(dz_loop))):
        raise NotLegendrianInput("the z-projection of the loop is not immersed")

    cfg = PipelineConfig("fixture:circle", standard_contact(1), tolerances=dict(tolerances or {}), defect=defect,
                         seed=seed, name="annulus_demo")
    report = mergelyan_pipeline(cfg, S=get_fixture("circle"), beta=standard_contact(1))
    tol = cfg.tolerances["ode"]

    theta = 2 * np.pi * np.arange(M) / M
    r = float(rho)
    last = None
    for _ in range(max_shrink + 1):
        try:
            if _has_zero(Zl.derivative, 1 / r, r):
                raise Escape(f"Z' vanishes on the annulus of parameter {r:.4g}")
            rings = {}
            for rr in (1 / r, 1.0, r):
                fib, per = _circle_values(report, rr, theta, tol)
                p = rr * np.exp(1j * theta)
                dZ = Zl.derivative(p)
                G = np.column_stack([Zl(p), Wl(p) + fib[:, 0], Wl.derivative(p) / dZ + fib[:, 1] / dZ])
                rings[rr] = (G, per)
            break
        except (Escape, StageError) as exc:
            last = exc
            r = 1 + (r - 1) / 2
    else:
        raise Escape(f"no annulus parameter above 1 keeps the solution in its domain ({last})")

    iso_rings = {}
    for rr, (G, per) in rings.items():
        d = _dtheta(G)
        scale = float(np.max(np.abs(d[:, 0])))
        iso_rings[rr] = float(np.max(np.abs(d[:, 1] - G[:, 2] * d[:, 0]))) / scale
    G1 = rings[1.0][0]
    c0 = float(np.max(np.abs(G1 - arr)))
    c1 = float(np.max(np.abs(_dtheta(G1) - _dtheta(arr))))
    report.extra["annulus"] = {
        "rho": r,
        "input_isotropy": iso,
        "laurent_range": {"z": list(Zl.extreme_powers()), "w": list(Wl.extreme_powers())},
        "isotropy_inner": iso_rings[1 / r],
        "isotropy_unit": iso_rings[1.0],
        "isotropy_outer": iso_rings[r],
        "ring_periods": [rings[k][1] for k in sorted(rings)],
        "closeness_c0": c0,
        "closeness_c1": c1,
    }
    report.artifacts.update({"Z": Zl, "W": Wl, "rings": rings, "theta": theta, "loop": arr})
    return report


def fig1_demo(perturbation: float = 0.05, defect: float = 1e-4, tolerances: dict | None = None, seed: int = 0
              ) -> PipelineReport:
    """Two islands joined by three bridges, with a perturbed standard form."""
    form = {"n": 1, "rho": 1.0, "coeffs": {"dw": "1", "dz": "-y", "dy": f"{perturbation!r}*w"}}
    cfg = PipelineConfig("fixture:fig1", form, tolerances=dict(tolerances or {}), defect=defect, seed=seed,
                         name="fig1_demo")
    return mergelyan_pipeline(cfg)


def cos2_loop(eps: float):
    """``z = e^{iθ}``, ``y = eps cos 2θ`` and the exact primitive ``w``."""

    def f(th):
        p = np.exp(1j * th)
        return p, eps * (p ** 3 / 6 - 1 / (2 * p)), eps * np.cos(2 * th)

    return f
