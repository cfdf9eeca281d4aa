"""End-to-end approximation of a Legendrian axis by holomorphic Legendrian curves.

Stages: contact check, normal form, homology basis (or interpolation
family), spray, holomorphic approximation of the reduced coefficients,
period killing, and integration of the resulting single-valued solution
over a thin neighborhood of the set.
"""

from __future__ import annotations

import json
import math
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from . import expressions as ex
from .contact import ContactForm, contact_check, normal_form, _lambdify
from .errors import (
    ConfigError,
    Escape,
    LegApproxError,
    StageError,
    ToleranceBudgetExceeded,
    ValidationError,
)
from .fixtures import get_fixture
from .geometry import AdmissibleSet, bounded_complement_anchors, load_admissible_set
from .homology import build_homology_basis, curve_family_with_interpolation, default_cell
from .ode import LegendrianODE, integrate_along_curve, period_map
from .raster import Grid, _edges, neighborhood_mask
from .runge import build_spray, holomorphic_approximate
from .solver import DELTA_FLOOR, DELTA_START, SolveReport, delta_schedule, solve_periods

TOLERANCE_DEFAULTS = {
    "contact": 1e-6,
    "ode": 1e-12,
    "fit": 1e-8,
    "period": 1e-10,
    "closeness": 1e-3,
    "isotropy": 1e-6,
}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class PipelineConfig:
    set_source: object
    form_source: object
    A: tuple = ()
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCE_DEFAULTS))
    delta_start: float = DELTA_START
    delta_floor: float = DELTA_FLOOR
    out_dir: str | None = None
    defect: float = 0.0
    defect_function: str | None = None
    seed: int = 0
    cells: int = 256
    taylor_order: int = 4
    degree: int = 24
    fiber_radius: float | None = None
    name: str = "run"

    def __post_init__(self):
        tol = dict(TOLERANCE_DEFAULTS)
        tol.update(self.tolerances or {})
        for k, v in tol.items():
            if k not in TOLERANCE_DEFAULTS:
                raise ValidationError(f"unknown tolerance {k!r}")
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValidationError(f"tolerance {k} must be positive, got {v!r}")
        self.tolerances = {k: float(v) for k, v in tol.items()}
        self.A = tuple(complex(a) if not isinstance(a, (list, tuple)) else complex(a[0], a[1]) for a in self.A)
        if not (0 < self.delta_floor <= self.delta_start):
            raise ValidationError("delta schedule needs 0 < floor <= start")

    @classmethod
    def from_json(cls, data, base_dir: str = ".") -> "PipelineConfig":
        if isinstance(data, (str, os.PathLike)):
            path = os.fspath(data)
            try:
                with open(path, encoding="utf-8") as fh:
                    data = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc.strerror}", path=path) from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc.msg}", path=path) from None
            base_dir = os.path.dirname(os.path.abspath(path))
        if not isinstance(data, dict) or "set" not in data or "form" not in data:
            raise ConfigError("config needs 'set' and 'form' entries")

        def resolve(v):
            if isinstance(v, str) and not v.startswith("fixture:"):
                return v if os.path.isabs(v) else os.path.join(base_dir, v)
            return v

        delta = data.get("delta_schedule", {})
        known = {"set", "form", "A", "tolerances", "delta_schedule", "out", "defect", "defect_function", "seed",
                 "cells", "taylor_order", "degree", "fiber_radius", "name"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(
            resolve(data["set"]), resolve(data["form"]), tuple(data.get("A", ())),
            dict(data.get("tolerances", {})), float(delta.get("start", DELTA_START)),
            float(delta.get("floor", DELTA_FLOOR)), data.get("out"), float(data.get("defect", 0.0)),
            data.get("defect_function"), int(data.get("seed", 0)), int(data.get("cells", 256)),
            int(data.get("taylor_order", 4)), int(data.get("degree", 24)), data.get("fiber_radius"),
            data.get("name", "run"))

    def load_set(self) -> AdmissibleSet:
        src = self.set_source
        if isinstance(src, AdmissibleSet):
            return src
        if isinstance(src, str) and src.startswith("fixture:"):
            try:
                return get_fixture(src.split(":", 1)[1])
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        if isinstance(src, dict) and "fixture" in src:
            try:
                return get_fixture(src["fixture"])
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        if isinstance(src, dict):
            from .geometry import admissible_set_from_json

            return admissible_set_from_json(src)
        try:
            return load_admissible_set(src)
        except OSError as exc:
            raise ConfigError(f"cannot read admissible set {src}: {exc.strerror}", path=str(src)) from None
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"admissible set {src} does not parse: {exc}", path=str(src)) from None

    def load_form(self) -> ContactForm:
        src = self.form_source
        if isinstance(src, ContactForm):
            return src
        if isinstance(src, dict):
            return ContactForm.from_json(src)
        try:
            with open(src, encoding="utf-8") as fh:
                return ContactForm.from_json(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read contact form {src}: {exc.strerror}", path=str(src)) from None
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"contact form {src} does not parse: {exc}", path=str(src)) from None


@contextmanager
def stage(name: str, timings: dict | None = None):
    t0 = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except LegApproxError as exc:
        raise StageError(name, exc) from exc
    finally:
        if timings is not None:
            timings[name] = time.perf_counter() - t0


# ---------------------------------------------------------------------------
# the approximating form


def fiber_taylor(expr, n: int, samples, radius: float, order: int, N: int = 16) -> dict:
    """Taylor coefficients ``a_ij(p)`` of ``expr`` in ``(w, y)`` at ``zeta_{>=3} = 0``.

    Computed by the discrete Cauchy formula on the torus ``|w| = |y| = radius``.
    """
    z = np.asarray(samples, complex)
    fiber = ex.fiber_symbols(n)
    expr = expr.xreplace({s: 0 for s in fiber[2:]})
    if not (expr.free_symbols & {ex.w, ex.y}):
        f = _lambdify(expr, [ex.z, ex.zbar])
        return {(0, 0): np.broadcast_to(np.asarray(f(z, np.conj(z)), complex), z.shape).copy()}
    f = _lambdify(expr, [ex.z, ex.zbar, ex.w, ex.y])
    th = 2 * np.pi * np.arange(N) / N
    W = radius * np.exp(1j * th)[None, :, None]
    Y = radius * np.exp(1j * th)[None, None, :]
    Z = z[:, None, None]
    vals = np.broadcast_to(np.asarray(f(Z, np.conj(Z), W, Y), complex), (len(z), N, N))
    coef = np.fft.fft2(vals, axes=(1, 2)) / N ** 2
    out = {}
    scale = max(1.0, float(np.max(np.abs(vals))))
    for i in range(order + 1):
        for j in range(order + 1 - i):
            c = coef[:, i, j] / radius ** (i + j)
            if np.max(np.abs(c)) * radius ** (i + j) > 1e-14 * scale:
                out[(i, j)] = c
    return out


class _Const:
    def __init__(self, c):
        self.c = complex(c)

    def __call__(self, z):
        return np.full(np.shape(z), self.c, complex)

    def derivative(self, z):
        return np.zeros(np.shape(z), complex)

    def to_json(self):
        return {"poly": [[self.c.real, self.c.imag]], "poles": []}


class GammaForm:
    """The holomorphically approximated reduced form restricted to ``zeta_{>=3} = 0``.

    Each of the ``dz, dw, dy`` coefficients is ``Σ a_ij(z) w^i y^j`` with
    holomorphic ``a_ij``; ``extra_dz`` is added to the ``dz`` coefficient.
    """

    n = 1

    def __init__(self, terms: dict, extra_dz=None):
        self.terms = terms
        self.extra_dz = extra_dz

    def coeffs(self, z, w, y):
        z = np.asarray(z, complex)
        out = []
        for name in ("dz", "dw", "dy"):
            acc = 0
            for (i, j), fn in self.terms.get(name, {}).items():
                c = fn.c if isinstance(fn, _Const) else fn(z)
                if i:
                    c = c * (w if i == 1 else w ** i)
                if j:
                    c = c * (y if j == 1 else y ** j)
                acc = acc + c
            acc = acc + np.zeros(np.broadcast(z, w, y).shape, complex)
            if name == "dz" and self.extra_dz is not None:
                acc = acc + self.extra_dz(z)
            out.append(acc)
        return out

    def pair(self, z, zeta, dz, dzeta):
        zeta = np.asarray(zeta, complex)
        dzeta = np.asarray(dzeta, complex)
        cz, cw, cy = self.coeffs(z, zeta[..., 0], zeta[..., 1])
        return cz * dz + cw * dzeta[..., 0] + cy * dzeta[..., 1]

    def velocity(self, spray):
        l = spray.size

        def V(z, w, t):
            if l:
                yv, dyv = spray.y_dy(z, t)
            else:
                yv = dyv = np.zeros(np.shape(z), complex)
            cz, cw, cy = self.coeffs(z, w, yv)
            return -(cz + cy * dyv) / cw

        return V


def reduced_ode(form: ContactForm, spray, w_radius: float = math.inf) -> LegendrianODE:
    """``dw = V dz`` for ``form`` with ``y = y(z, t)`` from ``spray`` and ``zeta_{>=3} = 0``."""
    zero = np.zeros(2 * form.n - 2, complex)

    def V(z, w, t):
        z = np.asarray(z, complex)
        yv, dyv = spray.y_dy(z, t)
        zeta = np.concatenate([np.stack(np.broadcast_arrays(w, yv), axis=-1),
                               np.broadcast_to(zero, np.shape(yv) + zero.shape)], axis=-1)
        c = form.evaluate(z, zeta)
        return -(c[..., 0] + c[..., 2] * dyv) / c[..., 1]

    return LegendrianODE(V, w_radius=w_radius, y=spray.y, name=form.name or "reduced")


def approximate_form(reduced: ContactForm, S: AdmissibleSet, radius: float, order: int = 4, degree: int = 24,
                     seed: int = 0):
    """Holomorphic approximants of the fiber-Taylor coefficients of the reduced form."""
    interior = 64 if S.islands else 0
    zs = S.sample_points(per_curve=160, interior=interior, seed=seed)
    anchors = bounded_complement_anchors(S)
    terms, residuals = {}, {}
    for name, expr in zip(reduced.names[:3], reduced.exprs[:3]):
        coeffs = fiber_taylor(expr, reduced.n, zs, radius, order)
        terms[name] = {}
        for key, vals in coeffs.items():
            label = f"{name}[w^{key[0]} y^{key[1]}]"
            v0 = vals[0]
            if np.max(np.abs(vals - v0)) <= 1e-13 * max(1.0, abs(v0)):
                terms[name][key] = _Const(v0)
                residuals[label] = 0.0
                continue
            approx = holomorphic_approximate(zs, vals, anchors=anchors, degree=degree)
            terms[name][key] = approx.function
            residuals[label] = approx.residual
    return terms, residuals


# ---------------------------------------------------------------------------
# single-valued solution on a thin neighborhood


def _rk4_segments(V, a, b, w, t, substeps=4):
    d = b - a
    h = 1.0 / substeps
    for k in range(substeps):
        s = k * h
        F = lambda s_, w_: V(a + s_ * d, w_, t) * d  # noqa: E731
        k1 = F(s, w)
        k2 = F(s + h / 2, w + h / 2 * k1)
        k3 = F(s + h / 2, w + h / 2 * k2)
        k4 = F(s + h, w + h * k3)
        w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return w


def solve_on_neighborhood(V, t, S: AdmissibleSet, p0: complex, targets, cells: int = 256, substeps: int = 4,
                          radius: float = math.inf):
    """Values ``w(x)`` at ``targets`` of the solution with ``w(p0) = 0``.

    Integration runs along a shortest-path tree of the raster cells within
    1.5 cells of ``S``; each tree edge and the final hop to a target are
    straight segments integrated with classical Runge-Kutta steps.
    """
    h = default_cell(S, cells)
    grid = Grid(S.bounds(), h)
    free = neighborhood_mask(grid, S, 1.5 * h)
    iy, ix = grid.index(p0)
    free[iy, ix] = True
    u, v, wts = _edges(free, h)
    n = free.size
    graph = coo_matrix((wts, (u, v)), shape=(n, n)).tocsr()
    src = iy * grid.nx + ix
    dist, pred = dijkstra(graph, directed=False, indices=src, return_predecessors=True)
    reached = np.flatnonzero(np.isfinite(dist))
    order = reached[np.argsort(dist[reached], kind="stable")]
    depth = np.full(n, -1)
    depth[src] = 0
    for node in order[1:]:
        depth[node] = depth[pred[node]] + 1
    centers = grid.centers.ravel()
    w = np.zeros(n, complex)
    w[src] = _rk4_segments(V, np.array([p0]), centers[[src]], np.zeros(1, complex), t, substeps)[0]
    for d in range(1, int(depth.max()) + 1):
        nodes = np.flatnonzero(depth == d)
        w[nodes] = _rk4_segments(V, centers[pred[nodes]], centers[nodes], w[pred[nodes]], t, substeps)
        if not np.all(np.abs(w[nodes]) <= radius):
            k = nodes[int(np.argmax(np.abs(w[nodes])))]
            raise Escape(f"solution leaves the fiber ball near {centers[k]:.4g}", z=complex(centers[k]))
    targets = np.atleast_1d(np.asarray(targets, complex))
    tree = cKDTree(np.column_stack([centers[reached].real, centers[reached].imag]))
    _, idx = tree.query(np.column_stack([targets.real, targets.imag]))
    start = reached[idx]
    return _rk4_segments(V, centers[start], targets, w[start], t, substeps)


# ---------------------------------------------------------------------------
# derivatives along sampled curves


def piece_splines(s, values, breaks):
    """Derivative in ``s`` of sampled values using one cubic spline per smooth piece."""
    values = np.asarray(values)
    out = np.empty_like(values, dtype=complex)
    for b0, b1 in zip(breaks[:-1], breaks[1:]):
        sel = np.flatnonzero((s >= b0 - 1e-14) & (s <= b1 + 1e-14))
        if len(sel) < 4:
            raise ValidationError("too few samples on a curve piece for differentiation")
        cs = CubicSpline(s[sel], values[sel], axis=0)
        out[sel] = cs(s[sel], 1)
    return out


def curve_params(curve, per_piece: int = 64):
    """Output parameters with ``per_piece`` samples on every piece (piece ends included)."""
    br = curve.breaks
    parts = [np.linspace(b0, b1, max(8, int(per_piece)) + 1) for b0, b1 in zip(br[:-1], br[1:])]
    return np.unique(np.concatenate(parts))


def isotropy_along(form, sample, breaks, n: int = 1) -> float:
    """Largest ``|form(df · ṡ)| / |ż|`` along an integrated curve sample."""
    zeta = np.zeros((len(sample.s), 2 * n), complex)
    zeta[:, 0] = sample.w
    zeta[:, 1] = 0 if sample.y is None else sample.y
    dzeta = piece_splines(sample.s, zeta, breaks)
    val = form.pair(sample.z, zeta, sample.dz, dzeta)
    return float(np.max(np.abs(val) / np.abs(sample.dz)))


# ---------------------------------------------------------------------------
# report


def _cjson(v):
    return [float(np.real(v)), float(np.imag(v))]


@dataclass
class PipelineReport:
    name: str
    l: int
    contact_min: float
    spray_defect: float
    spray_condition: float
    normal_form_terms: dict
    approximation_residuals: dict
    solve: SolveReport | None
    isotropy_gamma: float
    isotropy_beta: float
    closeness_c0: float
    closeness_c1: float
    interpolation_defects: list
    output_periods: list
    min_pairwise_distance: float
    tolerances: dict
    samples: dict = field(default_factory=dict, repr=False)
    curves: list = field(default_factory=list, repr=False)
    members: list = field(default_factory=list, repr=False)
    t0: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    extra: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict, repr=False)
    S: object = field(default=None, repr=False)
    # live objects for callers that keep evaluating the solution (not serialized)
    artifacts: dict = field(default_factory=dict, repr=False)

    @property
    def closeness(self) -> float:
        return self.closeness_c0 + self.closeness_c1

    def checks(self) -> dict:
        """Each measured quantity with the tolerance it is compared to."""
        tol = self.tolerances
        out = {
            "closeness": {"value": self.closeness, "tolerance": tol["closeness"]},
            "isotropy_gamma": {"value": self.isotropy_gamma, "tolerance": tol["isotropy"]},
            "max_fit_residual": {"value": max(self.approximation_residuals.values(), default=0.0),
                                 "tolerance": tol["fit"]},
            "contact_min": {"value": self.contact_min, "tolerance": tol["contact"]},
        }
        if self.l:
            out["spray_defect"] = {"value": self.spray_defect, "tolerance": tol["period"] * 1e2}
            out["period_residual"] = {"value": self.solve.residual, "tolerance": tol["period"]}
            out["output_periods"] = {"value": max(self.output_periods, default=0.0), "tolerance": 1e-8}
        if self.interpolation_defects:
            out["interpolation"] = {"value": max(d["defect"] for d in self.interpolation_defects),
                                    "tolerance": tol["period"] * 1e2}
        for v in out.values():
            v["ok"] = bool(v["value"] >= v["tolerance"]) if v is out["contact_min"] else bool(
                v["value"] <= v["tolerance"])
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "l": self.l,
            "contact_min": self.contact_min,
            "spray": {"period_matrix_defect": self.spray_defect, "condition": self.spray_condition},
            "normal_form_residual_terms": self.normal_form_terms,
            "approximation_residuals": dict(sorted(self.approximation_residuals.items())),
            "solve": self.solve.to_json() if self.solve is not None else None,
            "t0": [_cjson(v) for v in np.atleast_1d(self.t0)],
            "isotropy": {"gamma": self.isotropy_gamma, "beta": self.isotropy_beta,
                         "tolerance": self.tolerances["isotropy"]},
            "closeness": {"c0": self.closeness_c0, "c1_tangential": self.closeness_c1, "total": self.closeness,
                          "tolerance": self.tolerances["closeness"],
                          "definition": "max |fiber| plus max |d fiber / ds| / |dz/ds| on samples"},
            "interpolation_defects": self.interpolation_defects,
            "output_periods": self.output_periods,
            "min_pairwise_distance": self.min_pairwise_distance,
            "tolerances": self.tolerances,
            "checks": self.checks(),
            "samples": {k: [_cjson(x) for x in np.ravel(v)] for k, v in sorted(self.samples.items())},
            "extra": self.extra,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1, allow_nan=True)


def _terms_json(nf) -> dict:
    out = {}
    for nm, terms in nf.residual_terms.items():
        out[nm] = {"w^%d y^%d" % key[:2] + ("".join(f" z{k + 3}^{p}" for k, p in enumerate(key[2:]) if p)):
                   ex.to_text(v) for key, v in sorted(terms.items())}
    return out


# ---------------------------------------------------------------------------
# the pipeline


def mergelyan_pipeline(config: PipelineConfig, S: AdmissibleSet | None = None, beta: ContactForm | None = None
                       ) -> PipelineReport:
    tol = config.tolerances
    timings: dict = {}
    with stage("load", timings):
        S = S if S is not None else config.load_set()
        beta = beta if beta is not None else config.load_form()
    rho = float(config.fiber_radius or beta.rho)
    with stage("contact_check", timings):
        cmin = contact_check(beta, S=S, threshold=tol["contact"])
    with stage("normal_form", timings):
        nf = normal_form(beta, S)
        reduced = nf.reduced
    with stage("basis", timings):
        if config.A:
            fam = curve_family_with_interpolation(S, list(config.A), cells=config.cells)
            members, base = list(fam.members), fam.base_point
        else:
            basis = build_homology_basis(S, cells=config.cells)
            members, base = list(basis.cycles), basis.base_point
        if base is None:
            base = complex(S.sample_points(16)[0])
    l = len(members)
    with stage("spray", timings):
        spray = build_spray(members, S=S, vanish_at=config.A)
        defect = float(np.max(np.abs(spray.period_matrix - np.eye(l)))) if l else 0.0
    with stage("approximate", timings):
        terms, residuals = approximate_form(reduced, S, 0.5 * rho, config.taylor_order, config.degree, config.seed)
        extra = None
        if config.defect:
            if config.defect_function:
                g = _lambdify(ex.parse(config.defect_function), [ex.z])
            elif l:
                g = lambda z: np.sum(spray.functions(z), axis=-1)  # noqa: E731
            else:
                g = lambda z: np.ones(np.shape(z), complex)  # noqa: E731
            extra = lambda z, g=g, c=config.defect: c * np.broadcast_to(g(np.asarray(z, complex)),  # noqa: E731
                                                                         np.shape(z))
        gamma = GammaForm(terms, extra)
        ode = LegendrianODE(gamma.velocity(spray), w_radius=0.9 * rho, y=spray.y, name="gamma")
    with stage("solve_periods", timings):
        if l:
            P = lambda T: period_map(ode, members, T, tol=tol["ode"]).values  # noqa: E731
            rep = solve_periods(P, l=l, target=tol["period"],
                                schedule=list(delta_schedule(config.delta_start, config.delta_floor)))
            t0 = rep.t0
        else:
            rep = SolveReport(np.zeros(0, complex), 0.0, True, float("nan"), 0, 0.0, tol["period"], True)
            t0 = np.zeros(0, complex)
    with stage("output", timings):
        out = _outputs(S, members, ode, gamma, reduced, nf, t0, base, config, rho)
    report = PipelineReport(
        config.name, l, cmin, defect, float(spray.condition), _terms_json(nf), residuals, rep,
        out["iso_gamma"], out["iso_beta"], out["c0"], out["c1"], out["interp"], out["periods"],
        out["min_dist"], dict(tol), out["samples"], out["curves"], members, t0,
        {"base_point": _cjson(base), "defect": config.defect}, timings, S,
        {"ode": ode, "normal_form": nf, "gamma": gamma, "spray": spray, "base": base})
    if report.closeness > tol["closeness"]:
        exc = ToleranceBudgetExceeded(f"closeness {report.closeness:.3g} misses {tol['closeness']:.3g}",
                                      closeness=report.closeness)
        exc.report = report
        raise exc
    return report


def _outputs(S, members, ode, gamma, reduced, nf, t0, base, config, rho):
    tol = config.tolerances
    n = reduced.n
    Bf = _lambdify(nf.change, [ex.z, ex.zbar])

    def back(z, w, y):
        z = np.atleast_1d(np.asarray(z, complex))
        out = np.zeros((len(z), 2 * n), complex)
        for k, zk in enumerate(z):
            B = np.asarray(Bf(zk, np.conj(zk)), complex).reshape(2 * n, 2 * n)
            out[k] = B[:, 0] * w[k] + B[:, 1] * y[k]
        return out

    pts = S.sample_points(per_curve=128, interior=32 if S.islands else 0, seed=config.seed)
    targets = np.concatenate([pts, np.array(config.A, complex)])
    w_t = solve_on_neighborhood(ode.V, t0, S, base, targets, cells=config.cells, radius=ode.w_radius)
    y_t = ode.y(targets, t0)
    fib_t = back(targets, w_t, y_t)
    c0 = float(np.max(np.linalg.norm(fib_t, axis=1)))
    interp = []
    for k, a in enumerate(config.A):
        j = len(pts) + k
        interp.append({"point": _cjson(a), "w": _cjson(w_t[j]), "y": _cjson(y_t[j]),
                       "defect": float(np.linalg.norm(fib_t[j]))})

    # curves: boundaries, arcs and members, integrated from the neighborhood values
    curves = [c for _, c in S.boundary_curves()] + [a.curve for a in S.arcs]
    starts = solve_on_neighborhood(ode.V, t0, S, base, np.array([c.start for c in curves], complex),
                                   cells=config.cells, radius=ode.w_radius) if curves else []
    iso_g = iso_b = c1 = 0.0
    samples_out, member_samples = [], []
    for c, w0 in zip(curves, starts):
        s_out = curve_params(c, per_piece=max(64, 40 * c.length / max(len(c.pieces), 1)))
        smp = integrate_along_curve(ode, c, w0, t0, tol=tol["ode"], s_out=s_out)
        iso_g = max(iso_g, isotropy_along(gamma, smp, c.breaks))
        iso_b = max(iso_b, isotropy_along(reduced, smp, c.breaks, n))
        fib = back(smp.z, smp.w, smp.y)
        c0 = max(c0, float(np.max(np.linalg.norm(fib, axis=1))))
        dfib = piece_splines(smp.s, fib, c.breaks)
        c1 = max(c1, float(np.max(np.linalg.norm(dfib, axis=1) / np.abs(smp.dz))))
        samples_out.append(smp)
    periods = []
    for c in members:
        s_out = curve_params(c, per_piece=128)
        smp = integrate_along_curve(ode, c, 0j, t0, tol=tol["ode"], s_out=s_out)
        iso_g = max(iso_g, isotropy_along(gamma, smp, c.breaks))
        member_samples.append(smp)
        # re-measure at refined tolerance and doubled output density
        fine = integrate_along_curve(ode, c, 0j, t0, tol=tol["ode"] / 10, s_out=curve_params(c, per_piece=256))
        periods.append(float(abs(fine.w[-1] - fine.w[0])))
    allz = np.concatenate([targets] + [s.z for s in samples_out]) if samples_out else targets
    allf = np.concatenate([fib_t] + [back(s.z, s.w, s.y) for s in samples_out]) if samples_out else fib_t
    X = np.column_stack([allz.real, allz.imag, allf.real, allf.imag])
    X = np.unique(np.round(X, 12), axis=0)
    min_dist = float(cKDTree(X).query(X, k=2)[0][:, 1].min()) if len(X) > 1 else math.inf
    samples = {"points": targets, "w": w_t, "y": y_t}
    return {"iso_gamma": iso_g, "iso_beta": iso_b, "c0": c0, "c1": c1, "interp": interp, "periods": periods,
            "min_dist": min_dist, "samples": samples, "curves": samples_out + member_samples}


def write_outputs(report: PipelineReport, out_dir: str, emit_csv: bool = False, figures: bool = True) -> dict:
    """Write ``report.json`` (plus CSV curve dumps and figures) into ``out_dir``."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {"report": os.path.join(out_dir, "report.json")}
        with open(paths["report"], "w", encoding="utf-8") as fh:
            fh.write(report.dumps())
        if emit_csv:
            for k, smp in enumerate(report.curves):
                p = os.path.join(out_dir, f"curve_{k:02d}.csv")
                smp.to_csv(p, {"curve": k})
                paths[f"curve_{k:02d}"] = p
        if figures:
            from .plotting import render_report

            paths.update(render_report(report, out_dir))
    except OSError as exc:
        raise ConfigError(f"cannot write outputs to {out_dir}: {exc.strerror}", path=out_dir) from None
    return paths
