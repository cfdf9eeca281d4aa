"""Figures for pipeline reports (file output only, Agg backend)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
}


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_set(report, ax):
    S = report.S
    if S is not None:
        for isl in S.islands:
            b = isl.outer.dense()
            ax.fill(b.real, b.imag, color="0.9", zorder=0)
            for hole in isl.holes:
                h = hole.dense()
                ax.fill(h.real, h.imag, color="white", zorder=1)
    sc = None
    for smp in report.curves:
        sc = ax.scatter(smp.z.real, smp.z.imag, c=np.abs(smp.w), s=3, cmap="viridis", zorder=2)
    pts = report.samples.get("points")
    if pts is not None and len(pts):
        ax.scatter(np.real(pts), np.imag(pts), s=2, c="k", alpha=0.3, zorder=3)
    if sc is not None:
        plt.colorbar(sc, ax=ax, label="|w|")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"{report.name}: l = {report.l}")


def plot_fibers(report, ax):
    for k, smp in enumerate(report.curves):
        ax.plot(smp.s, np.abs(smp.w), lw=0.8, label=f"curve {k}")
    ax.set_xlabel("s")
    ax.set_ylabel("|w|")
    ax.set_title("fiber value along curves")
    if 0 < len(report.curves) <= 8:
        ax.legend(fontsize=7)


def plot_solve(report, ax):
    hist = report.solve.history if report.solve is not None else []
    if len(hist):
        h = np.maximum(np.asarray(hist, float), 1e-300)
        ax.semilogy(np.arange(len(h)), h, "o-")
    ax.axhline(report.tolerances["period"], color="C3", ls="--", lw=0.8, label="target")
    ax.set_xlabel("iteration")
    ax.set_ylabel("max |P(t)|")
    ax.set_title("period solve")
    ax.legend(fontsize=7)


def plot_rings(report, ax):
    rings = report.artifacts.get("rings", {})
    theta = report.artifacts.get("theta")
    for r, (G, _) in sorted(rings.items()):
        ax.plot(theta, np.abs(G[:, 1]), lw=0.8, label=f"|p| = {r:.3g}")
    ax.set_xlabel("angle")
    ax.set_ylabel("|W|")
    ax.set_title("annulus rings")
    ax.legend(fontsize=7)


def render_report(report, out_dir: str) -> dict:
    """Write PNG figures for ``report`` into ``out_dir``; returns name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        plot_set(report, ax)
        paths["figure_set"] = _save(fig, out_dir, "set.png")
        fig, ax = plt.subplots(figsize=(5, 3))
        plot_fibers(report, ax)
        paths["figure_fibers"] = _save(fig, out_dir, "fibers.png")
        if report.l:
            fig, ax = plt.subplots(figsize=(4, 3))
            plot_solve(report, ax)
            paths["figure_solve"] = _save(fig, out_dir, "solve.png")
        if report.artifacts.get("rings"):
            fig, ax = plt.subplots(figsize=(5, 3))
            plot_rings(report, ax)
            paths["figure_rings"] = _save(fig, out_dir, "rings.png")
    return paths
