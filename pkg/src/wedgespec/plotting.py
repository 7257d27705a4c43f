"""Matplotlib figures for the CLI reports.

Figures are built on the object API with the Agg canvas, so nothing
touches pyplot state and concurrent calls are safe. PNG metadata is
stripped to keep files reproducible.
"""
from __future__ import annotations

import math

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

RC = {"font.size": 9, "axes.labelsize": 9, "legend.fontsize": 8,
      "xtick.labelsize": 8, "ytick.labelsize": 8}


def _fig(nrows=1, ncols=1, size=(6.4, 3.6)):
    fig = Figure(figsize=size, layout="constrained")
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    for ax in axes.ravel():
        ax.grid(alpha=0.3, lw=0.5)
    return fig, axes


def save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    meta = {"Software": None} if fmt == "png" else None
    if fmt in ("svg", "pdf"):
        meta = {"Date": None} if fmt == "svg" else {"CreationDate": None}
    fig.savefig(path, dpi=150, metadata=meta)
    return path


def contour_figure(samples, theta=None):
    """Profile f(x), the contour in the z-plane and the arc-length map."""
    x = np.asarray(samples["x"])
    fig, ax = _fig(1, 3, size=(9.0, 3.0))
    a, b, c = ax[0]
    a.plot(x, samples["f"], lw=1.2, label="f")
    a.plot(x, samples["df"], lw=0.8, ls="--", label="f'")
    a.set_xlabel("x")
    a.legend()
    b.plot(x, samples["f"], lw=1.2)
    b.set_xlabel("Re z")
    b.set_ylabel("Im z")
    b.set_aspect("equal", adjustable="datalim")
    if theta is not None:
        b.set_title(f"theta = {math.degrees(theta):.3f} deg")
    c.plot(x, samples["F"], lw=1.2)
    c.plot(x, x, lw=0.6, color="0.6")
    c.set_xlabel("x")
    c.set_ylabel("arc length F(x)")
    return fig


def staircase_figure(thetas, counts, exceptional=()):
    """N(theta) with the exceptional angles marked."""
    fig, ax = _fig()
    a = ax[0, 0]
    a.step(np.degrees(thetas), counts, where="post", lw=1.2)
    for th in exceptional:
        a.axvline(math.degrees(th), color="C3", lw=0.6, ls=":")
    a.set_xlabel("theta (deg)")
    a.set_ylabel("number of real eigenvalues")
    return fig


def exceptional_figure(eps):
    fig, ax = _fig()
    a = ax[0, 0]
    th = [math.degrees(e["theta"]) for e in eps]
    E = [e["E"] for e in eps]
    a.plot(th, E, "o-", lw=1.0, ms=4)
    for e, t, en in zip(eps, th, E):
        a.annotate(str(e["ell"]), (t, en), textcoords="offset points", xytext=(4, 4))
    a.set_xlabel("theta_l (deg)")
    a.set_ylabel("E_l L^2")
    return fig


def spectrum_figure(real, complex_pairs=(), title=None, funcs=None):
    """Eigenvalues in the complex plane and, optionally, eigenfunction samples."""
    ncols = 2 if funcs else 1
    fig, ax = _fig(1, ncols, size=(4.2 * ncols, 3.4))
    a = ax[0, 0]
    a.plot(np.real(real), np.zeros(len(real)), "o", ms=4, label="real")
    if len(complex_pairs):
        z = np.asarray(complex_pairs, dtype=complex)
        a.plot(z.real, z.imag, "x", ms=5, color="C3", label="complex")
    a.axhline(0, color="0.5", lw=0.5)
    a.set_xlabel("Re E")
    a.set_ylabel("Im E")
    a.legend()
    if title:
        a.set_title(title)
    if funcs:
        b = ax[0, 1]
        for k, (x, y) in enumerate(funcs):
            y = np.asarray(y)
            b.plot(x, y.real, lw=1.0, color=f"C{k}", label=f"Re psi_{k + 1}")
            b.plot(x, y.imag, lw=0.8, ls="--", color=f"C{k}")
        b.set_xlabel("x")
        b.legend()
    return fig


def scan_figure(E, values, zeros=(), ylabel="|Delta(E)|", log=True):
    fig, ax = _fig()
    a = ax[0, 0]
    v = np.abs(values) if log else np.asarray(values)
    a.plot(E, v, lw=1.0)
    if log:
        a.set_yscale("log")
    for z in zeros:
        a.axvline(z, color="C3", lw=0.6, ls=":")
    a.set_xlabel("E")
    a.set_ylabel(ylabel)
    return fig


def phi2_figure(lam, values, zeros=(), clip=50.0):
    """Phi_2 on the real axis; poles are clipped for readability."""
    fig, ax = _fig()
    a = ax[0, 0]
    v = np.clip(np.asarray(values, dtype=float), -clip, clip)
    a.plot(lam, v, lw=1.0)
    a.axhline(0, color="0.5", lw=0.5)
    a.plot(zeros, np.zeros(len(zeros)), "o", color="C3", ms=4)
    a.set_xlabel("lambda")
    a.set_ylabel("Phi_2")
    return fig


def matrices_figure(mats):
    """Heat maps of |M_ij| for a dict of small matrices."""
    names = list(mats)
    n = len(names)
    ncols = min(n, 4)
    nrows = int(math.ceil(n / ncols))
    fig, ax = _fig(nrows, ncols, size=(2.3 * ncols, 2.2 * nrows))
    for k, a in enumerate(ax.ravel()):
        if k >= n:
            a.set_axis_off()
            continue
        M = np.abs(np.asarray(mats[names[k]], dtype=complex))
        a.imshow(M, cmap="viridis")
        a.grid(False)
        a.set_title(names[k])
        a.set_xticks(range(M.shape[1]))
        a.set_yticks(range(M.shape[0]))
        for (i, j), v in np.ndenumerate(M):
            a.text(j, i, f"{v:.3g}", ha="center", va="center", fontsize=7, color="w")
    return fig
