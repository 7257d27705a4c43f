"""PT-symmetric contours given as graphs z = x + i f(x) over the real axis.

Provides the smoothed wedge profile, the coefficient function
g(x) = 1/(1 + i f'(x)), the arc-length diffeomorphism between the real
line and the contour, and the arc-length inner product on the contour.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, NumericError

_GL_X, _GL_W = leggauss(15)


@dataclass(frozen=True)
class ContourProfile:
    """Contour height ``f`` with its analytic first and second derivatives.

    ``kind`` is ``"wedge"`` or ``"custom"``; ``theta``/``epsilon`` are only
    meaningful for wedges. ``breakpoints`` lists abscissae where ``ddf`` is
    not smooth (used to split quadrature panels).
    """

    f: Callable
    df: Callable
    ddf: Callable
    kind: str = "custom"
    theta: float | None = None
    epsilon: float | None = None
    breakpoints: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x + 1j * self.f(x)


def wedge_profile(theta, epsilon=1e-2):
    """Wedge x(1 - i sign(x) tan(theta)) smoothed to C^2 on |x| <= epsilon."""
    theta = float(theta)
    epsilon = float(epsilon)
    if not (0.0 <= theta < math.pi / 2):
        raise DomainError(f"theta={theta!r} outside [0, pi/2)")
    if not epsilon > 0.0:
        raise DomainError(f"epsilon={epsilon!r} must be positive")
    t = math.tan(theta)
    eps = epsilon

    def f(x):
        x = np.asarray(x, dtype=float)
        s = x / eps
        inner = eps * t / 8.0 * (s**4 - 6.0 * s**2 - 3.0)
        return np.where(np.abs(x) >= eps, -np.abs(x) * t, inner)

    def df(x):
        x = np.asarray(x, dtype=float)
        s = x / eps
        inner = t / 2.0 * (s**3 - 3.0 * s)
        return np.where(np.abs(x) >= eps, -np.sign(x) * t, inner)

    def ddf(x):
        x = np.asarray(x, dtype=float)
        s = x / eps
        inner = 3.0 * t / (2.0 * eps) * (s**2 - 1.0)
        return np.where(np.abs(x) >= eps, 0.0, inner)

    return ContourProfile(f, df, ddf, kind="wedge", theta=theta, epsilon=eps,
                          breakpoints=(-eps, 0.0, eps))


def custom_profile(f, df, ddf, breakpoints=()):
    """Profile from user-supplied analytic ``f``, ``f'`` and ``f''``.

    Numerical differentiation is deliberately not offered: ``f''`` enters
    the real-line Hamiltonian directly.
    """
    if df is None or ddf is None:
        raise DomainError("custom profiles need analytic df and ddf")
    return ContourProfile(f, df, ddf, kind="custom",
                          breakpoints=tuple(sorted(breakpoints)))


def flat_profile():
    return wedge_profile(0.0, 1.0)


def g_factor(profile, x):
    """g(x) = 1/(1 + i f'(x)); never singular because f' is real."""
    return 1.0 / (1.0 + 1j * profile.df(x))


def is_even(profile, grid=None, tol=0.0):
    if grid is None:
        grid = np.linspace(0.0, 10.0, 201)
    grid = np.abs(np.asarray(grid, dtype=float))
    return bool(np.max(np.abs(profile.f(-grid) - profile.f(grid))) <= tol)


# --- adaptive Gauss-Legendre -------------------------------------------------

def _gl(fun, a, b):
    h = 0.5 * (b - a)
    return h * np.dot(_GL_W, fun(a + h * (_GL_X + 1.0)))


def _adaptive_panels(fun, a, b, tol, max_depth=60):
    """Split [a, b] until each 15-point panel agrees with its halves.

    Returns panel edges and per-panel integrals; the absolute error budget
    ``tol`` is shared in proportion to panel width.
    """
    out = []
    stack = [(a, b, _gl(fun, a, b), 0)]
    width = b - a
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl(fun, lo, mid)
        right = _gl(fun, mid, hi)
        local = tol * (hi - lo) / width
        if abs(left + right - whole) <= local or depth >= max_depth:
            out.append((lo, mid, left))
            out.append((mid, hi, right))
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    out.sort()
    return out


def adaptive_quad(fun, a, b, tol=1e-12, breakpoints=()):
    """Integrate a vectorized ``fun`` over [a, b] with 15-point GL panels."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    cuts = [a] + [p for p in breakpoints if a < p < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        seg_tol = tol * (hi - lo) / (b - a)
        total = total + sum(p[2] for p in _adaptive_panels(fun, lo, hi, seg_tol))
    return sign * total


# --- arc length --------------------------------------------------------------

class ArcLengthMap:
    """Arc length F(x) = int_0^x sqrt(1 + f'(s)^2) ds and its inverse.

    F is tabulated once on [-extent, extent] by adaptive panels; evaluation
    inside a panel reuses a 15-point rule on the sub-interval, so every
    value carries the construction tolerance. Immutable after construction.
    """

    def __init__(self, profile, tol=1e-12, extent=50.0):
        if not tol > 0:
            raise DomainError("tol must be positive")
        self.profile = profile
        self.quadrature_tol = float(tol)
        self.extent = float(extent)
        self._speed = lambda x: np.sqrt(1.0 + profile.df(x) ** 2)
        self._mirror = is_even(profile)
        self._pos = self._table(0.0, self.extent)
        self._neg = None if self._mirror else self._table(0.0, -self.extent)

    def _table(self, a, b):
        lo, hi = min(a, b), max(a, b)
        cuts = [lo] + [p for p in self.profile.breakpoints if lo < p < hi] + [hi]
        panels = []
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            seg_tol = self.quadrature_tol * (c1 - c0) / (hi - lo)
            panels.extend(_adaptive_panels(self._speed, c0, c1, seg_tol))
        if b < a:
            # store in order of increasing distance from the origin
            panels = [(p1, p0, -val) for (p0, p1, val) in reversed(panels)]
        starts = np.array([p[0] for p in panels])
        ends = np.array([p[1] for p in panels])
        cum = np.concatenate([[0.0], np.cumsum([p[2] for p in panels])])
        return starts, ends, cum

    def _eval_side(self, table, x):
        starts, ends, cum = table
        forward = ends[-1] > starts[0]
        if forward:
            idx = np.searchsorted(ends, x, side="left")
        else:
            idx = np.searchsorted(-ends, -x, side="left")
        idx = np.clip(idx, 0, len(starts) - 1)
        a = starts[idx]
        h = 0.5 * (x - a)
        nodes = a[:, None] + h[:, None] * (_GL_X[None, :] + 1.0)
        part = h * (self._speed(nodes) @ _GL_W)
        return cum[idx] + part

    def F(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(np.abs(x) > self.extent):
            raise DomainError(f"|x| exceeds tabulated extent {self.extent}")
        out = np.empty_like(x)
        pos = x >= 0
        if np.any(pos):
            out[pos] = self._eval_side(self._pos, x[pos])
        if np.any(~pos):
            if self._mirror:
                out[~pos] = -self._eval_side(self._pos, -x[~pos])
            else:
                out[~pos] = self._eval_side(self._neg, x[~pos])
        return out[0] if scalar else out

    def dF(self, x):
        return self._speed(np.asarray(x, dtype=float))

    def Finv(self, s, max_iter=100):
        """Newton inversion of F with bisection safeguard.

        Because F' >= 1 and F(0) = 0, the preimage of s lies between 0 and s,
        which gives a bracket for free.
        """
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s).copy()
        lo = np.minimum(0.0, s)
        hi = np.maximum(0.0, s)
        hi = np.minimum(hi, self.extent)
        lo = np.maximum(lo, -self.extent)
        slope = self.F(self.extent) / self.extent
        x = np.clip(s / slope, lo, hi)
        done = np.zeros(s.shape, dtype=bool)
        tol = self.quadrature_tol
        for _ in range(max_iter):
            r = self.F(x) - s
            done = np.abs(r) <= tol
            if np.all(done):
                break
            lo = np.where(r < 0, np.maximum(lo, x), lo)
            hi = np.where(r > 0, np.minimum(hi, x), hi)
            step = x - r / self.dF(x)
            bad = (step <= lo) | (step >= hi) | ~np.isfinite(step)
            step = np.where(bad, 0.5 * (lo + hi), step)
            x = np.where(done, x, step)
        else:
            r = self.F(x) - s
            if np.any(np.abs(r) > tol):
                k = int(np.argmax(np.abs(r)))
                raise NumericError(f"arc-length inversion failed at rx={s[k]!r} "
                                   f"(residual {r[k]:.3e})")
        return x[0] if scalar else x

    def G(self, rx):
        """Point on the contour at signed arc length ``rx``."""
        x = self.Finv(rx)
        return x + 1j * self.profile.f(x)

    def Ginv(self, z):
        """Arc length of a contour point (only the real part is used)."""
        return self.F(np.real(z))


def arclength_map(profile, tol=1e-12, extent=50.0):
    return ArcLengthMap(profile, tol=tol, extent=extent)


def map_to_contour(amap, rx):
    return amap.G(rx)


def pushforward(amap, psi):
    """u_G psi: the contour function Psi with Psi(G(rx)) = psi(rx)."""
    return lambda z: psi(amap.Ginv(z))


@dataclass(frozen=True)
class InnerProduct:
    value: complex
    warnings: tuple = field(default_factory=tuple)


def contour_inner_product(amap, Psi, Phi, rx_max, tol=1e-10):
    """<Psi|Phi>_Gamma with the arc-length measure ds.

    The integrand is conj(Psi(G(s))) Phi(G(s)) over s in [-rx_max, rx_max].
    A warning is attached when either function is still above ``tol`` at
    the cut-off.
    """
    notes = []
    ends = amap.G(np.array([-rx_max, rx_max]))
    tail = max(np.max(np.abs(Psi(ends))), np.max(np.abs(Phi(ends))))
    if tail > tol:
        notes.append(f"truncation: |integrand factor| = {tail:.2e} at rx = +/-{rx_max}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)

    def integrand(s):
        shape = s.shape
        z = amap.G(s.ravel())
        return (np.conj(Psi(z)) * Phi(z)).reshape(shape)

    value = adaptive_quad(integrand, -rx_max, rx_max, tol=tol, breakpoints=(0.0,))
    return InnerProduct(complex(value), tuple(notes))


def real_line_inner_product(psi, phi, rx_max, tol=1e-10):
    """Plain <psi|phi> on the real line; the reference side of unitarity."""
    value = adaptive_quad(lambda s: np.conj(psi(s)) * phi(s), -rx_max, rx_max,
                          tol=tol, breakpoints=(0.0,))
    return complex(value)


def sample_profile(profile, xs, amap=None):
    """Columns (x, f, f', f'', Re g, Im g, F) for plotting and CSV output."""
    xs = np.asarray(xs, dtype=float)
    g = g_factor(profile, xs)
    F = amap.F(xs) if amap is not None else np.full_like(xs, np.nan)
    return {
        "x": xs,
        "f": profile.f(xs),
        "df": profile.df(xs),
        "ddf": profile.ddf(xs),
        "re_g": g.real,
        "im_g": g.imag,
        "F": F,
    }
