"""Complex shooting for H = p^2 + x^2 (ix)^nu on its anti-Stokes wedge.

On the wedge with half-angle theta_nu the problem splits into two copies
of the half-line equation

    -y'' + x^N y = lam y,   N = nu + 2,   lam_+- = e^{-+2i theta_nu} E,

coupled at the tip by continuity and y_-'(0) = -e^{2ik theta} y_+'(0)
(k = 2 for the default matching, k = 1 for the analytic one). Energies are
the zeros of the mismatch

    D(E) = m_-(e^{2i theta} E) + e^{2ik theta} m_+(e^{-2i theta} E),

m = y'(0)/y(0) the log-derivative of the decaying solution. The module
also builds the Weyl-function oracle from the Neumann spectrum of the
half-line problem.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import gamma

from . import _ode
from .errors import DomainError, NumericError
from .realize import matching_condition, matching_order, matching_residual, theta_nu
from .spectrum import SpectrumReport

_GL_X, _GL_W = leggauss(15)


@dataclass(frozen=True)
class MonomialProblem:
    """``nu`` in (-2, inf); ``xmax`` fixes the truncation radius (None: auto).

    ``budget`` is the number of WKB e-folds between the turning point and
    ``xmax``; ``matching`` selects the tip condition ("double" or "analytic").
    """

    nu: float
    ode_tol: float = 1e-12
    xmax: float | None = None
    budget: float = 40.0
    matching: str = "double"

    def __post_init__(self):
        if not (self.nu > -2 and math.isfinite(self.nu)):
            raise DomainError(f"nu={self.nu!r} must lie in (-2, inf)")
        if not (0 < self.ode_tol < 1e-3):
            raise DomainError("ode_tol must lie in (0, 1e-3)")
        if self.xmax is not None and not self.xmax > 0:
            raise DomainError("xmax must be positive")
        matching_order(self.matching)

    @property
    def N(self):
        return self.nu + 2.0

    @property
    def theta_nu(self):
        return theta_nu(self.nu)

    @property
    def theta_minus(self):
        return math.pi - self.theta_nu

    @property
    def order(self):
        return matching_order(self.matching)


@dataclass
class HalfLineSolution:
    """Decaying solution of -y'' + x^N y = lam y, scaled so y(xmax) = 1.

    ``norms`` holds (int |y|^2, int |y'|^2, int x^N |y|^2) over [0, xmax].
    Samples (if requested) are on ascending ``x``.
    """

    lam: complex
    y0: complex
    dy0: complex
    logderiv: complex
    xmax: float
    norms: tuple
    nsteps: int
    decay_checked: bool
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    y: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    dy: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))

    @property
    def boundary_norm(self):
        return math.hypot(abs(self.y0), abs(self.dy0))


def wkb_radius(N, lam, budget=40.0):
    """Smallest x with int_{x_t}^{x} sqrt(s^N - Re lam) ds >= budget."""
    lr = max(float(np.real(lam)), 0.0)
    xt = lr ** (1.0 / N) if lr > 0 else 0.0
    # coarse march, then a few Newton refinements on the integral
    x, acc = xt, 0.0
    dx = 0.02 * max(xt, 1.0)
    while acc < budget:
        xm = x + 0.5 * dx
        acc += math.sqrt(max(xm**N - lr, 0.0)) * dx
        x += dx
        dx *= 1.05
    return x


def solve_half_line(prob, lam, samples=None, xmax=None, max_steps=2_000_000):
    """Integrate the decaying solution from the truncation radius to 0.

    The start uses first-order WKB data y'/y = -sqrt(q) - N x^{N-1}/(4q),
    q = x^N - lam. ``samples`` are abscissae in [0, xmax] where y, y' are
    returned via dense output.
    """
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise DomainError("lambda must be finite")
    N = prob.N
    if xmax is None:
        xmax = prob.xmax if prob.xmax is not None else wkb_radius(N, lam, prob.budget)
    q = xmax**N - lam
    while q.real <= 0:
        xmax *= 1.5
        q = xmax**N - lam
    yp = -cmath.sqrt(q) - N * xmax ** (N - 1) / (4 * q)
    if samples is None:
        t_eval = np.linspace(xmax, 0.0, 65)[1:-1]
        keep = False
    else:
        samples = np.asarray(samples, dtype=float)
        if np.any(samples < 0) or np.any(samples > xmax):
            raise DomainError("samples must lie in [0, xmax]")
        t_eval = np.sort(samples)[::-1]
        keep = True
    s, out, nsteps, status = _ode.integrate_inward(
        N, lam, xmax, 1.0, yp, rtol=prob.ode_tol, t_eval=t_eval, max_steps=max_steps)
    if status == _ode.STATUS_UNDERFLOW:
        raise NumericError(f"step-size underflow at lambda={lam}")
    if status == _ode.STATUS_MAXSTEPS:
        raise NumericError(f"step budget exhausted at lambda={lam}")
    y0, dy0 = complex(s[0]), complex(s[1])
    norms = (-s[2].real, -s[3].real, -s[4].real)
    ymax = max(abs(y0), float(np.max(np.abs(out[:, 0]), initial=0.0)), 1.0)
    decay = 1.0 <= 1e-12 * ymax
    logd = dy0 / y0 if y0 != 0 else complex(np.inf)
    sol = HalfLineSolution(lam, y0, dy0, logd, xmax, norms, int(nsteps), bool(decay))
    if keep:
        sol.x = t_eval[::-1].copy()
        sol.y = out[::-1, 0].copy()
        sol.dy = out[::-1, 1].copy()
    return sol


# --- matched problem ---------------------------------------------------------

def _lams(prob, E):
    th = prob.theta_nu
    return cmath.exp(-2j * th) * E, cmath.exp(2j * th) * E


def halves(prob, E, **kw):
    """(y_+, y_-) half-line solutions for energy E.

    For real E the two spectral parameters are conjugate, and so are the
    solutions; only one integration is done.
    """
    lp, lm = _lams(prob, E)
    sp = solve_half_line(prob, lp, **kw)
    if complex(E).imag == 0.0 and not kw:
        sm = HalfLineSolution(lm, sp.y0.conjugate(), sp.dy0.conjugate(),
                              sp.logderiv.conjugate(), sp.xmax, sp.norms, sp.nsteps,
                              sp.decay_checked)
    else:
        sm = solve_half_line(prob, lm, **kw)
    return sp, sm


def mismatch(prob, E):
    """D(E) = m_-(e^{2i theta} E) + e^{2ik theta} m_+(e^{-2i theta} E)."""
    sp, sm = halves(prob, E)
    ph = cmath.exp(2j * prob.order * prob.theta_nu)
    return complex(sm.logderiv + ph * sp.logderiv)


def determinant(prob, E):
    """Pole-free form of D: (y_-' y_+ + e^{2ik theta} y_- y_+') / (n_+ n_-)."""
    sp, sm = halves(prob, E)
    ph = cmath.exp(2j * prob.order * prob.theta_nu)
    return complex((sm.dy0 * sp.y0 + ph * sm.y0 * sp.dy0)
                   / (sp.boundary_norm * sm.boundary_norm))


def real_reduction(prob, E):
    """Real scan function W(E) = Re(e^{ik theta} conj(y) y') / (|y|^2 + |y'|^2).

    For real E, determinant = 2 e^{ik theta} W, so W changes sign at every
    real eigenvalue and has no poles.
    """
    sp = solve_half_line(prob, cmath.exp(-2j * prob.theta_nu) * E)
    ph = cmath.exp(1j * prob.order * prob.theta_nu)
    return float((ph * sp.y0.conjugate() * sp.dy0).real / sp.boundary_norm**2)


@dataclass
class MonomialEigenpair:
    """Eigenvalue with tip data of psi normalized to psi(0) = 1.

    For states with psi(0) = 0 (possible only at nu = 0) the normalization
    is psi'(0+) = 1 and ``odd`` is set. ``x`` samples the scaled coordinate
    on [0, cut]; ``psi_plus[i] = psi(x[i])`` and ``psi_minus[i] = psi(-x[i])``.
    """

    E: complex
    psi0: complex
    dpsi0_minus: complex
    dpsi0_plus: complex
    D: complex
    delta: complex
    matching_residual: float
    odd: bool = False
    x: np.ndarray | None = None
    psi_plus: np.ndarray | None = None
    psi_minus: np.ndarray | None = None
    dpsi_plus: np.ndarray | None = None
    dpsi_minus: np.ndarray | None = None
    norms_plus: tuple = ()
    norms_minus: tuple = ()
    xmax: float = 0.0

    @property
    def is_real(self):
        return abs(complex(self.E).imag) <= 1e-10 * max(1.0, abs(self.E))


def _sample_grid(xmax, panel=0.05):
    """Composite 15-point Gauss-Legendre nodes/weights on [0, xmax]."""
    n = max(8, int(math.ceil(xmax / panel)))
    edges = np.linspace(0.0, xmax, n + 1)
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * (_GL_X[None, :] + 1) + a).ravel()
    w = (0.5 * (b - a) * _GL_W[None, :]).ravel()
    return x, w


def assemble_pair(prob, E, with_samples=True):
    """Eigenpair data for a converged energy."""
    E = complex(E)
    lp, lm = _lams(prob, E)
    xm = max(wkb_radius(prob.N, lp, prob.budget), wkb_radius(prob.N, lm, prob.budget))
    if prob.xmax is not None:
        xm = prob.xmax
    kw = {}
    if with_samples:
        x, _ = _sample_grid(xm)
        kw = {"samples": x, "xmax": xm}
    sp = solve_half_line(prob, lp, **kw)
    sm = solve_half_line(prob, lm, **kw)
    ph = cmath.exp(2j * prob.order * prob.theta_nu)
    delta = (sm.dy0 * sp.y0 + ph * sm.y0 * sp.dy0) / (sp.boundary_norm * sm.boundary_norm)
    odd = abs(sp.y0) <= 1e-8 * sp.boundary_norm
    scale_p = sp.dy0 if odd else sp.y0
    scale_m = -sm.dy0 / ph if odd else sm.y0
    # psi_+(x) = y_+(x)/y_+(0); psi_-(-x) = y_-(x)/y_-(0)
    psi0 = 0.0 if odd else 1.0
    dp = sp.dy0 / scale_p
    dm = -sm.dy0 / scale_m
    D = sm.logderiv + ph * sp.logderiv if not odd else complex(np.inf)
    mc = matching_condition(prob.theta_nu, convention=prob.order)
    res = abs(matching_residual(mc, psi0, psi0, dm, dp))
    pair = MonomialEigenpair(E, psi0, dm, dp, complex(D), complex(delta), res, odd,
                             xmax=xm, norms_plus=sp.norms, norms_minus=sm.norms)
    if with_samples:
        pair.x = sp.x
        pair.psi_plus = sp.y / scale_p
        pair.dpsi_plus = sp.dy / scale_p
        pair.psi_minus = sm.y / scale_m
        pair.dpsi_minus = -sm.dy / scale_m
        pair.norms_plus = tuple(n / abs(scale_p) ** 2 for n in sp.norms)
        pair.norms_minus = tuple(n / abs(scale_m) ** 2 for n in sm.norms)
    return pair


def _secant(fun, e0, e1, tol=1e-12, max_iter=40, bound=math.inf):
    """Complex secant; None on divergence, leaving |E| <= bound, or failure."""
    try:
        f0, f1 = fun(e0), fun(e1)
    except NumericError:
        return None
    for _ in range(max_iter):
        if f1 == f0:
            break
        e2 = e1 - f1 * (e1 - e0) / (f1 - f0)
        if not (math.isfinite(e2.real) and math.isfinite(e2.imag)) or abs(e2) > bound:
            return None
        e0, f0 = e1, f1
        try:
            e1, f1 = e2, fun(e2)
        except NumericError:
            return None
        if abs(e1 - e0) <= tol * (1 + abs(e1)) or abs(f1) <= 1e-15:
            return e1
    return e1 if abs(f1) <= 1e-11 else None


def _dedupe(values, tol=1e-6):
    out = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        if all(abs(v - w) > tol * max(1.0, abs(v)) for w in out):
            out.append(v)
    return out


def _lattice_seeds(det, E_max, spacing=1.5):
    """Local minima of |determinant| on a coarse upper-half-plane lattice."""
    re = np.arange(0.5 * spacing, E_max + spacing, spacing)
    im = np.arange(0.5 * spacing, 0.75 * E_max + spacing, spacing)
    mag = np.full((len(re), len(im)), np.inf)
    for i, a in enumerate(re):
        for j, b in enumerate(im):
            try:
                mag[i, j] = abs(det(complex(a, b)))
            except NumericError:
                pass
    out = []
    for i in range(len(re)):
        for j in range(len(im)):
            nb = mag[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if np.isfinite(mag[i, j]) and mag[i, j] <= nb.min():
                out.append(complex(re[i], im[j]))
    return out


def eigen_search(prob, seeds=None, E_max=20.0, step=0.25, complex_seeds=True,
                 with_samples=False):
    """Eigenvalues of the matched wedge problem.

    Real eigenvalues come from sign changes of the pole-free real reduction
    on (0, E_max] (step ``step``) refined by Brent's method; complex ones
    from secant iteration on the normalized determinant started on a 5x5
    grid around every real-axis minimum of |determinant|, at local minima
    of |determinant| on a coarse complex lattice, and from any
    caller-supplied ``seeds``. Roots are deduplicated within 1e-6.
    """
    notes = []
    th = prob.theta_nu
    ph1 = cmath.exp(1j * prob.order * th)
    found_real = []
    grid = np.arange(0.0, E_max + 0.5 * step, step)
    grid[0] = 1e-9
    W = np.array([real_reduction(prob, E) for E in grid])
    for a, b, fa, fb in zip(grid[:-1], grid[1:], W[:-1], W[1:]):
        if fa == 0.0:
            found_real.append(a)
        elif fa * fb < 0:
            found_real.append(brentq(lambda e: real_reduction(prob, e), a, b,
                                     xtol=1e-13, rtol=1e-14))
    det = lambda e: determinant(prob, e)
    candidates = []
    if complex_seeds and th != 0.0:
        mags = np.abs(W)
        for i in range(1, len(grid) - 1):
            if mags[i] < mags[i - 1] and mags[i] <= mags[i + 1]:
                e = grid[i]
                if any(abs(e - r) < 2 * step for r in found_real):
                    continue
                w = max(2.0, e)
                for dr in np.linspace(-0.5 * w, 0.5 * w, 5):
                    for di in np.linspace(0.2 * w, w, 5):
                        candidates.append(complex(e + dr, di))
        candidates.extend(_lattice_seeds(det, E_max))
    if seeds is not None:
        candidates.extend(complex(s) for s in seeds)
    roots = []
    for s in candidates:
        r = _secant(det, s, s * (1 + 1e-4) + 1e-4j, bound=4 * E_max + 10)
        if r is None:
            notes.append(f"secant from seed {s} did not converge")
            continue
        if abs(r) > 4 * E_max + 10 or r.real < -1e-9:
            continue
        roots.append(r)
    cplx = []
    for r in _dedupe(roots):
        if abs(r.imag) <= 1e-8 * max(1.0, abs(r)):
            if not any(abs(r.real - e) <= 1e-6 * max(1.0, e) for e in found_real):
                found_real.append(r.real)
        else:
            cplx.append(r)
    # complete conjugate partners (the spectrum is closed under conjugation)
    for r in list(cplx):
        if not any(abs(r.conjugate() - c) <= 1e-6 * abs(r) for c in cplx):
            rc = _secant(det, r.conjugate(), r.conjugate() * (1 + 1e-6),
                         bound=4 * E_max + 10)
            if rc is not None:
                cplx.append(rc)
    cplx = _dedupe(cplx)
    reals = sorted(float(np.real(e)) for e in _dedupe([complex(e) for e in found_real]))
    pairs = []
    for e in reals:
        p = assemble_pair(prob, e, with_samples=with_samples)
        if abs(p.delta) > 1e-9:
            notes.append(f"real root {e} has |determinant| = {abs(p.delta):.2e}")
        pairs.append(p)
    for c in cplx:
        pairs.append(assemble_pair(prob, c, with_samples=with_samples))
    worst = max((abs(p.D) for p in pairs if not p.odd), default=0.0)
    return SpectrumReport(
        real=reals,
        complex_pairs=[complex(c) for c in cplx],
        count=len(reals),
        pairs=pairs,
        diagnostics={"max_abs_D": float(worst), "notes": notes, "theta_nu": th,
                     "matching": prob.matching, "phase": complex(ph1)},
    )


# --- Lemma and identity checks ----------------------------------------------

@dataclass
class LemmaReport:
    skipped: bool
    note: str = ""
    psi0_ratio: float = math.nan
    dpsi_ratio: tuple = (math.nan, math.nan)
    identity_residual: tuple = (math.nan, math.nan)
    arg_dpsi: tuple = (math.nan, math.nan)
    arg_expected: tuple = (math.nan, math.nan)
    arg_error_mod_pi: tuple = (math.nan, math.nan)
    arg_error_mod_2pi: tuple = (math.nan, math.nan)

    @property
    def lemma_ok(self):
        return (self.psi0_ratio >= 1e-3 and min(self.dpsi_ratio) >= 1e-3)

    @property
    def identity_ok(self):
        return max(self.identity_residual) <= 1e-5

    @property
    def arg_ok(self):
        return max(self.arg_error_mod_pi) <= 1e-5


def expected_tip_args(nu):
    """arg psi'(0+-) = (pi/2)(4 + (1 -+ 2) nu)/(4 + nu) for real E."""
    return (math.pi / 2 * (4 + 3 * nu) / (4 + nu),
            math.pi / 2 * (4 - nu) / (4 + nu))


def _ang(a, b, period):
    return abs((a - b + period / 2) % period - period / 2)


def lemma_checks(prob, pair):
    """Numerical form of the tip Lemma, the energy identity and the tip phases.

    The identity is evaluated by Gauss-Legendre quadrature on the sampled
    halves; ``pair`` must come from ``assemble_pair(..., with_samples=True)``.
    The phase check is reported modulo pi (the sign of the real psi(0) is
    free under PT) and modulo 2 pi with psi(0) = +1.
    """
    if prob.nu == 0:
        return LemmaReport(skipped=True, note="Lemma requires nu != 0")
    if pair.x is None:
        pair = assemble_pair(prob, pair.E, with_samples=True)
    x, w = _sample_grid(pair.xmax)
    if len(x) != len(pair.x) or np.max(np.abs(x - pair.x)) > 1e-12:
        raise DomainError("pair samples are not on the quadrature grid")
    N = prob.N
    th = prob.theta_nu
    E = complex(pair.E)
    maxpsi = max(np.max(np.abs(pair.psi_plus)), np.max(np.abs(pair.psi_minus)))
    maxd = max(np.max(np.abs(pair.dpsi_plus)), np.max(np.abs(pair.dpsi_minus)))
    psi0_ratio = abs(pair.psi0) / maxpsi
    dr = (abs(pair.dpsi0_minus) / maxd, abs(pair.dpsi0_plus) / maxd)
    resid = []
    for sgn, psi, dpsi, d0 in ((+1, pair.psi_plus, pair.dpsi_plus, pair.dpsi0_plus),
                               (-1, pair.psi_minus, pair.dpsi_minus, pair.dpsi0_minus)):
        n0 = np.dot(w, np.abs(psi) ** 2)
        n1 = np.dot(w, np.abs(dpsi) ** 2)
        n2 = np.dot(w, x**N * np.abs(psi) ** 2)
        lam = cmath.exp(-sgn * 2j * th) * E
        lhs = sgn * np.conj(pair.psi0) * d0 + n1 + n2
        rhs = lam * n0
        resid.append(float(abs(lhs - rhs) / max(abs(rhs), n1 + n2)))
    rep = LemmaReport(skipped=False, psi0_ratio=float(psi0_ratio), dpsi_ratio=dr,
                      identity_residual=tuple(resid))
    if pair.is_real:
        got = (cmath.phase(pair.dpsi0_minus), cmath.phase(pair.dpsi0_plus))
        exp = expected_tip_args(prob.nu) if prob.order == 2 else (
            math.pi / 2 + prob.order * th, math.pi / 2 - prob.order * th)
        rep.arg_dpsi = got
        rep.arg_expected = exp
        rep.arg_error_mod_pi = tuple(_ang(g, e, math.pi) for g, e in zip(got, exp))
        rep.arg_error_mod_2pi = tuple(_ang(g, e, 2 * math.pi) for g, e in zip(got, exp))
    return rep


# --- Weyl-function oracle ----------------------------------------------------

@dataclass(frozen=True)
class WeylData:
    nu: float
    neumann_eigs: np.ndarray
    sigmas: np.ndarray

    @property
    def K(self):
        return len(self.neumann_eigs)


def wkb_neumann(N, k):
    """Semiclassical estimate of the k-th Neumann eigenvalue of -y'' + x^N y."""
    B = math.sqrt(math.pi) * gamma(1 + 1 / N) / (2 * gamma(1.5 + 1 / N))
    return ((k - 0.75) * math.pi / B) ** (2 * N / (N + 2))


def _neumann_fn(prob, lam):
    s = solve_half_line(prob, lam)
    return (s.dy0 / s.boundary_norm).real


def weyl_data(prob, K, hard_cap=None):
    """First K Neumann eigenvalues (y'(0) = 0) and the weights sigma_k.

    Roots of y'(0; lam) are bracketed between consecutive semiclassical
    estimates; a bracket without a sign change is subdivided. sigma_k =
    |y(0)|^2 / int_0^inf |y|^2 from the integrator's quadrature channel.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    N = prob.N
    f = lambda lam: _neumann_fn(prob, lam)
    if hard_cap is None:
        hard_cap = 4 * wkb_neumann(N, K + 1) + 10
    edges = [0.0] + [wkb_neumann(N, k + 0.5) for k in range(1, K + 1)]
    roots = []
    a, fa = 1e-12, f(1e-12)
    i = 1
    while len(roots) < K:
        b = edges[i] if i < len(edges) else a + (edges[-1] - edges[-2])
        if b > hard_cap:
            raise NumericError(f"located {len(roots)} of {K} Neumann eigenvalues below {hard_cap}")
        fb = f(b)
        if fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-13, rtol=1e-15))
        else:
            # zero or two roots: subdivide
            sub = np.linspace(a, b, 17)
            fs = [fa] + [f(s) for s in sub[1:-1]] + [fb]
            for s0, s1, g0, g1 in zip(sub[:-1], sub[1:], fs[:-1], fs[1:]):
                if g0 * g1 < 0:
                    roots.append(brentq(f, s0, s1, xtol=1e-13, rtol=1e-15))
        a, fa = b, fb
        i += 1
    lams = np.array(sorted(roots)[:K])
    sig = []
    for lam in lams:
        s = solve_half_line(prob, lam)
        sig.append(abs(s.y0) ** 2 / s.norms[0])
    return WeylData(prob.nu, lams, np.array(sig))


def weyl_m(data, lam, K=None):
    """Truncated Herglotz series m(lam) = -y(0)/y'(0) = sum sigma_k/(lam_k - lam)."""
    K = data.K if K is None else K
    lam = np.asarray(lam, dtype=complex)
    return np.sum(data.sigmas[:K] / (data.neumann_eigs[:K] - lam[..., None]), axis=-1)


def wkb_sigma(N, lam):
    """Semiclassical weight sigma ~ 2 lam^{-1/N} / I_N, I_N = int_0^1 (1-s^N)^{-1/2} ds."""
    I = math.sqrt(math.pi) * gamma(1 + 1 / N) / gamma(0.5 + 1 / N)
    return 2 * np.asarray(lam, dtype=float) ** (-1 / N) / I


@functools.lru_cache(maxsize=64)
def _tail_series(N, K, c, coef, J=60, kbig=200_000):
    """Taylor coefficients T_j of sum_{k>K} sigma_k coef / (E - c lam_k).

    lam_k and sigma_k beyond K are replaced by their semiclassical forms
    (relative error ~1e-6 already at k = 60); terms past ``kbig`` are
    summed as a power-law remainder.
    """
    k = np.arange(K + 1, kbig + 1, dtype=float)
    lam = ((k - 0.75) * math.pi / _wkb_B(N)) ** (2 * N / (N + 2))
    sig = wkb_sigma(N, lam)
    w = 1.0 / (c * lam)
    term = -coef * sig * w
    out = np.empty(J, dtype=complex)
    for j in range(J):
        p = 2 * (N + 1) / (N + 2) + j * 2 * N / (N + 2)
        out[j] = term.sum() + term[-1] * kbig / (p - 1)
        term = term * w
    return out


def _wkb_B(N):
    return math.sqrt(math.pi) * gamma(1 + 1 / N) / (2 * gamma(1.5 + 1 / N))


def _poly(T, lam):
    return np.polyval(T[::-1], np.asarray(lam, dtype=complex))


def _series(data, lam, K, c, coef, tail):
    lk = data.neumann_eigs[:K]
    sk = data.sigmas[:K]
    lam = np.asarray(lam, dtype=complex)
    val = np.sum(sk * coef / (lam[..., None] - c * lk), axis=-1)
    if tail:
        val = val + _poly(_tail_series(data.nu + 2.0, K, c, coef), lam)
    return val


def phi2(data, theta, lam, K=None, order=2, tail=False):
    """Phi_2 at (possibly complex) lam; real for real lam when theta != 0.

    -sum sigma_k [e^{i(k-2)theta}/(lam - e^{-2i theta} lam_k)
                  + e^{-i(k-2)theta}/(lam - e^{2i theta} lam_k)]

    With ``tail`` the terms k > K are added from the semiclassical
    Neumann data (valid for |lam| well below lam_K).
    """
    K = data.K if K is None else K
    a = cmath.exp(1j * (order - 2) * theta)
    return -(_series(data, lam, K, cmath.exp(-2j * theta), a, tail)
             + _series(data, lam, K, cmath.exp(2j * theta), a.conjugate(), tail))


def phi1(data, theta, lam, K=None, order=2, tail=False):
    """Phi_1; purely imaginary for real lam."""
    K = data.K if K is None else K
    b = cmath.exp(-2j * (order - 2) * theta)
    return (_series(data, lam, K, cmath.exp(4j * theta), b, tail)
            - _series(data, lam, K, cmath.exp(-4j * theta), b.conjugate(), tail))


@dataclass
class WeylZeros:
    zeros: list
    shifts: list
    K: int
    K_ref: int | None
    degenerate: bool = False

    def __iter__(self):
        return iter(self.zeros)

    def __len__(self):
        return len(self.zeros)

    @property
    def max_relative_shift(self):
        vals = [s for s in self.shifts if s is not None]
        return max(vals) if vals else math.nan


def _real_zeros(fun, window, n_grid):
    a, b = window
    xs = np.linspace(a, b, n_grid)
    vs = fun(xs)
    scale = float(np.max(np.abs(vs))) if len(vs) else 1.0
    out = []
    for x0, x1, v0, v1 in zip(xs[:-1], xs[1:], vs[:-1], vs[1:]):
        if v0 == 0.0:
            out.append(float(x0))
        elif v0 * v1 < 0:
            r = brentq(lambda s: float(fun(np.array([s]))[0]), x0, x1, xtol=1e-13, rtol=1e-14)
            # a sign change through a pole is not a zero
            if abs(fun(np.array([r]))[0]) <= 1e-6 * max(1.0, scale):
                out.append(r)
    return out


def _with_shifts(zeros, ref):
    shifts = []
    for z in zeros:
        if not ref:
            shifts.append(None)
            continue
        near = min(ref, key=lambda r: abs(r - z))
        shifts.append(abs(near - z) / abs(z))
    return shifts


def _check_window(data, window, K):
    a, b = window
    if not (0 <= a < b):
        raise DomainError("window must satisfy 0 <= a < b")
    if b > 0.5 * data.neumann_eigs[K - 1]:
        raise DomainError(f"window end {b} exceeds lambda_K/2 = {0.5 * data.neumann_eigs[K - 1]:.4g}")


def weyl_phi2_zeros(data, theta, window, K=None, order=2, n_grid=4001, tail=False):
    """Real zeros of the truncated Phi_2 with a K vs 2K shift estimate.

    ``shifts`` holds, per zero, the relative distance to the nearest zero
    of the 2K series (None when the data holds fewer than 2K terms).
    """
    K = data.K if K is None else K
    _check_window(data, window, K)
    fun = lambda x: phi2(data, theta, x, K, order, tail).real
    zeros = _real_zeros(fun, window, n_grid)
    K2 = min(2 * K, data.K)
    ref = None
    if K2 > K:
        ref = _real_zeros(lambda x: phi2(data, theta, x, K2, order, tail).real, window, n_grid)
    return WeylZeros(zeros, _with_shifts(zeros, ref), K, K2 if K2 > K else None)


def weyl_phi1_zeros(data, theta, window, K=None, order=2, n_grid=4001, tail=False):
    """Real zeros of Im Phi_1 (on-ray candidates); flagged degenerate at theta = 0."""
    K = data.K if K is None else K
    if theta == 0.0 or data.nu == 0:
        return WeylZeros([], [], K, None, degenerate=True)
    _check_window(data, window, K)
    fun = lambda x: phi1(data, theta, x, K, order, tail).imag
    zeros = _real_zeros(fun, window, n_grid)
    K2 = min(2 * K, data.K)
    ref = None
    if K2 > K:
        ref = _real_zeros(lambda x: phi1(data, theta, x, K2, order, tail).imag, window, n_grid)
    return WeylZeros(zeros, _with_shifts(zeros, ref), K, K2 if K2 > K else None)
