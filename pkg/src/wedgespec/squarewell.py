"""Wedge-shaped infinite square well of arc length L.

The well occupies |x~| <= L/2 on the two rays of a wedge with half-angle
theta. With u = cos(theta) L sqrt(E) and t = tan(theta), real eigenvalues
solve the secular equation

    F_D(u) = t sinh(t u) - sin(u) = 0      (Dirichlet walls)
    F_N(u) = t sinh(t u) + sin(u) = 0      (Neumann walls)

Root search is exhaustive: on every interval where the sine term has a
fixed sign, F is strictly convex, so its minimum is found by solving
F'(u) = 0 (monotone) and each side of the minimum holds at most one root.
Real roots therefore live in u <= U_cap = arcsinh(1/t)/t and come in pairs
that merge at exceptional angles theta_l.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, fsolve

from .errors import DomainError, NumericError, PreconditionError
from .spectrum import SpectrumReport

_XTOL = 1e-14
# |min F| below this counts as tangency (a coalesced, defective root)
_TANGENT_TOL = 1e-13
# theta this close to pi/4 hosts the Dirichlet zero mode; the small root
# u ~ sqrt(6 (pi/4 - theta)) of the first interval is then the same state
_ZERO_MODE_ATOL = 1e-14
_ZERO_MODE_U = 1e-6


@dataclass(frozen=True)
class WellProblem:
    theta: float
    L: float = 1.0
    bc: str = "dirichlet"

    def __post_init__(self):
        if not (0.0 <= self.theta < math.pi / 2):
            raise DomainError(f"theta={self.theta!r} outside [0, pi/2)")
        if not self.L > 0:
            raise DomainError(f"L={self.L!r} must be positive")
        if self.bc not in ("dirichlet", "neumann"):
            raise DomainError(f"unknown boundary condition {self.bc!r}")

    @property
    def sign(self):
        # F = t sinh(tu) - sign * sin(u)
        return 1.0 if self.bc == "dirichlet" else -1.0


def secular(u, theta, bc="dirichlet"):
    t = math.tan(theta)
    s = 1.0 if bc == "dirichlet" else -1.0
    with np.errstate(over="ignore"):
        return t * np.sinh(t * np.asarray(u)) - s * np.sin(u)


def secular_du(u, theta, bc="dirichlet"):
    t = math.tan(theta)
    s = 1.0 if bc == "dirichlet" else -1.0
    with np.errstate(over="ignore"):
        return t * t * np.cosh(t * np.asarray(u)) - s * np.cos(u)


def u_cap(theta):
    t = math.tan(theta)
    return math.asinh(1.0 / t) / t


def energy_from_u(u, theta, L):
    return (u / (L * math.cos(theta))) ** 2


def u_from_energy(E, theta, L):
    return math.cos(theta) * L * cmath.sqrt(E)


@dataclass(frozen=True)
class WellEigenpair:
    """Closed-form eigenfunction on the wedge well.

    On the right ray psi = c_p e^{i w_p x} + d_p e^{-i w_p x} with
    w_p = e^{-i theta} sqrt(E), on the left ray the same with w_m =
    e^{i theta} sqrt(E). ``kind`` is ``"linear"`` for the Dirichlet zero
    mode at theta = pi/4 (psi = c (|x| - L/2)). ``defective`` marks a root
    found at tangency (an exceptional point).
    """

    E: float
    u: float
    theta: float
    L: float
    bc: str
    norm: complex = 1.0
    kind: str = "exp"
    defective: bool = False

    @property
    def omega(self):
        k = cmath.sqrt(self.E)
        return cmath.exp(-1j * self.theta) * k, cmath.exp(1j * self.theta) * k

    def coefficients(self):
        """(c_p, d_p, c_m, d_m) for the exponential form."""
        wp, wm = self.omega
        Op, Om = wp * self.L, wm * self.L
        N = self.norm
        if self.kind == "linear":
            raise NumericError("linear zero mode has no exponential coefficients")
        # psi(0) = 0 (odd states at theta = 0): drop the vanishing denominator,
        # the relative sign of the rays then comes from the derivative matching
        if self.bc == "dirichlet" and abs(1 - cmath.exp(1j * Op)) < 1e-8:
            hp, hm = cmath.exp(0.5j * Op), cmath.exp(0.5j * Om)
            return (-N / (2j * hp), N * hp / 2j, -N * hm / 2j, N / (2j * hm))
        if self.bc == "neumann" and abs(1 + cmath.exp(1j * Op)) < 1e-8:
            hp, hm = cmath.exp(0.5j * Op), cmath.exp(0.5j * Om)
            return (N / (2 * hp), N * hp / 2, -N * hm / 2, -N / (2 * hm))
        if self.bc == "dirichlet":
            return (N / (1 - cmath.exp(1j * Op)), N / (1 - cmath.exp(-1j * Op)),
                    N / (1 - cmath.exp(-1j * Om)), N / (1 - cmath.exp(1j * Om)))
        if self.E == 0.0:
            return N, 0.0, N, 0.0
        return (N / (1 + cmath.exp(1j * Op)), N / (1 + cmath.exp(-1j * Op)),
                N / (1 + cmath.exp(-1j * Om)), N / (1 + cmath.exp(1j * Om)))

    def with_norm(self, norm):
        return WellEigenpair(self.E, self.u, self.theta, self.L, self.bc, norm,
                             self.kind, self.defective)


def _interval_min(lo, hi, theta, bc):
    """Minimum of the convex F on [lo, hi] via the monotone F'."""
    d_lo = secular_du(lo, theta, bc)
    d_hi = secular_du(hi, theta, bc)
    if d_lo >= 0:
        return lo, float(secular(lo, theta, bc))
    if d_hi <= 0:
        return hi, float(secular(hi, theta, bc))
    um = brentq(secular_du, lo, hi, args=(theta, bc), xtol=_XTOL, rtol=1e-15)
    return um, float(secular(um, theta, bc))


def _roots_in_interval(lo, hi, theta, bc, include_lo=True):
    """Roots of F on a convexity interval; returns list of (u, defective)."""
    f = lambda u: float(secular(u, theta, bc))
    um, fm = _interval_min(lo, hi, theta, bc)
    if fm > _TANGENT_TOL:
        return []
    if fm >= -_TANGENT_TOL and um not in (lo, hi):
        return [(um, True)]
    out = []
    flo = f(lo)
    if um > lo and flo > 0:
        out.append((brentq(f, lo, um, xtol=_XTOL, rtol=1e-15), False))
    elif um > lo and flo == 0.0 and include_lo:
        out.append((lo, False))
    fhi = f(hi)
    if um < hi and fhi > 0:
        out.append((brentq(f, um, hi, xtol=_XTOL, rtol=1e-15), False))
    return out


def _intervals(theta, bc, ucap):
    """Convexity intervals [a, a + pi] that can host real roots."""
    first = 0.0 if bc == "dirichlet" else math.pi
    a = first
    while a < ucap:
        yield a, a + math.pi
        a += 2 * math.pi


def real_roots_u(theta, bc="dirichlet"):
    """All real roots u > 0 of the secular equation for theta in (0, pi/2)."""
    if theta <= 0:
        raise DomainError("theta = 0 has infinitely many roots; use real_spectrum")
    ucap = u_cap(theta)
    roots = []
    for lo, hi in _intervals(theta, bc, ucap):
        for u, dfc in _roots_in_interval(lo, hi, theta, bc, include_lo=False):
            if u > 0:
                roots.append((u, dfc))
    roots.sort()
    return roots


def _zero_mode(prob):
    """E = 0 solutions: Dirichlet at theta = pi/4, Neumann always."""
    if prob.bc == "neumann":
        return WellEigenpair(0.0, 0.0, prob.theta, prob.L, "neumann")
    if abs(prob.theta - math.pi / 4) <= _ZERO_MODE_ATOL:
        return WellEigenpair(0.0, 0.0, prob.theta, prob.L, "dirichlet", kind="linear")
    return None


def real_spectrum(prob, n_max=10, normalize=True, complex_search=False):
    """Real eigenvalues (ascending) with closed-form eigenpairs.

    For theta = 0 the spectrum is the Hermitian ladder (n pi / L)^2 and
    ``n_max`` limits it; for theta > 0 the list is complete. With
    ``complex_search`` nearly-real complex eigenvalues (pairs that have
    just left the axis) are located by Newton from each interval minimum.
    """
    diags = []
    pairs = []
    zm = _zero_mode(prob)
    if zm is not None:
        pairs.append(zm)
    if prob.theta == 0.0:
        n0 = 1
        for n in range(n0, n_max + 1):
            u = n * math.pi
            pairs.append(WellEigenpair(energy_from_u(u, 0.0, prob.L), u, 0.0, prob.L, prob.bc))
        diags.append(f"theta=0: Hermitian ladder truncated at n_max={n_max}")
    else:
        for u, dfc in real_roots_u(prob.theta, prob.bc):
            if zm is not None and u < _ZERO_MODE_U:
                continue
            E = energy_from_u(u, prob.theta, prob.L)
            pairs.append(WellEigenpair(E, u, prob.theta, prob.L, prob.bc, defective=dfc))
            if dfc:
                diags.append(f"coalesced root at u={u:.12g} (exceptional point)")
    if normalize:
        pairs = [normalize_pair(p) for p in pairs]
    worst = max((abs(float(secular(p.u, prob.theta, prob.bc))) for p in pairs), default=0.0)
    cplx = []
    if complex_search and prob.theta > 0:
        cplx = complex_energies(prob)
    return SpectrumReport(
        real=[p.E for p in pairs],
        complex_pairs=cplx,
        count=len(pairs),
        pairs=pairs,
        diagnostics={"max_secular_residual": worst, "notes": diags},
    )


def count_real_direct(theta, bc="dirichlet"):
    if theta == 0.0:
        return math.inf
    return real_spectrum(WellProblem(theta, 1.0, bc), normalize=False).count


# --- exceptional angles ------------------------------------------------------

@dataclass(frozen=True)
class ExceptionalPoint:
    ell: int
    theta: float
    u: float
    E: float        # for L = 1
    method: str


def _min_on(j, theta, bc):
    lo = 2 * j * math.pi + (0.0 if bc == "dirichlet" else math.pi)
    return _interval_min(lo, lo + math.pi, theta, bc)


def _exceptional(ell, bc, theta_hi):
    j = ell - 1 if bc == "dirichlet" else ell - 1
    g = lambda th: _min_on(j, th, bc)[1]
    lo = 1e-9
    hi = theta_hi
    if g(hi) <= 0:
        raise NumericError(f"no sign change for exceptional point l={ell}")
    if g(lo) >= 0:
        raise NumericError(f"exceptional point l={ell} below theta={lo}")
    th = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)
    u, _ = _min_on(j, th, bc)
    method = "nested-bisection"

    # polish (F, F_u) = 0 jointly in (u, theta)
    def eqs(p):
        uu, tt = p
        return [float(secular(uu, tt, bc)), float(secular_du(uu, tt, bc))]

    sol, info, ier, _ = fsolve(eqs, [u, th], full_output=True, xtol=1e-15)
    if ier == 1 and abs(sol[1] - th) < 1e-8 and abs(sol[0] - u) < 1e-4:
        u, th = float(sol[0]), float(sol[1])
        method = "newton"
    return ExceptionalPoint(ell, th, u, energy_from_u(u, th, 1.0), method)


def exceptional_sweep(ell_max, bc="dirichlet"):
    """Exceptional angles theta_1 > theta_2 > ... > theta_{ell_max}.

    Dirichlet: theta_1 = pi/4 (zero mode, E = 0) is exact; for l >= 2 the
    l-th pair of real roots merges on the interval ((2l-2) pi, (2l-1) pi).
    Neumann: the l-th pair lives on ((2l-1) pi, 2l pi).
    """
    if ell_max < 1:
        raise DomainError("ell_max must be >= 1")
    out = []
    start = 1
    if bc == "dirichlet":
        out.append(ExceptionalPoint(1, math.pi / 4, 0.0, 0.0, "exact"))
        start = 2
    hi = math.pi / 4 if bc == "dirichlet" else math.pi / 2 - 1e-9
    for ell in range(start, ell_max + 1):
        ep = _exceptional(ell, bc, hi)
        out.append(ep)
        hi = ep.theta
    return out


def count_real(theta, exceptional_list, atol=1e-12):
    """N(theta) for Dirichlet walls from the exceptional angles.

    N = 2 l - 1 for theta_{l+1} < theta < theta_l and 2 l - 2 at theta_l;
    zero for theta > pi/4. ``exceptional_list`` must reach below theta.
    """
    if not (0.0 < theta < math.pi / 2):
        raise DomainError("theta must lie in (0, pi/2)")
    thetas = sorted((ep.theta if isinstance(ep, ExceptionalPoint) else float(ep)
                     for ep in exceptional_list), reverse=True)
    if not thetas or abs(thetas[0] - math.pi / 4) > 1e-12:
        raise PreconditionError("exceptional list must start at theta_1 = pi/4")
    if theta > thetas[0] + atol:
        return 0
    for ell, th in enumerate(thetas, start=1):
        if abs(theta - th) <= atol:
            return 2 * ell - 2 if ell > 1 else 1
        nxt = thetas[ell] if ell < len(thetas) else None
        if nxt is None:
            break
        if nxt + atol < theta < th - atol:
            return 2 * ell - 1
    raise PreconditionError("exceptional list does not reach below theta")


def count_real_neumann(theta, exceptional_list, atol=1e-12):
    """N(theta) = 1 + 2 #{l : theta < theta_l^N} (+1 per tangency)."""
    thetas = sorted((ep.theta if isinstance(ep, ExceptionalPoint) else float(ep)
                     for ep in exceptional_list), reverse=True)
    if not thetas or theta <= thetas[-1] + atol:
        raise PreconditionError("exceptional list does not reach below theta")
    n = 1
    for th in thetas:
        if theta < th - atol:
            n += 2
        elif abs(theta - th) <= atol:
            n += 1
    return n


def neumann_spectrum(prob, n_max=10):
    if prob.bc != "neumann":
        prob = WellProblem(prob.theta, prob.L, "neumann")
    return real_spectrum(prob, n_max=n_max)


def complex_roots(theta, seeds, bc="dirichlet", tol=1e-13, max_iter=60):
    """Complex solutions u of the secular equation by Newton from seeds."""
    t = math.tan(theta)
    s = 1.0 if bc == "dirichlet" else -1.0
    found = []
    for u in seeds:
        u = complex(u)
        for _ in range(max_iter):
            F = t * cmath.sinh(t * u) - s * cmath.sin(u)
            dF = t * t * cmath.cosh(t * u) - s * cmath.cos(u)
            if dF == 0:
                break
            du = F / dF
            u -= du
            if abs(du) <= tol * (1 + abs(u)):
                break
        else:
            continue
        F = t * cmath.sinh(t * u) - s * cmath.sin(u)
        if abs(F) > 1e-9 or u.real <= 0:
            continue
        if all(abs(u - v) > 1e-8 * (1 + abs(u)) for v in found):
            found.append(u)
    found.sort(key=lambda z: (z.real, z.imag))
    return found


def complex_energies(prob, max_intervals=None):
    """Complex eigenvalues near the axis, one pair per root-free interval.

    Seeds sit at the minimum of F on each convexity interval that carries
    no real root, displaced off the axis; each Newton solution u gives the
    pair E = (u / (L cos theta))^2 and its conjugate.
    """
    ucap = u_cap(prob.theta)
    seeds = []
    for lo, hi in _intervals(prob.theta, prob.bc, ucap + 2 * math.pi):
        um, fm = _interval_min(lo, hi, prob.theta, prob.bc)
        if fm > _TANGENT_TOL and lo < um < hi:
            seeds.append(um + 0.5j)
        if max_intervals is not None and len(seeds) >= max_intervals:
            break
    out = []
    for u in complex_roots(prob.theta, seeds, prob.bc):
        if abs(u.imag) < 1e-12:
            continue
        E = (u / (prob.L * math.cos(prob.theta))) ** 2
        out.extend([complex(E.real, abs(E.imag)), complex(E.real, -abs(E.imag))])
    return out


# --- eigenfunctions and overlaps --------------------------------------------

def eigenfunction(pair, rx, derivative=False):
    """psi (or psi') at signed arc length rx in [-L/2, L/2]."""
    rx = np.asarray(rx, dtype=float)
    half = pair.L / 2
    if np.any(np.abs(rx) > half * (1 + 1e-12)):
        raise DomainError("rx outside the well")
    if pair.kind == "linear":
        c = pair.norm
        if derivative:
            return np.where(rx >= 0, c, -c) + 0j
        return c * (np.abs(rx) - half) + 0j
    cp, dp, cm, dm = pair.coefficients()
    wp, wm = pair.omega
    right = rx >= 0
    c = np.where(right, cp, cm)
    d = np.where(right, dp, dm)
    w = np.where(right, wp, wm)
    if derivative:
        return 1j * w * (c * np.exp(1j * w * rx) - d * np.exp(-1j * w * rx))
    return c * np.exp(1j * w * rx) + d * np.exp(-1j * w * rx)


def _int_exp(kappa, a, b):
    """int_a^b e^{i kappa x} dx, stable as kappa -> 0."""
    z = 1j * kappa * (b - a)
    if abs(z) < 1e-5:
        em1 = z + z * z / 2 + z**3 / 6
    else:
        em1 = cmath.exp(z) - 1
    if kappa == 0:
        return b - a
    return cmath.exp(1j * kappa * a) * em1 / (1j * kappa)


def _terms(pair):
    """Exponential terms (coef, k, lo, hi) of psi on each ray."""
    cp, dp, cm, dm = pair.coefficients()
    wp, wm = pair.omega
    h = pair.L / 2
    return [(cp, wp, 0.0, h), (dp, -wp, 0.0, h), (cm, wm, -h, 0.0), (dm, -wm, -h, 0.0)]


def _overlap_closed(p, q):
    total = 0.0 + 0.0j
    for a, ka, lo, hi in _terms(p):
        for b, kb, lo2, hi2 in _terms(q):
            if lo != lo2:
                continue
            total += np.conj(a) * b * _int_exp(kb - np.conj(ka), lo, hi)
    return total


def overlap_quadrature(p, q, panels=64, order=20):
    """<p|q> by composite Gauss-Legendre; the independent oracle."""
    x, w = leggauss(order)
    h = p.L / 2
    edges = np.linspace(-h, h, 2 * panels + 1)
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        xs = 0.5 * (b - a) * (x + 1) + a
        total += 0.5 * (b - a) * np.dot(w, np.conj(eigenfunction(p, xs)) * eigenfunction(q, xs))
    return total


def overlap(p, q):
    if p.kind == "linear" or q.kind == "linear":
        return overlap_quadrature(p, q)
    return _overlap_closed(p, q)


def overlap_matrix(pairs, check=True, check_tol=1e-10):
    """Gram matrix <psi_m|psi_n> from closed-form exponential integrals.

    With ``check`` the result is compared entrywise with composite
    Gauss-Legendre quadrature and a NumericError raised on disagreement.
    """
    n = len(pairs)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            G[i, j] = overlap(pairs[i], pairs[j])
            G[j, i] = np.conj(G[i, j])
    if check:
        Q = np.array([[overlap_quadrature(p, q) for q in pairs] for p in pairs])
        scale = max(1.0, float(np.max(np.abs(G))))
        if np.max(np.abs(G - Q)) > check_tol * scale:
            raise NumericError(f"overlap cross-check failed: {np.max(np.abs(G - Q)):.3e}")
    return G


def normalize_pair(pair, target=1.0):
    """Rescale so that <psi|psi> = target (norm constant stays real positive)."""
    base = pair.with_norm(1.0)
    nn = overlap(base, base).real
    return base.with_norm(math.sqrt(target / nn))


def unit_overlap(pairs):
    """Gram matrix of unit-normalized eigenfunctions and the norm constants."""
    unit = [normalize_pair(p) for p in pairs]
    return overlap_matrix(unit), [p.norm for p in unit]


def tip_data(pair):
    """(psi(0), psi'(0-), psi'(0+)) from the closed form."""
    psi0 = complex(eigenfunction(pair, 0.0))
    tiny = 0.0
    dplus = complex(eigenfunction(pair, np.array([tiny]), derivative=True)[0])
    if pair.kind == "linear":
        dminus = -dplus
    else:
        cp, dp, cm, dm = pair.coefficients()
        wp, wm = pair.omega
        dminus = 1j * wm * (cm - dm)
    return psi0, dminus, dplus


@dataclass
class SweepRow:
    theta: float
    count: int
    energies: list = field(default_factory=list)


def theta_sweep(thetas, bc="dirichlet"):
    rows = []
    for th in thetas:
        if th == 0.0:
            raise DomainError("theta = 0 has an infinite real spectrum")
        rep = real_spectrum(WellProblem(th, 1.0, bc), normalize=False)
        rows.append(SweepRow(th, rep.count, list(rep.real)))
    return rows
