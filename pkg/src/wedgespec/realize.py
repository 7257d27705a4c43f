"""Real-line realization of contour Hamiltonians.

A Hamiltonian H = (p - A(z))^2 + V(z) on a contour z = x + i f(x) is
transported to the real x-axis as

    H' = g^2 (p - a)^2 - g^3 f'' (p - a) + v,   g = 1/(1 + i f'),

with a(x) = A(z(x))/g(x) and v(x) = V(z(x)). On a wedge the two rays give
scaled half-line operators H_+- acting in x~ = F(x).

Matching convention
-------------------
``order=2`` (default) imposes e^{-2i theta} psi'(0-) = e^{2i theta} psi'(0+)
at the wedge tip. ``order=1`` imposes the single-phase condition that
analytic continuation of a smooth contour solution produces. They are
named "double" and "analytic".
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contour import ContourProfile, g_factor
from .errors import DomainError

MATCHING_ORDERS = {"double": 2, "analytic": 1}


def matching_order(convention):
    if isinstance(convention, int) and convention in (1, 2):
        return convention
    try:
        return MATCHING_ORDERS[convention]
    except (KeyError, TypeError):
        raise DomainError(f"unknown matching convention {convention!r}") from None


def monomial_V(nu):
    """V(z) = z^2 (iz)^nu with the principal power of iz.

    Writing the potential through (iz)^nu puts its branch cut on the
    positive imaginary axis, away from the wedge rays arg z = -theta and
    pi + theta, so both rays see exactly e^{+-2i theta_nu} |z|^{nu+2}.
    """
    nu = float(nu)

    def V(z):
        z = np.asarray(z, dtype=complex)
        return z * z * np.power(1j * z, nu)

    return V


def _zero(z):
    return np.zeros(np.shape(z), dtype=complex)


@dataclass(frozen=True)
class PotentialSpec:
    """Vector potential ``A`` and scalar potential ``V`` on the contour.

    ``variant`` is ``"monomial"``, ``"square_well"`` or ``"custom"``.
    """

    A: Callable
    V: Callable
    variant: str = "custom"
    nu: float | None = None
    L: float | None = None

    def __post_init__(self):
        if self.variant not in ("monomial", "square_well", "custom"):
            raise DomainError(f"unknown potential variant {self.variant!r}")
        if self.variant == "monomial" and not (self.nu is not None and self.nu > -2):
            raise DomainError("monomial potential needs nu > -2")
        if self.variant == "square_well" and not (self.L is not None and self.L > 0):
            raise DomainError("square well needs L > 0")


def monomial_potential(nu):
    return PotentialSpec(A=_zero, V=monomial_V(nu), variant="monomial", nu=float(nu))


def square_well_potential(L=1.0):
    """V = 0 for arc length |z| < L/2 (hard walls at +-L/2)."""
    L = float(L)

    def V(z):
        z = np.asarray(z, dtype=complex)
        return np.where(np.abs(z) < L / 2, 0.0 + 0.0j, np.inf + 0.0j)

    return PotentialSpec(A=_zero, V=V, variant="square_well", L=L)


def custom_potential(V, A=None):
    return PotentialSpec(A=_zero if A is None else A, V=V, variant="custom")


def theta_nu(nu):
    """Wedge half-angle placing the monomial spectrum on the real axis."""
    return math.pi * nu / (2.0 * (nu + 4.0))


@dataclass(frozen=True)
class RealHamiltonian:
    """Coefficients of H' on the real line, all vectorized in x."""

    profile: ContourProfile
    spec: PotentialSpec

    def g(self, x):
        return g_factor(self.profile, x)

    def z(self, x):
        return self.profile(x)

    def a(self, x):
        return self.spec.A(self.z(x)) / self.g(x)

    def v(self, x):
        return self.spec.V(self.z(x))

    def ddf(self, x):
        return self.profile.ddf(x)

    def coefficients(self, x):
        """(c2, c1, c0) with H' psi = -c2 psi'' + c1 psi' + c0 psi when A = 0."""
        g = self.g(x)
        return g * g, 1j * g**3 * self.ddf(x), self.v(x)

    def apply(self, x, psi, dpsi, ddpsi):
        """Action of H' on a function given by samples of psi, psi', psi''."""
        g = self.g(x)
        a = self.a(x)
        # (p - a)^2 psi with p = -i d/dx and a'(x) dropped when A = 0
        pa = -1j * dpsi - a * psi
        pa2 = -ddpsi + 2j * a * dpsi + a * a * psi
        return g * g * pa2 - g**3 * self.ddf(x) * pa + self.v(x) * psi


def build_real_hamiltonian(spec, profile):
    if not isinstance(profile, ContourProfile):
        raise DomainError("profile must be a ContourProfile")
    return RealHamiltonian(profile=profile, spec=spec)


@dataclass(frozen=True)
class PTReport:
    """Residuals of the PT conditions on a symmetric grid.

    ``f_residual`` is max|f(-x) - f(x)|; the potential residuals are
    max|v(-x)* - v(x)| / (1 + |v(x)|) and the same for a, so that fast
    growing potentials are judged on their rounding level.
    """

    f_residual: float
    v_residual: float
    a_residual: float
    g_residual: float
    tol: float

    @property
    def f_even(self):
        return self.f_residual <= self.tol

    @property
    def V_pt(self):
        return self.v_residual <= self.tol

    @property
    def A_pt(self):
        return self.a_residual <= self.tol

    @property
    def passed(self):
        return self.f_even and self.V_pt and self.A_pt

    @property
    def max_residuals(self):
        return {"f": self.f_residual, "V": self.v_residual, "A": self.a_residual,
                "g": self.g_residual}


def symmetric_grid(half_width=10.0, n=101):
    """Chebyshev points on [-w, w] mirrored from the right half exactly."""
    k = np.arange(n)
    x = half_width * np.cos(np.pi * k / (n - 1))
    right = np.abs(x[: (n + 1) // 2])
    return np.unique(np.concatenate([-right, right]))


def verify_pt_symmetry(spec, profile, grid=None, tol=1e-10):
    """Check f(-x) = f(x) and V(-z*)* = V(z), A(-z*)* = A(z) along the contour.

    Failures are reported, never raised. The g residual checks
    g(-x)* = g(x), which follows from an even f.
    """
    if grid is None:
        grid = symmetric_grid()
    x = np.asarray(grid, dtype=float)
    if np.max(np.abs(np.sort(x) + np.sort(x)[::-1])) > 1e-14 * (1 + np.max(np.abs(x))):
        raise DomainError("grid must be symmetric about 0")
    z = x + 1j * profile.f(x)
    zr = -np.conj(z)
    rf = float(np.max(np.abs(profile.f(-x) - profile.f(x)), initial=0.0))

    def resid(fun):
        w, wr = fun(z), fun(zr)
        fin = np.isfinite(w) & np.isfinite(wr)
        d = np.abs(np.conj(wr[fin]) - w[fin]) / (1.0 + np.abs(w[fin]))
        return float(np.max(d, initial=0.0))

    g = g_factor(profile, x)
    rg = float(np.max(np.abs(np.conj(g_factor(profile, -x)) - g), initial=0.0))
    return PTReport(rf, resid(spec.V), resid(spec.A), rg, tol)


# --- wedge decomposition --------------------------------------------------

@dataclass(frozen=True)
class HalfLineOperator:
    """H_+- = e^{+-2i theta} [p~ - gauge(x~)]^2 + potential(x~).

    ``side`` is +1 for x~ >= 0 and -1 for x~ <= 0; the callables take the
    signed scaled coordinate x~.
    """

    side: int
    theta: float
    phase: complex
    gauge: Callable
    potential: Callable


def wedge_decompose(spec, theta):
    """Split H on the wedge into the two half-line operators (ε -> 0 limit)."""
    if not (-math.pi / 2 < theta < math.pi / 2):
        raise DomainError("theta outside (-pi/2, pi/2)")
    ops = []
    for side in (+1, -1):
        rot = cmath.exp(-side * 1j * theta)
        ops.append(HalfLineOperator(
            side=side,
            theta=theta,
            phase=cmath.exp(side * 2j * theta),
            gauge=lambda xt, r=rot: r * spec.A(r * np.asarray(xt, dtype=float)),
            potential=lambda xt, r=rot: spec.V(r * np.asarray(xt, dtype=float)),
        ))
    return ops[0], ops[1]


def pt_conjugate_residual(hplus, hminus, grid=None):
    """max | PT H_+ PT - H_- | measured on phase, gauge and potential."""
    if grid is None:
        grid = np.linspace(0.0, 5.0, 51)
    xt = np.asarray(grid, dtype=float)
    r_phase = abs(np.conj(hplus.phase) - hminus.phase)
    vp = hplus.potential(xt)
    vm = hminus.potential(-xt)
    fin = np.isfinite(vp) & np.isfinite(vm)
    r_v = np.max(np.abs(np.conj(vp[fin]) - vm[fin]) / (1 + np.abs(vm[fin])), initial=0.0)
    r_a = np.max(np.abs(np.conj(hplus.gauge(xt)) - hminus.gauge(-xt)), initial=0.0)
    return float(max(r_phase, r_v, r_a))


# --- matching at the tip --------------------------------------------------

@dataclass(frozen=True)
class MatchingCondition:
    theta: float
    A0: complex = 0.0
    order: int = 2

    def __post_init__(self):
        if self.order not in (1, 2):
            raise DomainError("matching order must be 1 or 2")


def matching_condition(theta, A0=0.0, convention="double"):
    return MatchingCondition(float(theta), complex(A0), matching_order(convention))


def matching_residual(mc, psi0m, psi0p, dpsi0m, dpsi0p):
    """e^{-ik theta} psi'(0-) - e^{ik theta} psi'(0+), k = ``mc.order``.

    Zero iff the tip condition holds (continuity is assumed; see
    ``continuity_gap`` and ``general_matching_residual`` for A(0) != 0).
    """
    k = mc.order
    th = mc.theta
    return complex(cmath.exp(-1j * k * th) * dpsi0m - cmath.exp(1j * k * th) * dpsi0p)


def general_matching_residual(mc, psi0m, psi0p, dpsi0m, dpsi0p):
    """Pre-continuity form with the gauge term (diagnostic only).

    For k = 2: psi'(0+)/(1 - i tan)^2 - psi'(0-)/(1 + i tan)^2
    - 2i A(0) [psi(0+) - psi(0-)].
    """
    k = mc.order
    t = math.tan(mc.theta)
    lhs = dpsi0p / (1 - 1j * t) ** k - dpsi0m / (1 + 1j * t) ** k
    return complex(lhs - 2j * mc.A0 * (psi0p - psi0m))


def pt_phase_error(theta, dpsi0m, dpsi0p, order=2):
    """Distance of arg psi'(0+-) from pi/2 -+ k theta (psi(0) real positive).

    Angles are compared modulo 2 pi; returns (err_minus, err_plus).
    """
    def d(a, b):
        return abs((a - b + math.pi) % (2 * math.pi) - math.pi)

    k = order
    return (d(cmath.phase(dpsi0m), math.pi / 2 + k * theta),
            d(cmath.phase(dpsi0p), math.pi / 2 - k * theta))


def continuity_gap(psi0m, psi0p):
    return complex(psi0p - psi0m)


def tip_phase(theta, order=2):
    """Ratio psi'(0+)/psi'(0-) implied by the matching with A(0) = 0."""
    return cmath.exp(-2j * order * theta)
