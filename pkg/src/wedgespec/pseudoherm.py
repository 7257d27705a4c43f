"""Finite-dimensional pseudo-Hermitian algebra on a real-eigenvalue subspace.

Everything is expressed in an orthonormal working basis eps_k obtained by
Gram-Schmidt on the eigenvectors psi_n (energy order). Columns of ``Psi``
are the psi_n, columns of ``Phi`` the dual vectors phi_n with
Phi^dagger Psi = 1.

    eta_+ = Phi Phi^dagger,  rho = sqrt(eta_+),  h = rho H rho^{-1}
    P = sum s_n phi_n phi_n^dagger,  C = sum s_n psi_n phi_n^dagger,
    s_n = (-1)^{n+1}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .contour import adaptive_quad, contour_inner_product, pushforward
from .errors import DegenerateSpectrumError, DomainError, NumericError, PreconditionError

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _norm(a):
    return float(np.max(np.abs(a), initial=0.0))


def signs(n):
    """Alternating signs s_k = (-1)^{k+1}, k = 1..n."""
    return np.array([1.0 if k % 2 == 0 else -1.0 for k in range(n)])


# --- Jacobi eigendecomposition ----------------------------------------------

def jacobi_eigh(A, tol=1e-15, max_sweeps=60):
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Returns (w, V) with A = V diag(w) V^dagger, w ascending.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DomainError("matrix must be square")
    V = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(abs(A[p, q]) ** 2 for p in range(n) for q in range(n) if p != q))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                # phase on column q makes a_pq real, then a real rotation
                ph = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                J = np.array([[c, s], [-s * np.conj(ph), c * np.conj(ph)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
                A[q, p] = 0.0
                A[p, q] = 0.0
    else:
        raise NumericError("Jacobi iteration did not converge")
    w = np.real(np.diag(A))
    order = np.argsort(w)
    return w[order], V[:, order]


def hermitian_sqrt(A, rank_tol=1e-14):
    """Positive square root via Jacobi; eigenvalues below rank_tol*||A|| are a rank error."""
    w, V = jacobi_eigh(A)
    if w[0] <= rank_tol * np.linalg.norm(A, 2):
        raise NumericError(f"metric not positive definite (smallest eigenvalue {w[0]:.3e})")
    return (V * np.sqrt(w)) @ V.conj().T


# --- biorthonormal system -----------------------------------------------------

@dataclass(frozen=True)
class BiorthoSystem:
    dim: int
    gram: np.ndarray
    Psi: np.ndarray
    Phi: np.ndarray
    energies: tuple

    def biortho_residual(self):
        return _norm(self.Phi.conj().T @ self.Psi - np.eye(self.dim))

    def completeness_residual(self):
        return _norm(self.Psi @ self.Phi.conj().T - np.eye(self.dim))


def _mgs(B):
    """Modified Gram-Schmidt: B = Q R with R upper triangular, diag(R) > 0."""
    B = np.array(B, dtype=complex)
    n = B.shape[1]
    Q = B.copy()
    R = np.zeros((n, n), dtype=complex)
    for k in range(n):
        R[k, k] = np.linalg.norm(Q[:, k])
        Q[:, k] /= R[k, k]
        for j in range(k + 1, n):
            R[k, j] = np.vdot(Q[:, k], Q[:, j])
            Q[:, j] -= R[k, j] * Q[:, k]
    return Q, R


def build_biortho(gram, energies):
    """Biorthonormal system from the Gram matrix <psi_m|psi_n> of the eigenvectors."""
    G = np.array(gram, dtype=complex)
    n = G.shape[0]
    if G.shape != (n, n) or len(energies) != n:
        raise DomainError("gram must be square and match the number of energies")
    if _norm(G - G.conj().T) > 1e-12 * max(_norm(G), 1.0):
        raise DomainError("gram matrix is not Hermitian")
    G = 0.5 * (G + G.conj().T)
    w, U = np.linalg.eigh(G)
    if w[0] <= 1e-12 * w[-1]:
        raise DegenerateSpectrumError(
            f"gram matrix singular (eigenvalue ratio {w[0] / w[-1]:.2e})")
    # any factor with B^dagger B = G stands in for the psi_n columns
    B = np.sqrt(w)[:, None] * U.conj().T
    _, Psi = _mgs(B)
    Phi = np.linalg.inv(Psi).conj().T
    E = tuple(float(np.real(e)) for e in energies)
    return BiorthoSystem(n, G, Psi, Phi, E)


def hamiltonian_matrix(sys):
    """H~ = sum E_n psi_n phi_n^dagger in the eps basis."""
    return (sys.Psi * np.asarray(sys.energies)) @ sys.Phi.conj().T


def unit_gram(gram):
    G = np.array(gram, dtype=complex)
    d = 1 / np.sqrt(np.real(np.diag(G)))
    return G * d[:, None] * d[None, :]


def two_level_gram(r, kappa=1.0):
    """kappa^2 [[1, r], [r, 1]]."""
    return kappa**2 * np.array([[1.0, r], [r, 1.0]], dtype=complex)


# --- metric and symmetry operators ----------------------------------------

@dataclass(frozen=True)
class MetricPack:
    eta_plus: np.ndarray
    rho: np.ndarray
    rho_inv: np.ndarray
    P: np.ndarray
    C: np.ndarray
    T_conjugation: bool
    system: BiorthoSystem
    kappa: float | None = None
    scales: np.ndarray | None = None
    involution_residual: float | None = None

    @property
    def eta_inv(self):
        return self.system.Psi @ self.system.Psi.conj().T

    def apply_T(self, v):
        """T v = P conj(v) in the eps basis."""
        return self.P @ np.conj(v)


def _rescaled(sys, c):
    return build_biortho(sys.gram * np.outer(np.conj(c), c), sys.energies)


def _involutive_scales(sys):
    """Scales c_n on unit-normalized psi_n making P^2 unit on each psi_n.

    The condition is <phi_n|P^2 psi_n> = 1, i.e.
    s_n sum_k s_k |(G^{-1})_nk|^2 / (c_n^2 c_k^2) = 1 with G the unit Gram
    matrix; for two levels it gives kappa = (1 - r^2)^{-1/4}.
    """
    n = sys.dim
    s = signs(n)
    base = build_biortho(unit_gram(sys.gram), sys.energies)
    M = np.abs(np.linalg.inv(base.gram)) ** 2

    def res(logx):
        x = np.exp(logx)
        return s * ((M / np.outer(x, x)) @ s) - 1.0

    # a solution need not exist; the bounds keep the system well-conditioned
    # and the leftover shows up in the involution residual
    sol = least_squares(res, np.zeros(n), bounds=(-4.0, 4.0),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return base, np.exp(0.5 * sol.x)


def metric_pack(sys, involutive_normalization=False):
    """eta_+, rho, P and C for a biorthonormal system.

    With ``involutive_normalization`` the psi_n are first rescaled: for two
    levels by kappa = (1 - r^2)^{-1/4} on unit vectors, which makes P and T
    exact involutions; for more levels by a diagonal rescaling with
    diag(P^2) = 1, the remaining off-diagonal part of P^2 - 1 being
    reported in ``involution_residual``.
    """
    kappa = scales = None
    if involutive_normalization:
        if sys.dim == 2:
            G = unit_gram(sys.gram)
            r = float(np.real(G[0, 1]))
            kappa = (1 - r * r) ** -0.25
            sys = build_biortho(kappa**2 * G, sys.energies)
            scales = np.full(2, kappa)
        elif sys.dim > 2:
            base, scales = _involutive_scales(sys)
            sys = _rescaled(base, scales)
        else:
            sys = build_biortho(unit_gram(sys.gram), sys.energies)
            scales = np.ones(1)
    Phi, Psi = sys.Phi, sys.Psi
    s = signs(sys.dim)
    eta = Phi @ Phi.conj().T
    eta = 0.5 * (eta + eta.conj().T)
    rho = hermitian_sqrt(eta)
    rho_inv = np.linalg.inv(rho)
    P = (Phi * s) @ Phi.conj().T
    C = (Psi * s) @ Phi.conj().T
    inv_res = None
    if involutive_normalization:
        inv_res = _norm(P @ P - np.eye(sys.dim))
    return MetricPack(eta, rho, rho_inv, P, C, True, sys, kappa, scales, inv_res)


def physical_inner_product(pack, xi, zeta):
    """<xi, zeta>_+ = xi^dagger eta_+ zeta."""
    xi = np.asarray(xi, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    n = pack.eta_plus.shape[0]
    if xi.shape != (n,) or zeta.shape != (n,):
        raise DomainError(f"vectors must have length {n}")
    return complex(np.vdot(xi, pack.eta_plus @ zeta))


def dress_observable(pack, o, tol=1e-12):
    """O = rho^{-1} o rho for Hermitian o."""
    o = np.asarray(o, dtype=complex)
    if o.shape != pack.rho.shape:
        raise DomainError("observable has the wrong dimension")
    res = _norm(o - o.conj().T)
    if res > tol * max(1.0, _norm(o)):
        raise PreconditionError(f"observable not Hermitian (residual {res:.2e})")
    return pack.rho_inv @ o @ pack.rho


def pseudo_hermiticity_residual(pack, H):
    """||H^dagger - eta H eta^{-1}|| / ||H||."""
    H = np.asarray(H, dtype=complex)
    r = H.conj().T - pack.eta_plus @ H @ pack.eta_inv
    return _norm(r) / max(_norm(H), 1e-300)


def equivalent_hermitian(pack, H, tol=1e-8):
    """h = rho H rho^{-1}."""
    H = np.asarray(H, dtype=complex)
    res = pseudo_hermiticity_residual(pack, H)
    if res > tol:
        raise PreconditionError(f"H is not eta_+-pseudo-Hermitian (residual {res:.2e})")
    return pack.rho @ H @ pack.rho_inv


def pauli_expand(M, basis=PAULI):
    """Least-squares coefficients of M in the span of the given 2x2 matrices."""
    A = np.stack([np.ravel(b) for b in basis], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.ravel(np.asarray(M, dtype=complex)), rcond=None)
    return coef


@dataclass(frozen=True)
class SymmetryReport:
    residuals: dict
    tol: float = 1e-8

    @property
    def passed(self):
        return all(v <= self.tol for v in self.residuals.values())

    def failures(self):
        return {k: v for k, v in self.residuals.items() if v > self.tol}


def symmetry_suite(pack, H, tol=1e-8):
    """Residuals of the operator identities among P, T, C and H.

    ``PT`` is the antilinear map v -> P P conj(v); [H, PT] = 0 reads
    H P^2 = P^2 conj(H). ``H_real`` is max|Im H| in the eps basis, the
    PT condition once P and T are involutions.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    one = np.eye(n)
    P, C = pack.P, pack.C
    P2 = P @ P
    hn = max(_norm(H), 1e-300)
    res = {
        "P2": _norm(P2 - one),
        "T2": _norm(P @ np.conj(P) - one),
        "C2": _norm(C @ C - one),
        "C_eta_P": _norm(C - pack.eta_inv @ P),
        "H_C": _norm(H @ C - C @ H) / hn,
        "H_PT": _norm(H @ P2 - P2 @ np.conj(H)) / hn,
        "H_real": _norm(H.imag) / hn,
    }
    return SymmetryReport(res, tol)


def invariant_residuals(sys, pack, H=None):
    """Structural checks of a solved system; all should be ~ rounding."""
    H = hamiltonian_matrix(sys) if H is None else np.asarray(H, dtype=complex)
    n = sys.dim
    E = np.sort(np.asarray(sys.energies))
    scale = max(np.max(np.abs(E)), 1e-300)
    h = equivalent_hermitian(pack, H, tol=np.inf)
    ev = np.sort(np.linalg.eigvalsh(0.5 * (h + h.conj().T)))
    w = np.linalg.eigvalsh(pack.eta_plus)
    return {
        "biortho": sys.biortho_residual(),
        "eta_positive": max(0.0, -w[0] / w[-1]) if w[0] <= 0 else 0.0,
        "rho2_eta": _norm(pack.rho @ pack.rho - pack.eta_plus) / _norm(pack.eta_plus),
        "C2": _norm(pack.C @ pack.C - np.eye(n)),
        "C_eta_P": _norm(pack.C - pack.eta_inv @ pack.P),
        "H_C": _norm(H @ pack.C - pack.C @ H) / scale,
        "h_hermitian": _norm(h - h.conj().T) / scale,
        "isospectral": _norm(ev - E) / scale,
    }


def random_instance(rng, n, cond_max=50.0):
    """Random pseudo-Hermitian system: well-conditioned Psi, distinct real energies."""
    while True:
        Psi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if np.linalg.cond(Psi) < cond_max:
            break
    E = np.sort(rng.uniform(-10, 10, size=n))
    while np.min(np.diff(E), initial=1.0) < 0.1:
        E = np.sort(rng.uniform(-10, 10, size=n))
    return build_biortho(Psi.conj().T @ Psi, E)


def theorem_conditions(sys, pack, H=None, tol=1e-8):
    """(c1) real spectrum, (c2) eta_+ > 0, (c3) eta_+-Hermiticity, (c4) h Hermitian."""
    H = hamiltonian_matrix(sys) if H is None else H
    ev = np.linalg.eigvals(H)
    scale = max(np.max(np.abs(ev)), 1.0)
    h = pack.rho @ H @ pack.rho_inv
    return {
        "c1": bool(np.max(np.abs(ev.imag)) <= tol * scale),
        "c2": bool(np.linalg.eigvalsh(pack.eta_plus)[0] > 0),
        "c3": bool(pseudo_hermiticity_residual(pack, H) <= tol),
        "c4": bool(_norm(h - h.conj().T) <= tol * scale),
    }


# --- two-level closed forms ---------------------------------------------------

def two_level_displays(r, E1, E2):
    """Closed-form two-level matrices in the eps basis (involutive kappa).

    eta and rho carry their kappa^{-2}, kappa^{-1} prefactors separately:
    ``eta_scaled`` is kappa^2 eta_+.
    """
    q = math.sqrt(1 - r * r)
    return {
        "kappa": (1 - r * r) ** -0.25,
        "H": np.array([[E1, r * (E2 - E1) / q], [0.0, E2]]),
        "eta_scaled": np.array([[1.0, -r / q], [-r / q, (1 + r * r) / (1 - r * r)]]),
        "P": np.array([[q, -r], [-r, -q]]),
        "C": np.array([[1.0, -2 * r / q], [0.0, -1.0]]),
    }


# --- function-level checks ---------------------------------------------------

@dataclass(frozen=True)
class CPTReport:
    """Gram matrices of the eigenfunctions under the physical products.

    ``eta_line`` is <psi_m|eta_+|psi_n> by real-line quadrature and
    ``eta_gamma`` the same on the contour through the pullback;
    ``cpt_line``/``cpt_gamma`` use CPT with the pointwise PT map
    psi(x) -> psi(-x)^* and C psi_n = s_n psi_n. ``gram_residual`` compares
    the quadrature Gram with the system's.
    """

    eta_line: np.ndarray
    eta_gamma: np.ndarray
    cpt_line: np.ndarray
    cpt_gamma: np.ndarray
    gram_residual: float
    warnings: tuple = field(default_factory=tuple)

    def residuals(self):
        one = np.eye(self.eta_line.shape[0])
        return {k: _norm(getattr(self, k) - one)
                for k in ("eta_line", "eta_gamma", "cpt_line", "cpt_gamma")}


def cpt_inner_product_equivalence(pack, sys, amap, funcs, rx_max, tol=1e-12):
    """Check eta_+- and CPT-orthonormality of eigenfunctions on R and on Gamma.

    ``funcs`` are vectorized callables psi_n(rx) on [-rx_max, rx_max] whose
    Gram matrix is ``sys.gram`` (normalization included), e.g. square-well or
    shooting eigenfunctions. The dual functions are
    phi_k = sum_j psi_j (gram^{-1})_{jk}.
    """
    n = sys.dim
    if len(funcs) != n:
        raise DomainError("need one eigenfunction per level")
    s = signs(n)
    Ginv = np.linalg.inv(sys.gram)
    notes = []

    def quad(fun):
        return complex(adaptive_quad(fun, -rx_max, rx_max, tol=tol, breakpoints=(0.0,)))

    gram = np.array([[quad(lambda x, a=a, b=b: np.conj(a(x)) * b(x)) for b in funcs]
                     for a in funcs])
    bil = np.array([[quad(lambda x, a=a, b=b: np.conj(a(-x)) * b(x)) for b in funcs]
                    for a in funcs])
    # <phi_k|psi_m> = sum_j conj(Ginv_jk) <psi_j|psi_m>
    A = Ginv.conj().T @ gram
    eta_line = A.conj().T @ A
    cpt_line = s[:, None] * bil

    Psis = [pushforward(amap, f) for f in funcs]
    gram_g = np.empty((n, n), dtype=complex)
    for i, a in enumerate(Psis):
        for j, b in enumerate(Psis):
            ip = contour_inner_product(amap, a, b, rx_max, tol=tol)
            gram_g[i, j] = ip.value
            notes.extend(ip.warnings)
    Ag = Ginv.conj().T @ gram_g
    eta_gamma = Ag.conj().T @ Ag

    # CPT on Gamma with dz: PT Psi(z) = Psi(-z^*)^*
    cpt_gamma = np.empty((n, n), dtype=complex)
    for i, a in enumerate(Psis):
        for j, b in enumerate(Psis):
            def integrand(x, a=a, b=b):
                z = amap.G(x)
                dz = _dz(amap, x)
                return np.conj(a(-np.conj(z))) * b(z) * dz
            cpt_gamma[i, j] = s[i] * quad(integrand)
    res = _norm(gram - sys.gram) / _norm(sys.gram)
    return CPTReport(eta_line, eta_gamma, cpt_line, cpt_gamma, res, tuple(dict.fromkeys(notes)))


def _dz(amap, rx):
    """dz/d(rx) along the arc-length parametrization (unit modulus)."""
    x = amap.Finv(np.asarray(rx, dtype=float))
    p = amap.profile
    return (1 + 1j * p.df(x)) / np.abs(1 + 1j * p.df(x))


# --- square-well two-level pipeline ------------------------------------------

@dataclass
class WellSystem:
    """The real-eigenvalue subspace of the wedge well and its algebra.

    Matrices are in the eps basis; energies and H, h in units of L^-2.
    ``r`` is the overlap of the unit-normalized psi_1, psi_2 and ``norms``
    the normalization constants that make them unit vectors.
    """

    theta: float
    L: float
    energies: list
    pairs: list
    gram_unit: np.ndarray
    norms: list
    r: complex | None
    system: BiorthoSystem
    pack: MetricPack
    H: np.ndarray
    h: np.ndarray
    sigmas: list
    suite: SymmetryReport
    involutive: bool

    def pauli_coefficients(self):
        if self.system.dim != 2:
            raise PreconditionError("Pauli expansion needs two levels")
        return {"H": pauli_expand(self.H, [np.eye(2)] + self.sigmas).real,
                "h": pauli_expand(self.h).real}


def well_system(theta=None, L=1.0, n_levels=2, involutive=True):
    """Square-well spectrum -> overlaps -> biorthonormal system -> metric pack.

    ``theta`` defaults to the second exceptional angle, where the well has
    exactly two real levels.
    """
    from .squarewell import WellProblem, exceptional_sweep, real_spectrum, unit_overlap

    if theta is None:
        theta = exceptional_sweep(2)[1].theta
    rep = real_spectrum(WellProblem(theta, L), n_max=n_levels)
    pairs = rep.pairs[:n_levels]
    if len(pairs) < n_levels:
        raise PreconditionError(
            f"only {len(pairs)} real levels at theta={theta!r}, {n_levels} requested")
    G, norms = unit_overlap(pairs)
    E = [p.E * L * L for p in pairs]
    sys = build_biortho(G, E)
    pack = metric_pack(sys, involutive_normalization=involutive)
    H = hamiltonian_matrix(pack.system)
    h = equivalent_hermitian(pack, H)
    sig = [dress_observable(pack, o) for o in PAULI[1:]] if n_levels == 2 else []
    r = complex(G[0, 1]) if n_levels >= 2 else None
    return WellSystem(theta, L, E, pairs, G, norms, r, pack.system, pack, H, h, sig,
                      symmetry_suite(pack, H), involutive)
