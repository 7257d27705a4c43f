"""Dormand-Prince 5(4) integrator for the half-line equation -y'' + x**N y = lam y.

The state carries three quadrature channels next to (y, y') so that the
norms needed downstream come out of the same error-controlled sweep:

    s = [y, y', int |y|^2, int |y'|^2, int x**N |y|^2]

Integration always runs from ``x0 > 0`` inward to ``x = 0``.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp.rk import RK45

_A = np.ascontiguousarray(RK45.A, dtype=np.float64)
_B = np.ascontiguousarray(RK45.B, dtype=np.float64)
_C = np.ascontiguousarray(RK45.C, dtype=np.float64)
_E = np.ascontiguousarray(RK45.E, dtype=np.float64)
_P = np.ascontiguousarray(RK45.P, dtype=np.float64)

NSTATE = 5

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2


@njit(cache=True)
def _rhs(x, s, N, lam, out):
    y = s[0]
    yp = s[1]
    xn = x ** N if x > 0.0 else 0.0
    ay2 = y.real * y.real + y.imag * y.imag
    out[0] = yp
    out[1] = (xn - lam) * y
    out[2] = ay2
    out[3] = yp.real * yp.real + yp.imag * yp.imag
    out[4] = xn * ay2


@njit(cache=True)
def _dp45(N, lam, x0, s0, rtol, atol, t_eval, A, B, C, E, P, max_steps):
    n = s0.shape[0]
    K = np.zeros((7, n), dtype=np.complex128)
    s = s0.copy()
    x = x0
    xend = 0.0
    h = -min(0.05, 0.01 * x0)
    hmin = 1e-14 * x0

    n_eval = t_eval.shape[0]
    out = np.zeros((n_eval, n), dtype=np.complex128)
    ie = 0
    while ie < n_eval and t_eval[ie] > x0:
        ie += 1

    tmp = np.zeros(n, dtype=np.complex128)
    _rhs(x, s, N, lam, K[0])
    nsteps = 0
    while x > xend:
        if nsteps >= max_steps:
            return s, out, nsteps, STATUS_MAXSTEPS
        if x + h < xend:
            h = xend - x
        # stages
        for i in range(1, 6):
            for j in range(n):
                acc = 0.0 + 0.0j
                for k in range(i):
                    acc += A[i, k] * K[k, j]
                tmp[j] = s[j] + h * acc
            _rhs(x + C[i] * h, tmp, N, lam, K[i])
        snew = np.zeros(n, dtype=np.complex128)
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(6):
                acc += B[k] * K[k, j]
            snew[j] = s[j] + h * acc
        _rhs(x + h, snew, N, lam, K[6])
        err2 = 0.0
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(7):
                acc += E[k] * K[k, j]
            sc = atol + rtol * max(abs(s[j]), abs(snew[j]))
            e = abs(h * acc) / sc
            err2 += e * e
        err = np.sqrt(err2 / n)
        if err <= 1.0:
            xnew = x + h
            while ie < n_eval and t_eval[ie] >= xnew:
                th = (t_eval[ie] - x) / h
                for j in range(n):
                    acc = 0.0 + 0.0j
                    for k in range(7):
                        q = 0.0
                        p = th
                        for m in range(4):
                            q += P[k, m] * p
                            p *= th
                        acc += K[k, j] * q
                    out[ie, j] = s[j] + h * acc
                ie += 1
            x = xnew
            s = snew
            for j in range(n):
                K[0, j] = K[6, j]
            nsteps += 1
            fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if abs(h) < hmin:
                return s, out, nsteps, STATUS_UNDERFLOW
    return s, out, nsteps, STATUS_OK


def integrate_inward(N, lam, x0, y0, yp0, rtol=1e-12, atol=1e-300, t_eval=None,
                     max_steps=2_000_000):
    """Integrate from ``x0`` down to 0.

    Returns ``(state_at_0, samples, nsteps, status)``; the three quadrature
    channels in ``state_at_0`` are negated integrals over [0, x0] (the sweep
    runs backwards), ``samples`` rows follow ``t_eval`` (descending).
    """
    s0 = np.zeros(NSTATE, dtype=np.complex128)
    s0[0] = y0
    s0[1] = yp0
    if t_eval is None:
        t_eval = np.empty(0)
    t_eval = np.ascontiguousarray(t_eval, dtype=np.float64)
    return _dp45(float(N), complex(lam), float(x0), s0, float(rtol), float(atol),
                 t_eval, _A, _B, _C, _E, _P, int(max_steps))
