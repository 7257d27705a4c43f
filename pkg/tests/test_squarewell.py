import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wedgespec.errors import DomainError, PreconditionError
from wedgespec.squarewell import (WellProblem, complex_energies, count_real,
                                  count_real_direct, count_real_neumann, eigenfunction,
                                  exceptional_sweep, overlap_matrix, overlap_quadrature,
                                  real_roots_u, real_spectrum, secular, theta_sweep,
                                  tip_data, unit_overlap)

mp.mp.dps = 30


# --- independent oracle -----------------------------------------------------
# psi = c e^{i w x} + d e^{-i w x} on each ray with w_+- = e^{-+i theta} sqrt(E),
# walls at +-L/2, continuity at the tip and the tip derivative matching. The
# eigenvalues are zeros of the 4x4 determinant of this linear system, built
# here from scratch in mpmath (no use of the reduced secular function).

def oracle_det(E, theta, bc="dirichlet", L=1):
    k = mp.sqrt(E)
    h = mp.mpf(L) / 2
    wp, wm = mp.exp(-1j * theta) * k, mp.exp(1j * theta) * k
    s = 1 if bc == "dirichlet" else -1
    rows = [
        [mp.exp(1j * wp * h), s * mp.exp(-1j * wp * h), 0, 0],
        [0, 0, mp.exp(-1j * wm * h), s * mp.exp(1j * wm * h)],
        [1, 1, -1, -1],
        # e^{-2i theta} psi'(0-) = e^{2i theta} psi'(0+), divided by i sqrt(E)
        [-mp.exp(1j * theta), mp.exp(1j * theta), mp.exp(-1j * theta), -mp.exp(-1j * theta)],
    ]
    return mp.det(mp.matrix(rows))


def oracle_exceptional(E0, theta0, bc):
    f = lambda E, th: [oracle_det(E, th, bc), mp.diff(lambda e: oracle_det(e, th, bc), E)]
    E, th = mp.findroot(f, (mp.mpf(E0) * 1.001, mp.mpf(theta0) + 1e-4))
    return E, th


def oracle_psi(E, theta, L=1):
    """Dirichlet eigenfunction in sine form, unnormalized."""
    k = mp.sqrt(E)
    h = mp.mpf(L) / 2
    wp, wm = mp.exp(-1j * theta) * k, mp.exp(1j * theta) * k
    A = mp.sin(wp * h) / mp.sin(wm * h)
    return lambda x: mp.sin(wp * (h - x)) if x >= 0 else A * mp.sin(wm * (h + x))


def oracle_ip(f, g, L=1):
    h = mp.mpf(L) / 2
    return mp.quad(lambda x: mp.conj(f(x)) * g(x), [-h, 0, h])


@pytest.fixture(scope="module")
def eps_dirichlet():
    return exceptional_sweep(40)


# --- exceptional angles -------------------------------------------------------

REFERENCE_EPS = [(0.0, 45.00), (61.58, 14.81), (200.9, 9.88), (418.9, 7.59), (715.7, 6.23)]


def test_first_five_exceptional_points():
    eps = exceptional_sweep(5)
    for ep, (E, deg) in zip(eps, REFERENCE_EPS):
        assert math.degrees(ep.theta) == pytest.approx(deg, abs=0.02)
        assert ep.E == pytest.approx(E, rel=5e-3, abs=1e-12)


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_exceptional_points_against_determinant_oracle(bc):
    eps = exceptional_sweep(5, bc)
    for ep in eps:
        if ep.E == 0.0:
            continue
        E, th = oracle_exceptional(ep.E, ep.theta, bc)
        assert abs(mp.im(E)) < 1e-20 and abs(mp.im(th)) < 1e-20
        assert ep.E == pytest.approx(float(mp.re(E)), rel=1e-12)
        assert ep.theta == pytest.approx(float(mp.re(th)), abs=1e-13)


def test_neumann_first_exceptional_angle():
    # frozen from the determinant oracle
    eps = exceptional_sweep(4, "neumann")
    deg = [math.degrees(e.theta) for e in eps]
    assert deg == pytest.approx([20.6581202, 11.7814503, 8.5670843, 6.8370616], abs=1e-7)


def test_exceptional_angles_decrease(eps_dirichlet):
    th = [e.theta for e in eps_dirichlet]
    assert all(a > b for a, b in zip(th, th[1:]))
    assert eps_dirichlet[0].theta == math.pi / 4


def test_roots_coalesce_at_exceptional_point(eps_dirichlet):
    ep = eps_dirichlet[1]
    below = real_spectrum(WellProblem(ep.theta - 1e-7), normalize=False)
    above = real_spectrum(WellProblem(ep.theta + 1e-7), normalize=False)
    assert below.count == 3 and above.count == 1
    near = [E for E in below.real if abs(E - ep.E) < 1.0]
    assert len(near) == 2


# --- real spectrum --------------------------------------------------------------

@pytest.mark.parametrize("deg", [3.0, 10.0, 14.0, 30.0, 44.9])
def test_real_spectrum_against_determinant_oracle(deg):
    th = math.radians(deg)
    rep = real_spectrum(WellProblem(th), normalize=False)
    assert rep.count >= 1
    for E in rep.real:
        root = mp.findroot(lambda e: oracle_det(e, th), mp.mpf(E))
        assert abs(mp.im(root)) < 1e-20
        assert E == pytest.approx(float(mp.re(root)), rel=1e-12)


def test_scaling_with_length():
    th = math.radians(12)
    a = real_spectrum(WellProblem(th, 1.0), normalize=False).real
    b = real_spectrum(WellProblem(th, 2.5), normalize=False).real
    assert np.allclose(np.array(b) * 2.5**2, a, rtol=1e-13)


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_hermitian_limit(bc):
    rep = real_spectrum(WellProblem(0.0, 2.0, bc), n_max=10, normalize=False)
    E = [e for e in rep.real if e > 0]
    ref = [(n * math.pi / 2.0) ** 2 for n in range(1, 11)]
    assert np.allclose(E, ref, rtol=1e-12)


def test_no_real_levels_beyond_45_degrees():
    for deg in (45.5, 60.0, 80.0):
        assert real_spectrum(WellProblem(math.radians(deg)), normalize=False).count == 0


def test_zero_mode_at_45_degrees():
    rep = real_spectrum(WellProblem(math.pi / 4))
    assert rep.real[0] == 0.0 and rep.pairs[0].kind == "linear"
    assert rep.count == 1


def test_complex_pair_just_above_exceptional_angle():
    th = math.radians(14.81)
    cplx = complex_energies(WellProblem(th))
    root = mp.findroot(lambda e: oracle_det(e, th), mp.mpc(61.5, 0.4))
    assert cplx[0] == pytest.approx(complex(root), rel=1e-11)
    assert cplx[1] == pytest.approx(complex(root).conjugate(), rel=1e-11)


def test_secular_roots_are_roots():
    th = math.radians(7)
    for u, _ in real_roots_u(th):
        assert abs(secular(u, th)) < 1e-12


# --- counting -------------------------------------------------------------------

@given(st.floats(min_value=0.05, max_value=1.5))
@settings(max_examples=60)
def test_count_formula_matches_direct_count(eps_dirichlet, theta):
    assume(min(abs(theta - e.theta) for e in eps_dirichlet) > 1e-6)
    assert count_real(theta, eps_dirichlet) == count_real_direct(theta)


@given(st.floats(min_value=0.12, max_value=1.5))
@settings(max_examples=30)
def test_neumann_count_formula(theta):
    eps = exceptional_sweep(6, "neumann")
    assume(min(abs(theta - e.theta) for e in eps) > 1e-6)
    assert count_real_neumann(theta, eps) == count_real_direct(theta, "neumann")


def test_count_at_exceptional_angle(eps_dirichlet):
    assert count_real(eps_dirichlet[2].theta, eps_dirichlet) == 4
    assert count_real(math.pi / 4, eps_dirichlet) == 1


def test_count_preconditions(eps_dirichlet):
    with pytest.raises(PreconditionError):
        count_real(0.3, eps_dirichlet[1:])
    with pytest.raises(PreconditionError):
        count_real(1e-3, eps_dirichlet[:3])
    with pytest.raises(DomainError):
        count_real(0.0, eps_dirichlet)


def test_theta_sweep_rows():
    rows = theta_sweep([math.radians(d) for d in (20, 10, 7)])
    assert [r.count for r in rows] == [1, 3, 7]
    with pytest.raises(DomainError):
        theta_sweep([0.0])


# --- eigenfunctions -------------------------------------------------------------

@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_eigenfunctions_satisfy_walls_and_tip(bc):
    th = math.radians(9)
    rep = real_spectrum(WellProblem(th, 1.0, bc))
    for p in rep.pairs[1:] if bc == "neumann" else rep.pairs:
        wall = eigenfunction(p, np.array([-0.5, 0.5]), derivative=(bc == "neumann"))
        assert np.max(np.abs(wall)) < 1e-10
        psi0, dm, dp = tip_data(p)
        assert abs(np.exp(-2j * th) * dm - np.exp(2j * th) * dp) < 1e-10 * abs(dp)
        left = complex(eigenfunction(p, np.array([-1e-12]))[0])
        assert abs(left - psi0) < 1e-9


def test_eigenfunction_domain():
    p = real_spectrum(WellProblem(0.2)).pairs[0]
    with pytest.raises(DomainError):
        eigenfunction(p, np.array([0.6]))


def test_overlap_closed_form_against_quadrature():
    pairs = real_spectrum(WellProblem(math.radians(8))).pairs
    G = overlap_matrix(pairs, check=False)
    Q = np.array([[overlap_quadrature(p, q) for q in pairs] for p in pairs])
    assert np.allclose(G, Q, atol=1e-12)
    assert np.allclose(np.diag(G), 1.0)


def test_overlap_at_second_exceptional_angle_against_mpmath(eps_dirichlet):
    th = eps_dirichlet[1].theta
    rep = real_spectrum(WellProblem(th))
    G, norms = unit_overlap(rep.pairs[:2])
    f1, f2 = (oracle_psi(mp.mpf(E), th) for E in rep.real[:2])
    n1, n2 = mp.sqrt(mp.re(oracle_ip(f1, f1))), mp.sqrt(mp.re(oracle_ip(f2, f2)))
    r = abs(oracle_ip(f1, f2)) / (n1 * n2)
    assert abs(G[0, 1]) == pytest.approx(float(r), rel=1e-9)
    assert abs(G[0, 1]) == pytest.approx(0.16576, abs=5e-6)


def test_theta_zero_states_are_orthonormal():
    for bc in ("dirichlet", "neumann"):
        pairs = real_spectrum(WellProblem(0.0, 1.0, bc), n_max=5).pairs
        G = overlap_matrix(pairs)
        assert np.allclose(G, np.eye(len(pairs)), atol=1e-13)


def test_problem_validation():
    for bad in ((-0.1,), (math.pi / 2,), (0.3, 0.0), (0.3, 1.0, "robin")):
        with pytest.raises(DomainError):
            WellProblem(*bad)
    with pytest.raises(DomainError):
        real_roots_u(0.0)
    with pytest.raises(DomainError):
        exceptional_sweep(0)
