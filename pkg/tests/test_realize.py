import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wedgespec.contour import custom_profile, flat_profile, wedge_profile
from wedgespec.errors import DomainError
from wedgespec.realize import (PotentialSpec, build_real_hamiltonian, continuity_gap,
                               custom_potential, general_matching_residual,
                               matching_condition, matching_residual, monomial_potential,
                               pt_conjugate_residual, pt_phase_error, square_well_potential,
                               symmetric_grid, theta_nu, tip_phase, verify_pt_symmetry,
                               wedge_decompose)


def _bump_profile():
    # even, smooth, analytic derivatives
    f = lambda x: -0.4 * np.asarray(x) ** 2 / (1 + np.asarray(x) ** 2)
    df = lambda x: -0.8 * np.asarray(x) / (1 + np.asarray(x) ** 2) ** 2
    ddf = lambda x: -0.8 * (1 - 3 * np.asarray(x) ** 2) / (1 + np.asarray(x) ** 2) ** 3
    return custom_profile(f, df, ddf)


@pytest.mark.parametrize("profile", [_bump_profile(), wedge_profile(0.4, 0.5)])
def test_real_line_hamiltonian_reproduces_contour_action(profile):
    # Psi = exp(-z^2/2) solves -Psi'' + z^2 Psi = Psi on any contour; its
    # pullback psi(x) = Psi(x + i f(x)) must satisfy H' psi = psi. The
    # derivatives of psi are taken by finite differences, not the chain rule.
    spec = custom_potential(lambda z: np.asarray(z, dtype=complex) ** 2)
    H = build_real_hamiltonian(spec, profile)
    psi = lambda x: np.exp(-profile(x) ** 2 / 2)
    x = np.linspace(-0.45, 0.45, 9)
    h = 1e-3
    d1 = (psi(x - 2 * h) - 8 * psi(x - h) + 8 * psi(x + h) - psi(x + 2 * h)) / (12 * h)
    d2 = (-psi(x - 2 * h) + 16 * psi(x - h) - 30 * psi(x) + 16 * psi(x + h)
          - psi(x + 2 * h)) / (12 * h * h)
    out = H.apply(x, psi(x), d1, d2)
    assert np.allclose(out, psi(x), atol=1e-7)


def test_coefficients_match_apply():
    H = build_real_hamiltonian(monomial_potential(1.0), wedge_profile(0.3, 0.2))
    x = np.linspace(-0.5, 0.5, 11)
    c2, c1, c0 = H.coefficients(x)
    rng = np.random.default_rng(0)
    p, dp, ddp = (rng.normal(size=x.size) + 1j * rng.normal(size=x.size) for _ in range(3))
    assert np.allclose(H.apply(x, p, dp, ddp), -c2 * ddp + c1 * dp + c0 * p)


def test_flat_contour_is_plain_schrodinger():
    H = build_real_hamiltonian(monomial_potential(0.0), flat_profile())
    x = np.linspace(-2, 2, 5)
    c2, c1, c0 = H.coefficients(x)
    assert np.allclose(c2, 1) and np.allclose(c1, 0) and np.allclose(c0, x**2)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 3.7, 0.0])
def test_monomial_potentials_are_pt_symmetric(nu):
    rep = verify_pt_symmetry(monomial_potential(nu), wedge_profile(theta_nu(nu) + 0.05, 0.1))
    assert rep.passed, rep.max_residuals


def test_pt_violation_is_reported_not_raised():
    rep = verify_pt_symmetry(custom_potential(lambda z: np.asarray(z, dtype=complex)),
                             wedge_profile(0.3))
    assert rep.f_even and not rep.V_pt and not rep.passed


def test_odd_profile_fails_evenness():
    f = lambda x: 0.1 * np.asarray(x, dtype=float) ** 3
    prof = custom_profile(f, lambda x: 0.3 * np.asarray(x) ** 2, lambda x: 0.6 * np.asarray(x))
    rep = verify_pt_symmetry(monomial_potential(1.0), prof)
    assert not rep.f_even


def test_asymmetric_grid_is_rejected():
    with pytest.raises(DomainError):
        verify_pt_symmetry(monomial_potential(1.0), wedge_profile(0.3), grid=[0.0, 1.0, 2.0])


def test_symmetric_grid_is_exactly_symmetric():
    g = symmetric_grid(7.5, 33)
    assert np.array_equal(np.sort(-g), g)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 4.0])
def test_ray_potentials_are_pt_images(nu):
    th = theta_nu(nu) + 0.03
    hp, hm = wedge_decompose(monomial_potential(nu), th)
    xt = np.linspace(0.1, 3.0, 7)
    N = nu + 2
    vp = hp.potential(xt) / xt**N
    vm = hm.potential(-xt) / xt**N
    assert np.allclose(np.abs(vp), 1) and np.allclose(np.abs(vm), 1)
    # right ray: z = x~ e^{-i theta}, so V = |z|^N e^{-2i theta + i nu (pi/2 - theta)}
    assert np.allclose(vp, np.exp(1j * (nu * math.pi / 2 - N * th)))
    assert np.allclose(vp, np.conj(vm))
    assert hp.phase == pytest.approx(np.conj(hm.phase))
    assert pt_conjugate_residual(hp, hm) < 1e-12


def test_theta_nu_aligns_kinetic_and_potential_phases():
    for nu in (0.5, 1.0, 2.0, 3.0, 4.0):
        th = theta_nu(nu)
        hp, _ = wedge_decompose(monomial_potential(nu), th)
        x = 2.0
        v = complex(hp.potential(np.array([x]))[0]) / x ** (nu + 2)
        # e^{2i th} p~^2 + v x~^N = e^{2i th} (p~^2 + x~^N)
        assert cmath.isclose(v, hp.phase, abs_tol=1e-12)


def test_wedge_decompose_domain():
    with pytest.raises(DomainError):
        wedge_decompose(monomial_potential(1.0), math.pi / 2)


def test_potential_spec_validation():
    with pytest.raises(DomainError):
        monomial_potential(-2.0)
    with pytest.raises(DomainError):
        square_well_potential(0.0)
    with pytest.raises(DomainError):
        PotentialSpec(A=None, V=None, variant="other")


def test_square_well_walls():
    V = square_well_potential(2.0).V
    assert V(np.array([0.5 + 0.2j]))[0] == 0
    assert np.isinf(V(np.array([1.5]))[0].real)


angles = st.floats(min_value=-1.2, max_value=1.2)
cplx = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@given(angles, cplx)
def test_matching_residual_vanishes_on_matched_data(theta, dp):
    for conv, k in (("double", 2), ("analytic", 1)):
        mc = matching_condition(theta, convention=conv)
        dm = cmath.exp(2j * k * theta) * dp
        assert abs(matching_residual(mc, 1.0, 1.0, dm, dp)) <= 1e-12 * (1 + abs(dp))
        assert cmath.isclose(tip_phase(theta, k) * dm, dp, abs_tol=1e-9 * (1 + abs(dp)))


@given(angles, cplx, cplx)
def test_matching_residual_antilinear_symmetry(theta, dm, dp):
    # the PT image of tip data (dm, dp) is (-dp*, -dm*); the residual maps to its conjugate
    mc = matching_condition(theta)
    r = matching_residual(mc, 1, 1, dm, dp)
    r_pt = matching_residual(mc, 1, 1, -np.conj(dp), -np.conj(dm))
    assert cmath.isclose(r_pt, np.conj(r), rel_tol=1e-12, abs_tol=1e-9)


@given(angles, cplx)
def test_general_form_reduces_under_continuity(theta, dp):
    mc = matching_condition(theta)
    dm = cmath.exp(4j * theta) * dp
    r = general_matching_residual(mc, 0.7, 0.7, dm, dp)
    assert abs(r) <= 1e-9 * (1 + abs(dp))


def test_gauge_term_enters_general_form():
    mc = matching_condition(0.3, A0=2.0)
    r = general_matching_residual(mc, 1.0, 1.5, 0.0, 0.0)
    assert r == pytest.approx(-2j * 2.0 * 0.5)
    assert continuity_gap(1.0, 1.5) == 0.5


def test_pt_phase_error():
    th = 0.2
    dp = cmath.exp(1j * (math.pi / 2 - 2 * th))
    dm = -np.conj(dp)
    em, ep = pt_phase_error(th, dm, dp)
    assert em < 1e-12 and ep < 1e-12


def test_unknown_convention():
    with pytest.raises(DomainError):
        matching_condition(0.1, convention="other")
