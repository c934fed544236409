import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from umcf.potential import (CF, DomainError, F, F_poly, F_prime, F_second, INFINITY_SENTINEL,
                            PotentialConstants, compute_cF, profile_minus_qprime,
                            profile_minus_qprime_d1, profile_minus_qprime_d2, profile_q)


@pytest.mark.parametrize("s, expected", [(0.0, 0.0), (0.25, 0.0), (0.125, 1 / 256)])
def test_F_values(s, expected):
    assert F(s) == pytest.approx(expected, abs=1e-18)


def test_F_above_obstacle_is_sentinel():
    assert F(0.3) == INFINITY_SENTINEL
    assert np.all(F(np.array([0.26, 1.0])) == INFINITY_SENTINEL)


def test_derivative_exact_values():
    assert F_prime(0.25) == -0.125
    assert F_prime(0.0) == 0.0
    assert F_prime(1 / 6) == pytest.approx(0.0, abs=1e-17)
    assert F_second(0.0) == 1.0
    assert F_second(1 / 12) == pytest.approx(0.0, abs=1e-16)
    assert F_second(0.25) == -2.0


def test_derivatives_reject_domain():
    with pytest.raises(DomainError):
        F_prime(0.3)
    with pytest.raises(DomainError):
        F_second(np.array([0.1, 0.26]))


def test_derivatives_match_finite_differences():
    s = np.linspace(0.001, 0.249, 500)
    h = 1e-6
    fd1 = (F_poly(s + h) - F_poly(s - h)) / (2 * h)
    fd2 = (F_prime(s + h) - F_prime(s - h)) / (2 * h)
    assert np.allclose(fd1, F_prime(s), rtol=1e-6, atol=1e-12)
    assert np.allclose(fd2, F_second(s), rtol=1e-6, atol=1e-9)


@given(st.floats(0.0, 0.25))
def test_F_nonnegative_on_phase_range(s):
    v = F(s)
    assert v >= 0
    if 1e-100 < s < 0.25:
        assert v > 0


@given(st.floats(-50, 1e-12))
def test_F_second_nonnegative_below_convexity_limit(s):
    assert F_second(s / 12 + 1 / 12 - 1e-12) >= -1e-12


def test_profile_q():
    assert profile_q(0.0) == 0.5
    assert profile_q(math.log(3)) == pytest.approx(0.25, rel=1e-15)
    assert profile_q(800.0) == 0.0
    s = np.linspace(-30, 30, 1001)
    assert np.all(np.diff(profile_q(s)) < 0)


def test_profile_minus_qprime_values():
    assert profile_minus_qprime(0.0) == 0.25
    assert profile_minus_qprime(10.0) == profile_minus_qprime(-10.0)
    s = 10.0
    assert profile_minus_qprime(s) == pytest.approx(math.exp(s) / (1 + math.exp(s)) ** 2, rel=1e-14)
    s = np.linspace(-40, 40, 10001)
    y = profile_minus_qprime(s)
    assert np.all((y > 0) & (y <= 0.25))


def test_profile_is_derivative_of_q():
    s = np.linspace(-8, 8, 33)
    h = 1e-5
    dq = (profile_q(s + h) - profile_q(s - h)) / (2 * h)
    assert np.allclose(-dq, profile_minus_qprime(s), atol=1e-10)


def test_profile_ode_residual():
    s = np.linspace(-12, 12, 241)
    h = 1e-4
    y = profile_minus_qprime
    ypp = (y(s + h) - 2 * y(s) + y(s - h)) / h ** 2
    assert np.max(np.abs(ypp - F_prime(y(s)))) <= 1e-8


def test_profile_closed_form_derivatives():
    s = np.linspace(-10, 10, 81)
    h = 1e-5
    d1 = (profile_minus_qprime(s + h) - profile_minus_qprime(s - h)) / (2 * h)
    d2 = (profile_minus_qprime_d1(s + h) - profile_minus_qprime_d1(s - h)) / (2 * h)
    assert np.allclose(profile_minus_qprime_d1(s), d1, atol=1e-10)
    assert np.allclose(profile_minus_qprime_d2(s), d2, atol=1e-9)


def test_first_integral_of_profile():
    s = np.linspace(-30, 30, 2001)
    disc = profile_minus_qprime_d1(s) ** 2 - 2 * F_poly(profile_minus_qprime(s))
    assert np.max(np.abs(disc)) <= 1e-12


def test_cF_closed_form():
    assert compute_cF() == pytest.approx(1 / 30, abs=1e-10)
    assert CF == 1 / 30


def test_cF_panel_refinement():
    # s = (1 - v^2)/4 removes the square-root endpoint behaviour at s = 1/4
    def composite(panels):
        v = np.linspace(0.0, 1.0, 2 * panels + 1)
        s = (1 - v ** 2) / 4
        return 2 * integrate.simpson(np.sqrt(2 * F_poly(s)) * v / 2, x=v)
    coarse, fine = composite(10 ** 3), composite(10 ** 6)
    assert abs(coarse - fine) <= 1e-8
    assert fine == pytest.approx(1 / 30, abs=1e-10)


def test_equipartition_identity():
    energy, _ = integrate.quad(
        lambda s: 0.5 * profile_minus_qprime_d1(s) ** 2 + F_poly(profile_minus_qprime(s)),
        -60, 60, limit=400, epsabs=1e-14)
    assert energy == pytest.approx(compute_cF(), abs=1e-12)


def test_constants_record():
    c = PotentialConstants()
    assert (c.obstacle, c.well, c.flat_point, c.convexity_limit) == (0.25, 0.0, 1 / 6, 1 / 12)
    assert c.cF == pytest.approx(1 / 30)
