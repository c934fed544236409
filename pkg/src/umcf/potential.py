"""Scalar nonlinearities: the one-well/one-obstacle potential and the optimal profiles.

``F(s) = s^2 (1/2 - 2 s)`` for ``s <= 1/4`` and ``+inf`` above.  The bump
``y = -q'`` built from the logistic profile ``q(s) = 1/(1 + e^s)`` solves
``y'' = F'(y)`` with peak value ``1/4`` at ``s = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
import sys

import numpy as np
from scipy import integrate
from scipy.special import expit

OBSTACLE = 0.25
WELL = 0.0
FLAT_POINT = 1.0 / 6.0
CONVEXITY_LIMIT = 1.0 / 12.0
CF = 1.0 / 30.0
# Stands in for +inf above the obstacle so energy sums stay finite.
INFINITY_SENTINEL = sys.float_info.max


class DomainError(ValueError):
    """Argument above the obstacle where F is not differentiable."""


@dataclass(frozen=True)
class PotentialConstants:
    cF: float = CF
    obstacle: float = OBSTACLE
    well: float = WELL
    flat_point: float = FLAT_POINT
    convexity_limit: float = CONVEXITY_LIMIT


def _check_domain(s):
    if np.any(np.asarray(s) > OBSTACLE):
        raise DomainError("argument exceeds the obstacle value 1/4")


def F(s):
    """Potential value; the sentinel replaces +inf for ``s > 1/4``."""
    s = np.asarray(s, dtype=float)
    out = np.where(s <= OBSTACLE, s * s * (0.5 - 2.0 * s), INFINITY_SENTINEL)
    return out[()] if out.ndim == 0 else out


def F_poly(s):
    """Polynomial branch of F, without the obstacle."""
    s = np.asarray(s, dtype=float)
    return s * s * (0.5 - 2.0 * s)


def F_prime(s):
    """``F'(s) = s - 6 s^2`` (left derivative at 1/4)."""
    _check_domain(s)
    s = np.asarray(s, dtype=float)
    out = s - 6.0 * s * s
    return out[()] if out.ndim == 0 else out


def F_second(s):
    """``F''(s) = 1 - 12 s``."""
    _check_domain(s)
    s = np.asarray(s, dtype=float)
    out = 1.0 - 12.0 * s
    return out[()] if out.ndim == 0 else out


def W(s):
    """Classical double well ``s^2 (1 - s)^2 / 2``."""
    s = np.asarray(s, dtype=float)
    return 0.5 * s * s * (1.0 - s) ** 2


def profile_q(s):
    """Optimal profile ``q(s) = 1/(1 + e^s)``; ``q(0) = 1/2``."""
    return expit(-np.asarray(s, dtype=float))


def profile_minus_qprime(s):
    """Non-oriented profile ``-q'(s) = q (1 - q)``, even, peak 1/4."""
    a = np.abs(np.asarray(s, dtype=float))
    # the product can round one ulp above the peak near s = 0
    return np.minimum(expit(-a) * expit(a), OBSTACLE)


def profile_minus_qprime_d1(s):
    """First derivative of ``-q'``: ``-q'' = -q (1-q) (1-2q) = -y tanh(s/2)``."""
    s = np.asarray(s, dtype=float)
    return -profile_minus_qprime(s) * np.tanh(0.5 * s)


def profile_minus_qprime_d2(s):
    """Second derivative of ``-q'``, equal to ``F'(-q')`` in closed form."""
    y = profile_minus_qprime(s)
    return y - 6.0 * y * y


def compute_cF(epsabs: float = 1e-14, epsrel: float = 1e-13) -> float:
    """``2 int_0^{1/4} sqrt(2 F(t)) dt`` by adaptive quadrature (closed form 1/30)."""
    val, _ = integrate.quad(lambda t: np.sqrt(2.0 * F_poly(t)), 0.0, OBSTACLE,
                            epsabs=epsabs, epsrel=epsrel, limit=200)
    return 2.0 * val
