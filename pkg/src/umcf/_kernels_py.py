"""Pure numpy versions of the fused step kernels (fallback and reference).

Complex spectra are passed as interleaved float64 views, matching the
compiled kernels.
"""
from __future__ import annotations

import numpy as np


def _c(x):
    return x.view(np.complex128)


def nonlinear_terms(u, lap_u, inv_eps2, fp, w):
    """``fp = F'(u)/eps^2`` and ``w = F''(u)/eps^2 * (lap_u - fp)``, written in place."""
    np.multiply(u - 6.0 * u * u, inv_eps2, out=fp)
    np.multiply((1.0 - 12.0 * u) * inv_eps2, lap_u - fp, out=w)


def scale_spectral(ch, m, out):
    np.multiply(_c(ch), m, out=_c(out))


def combine_spectral(uh, fph, wh, a, b, c, out):
    o = _c(out)
    np.multiply(a, _c(uh), out=o)
    o -= b * _c(fph)
    o += c * _c(wh)


def project(u, cap, clamp):
    finite = bool(np.isfinite(u).all())
    if clamp:
        np.minimum(u, cap, out=u)
    return finite
