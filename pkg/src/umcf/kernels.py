"""Kernel backend selection.

The compiled extension is used when importable; ``UMCF_KERNELS=python`` forces
the numpy fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("UMCF_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def use_backend(name: str) -> None:
    """Switch between ``"cython"`` and ``"python"`` at runtime."""
    global _impl, BACKEND
    if name == "python":
        _impl = _kernels_py
    elif name == "cython":
        from . import _kernels as _compiled
        _impl = _compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name


def nonlinear_terms(u, lap_u, inv_eps2, fp, w):
    _impl.nonlinear_terms(u.reshape(-1), lap_u.reshape(-1), inv_eps2,
                          fp.reshape(-1), w.reshape(-1))


def _f(z):
    return z.reshape(-1).view(np.float64)


def scale_spectral(ch, m, out):
    """``out = m * ch`` for a complex spectrum and a real multiplier."""
    _impl.scale_spectral(_f(ch), m.reshape(-1), _f(out))


def combine_spectral(uh, fph, wh, a, b, c, out):
    """``out = a*uh - b*fph + c*wh`` with real per-mode weights."""
    _impl.combine_spectral(_f(uh), _f(fph), _f(wh), a.reshape(-1), b.reshape(-1),
                           c.reshape(-1), _f(out))


def project(u, cap, clamp=True) -> bool:
    return bool(_impl.project(u.reshape(-1), cap, clamp))
