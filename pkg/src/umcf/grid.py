"""Periodic lattice, wavenumber layout and normalized discrete Fourier transforms.

Coefficients follow the convention ``c_0 = mean(f)``: the forward transform
divides by the total sample count and the inverse applies no scaling.  Fields
are plain ``numpy`` arrays of shape ``grid.shape`` (row-major, axis 0 first).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import os

import numpy as np
import scipy.fft

IMAG_RESIDUE_TOL = 1e-10


class InvalidSpectralData(ValueError):
    """Raised when coefficients do not describe a real field."""


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("UMCF_THREADS", "1")))
    except ValueError:
        return 1


_WORKERS = _default_workers()


def set_threads(n: int) -> None:
    """Set the number of FFT worker threads used by every transform."""
    global _WORKERS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _WORKERS = int(n)


def get_threads() -> int:
    return _WORKERS


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on the box ``prod_a [0, length_a)``.

    Parameters
    ----------
    n : tuple of int
        Samples per axis, each >= 4.
    length : tuple of float
        Physical box length per axis.
    """

    n: tuple[int, ...]
    length: tuple[float, ...]

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        length = tuple(float(v) for v in np.atleast_1d(self.length))
        if len(length) == 1 and len(n) > 1:
            length = length * len(n)
        if not 1 <= len(n) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(n)}")
        if len(length) != len(n):
            raise ValueError("n and length must have the same number of axes")
        if any(v < 4 for v in n):
            raise ValueError(f"every axis needs at least 4 samples, got {n}")
        if any(not np.isfinite(v) or v <= 0 for v in length):
            raise ValueError(f"box lengths must be positive, got {length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)

    @classmethod
    def cube(cls, dim: int, n: int, length: float = 1.0) -> "Grid":
        return cls((n,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(l / n for l, n in zip(self.length, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    def axes(self) -> list[np.ndarray]:
        """1D sample coordinates ``x_k = k h`` per axis."""
        return [np.arange(n) * h for n, h in zip(self.n, self.spacing)]

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays (sparse meshgrid)."""
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    def points(self) -> np.ndarray:
        """All lattice points as an array of shape ``(size, dim)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    # wavenumber layout -------------------------------------------------

    def mode_indices(self, axis: int) -> np.ndarray:
        """Integer mode indices k along ``axis`` in FFT-natural order."""
        n = self.n[axis]
        return np.fft.fftfreq(n, d=1.0 / n).astype(int)

    def frequencies(self, axis: int, real: bool = False) -> np.ndarray:
        """Frequencies xi = k / length along ``axis``.

        With ``real=True`` the last axis uses the half-spectrum layout of
        :func:`scipy.fft.rfftn`.
        """
        n = self.n[axis]
        if real and axis == self.dim - 1:
            k = np.arange(n // 2 + 1, dtype=float)
        else:
            k = self.mode_indices(axis).astype(float)
        return k / self.length[axis]

    def _xi_squared(self, real: bool) -> np.ndarray:
        out = 0.0
        for a in range(self.dim):
            xi = self.frequencies(a, real=real)
            shape = [1] * self.dim
            shape[a] = xi.size
            out = out + (xi ** 2).reshape(shape)
        return np.asarray(out, dtype=float)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi_k|^2 on the full coefficient layout."""
        return self._xi_squared(real=False)

    @cached_property
    def xi_squared_half(self) -> np.ndarray:
        """|xi_k|^2 on the real-input (half-spectrum) layout."""
        return self._xi_squared(real=True)

    def check_field(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f


def wavenumber(grid: Grid, k) -> np.ndarray:
    """Return ``xi_k = (k_1/l_1, ..., k_d/l_d)`` for a multi-index in K_N."""
    k = np.atleast_1d(np.asarray(k))
    if k.shape != (grid.dim,):
        raise ValueError(f"multi-index must have {grid.dim} entries")
    for ka, n in zip(k, grid.n):
        if not -n // 2 <= ka <= n // 2 - 1:
            raise ValueError(f"mode index {ka} outside [{-n // 2}, {n // 2 - 1}]")
    return np.array([ka / l for ka, l in zip(k, grid.length)], dtype=float)


def mode_slot(grid: Grid, k) -> tuple[int, ...]:
    """Array position of mode ``k`` inside the FFT-natural coefficient array."""
    wavenumber(grid, k)  # range check
    return tuple(int(ka) % n for ka, n in zip(np.atleast_1d(k), grid.n))


def forward(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Discrete Fourier coefficients of a real field, ``c_0`` = mean."""
    f = grid.check_field(f)
    return scipy.fft.fftn(f, norm="forward", workers=_WORKERS)


def inverse(grid: Grid, c: np.ndarray) -> np.ndarray:
    """Real field from Hermitian coefficients; raises on imaginary residue."""
    c = grid.check_field(c)
    f = scipy.fft.ifftn(c, norm="forward", workers=_WORKERS)
    residue = float(np.max(np.abs(f.imag))) if f.size else 0.0
    if residue > IMAG_RESIDUE_TOL:
        raise InvalidSpectralData(
            f"coefficients are not Hermitian: imaginary residue {residue:.3e}")
    return np.ascontiguousarray(f.real)


def rforward(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Half-spectrum forward transform (same normalization as :func:`forward`)."""
    return scipy.fft.rfftn(f, norm="forward", workers=_WORKERS)


def rinverse(grid: Grid, c: np.ndarray) -> np.ndarray:
    return scipy.fft.irfftn(c, s=grid.shape, norm="forward", workers=_WORKERS)


def gradient(grid: Grid, f: np.ndarray) -> list[np.ndarray]:
    """Spectral gradient; the unmatched Nyquist mode is dropped for odd derivatives."""
    f = grid.check_field(f)
    fh = rforward(grid, f)
    out = []
    for a in range(grid.dim):
        xi = grid.frequencies(a, real=True).copy()
        n = grid.n[a]
        if n % 2 == 0 and not (a == grid.dim - 1):
            xi[n // 2] = 0.0
        elif n % 2 == 0:
            xi[-1] = 0.0
        shape = [1] * grid.dim
        shape[a] = xi.size
        out.append(rinverse(grid, fh * (2j * np.pi * xi.reshape(shape))))
    return out
