"""Energy, its pointwise densities, and one step of the convex-concave scheme.

The flow integrated here is

    u_t = mu + sigma (-Delta mu + F''(u) mu / eps^2),   mu = Delta u - F'(u) / eps^2,

discretized by treating ``-Delta + sigma Delta^2 + alpha - beta Delta`` implicitly
(diagonal in Fourier space) and everything else explicitly, followed by the
projection ``min(., 1/4)``.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from . import kernels
from .grid import Grid, gradient, rforward, rinverse
from .potential import OBSTACLE, F_poly
from .spectral_ops import FOUR_PI2, LinearSolveSymbol, build_symbol, laplacian

OBSTACLE_TOL = 1e-12


class ObstacleViolation(ValueError):
    """A field exceeds the obstacle value 1/4."""


class DivergenceError(FloatingPointError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"non-finite state at step {step_index}")


@dataclass(frozen=True)
class ModelParams:
    eps: float
    sigma: float
    dt: float
    alpha: float = 0.0
    beta: float = 0.0
    projection: bool = True

    def __post_init__(self):
        for name in ("eps", "dt"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("sigma", "alpha", "beta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be nonnegative, got {v}")

    @property
    def in_recommended_regime(self) -> bool:
        """``1 <= sigma/eps^2 <= 8`` and ``dt <= eps^2``."""
        r = self.sigma / self.eps ** 2
        return 1.0 <= r <= 8.0 and self.dt <= self.eps ** 2 * (1 + 1e-12)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnergyBreakdown:
    mass: float
    willmore: float
    total: float


def _check_obstacle(u, strict):
    if strict and np.max(u) > OBSTACLE + OBSTACLE_TOL:
        raise ObstacleViolation(f"max u = {np.max(u):.15g} exceeds 1/4")


def _grad_sq(grid, u):
    return sum(g * g for g in gradient(grid, u))


def mass_density(grid: Grid, u: np.ndarray, params: ModelParams, strict=True):
    """``eps/2 |grad u|^2 + F(u)/eps`` pointwise."""
    u = grid.check_field(u)
    _check_obstacle(u, strict)
    return 0.5 * params.eps * _grad_sq(grid, u) + F_poly(u) / params.eps


def eul(grid: Grid, u: np.ndarray, params: ModelParams, strict=True):
    """``-eps Delta u + F'(u)/eps``."""
    u = grid.check_field(u)
    _check_obstacle(u, strict)
    return -params.eps * laplacian(grid, u) + (u - 6.0 * u * u) / params.eps


def discrepancy(grid: Grid, u: np.ndarray, params: ModelParams, strict=True):
    """``eps^2 |grad u|^2 - 2 F(u)``; vanishes on the exact profile."""
    u = grid.check_field(u)
    _check_obstacle(u, strict)
    return params.eps ** 2 * _grad_sq(grid, u) - 2.0 * F_poly(u)


def energy(grid: Grid, u: np.ndarray, params: ModelParams, strict=True) -> EnergyBreakdown:
    dv = grid.cell_volume
    mass = float(np.sum(mass_density(grid, u, params, strict)) * dv)
    e = eul(grid, u, params, strict=False)
    willmore = float(params.sigma / (2.0 * params.eps) * np.sum(e * e) * dv)
    return EnergyBreakdown(mass, willmore, mass + willmore)


def g_operator(grid: Grid, u: np.ndarray, params: ModelParams, strict=True):
    """Explicit part of the scheme evaluated in real space.

    ``u + dt(-F'/eps^2 + sigma(Delta[F'/eps^2] + F''/eps^2 (Delta u - F'/eps^2))
    + alpha u - beta Delta u)``
    """
    u = grid.check_field(u)
    _check_obstacle(u, strict)
    e2 = params.eps ** 2
    fp = (u - 6.0 * u * u) / e2
    lap_u = laplacian(grid, u)
    w = (1.0 - 12.0 * u) / e2 * (lap_u - fp)
    rhs = -fp + params.sigma * (laplacian(grid, fp) + w)
    rhs = rhs + params.alpha * u - params.beta * lap_u
    return u + params.dt * rhs


class Stepper:
    """Fused implementation of :func:`step` with preallocated spectral tables."""

    def __init__(self, grid: Grid, params: ModelParams,
                 sym: LinearSolveSymbol | None = None, dealias: bool = False):
        if sym is None:
            sym = build_symbol(grid, params, dealias=dealias)
        if sym.grid != grid:
            raise ValueError("symbol and state grids differ")
        if (sym.dt, sym.sigma, sym.alpha, sym.beta) != (
                params.dt, params.sigma, params.alpha, params.beta):
            raise ValueError("symbol was built for different model parameters")
        self.grid, self.params, self.sym = grid, params, sym
        dt, s = params.dt, params.sigma
        lap = FOUR_PI2 * grid.xi_squared_half
        L = sym.values if sym.mask is None else sym.values * sym.mask
        shape = grid.xi_squared_half.shape
        self._neg_lap = np.ascontiguousarray(np.broadcast_to(-lap, shape))
        self._a = np.ascontiguousarray(L * (1.0 + dt * params.alpha + dt * params.beta * lap))
        self._b = np.ascontiguousarray(L * dt * (1.0 + s * lap))
        self._c = np.ascontiguousarray(np.broadcast_to(L * dt * s, shape))
        self._inv_eps2 = 1.0 / params.eps ** 2
        self._fp = np.empty(grid.shape)
        self._w = np.empty(grid.shape)
        self._out = np.empty(shape, dtype=complex)
        self._tmp = np.empty(shape, dtype=complex)

    def step(self, u: np.ndarray, step_index=None, keep_unprojected=False):
        """Advance one step; returns the new state (and the pre-projection field)."""
        grid = self.grid
        u = np.ascontiguousarray(u, dtype=float)
        uh = rforward(grid, u)
        kernels.scale_spectral(uh, self._neg_lap, self._tmp)
        lap_u = rinverse(grid, self._tmp)
        kernels.nonlinear_terms(u, lap_u, self._inv_eps2, self._fp, self._w)
        fph = rforward(grid, self._fp)
        wh = rforward(grid, self._w)
        kernels.combine_spectral(uh, fph, wh, self._a, self._b, self._c, self._out)
        new = np.ascontiguousarray(rinverse(grid, self._out))
        raw = new.copy() if keep_unprojected else None
        if not kernels.project(new, OBSTACLE, self.params.projection):
            raise DivergenceError(step_index)
        return (new, raw) if keep_unprojected else new

    def advance(self, u: np.ndarray, nsteps: int, start_index: int = 0):
        for i in range(nsteps):
            u = self.step(u, step_index=start_index + i + 1)
        return u


@lru_cache(maxsize=8)
def _cached_stepper(sym: LinearSolveSymbol, params: ModelParams) -> Stepper:
    return Stepper(sym.grid, params, sym)


def step(u: np.ndarray, params: ModelParams, sym: LinearSolveSymbol, step_index=None):
    """``min(L[g(u)], 1/4)`` (plain ``L[g(u)]`` when projection is off)."""
    if not np.all(np.isfinite(u)):
        raise DivergenceError(step_index)
    return _cached_stepper(sym, params).step(u, step_index=step_index)
