"""Validation experiments with their default settings and pass/fail rules.

Each function returns an :class:`ExperimentResult` listing the individual
checks with measured values; the CLI and the acceptance tests share them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import functools
import logging
import math
import time as _time

import numpy as np
from scipy import ndimage

from . import geometry as geo
from .diagnostics import (exact_radius_law, fit_radius_law, gamma_limsup_study,
                          interface_band)
from .grid import Grid
from .model import ModelParams, discrepancy
from .potential import profile_minus_qprime
from .solver import ListSink, RunPlan, run

log = logging.getLogger(__name__)


@dataclass
class Check:
    name: str
    measured: float
    limit: str
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.measured:.6g} ({self.limit})"


@dataclass
class ExperimentResult:
    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, measured, ok, limit):
        self.checks.append(Check(name, float(measured), limit, bool(ok)))

    def report(self) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.seconds:.1f} s)"
        return "\n".join([head] + ["  " + c.line() for c in self.checks])


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = _time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = _time.perf_counter() - t0
        return res
    return wrapper


def scaled_params(N: int, eps_factor: float, sigma_factor: float, dt_factor: float,
                 alpha: float = 0.0, beta: float = 0.0) -> ModelParams:
    eps = eps_factor / N
    return ModelParams(eps, sigma_factor * eps ** 2, dt_factor * eps ** 2, alpha, beta)


def center_of(grid: Grid):
    return tuple(l / 2 for l in grid.length)


# 1D profile -------------------------------------------------------------

@_timed
def profile1d(N: int = 256, steps: int = 10_000, drift_tol: float = 1e-3,
              disc_tol: float = 1e-3) -> ExperimentResult:
    """The exact profile centred at x = 1/2 must stay put."""
    grid = Grid((N,), (1.0,))
    p = scaled_params(N, 3.0, 4.0, 0.01)
    x = grid.axes()[0]
    u0 = profile_minus_qprime(np.abs(x - 0.5) / p.eps)
    state = run(u0, RunPlan(p, grid, steps, diagEvery=max(1, steps // 10),
                            extinctionThreshold=0.0))
    res = ExperimentResult("profile1d")
    drift = float(np.max(np.abs(state.u - u0)))
    disc = float(np.max(np.abs(discrepancy(grid, state.u, p))))
    res.check("max drift |u - u0|_inf", drift, drift <= drift_tol, f"<= {drift_tol:g}")
    res.check("discrepancy sup", disc, disc <= disc_tol, f"<= {disc_tol:g}")
    res.check("steps completed", state.stepIndex, state.stepIndex == steps, f"== {steps}")
    res.data.update(drift=drift, discrepancy=disc)
    return res


# 2D circle --------------------------------------------------------------

def circle_trajectory(N: int, eps_factor: float, t_end: float, R0: float = 0.3,
                      samples: int = 100, sigma_factor: float = 4.0,
                      dt_factor: float = 0.01):
    """Run the shrinking circle; return ``(times, radii, exact, params)``."""
    grid = Grid.cube(2, N)
    p = scaled_params(N, eps_factor, sigma_factor, dt_factor)
    u0 = geo.initial_condition(geo.Sphere(center_of(grid), R0), grid, p.eps)
    steps = int(round(t_end / p.dt))
    sink = ListSink()
    run(u0, RunPlan(p, grid, steps, diagEvery=max(1, steps // samples),
                    radiusMode="circle2d", extinctionThreshold=0.0), sink)
    t = np.array([r.time for r in sink.records])
    R = np.array([r.radiusEstimate for r in sink.records])
    return t, R, exact_radius_law(2, 1, R0, t), p


@_timed
def circle2d(N: int = 256, t_end: float = 0.03, R0: float = 0.3,
             eps_factors=(3.0, 1.5), max_err_factor: float = 3.0,
             ratio_range=(1.4, 3.0)) -> ExperimentResult:
    """Radius law of a shrinking circle for two interface widths."""
    res = ExperimentResult(f"circle2d (t_end={t_end:g})")
    mean_err = {}
    for c in eps_factors:
        t, R, exact, p = circle_trajectory(N, c, t_end, R0)
        err = np.abs(R - exact)
        mean_err[c] = float(np.mean(err))
        res.data[f"eps={c:g}/N"] = {"t": t.tolist(), "R": R.tolist(),
                                    "max_err": float(err.max()), "mean_err": mean_err[c]}
        res.check(f"eps={c:g}/N max |R_eps - R| / eps", err.max() / p.eps,
                  err.max() <= max_err_factor * p.eps, f"<= {max_err_factor:g}")
    if len(eps_factors) == 2:
        a, b = eps_factors
        ratio = mean_err[a] / mean_err[b]
        res.data["ratio"] = ratio
        res.check(f"time-averaged error ratio eps={a:g}/N : {b:g}/N", ratio,
                  ratio_range[0] <= ratio <= ratio_range[1],
                  f"in [{ratio_range[0]:g}, {ratio_range[1]:g}]")
    return res


# 3D sphere --------------------------------------------------------------

@_timed
def sphere3d(N: int = 128, t_end: float = 0.01, R0: float = 0.3,
             tol_factor: float | None = None) -> ExperimentResult:
    """Radius law of a shrinking sphere (N=128 tolerance 5 eps, smaller grids 8 eps)."""
    if tol_factor is None:
        tol_factor = 5.0 if N >= 128 else 8.0
    grid = Grid.cube(3, N)
    p = scaled_params(N, 2.0, 2.0, 0.01)
    u0 = geo.initial_condition(geo.Sphere(center_of(grid), R0), grid, p.eps)
    steps = int(round(t_end / p.dt))
    sink = ListSink()
    state = run(u0, RunPlan(p, grid, steps, diagEvery=max(1, steps // 40),
                            radiusMode="sphere3d", extinctionThreshold=0.0), sink)
    t = np.array([r.time for r in sink.records])
    R = np.array([r.radiusEstimate for r in sink.records])
    err = np.abs(R - exact_radius_law(3, 1, R0, t))
    res = ExperimentResult(f"sphere3d (N={N})")
    res.data.update(t=t.tolist(), R=R.tolist(), max_err=float(err.max()))
    res.check("max |R_eps - sqrt(R0^2 - 4t)| / eps", err.max() / p.eps,
              err.max() <= tol_factor * p.eps, f"<= {tol_factor:g}")
    res.check("steps completed", state.stepIndex, state.stepIndex == steps, f"== {steps}")
    return res


# sigma stability --------------------------------------------------------

def two_circle_shape(grid: Grid, offset: float = 0.1, radius: float = 0.2):
    """Boundary of the union of two overlapping disks (an elongated, non-convex oval)."""
    c = center_of(grid)
    return geo.SolidBoundary((geo.Ball((c[0] - offset, c[1]), radius),
                              geo.Ball((c[0] + offset, c[1]), radius)))


def peak_history(sigma_factor: float, N: int = 256, steps: int = 10_000,
                 diag_every: int = 50):
    grid = Grid.cube(2, N)
    p = scaled_params(N, 2.0, sigma_factor, 0.01)
    u0 = geo.initial_condition(two_circle_shape(grid), grid, p.eps)
    sink = ListSink()
    state = run(u0, RunPlan(p, grid, steps, diagEvery=diag_every,
                            extinctionThreshold=0.0), sink)
    return np.array([r.interfacePeakMin for r in sink.records]), state


@_timed
def sigma_study(N: int = 256, steps: int = 10_000, stable_floor: float = 0.24,
                unstable_ceiling: float = 0.22) -> ExperimentResult:
    """Interface crest with sigma = 4 eps^2 (kept) versus sigma = eps^2 (lost)."""
    res = ExperimentResult("sigma-study")
    stable, st_state = peak_history(4.0, N, steps)
    weak, wk_state = peak_history(1.0, N, steps)
    res.data.update(stable=stable.tolist(), weak=weak.tolist())
    res.check("sigma=4eps^2 min interfacePeakMin", stable.min(),
              stable.min() >= stable_floor and st_state.halted == "maxSteps",
              f">= {stable_floor:g}")
    res.check("sigma=eps^2 min interfacePeakMin", weak.min(),
              weak.min() < unstable_ceiling, f"< {unstable_ceiling:g}")
    return res


# energy stability -------------------------------------------------------

@_timed
def energy_stability(N: int = 256, eps_factor: float = 3.0, R0: float = 0.3,
                     steps: int = 300, diag_every: int = 1, slack: float = 1e-8,
                     sigma_factor: float = 4.0, alpha_factor: float = 1.0,
                     beta: float = 1.0) -> ExperimentResult:
    """Stabilized splitting (alpha = alpha_factor/eps^2, dt = eps^2) on the circle.

    With sigma = 4 eps^2 the default alpha = 1/eps^2, beta = 1 does not make
    the explicit part concave; alpha_factor ~ 32 and beta ~ 16 do.
    """
    grid = Grid.cube(2, N)
    eps = eps_factor / N
    p = ModelParams(eps, sigma_factor * eps ** 2, eps ** 2, alpha_factor / eps ** 2, beta)
    u0 = geo.initial_condition(geo.Sphere(center_of(grid), R0), grid, eps)
    sink = ListSink()
    run(u0, RunPlan(p, grid, steps, diagEvery=diag_every, extinctionThreshold=0.0), sink)
    E = np.array([r.energy.total for r in sink.records])
    rel_inc = np.diff(E) / np.abs(E[:-1])
    worst = float(rel_inc.max()) if rel_inc.size else -np.inf
    res = ExperimentResult(f"energy-stability (sigma={sigma_factor:g}eps^2, alpha={alpha_factor:g}/eps^2, beta={beta:g})")
    res.data.update(energy=E.tolist())
    res.check("max relative energy increase between diagnostics", worst,
              worst <= slack, f"<= {slack:g}")
    res.check("energy decayed overall", E[-1] / E[0], E[-1] < E[0], "< 1")
    return res


# Gamma-limsup -----------------------------------------------------------

@_timed
def gamma_limsup(radius: float = 0.3, sigmas=(0.0, 0.02), dims=(2, 3),
                 eps_list=(1e-2, 5e-3, 2.5e-3), rel_tol: float = 0.05,
                 truncation_scale: float = 1.0) -> ExperimentResult:
    """Energy of the truncated recovery profile against the limit energy."""
    res = ExperimentResult("gamma-limsup")
    for d in dims:
        for s0 in sigmas:
            table = gamma_limsup_study([radius], s0, eps_list, d, truncation_scale)
            res.data[f"d={d},sigma0={s0:g}"] = [
                (r.eps, r.total, r.target, r.rel_gap) for r in table.rows]
            gaps = table.gaps()
            res.check(f"d={d} sigma0={s0:g} gap shrinking (last/first)",
                      gaps[-1] / gaps[0] if gaps[0] else 0.0, table.shrinking(),
                      "non-increasing up to 10% jitter")
            last = table.rows[-1].rel_gap
            res.check(f"d={d} sigma0={s0:g} relative gap at eps={eps_list[-1]:g}",
                      last, last <= rel_tol, f"<= {rel_tol:g}")
    return res


# qualitative runs -------------------------------------------------------

class _ProbeSink(ListSink):
    """Collects records plus the band maximum of u and, optionally, component counts."""

    def __init__(self, grid: Grid, count_components: bool = False, level: float = 1.0 / 6.0):
        super().__init__()
        self.grid = grid
        self.count_components = count_components
        self.level = level
        self.band_max: list[float] = []
        self.components: list[int] = []

    def snapshot(self, step, time, u):
        band = interface_band(self.grid, u)
        self.band_max.append(float(u[band].max()) if band.any() else 0.0)
        if self.count_components:
            self.components.append(count_components_periodic(u >= self.level))


def count_components_periodic(mask: np.ndarray) -> int:
    """Number of face-connected components of ``mask`` on a periodic grid."""
    labels, n = ndimage.label(mask)
    if n <= 1:
        return n
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ax in range(mask.ndim):
        lo = np.take(labels, 0, axis=ax)
        hi = np.take(labels, -1, axis=ax)
        for a, b in zip(lo[(lo > 0) & (hi > 0)], hi[(lo > 0) & (hi > 0)]):
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
    return len({find(k) for k in range(1, n + 1)})


def _qualitative(name, grid, p, u0, steps, every, count_components=False, **plan_kw):
    sink = _ProbeSink(grid, count_components)
    state = run(u0, RunPlan(p, grid, steps, diagEvery=every, snapshotEvery=every,
                            extinctionThreshold=0.0, **plan_kw), sink)
    res = ExperimentResult(name)
    res.check("steps completed without divergence", state.stepIndex,
              state.halted == "maxSteps", f"== {steps}")
    lo, hi = min(sink.band_max), max(sink.band_max)
    res.check("min over time of max u on the interface band", lo,
              0.24 <= lo <= 0.25, "in [0.24, 0.25]")
    res.check("max over time of max u on the interface band", hi,
              0.24 <= hi <= 0.25, "in [0.24, 0.25]")
    res.data.update(band_max=sink.band_max,
                    peak=[r.interfacePeakMin for r in sink.records])
    if count_components:
        res.data["components"] = sink.components
        worst = max(sink.components)
        res.check("max components of {u >= 1/6}", worst, worst == 1, "== 1")
    return res, sink, state


@_timed
def triple_junction2d(N: int = 256, steps: int = 2000, every: int = 100) -> ExperimentResult:
    """Three glued disks meeting at triple junctions."""
    grid = Grid.cube(2, N)
    p = scaled_params(N, 2.0, 4.0, 0.1)
    c = np.array(center_of(grid))
    angles = np.pi / 2 + np.arange(3) * 2 * np.pi / 3
    centers = [tuple(c + 0.12 * np.array([math.cos(a), math.sin(a)])) for a in angles]
    u0 = geo.initial_condition(geo.glued_balls(centers, [0.18] * 3), grid, p.eps)
    res, _, _ = _qualitative("triple-junction2d", grid, p, u0, steps, every)
    return res


@_timed
def dumbbell3d(N: int = 64, steps: int = 600, every: int = 50) -> ExperimentResult:
    """Dumbbell whose neck must not pinch off."""
    grid = Grid.cube(3, N)
    p = scaled_params(N, 2.0, 2.0, 0.01)
    c = center_of(grid)
    shape = geo.dumbbell((0.28, c[1], c[2]), (0.72, c[1], c[2]), 0.2, 0.08)
    u0 = geo.initial_condition(shape, grid, p.eps)
    res, _, _ = _qualitative("dumbbell3d", grid, p, u0, steps, every, count_components=True)
    return res


@_timed
def ring3d(N: int = 64, t_end: float = 0.012, R0: float = 0.3, samples: int = 20,
           min_r_squared: float = 0.99) -> ExperimentResult:
    """Circle of codimension 2: R(t)^2 linear in t with a fitted rate kappa > 0."""
    grid = Grid.cube(3, N)
    p = scaled_params(N, 2.0, 2.0, 0.01)
    c = center_of(grid)
    u0 = geo.initial_condition(geo.Ring(c, R0), grid, p.eps)
    steps = int(round(t_end / p.dt))
    res, sink, _ = _qualitative("ring3d", grid, p, u0, steps, max(1, steps // samples),
                                radiusMode="ring3d", ringCenter=c)
    t = np.array([r.time for r in sink.records])
    R = np.array([r.radiusEstimate for r in sink.records])
    fit = fit_radius_law(t, R)
    res.data.update(t=t.tolist(), R=R.tolist(), kappa=fit.kappa, R0_fit=math.sqrt(max(fit.R0_squared, 0.0)))
    res.check("R^2 linear fit coefficient of determination", fit.r_squared,
              fit.r_squared >= min_r_squared, f">= {min_r_squared:g}")
    res.check("fitted kappa", fit.kappa, fit.kappa > 0, "> 0")
    return res
