"""Observables along a run and the validation studies built on them."""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import ndimage

from .geometry import build_recovery_cubic
from .grid import Grid, gradient
from .model import EnergyBreakdown, ModelParams, discrepancy, energy
from .potential import CF, F_poly

PEAK_BAND_LEVEL = 0.125


@dataclass
class DiagnosticsRecord:
    step: int
    time: float
    energy: EnergyBreakdown
    radiusEstimate: float | None
    discrepancySup: float
    uMax: float
    interfacePeakMin: float
    energyBeforeProjection: float | None = None


def _require_dim(grid: Grid, dim: int, what: str):
    if grid.dim != dim:
        raise ValueError(f"{what} needs a {dim}D grid, got {grid.dim}D")


def radius_2d(grid: Grid, u: np.ndarray, eps: float) -> float:
    """``(1 / (2 pi eps)) int u dx`` for a single circle."""
    _require_dim(grid, 2, "radius_2d")
    return float(np.sum(u) * grid.cell_volume / (2.0 * math.pi * eps))


def radius_3d_sphere(grid: Grid, u: np.ndarray, eps: float) -> float:
    """``sqrt(int u dx / (4 pi eps))`` for a single sphere."""
    _require_dim(grid, 3, "radius_3d_sphere")
    total = float(np.sum(u) * grid.cell_volume)
    if total < 0:
        raise ValueError("negative phase-field mass; no sphere to measure")
    return math.sqrt(total / (4.0 * math.pi * eps))


def radius_ring(grid: Grid, u: np.ndarray, center, normal=(0.0, 0.0, 1.0)) -> float:
    """Radius of a codimension-2 circle as ``sum(u) / sum(u / rho)``.

    ``rho`` is the distance to the axis through ``center`` along ``normal``.
    Dividing by ``rho`` cancels the volume element of the cylindrical
    coordinates, so the estimate is the mean of ``rho`` over the tube
    cross-section and is exact for a cross-section symmetric about the
    circle.  Minimum-image convention on the periodic box.
    """
    _require_dim(grid, 3, "radius_ring")
    n = np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    coords = grid.coordinates()
    v = []
    for a in range(3):
        d = coords[a] - center[a]
        d = d - grid.length[a] * np.round(d / grid.length[a])
        v.append(d)
    z = v[0] * n[0] + v[1] * n[1] + v[2] * n[2]
    rho = np.sqrt(np.maximum(v[0] ** 2 + v[1] ** 2 + v[2] ** 2 - z ** 2, 0.0))
    rho = np.maximum(rho, 0.5 * min(grid.spacing))
    w = np.clip(u, 0.0, None)
    total = float(np.sum(w))
    if total <= 0:
        return 0.0
    return total / float(np.sum(w / rho))


def extinction_time(dim: int, codim: int, R0: float, kappa: float = 1.0) -> float:
    if dim == 2 and codim == 1:
        return R0 ** 2 / 2.0
    if dim == 3 and codim == 1:
        return R0 ** 2 / 4.0
    if dim == 3 and codim == 2:
        return R0 ** 2 / (2.0 * kappa)
    raise ValueError(f"no radius law for dim={dim}, codim={codim}")


def exact_radius_law(dim: int, codim: int, R0: float, t, kappa: float = 1.0):
    """Radius of a shrinking circle/sphere under mean curvature flow.

    2D circle ``sqrt(R0^2 - 2t)``, 3D sphere ``sqrt(R0^2 - 4t)``, 3D ring
    ``sqrt(R0^2 - 2 kappa t)`` with a fitted factor ``kappa``.
    """
    t_end = extinction_time(dim, codim, R0, kappa)
    t = np.asarray(t, dtype=float)
    if np.any(t > t_end) or np.any(t < 0):
        raise ValueError(f"time outside [0, {t_end:g}] (extinction)")
    rate = (2.0 * kappa) if codim == 2 else 2.0 * (dim - 1)
    out = np.sqrt(R0 ** 2 - rate * t)
    return float(out) if out.ndim == 0 else out


@dataclass
class RadiusFit:
    R0_squared: float
    kappa: float
    r_squared: float


def fit_radius_law(times, radii) -> RadiusFit:
    """Least-squares fit of ``R(t)^2 = R0^2 - 2 kappa t``."""
    t = np.asarray(times, float)
    y = np.asarray(radii, float) ** 2
    A = np.stack([np.ones_like(t), -2.0 * t], axis=1)
    (c0, kappa), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([c0, kappa])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return RadiusFit(float(c0), float(kappa), r2)


# profile stability ------------------------------------------------------

def interface_band(grid: Grid, u: np.ndarray, level: float | None = None) -> np.ndarray:
    """Cells with ``u >= level``, dilated by one cell (periodic).

    The default level is ``min(1/8, max(u)/2)`` so that a uniformly
    flattened profile still has a band.  Empty when ``u <= 0``.
    """
    if level is None:
        level = min(PEAK_BAND_LEVEL, 0.5 * float(np.max(u)))
    if level <= 0:
        return np.zeros(u.shape, dtype=bool)
    core = (u >= level).astype(np.uint8)
    return ndimage.maximum_filter(core, size=3, mode="wrap").astype(bool)


def _window_cells(grid: Grid, eps: float) -> int:
    return int(math.ceil(2.0 * eps / min(grid.spacing)))


def interface_peak_min(grid: Grid, u: np.ndarray, eps: float,
                       band: np.ndarray | None = None, method: str = "neighborhood") -> float:
    """Smallest local profile maximum over the interface band.

    ``neighborhood``: min over band cells of max(u) in a cube of half-width
    ``ceil(2 eps / h)`` cells, wide enough to reach the crest of a resolved
    profile from anywhere in the band.  ``columns``: max of u sampled along
    the local normal over ``[-3 eps, 3 eps]``, which reaches the crest from
    the band edge (about ``1.8 eps`` plus one cell away).
    Returns 0 when the band is empty.
    """
    if band is None:
        band = interface_band(grid, u)
    if not band.any():
        return 0.0
    r = _window_cells(grid, eps)
    if method == "neighborhood":
        mx = ndimage.maximum_filter(u, size=2 * r + 1, mode="wrap")
        return float(mx[band].min())
    if method == "columns":
        return _column_peak_min(grid, u, eps, band)
    raise ValueError(f"unknown method {method!r}")


def _normals(grid, u, band, eps):
    """Unit normals on band cells from the smoothed structure tensor of u.

    The gradient vanishes on the crest of the profile, but the dominant
    eigenvector of the locally averaged ``grad u grad u^T`` does not.
    """
    grads = gradient(grid, u)
    dim = grid.dim
    rho = [eps / h for h in grid.spacing]
    idx = np.nonzero(band)
    J = np.empty((len(idx[0]), dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            comp = ndimage.gaussian_filter(grads[i] * grads[j], rho, mode="wrap")[idx]
            J[:, i, j] = J[:, j, i] = comp
    _, vecs = np.linalg.eigh(J)
    return idx, vecs[:, :, -1]


def _column_peak_min(grid, u, eps, band, samples=49):
    idx, nrm = _normals(grid, u, band, eps)
    h = np.asarray(grid.spacing)
    base = np.stack(idx, axis=1).astype(float)
    best = np.full(len(base), -np.inf)
    for tau in np.linspace(-3 * eps, 3 * eps, samples):
        coords = (base + tau * nrm / h).T
        vals = ndimage.map_coordinates(u, coords, order=3, mode="grid-wrap")
        best = np.maximum(best, vals)
    return float(best.min())


# per-snapshot record ----------------------------------------------------

def make_record(grid: Grid, u: np.ndarray, params: ModelParams, step: int,
                radius_mode: str | None = None, ring_center=None,
                ring_normal=(0.0, 0.0, 1.0), peak_method: str = "neighborhood",
                energy_before: float | None = None) -> DiagnosticsRecord:
    strict = params.projection
    en = energy(grid, u, params, strict=strict)
    disc = discrepancy(grid, u, params, strict=False)
    if radius_mode is None:
        radius = None
    elif radius_mode == "circle2d":
        radius = radius_2d(grid, u, params.eps)
    elif radius_mode == "sphere3d":
        radius = radius_3d_sphere(grid, u, params.eps)
    elif radius_mode == "ring3d":
        center = ring_center if ring_center is not None else tuple(l / 2 for l in grid.length)
        radius = radius_ring(grid, u, center, ring_normal)
    else:
        raise ValueError(f"unknown radius mode {radius_mode!r}")
    return DiagnosticsRecord(
        step=step, time=step * params.dt, energy=en, radiusEstimate=radius,
        discrepancySup=float(np.max(np.abs(disc))), uMax=float(np.max(u)),
        interfacePeakMin=interface_peak_min(grid, u, params.eps, method=peak_method),
        energyBeforeProjection=energy_before,
    )


# Gamma-limsup study on radial profiles ----------------------------------

def sphere_area(dim: int) -> float:
    """``|S^{d-1}|``."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def perimeter_ball(dim: int, r: float) -> float:
    return sphere_area(dim) * r ** (dim - 1)


def willmore_ball(dim: int, r: float) -> float:
    """``(1/2) (d-1)^2 |S^{d-1}| r^{d-3}``."""
    return 0.5 * (dim - 1) ** 2 * sphere_area(dim) * r ** (dim - 3)


@dataclass
class LimsupRow:
    eps: float
    mass: float
    willmore: float
    total: float
    target: float

    @property
    def gap(self) -> float:
        return abs(self.total - self.target)

    @property
    def rel_gap(self) -> float:
        return self.gap / self.target


@dataclass
class LimsupTable:
    dim: int
    sigma0: float
    radii: tuple
    rows: list = field(default_factory=list)

    def gaps(self):
        return [r.gap for r in self.rows]

    def shrinking(self, jitter: float = 0.10) -> bool:
        """Gap decreases with eps (sorted by decreasing eps), up to ``jitter`` relative."""
        rows = sorted(self.rows, key=lambda r: -r.eps)
        return all(b.gap <= a.gap * (1.0 + jitter) for a, b in zip(rows, rows[1:]))


def _gauss_legendre_panels(a, b, panels, order=64):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return nodes, weights


def radial_energy(dim: int, radius: float, eps: float, sigma: float,
                  truncation_scale: float = 1.0, panels: int = 64, order: int = 64):
    """Energy of ``gamma_eps(|r - radius| / eps)`` by radial quadrature.

    Returns ``(mass, willmore)``.  Integration is in ``s = (r - radius)/eps``
    over the support ``[-2x, 2x]`` split at the profile's breakpoints.
    """
    prof = build_recovery_cubic(eps, truncation_scale)
    x = prof.xEps
    mass = willmore = 0.0
    S = sphere_area(dim)
    for a, b in ((-2 * x, -x), (-x, 0.0), (0.0, x), (x, 2 * x)):
        s, w = _gauss_legendre_panels(a, b, panels, order)
        r = radius + eps * s
        if np.any(r <= 0):
            raise ValueError("profile support reaches the origin")
        y, y1, y2 = prof.value(s), prof.d1(s), prof.d2(s)
        ur, urr = y1 / eps, y2 / eps ** 2
        lap = urr + (dim - 1) / r * ur
        jac = S * r ** (dim - 1) * eps
        m = 0.5 * eps * ur ** 2 + F_poly(y) / eps
        e = -eps * lap + (y - 6.0 * y * y) / eps
        mass += float(np.sum(w * m * jac))
        willmore += float(np.sum(w * sigma / (2.0 * eps) * e * e * jac))
    return mass, willmore


def gamma_limsup_study(radii, sigma0: float, eps_list, dim: int = 2,
                       truncation_scale: float = 1.0) -> LimsupTable:
    """Energy of the truncated recovery field vs ``c_F sum_i (P(B_ri) + sigma0 W(B_ri))``.

    ``sigma_eps = sigma0`` for every eps.  Supports of the radii must be
    disjoint and stay away from the origin.
    """
    radii = tuple(sorted(float(r) for r in radii))
    if not radii or radii[0] <= 0:
        raise ValueError("radii must be positive")
    half = [2.0 * truncation_scale * e * abs(math.log(e)) for e in eps_list]
    reach = max(half)
    gaps = np.diff(radii)
    if len(gaps) and gaps.min() <= 2.0 * reach:
        raise ValueError("radii are not separated enough for the profile supports")
    if radii[0] <= reach:
        raise ValueError("profile support reaches the origin")
    target = CF * sum(perimeter_ball(dim, r) + sigma0 * willmore_ball(dim, r) for r in radii)
    table = LimsupTable(dim, sigma0, radii)
    for eps in eps_list:
        mass = will = 0.0
        for r in radii:
            m, w = radial_energy(dim, r, eps, sigma0, truncation_scale)
            mass += m
            will += w
        table.rows.append(LimsupRow(float(eps), mass, will, mass + will, target))
    return table
