import math

import numpy as np
import pytest

from umcf.grid import Grid
from umcf.model import ModelParams
from umcf.spectral_ops import (FOUR_PI2, apply_operator, apply_solve, bilaplacian,
                               build_symbol, dealias_mask, laplacian)


def params(**kw):
    base = dict(eps=0.05, sigma=0.01, dt=1e-3, alpha=0.0, beta=0.0)
    base.update(kw)
    return ModelParams(**base)


def test_laplacian_of_constant():
    g = Grid.cube(2, 16)
    assert np.max(np.abs(laplacian(g, np.full(g.shape, 3.0)))) < 1e-13


def test_laplacian_analytic_modes():
    g = Grid((32,), (1.0,))
    x = g.axes()[0]
    f = np.cos(2 * np.pi * x)
    assert np.allclose(laplacian(g, f), -FOUR_PI2 * f, rtol=0, atol=1e-10 * FOUR_PI2)
    g2 = Grid.cube(2, 32)
    x, y = g2.coordinates()
    f2 = np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
    assert np.allclose(laplacian(g2, f2), -2 * FOUR_PI2 * f2, atol=1e-10 * 2 * FOUR_PI2)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_laplacian_mixed_modes_n64(dim):
    lengths = (1.0, 2.0, 0.5)[:dim]
    g = Grid((64,) * dim, lengths)
    coords = g.coordinates()
    ks = (3, 5, 2)[:dim]
    f = np.ones(g.shape)
    xi2 = 0.0
    for c, k, l in zip(coords, ks, lengths):
        f = f * np.sin(2 * np.pi * k * c / l + 0.3)
        xi2 += (k / l) ** 2
    expected = -FOUR_PI2 * xi2 * f
    err = np.max(np.abs(laplacian(g, f) - expected)) / np.max(np.abs(expected))
    assert err <= 1e-10


def test_bilaplacian_is_laplacian_squared():
    g = Grid((32, 16), (1.0, 0.5))
    x, y = g.coordinates()
    f = np.sin(4 * np.pi * x) * np.cos(4 * np.pi * y)
    assert np.allclose(bilaplacian(g, f), laplacian(g, laplacian(g, f)), atol=1e-6)


def test_symbol_examples():
    g = Grid.cube(1, 16)
    eps = 0.05
    assert build_symbol(g, params()).at(0.0) == 1.0
    p = params(alpha=1 / eps ** 2)
    assert build_symbol(g, p).at(0.0) == pytest.approx(1 / (1 + p.dt / eps ** 2), rel=1e-15)
    p = params(dt=1.0, sigma=0.0)
    assert build_symbol(g, p).at(1.0) == pytest.approx(1 / (1 + FOUR_PI2), rel=1e-15)


def test_symbol_table_matches_formula():
    g = Grid((8, 12), (1.0, 2.0))
    p = params(alpha=3.0, beta=0.5)
    sym = build_symbol(g, p)
    xi2 = g.xi_squared
    lap = 4 * math.pi ** 2 * xi2
    direct = 1.0 / (1.0 + p.dt * (lap + p.sigma * 16 * math.pi ** 4 * xi2 ** 2 + p.alpha
                                  + p.beta * lap))
    assert np.array_equal(sym.full(), sym.full())
    assert np.allclose(sym.full(), direct, rtol=1e-15, atol=0)
    assert np.allclose(sym.values, direct[:, : sym.values.shape[1]], rtol=1e-15, atol=0)


def test_symbol_rejects_bad_params():
    g = Grid.cube(1, 8)

    class P:
        dt, sigma, alpha, beta = 0.0, 0.0, 0.0, 0.0
    with pytest.raises(ValueError):
        build_symbol(g, P)


def test_apply_solve_constant_and_mode():
    g = Grid((32,), (1.0,))
    sym = build_symbol(g, params())
    assert np.allclose(apply_solve(np.full(g.shape, 2.5), sym), 2.5, atol=1e-15)
    x = g.axes()[0]
    f = np.cos(2 * np.pi * x)
    assert np.allclose(apply_solve(f, sym), sym.at(1.0) * f, atol=1e-14)


def test_apply_solve_residual(rng):
    g = Grid((32, 16), (1.0, 0.5))
    p = params(alpha=10.0, beta=0.2, dt=1e-2)
    sym = build_symbol(g, p)
    f = rng.standard_normal(g.shape)
    v = apply_solve(f, sym)
    back = v + p.dt * (-laplacian(g, v) + p.sigma * bilaplacian(g, v) + p.alpha * v
                       - p.beta * laplacian(g, v))
    assert np.max(np.abs(back - f)) <= 1e-10 * np.max(np.abs(f))
    assert np.allclose(apply_operator(v, sym), f, atol=1e-10)


def test_apply_solve_contraction_and_translation(rng):
    g = Grid.cube(2, 16)
    sym = build_symbol(g, params())
    f = rng.standard_normal(g.shape)
    v = apply_solve(f, sym)
    assert np.linalg.norm(v) <= np.linalg.norm(f)
    assert np.allclose(apply_solve(np.roll(f, 3, axis=1), sym), np.roll(v, 3, axis=1),
                       atol=1e-10)
    a, b = rng.standard_normal(2)
    h = rng.standard_normal(g.shape)
    assert np.allclose(apply_solve(a * f + b * h, sym), a * v + b * apply_solve(h, sym),
                       atol=1e-12)


def test_dealias_mask_two_thirds():
    g = Grid((12,), (1.0,))
    m = dealias_mask(g)
    kept = np.nonzero(m)[0]
    assert kept.max() == 4 and m.shape == (7,)


def test_apply_solve_shape_mismatch():
    sym = build_symbol(Grid.cube(1, 8), params())
    with pytest.raises(ValueError):
        apply_solve(np.zeros(16), sym)
