import numpy as np
import pytest

from umcf.geometry import Sphere, initial_condition
from umcf.grid import Grid
from umcf.model import ModelParams
from umcf.potential import profile_minus_qprime
from umcf.solver import ListSink, RunPlan, run


def circle_setup(N=32, dt_factor=0.05):
    g = Grid.cube(2, N)
    eps = 2.5 / N
    p = ModelParams(eps, 4 * eps ** 2, dt_factor * eps ** 2)
    return g, p, initial_condition(Sphere((0.5, 0.5), 0.3), g, eps)


def test_plan_validation():
    g, p, _ = circle_setup()
    with pytest.raises(ValueError):
        RunPlan(p, g, 0)
    with pytest.raises(ValueError):
        RunPlan(p, g, 10, diagEvery=0)
    with pytest.raises(ValueError):
        RunPlan(p, g, 10, snapshotEvery=-1)


def test_zero_state_goes_extinct_at_first_record():
    g, p, _ = circle_setup()
    state = run(np.zeros(g.shape), RunPlan(p, g, 50, diagEvery=10))
    assert state.halted == "extinction"
    assert state.stepIndex == 0
    assert np.array_equal(state.u, np.zeros(g.shape))


def test_profile_1d_stays_put():
    N = 256
    g = Grid((N,), (1.0,))
    eps = 3 / N
    p = ModelParams(eps, 4 * eps ** 2, 0.01 * eps ** 2)
    u0 = profile_minus_qprime(np.abs(g.axes()[0] - 0.5) / eps)
    state = run(u0, RunPlan(p, g, 1000, diagEvery=250))
    assert state.halted == "maxSteps"
    assert np.max(np.abs(state.u - u0)) <= 1e-4


def test_record_schedule_and_time():
    g, p, u0 = circle_setup()
    sink = ListSink(keep_snapshots=True)
    state = run(u0, RunPlan(p, g, 25, diagEvery=10, snapshotEvery=5), sink)
    assert [r.step for r in sink.records] == [0, 10, 20, 25]
    assert [s[0] for s in sink.snapshots] == [0, 5, 10, 15, 20, 25]
    assert all(r.time == r.step * p.dt for r in sink.records)
    assert state.time == 25 * p.dt
    assert state.records == sink.records
    assert state.u.max() <= 0.25
    assert all(r.energyBeforeProjection is not None for r in sink.records[1:])


def test_runs_are_bit_identical():
    g, p, u0 = circle_setup()
    a = run(u0, RunPlan(p, g, 30, diagEvery=10))
    b = run(u0, RunPlan(p, g, 30, diagEvery=10))
    assert np.array_equal(a.u, b.u)
    assert [r.energy for r in a.records] == [r.energy for r in b.records]


def test_restart_is_bit_identical(tmp_path):
    from umcf.cli_io import read_field_dump, write_field_dump
    g, p, u0 = circle_setup()
    full = run(u0, RunPlan(p, g, 40, diagEvery=40))
    first = run(u0, RunPlan(p, g, 15, diagEvery=15))
    write_field_dump(g, first.u, tmp_path / "u.f64", eps=p.eps, step=first.stepIndex)
    _, u_mid, meta = read_field_dump(tmp_path / "u.f64")
    second = run(u_mid, RunPlan(p, g, 25, diagEvery=25, startStep=meta["step"]))
    assert second.stepIndex == 40
    assert np.array_equal(second.u, full.u)


def test_extinction_of_a_weak_field():
    g, p, u0 = circle_setup(dt_factor=0.1)
    # at 40% amplitude the crest sits below the flat point 1/6, so F' drives u to 0
    state = run(0.4 * u0, RunPlan(p, g, 5000, diagEvery=20))
    assert state.halted == "extinction"
    assert state.records[-1].uMax < 0.05
    assert state.stepIndex > 0


def test_small_disk_pins_at_the_obstacle():
    """A circle of radius ~2.5 eps turns into a stationary plateau at u = 1/4."""
    g = Grid.cube(2, 64)
    eps = 2.5 / 64
    p = ModelParams(eps, 4 * eps ** 2, 0.1 * eps ** 2)
    u0 = initial_condition(Sphere((0.5, 0.5), 0.1), g, eps)
    state = run(u0, RunPlan(p, g, 1500, diagEvery=500))
    e = [r.energy.total for r in state.records]
    assert state.halted == "maxSteps"
    assert abs(e[-1] - e[-2]) <= 1e-12 * e[-1]
    assert np.count_nonzero(state.u >= 0.25) > 10


def test_divergence_keeps_last_finite_state():
    g = Grid.cube(2, 32)
    eps = 2.5 / 32
    # far beyond the explicit stability limit, without the projection
    p = ModelParams(eps, 4 * eps ** 2, 5 * eps ** 2, projection=False)
    u0 = initial_condition(Sphere((0.5, 0.5), 0.3), g, eps)
    state = run(u0, RunPlan(p, g, 500, diagEvery=10))
    assert state.halted == "divergence"
    assert np.all(np.isfinite(state.u))
    assert 0 < state.stepIndex < 500


def test_nonfinite_initial_state_is_rejected():
    g, p, u0 = circle_setup()
    u0 = u0.copy()
    u0[0, 0] = np.inf
    from umcf.model import DivergenceError
    with pytest.raises(DivergenceError):
        run(u0, RunPlan(p, g, 5))
