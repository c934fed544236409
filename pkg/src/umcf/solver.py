"""Time-stepping driver with diagnostics, snapshots and halting rules."""
from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np

from .diagnostics import DiagnosticsRecord, make_record
from .grid import Grid
from .model import DivergenceError, ModelParams, Stepper, energy

log = logging.getLogger(__name__)

HALT_MAX_STEPS = "maxSteps"
HALT_EXTINCTION = "extinction"
HALT_DIVERGENCE = "divergence"


@dataclass
class RunPlan:
    params: ModelParams
    grid: Grid
    steps: int
    diagEvery: int = 100
    snapshotEvery: int = 0
    extinctionThreshold: float = 0.05
    radiusMode: str | None = None
    ringCenter: tuple | None = None
    peakMethod: str = "neighborhood"
    dealias: bool = False
    startStep: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.diagEvery < 1:
            raise ValueError("diagEvery must be >= 1")
        if self.snapshotEvery < 0:
            raise ValueError("snapshotEvery must be >= 0 (0 disables snapshots)")


@dataclass
class RunState:
    u: np.ndarray
    stepIndex: int
    dt: float
    halted: str | None = None
    records: list = field(default_factory=list)

    @property
    def time(self) -> float:
        return self.stepIndex * self.dt


class Sink:
    """Receives diagnostics and snapshots in step order; default does nothing."""

    def record(self, rec: DiagnosticsRecord) -> None:
        pass

    def snapshot(self, step: int, time: float, u: np.ndarray) -> None:
        pass


class ListSink(Sink):
    def __init__(self, keep_snapshots: bool = False):
        self.records: list[DiagnosticsRecord] = []
        self.snapshots: list[tuple[int, float, np.ndarray]] = []
        self.keep_snapshots = keep_snapshots

    def record(self, rec):
        self.records.append(rec)

    def snapshot(self, step, time, u):
        if self.keep_snapshots:
            self.snapshots.append((step, time, u.copy()))


def run(u0: np.ndarray, plan: RunPlan, sink: Sink | None = None) -> RunState:
    """Advance ``u0`` by ``plan.steps`` steps or until a halt condition.

    A record is emitted at the start, every ``diagEvery`` steps and at the
    final step.  Extinction is checked at each record.  On divergence the
    last finite state is returned with ``halted = "divergence"``.
    """
    sink = sink or Sink()
    grid, params = plan.grid, plan.params
    u = np.ascontiguousarray(grid.check_field(u0), dtype=float).copy()
    if not np.all(np.isfinite(u)):
        raise DivergenceError(plan.startStep, "initial state is not finite")
    stepper = Stepper(grid, params, dealias=plan.dealias)
    state = RunState(u=u, stepIndex=plan.startStep, dt=params.dt)
    last = plan.startStep + plan.steps

    def emit(step, u, before=None):
        rec = make_record(grid, u, params, step, plan.radiusMode, plan.ringCenter,
                          peak_method=plan.peakMethod, energy_before=before)
        state.records.append(rec)
        sink.record(rec)
        return rec

    def maybe_snapshot(step, u):
        if plan.snapshotEvery and (step - plan.startStep) % plan.snapshotEvery == 0:
            sink.snapshot(step, step * params.dt, u)

    rec = emit(state.stepIndex, u)
    maybe_snapshot(state.stepIndex, u)
    if rec.uMax < plan.extinctionThreshold:
        state.halted = HALT_EXTINCTION
        return state

    n = state.stepIndex
    while n < last:
        n_next = n + 1
        diag_now = (n_next - plan.startStep) % plan.diagEvery == 0 or n_next == last
        try:
            if diag_now and params.projection:
                new, raw = stepper.step(u, step_index=n_next, keep_unprojected=True)
            else:
                new, raw = stepper.step(u, step_index=n_next), None
        except DivergenceError as exc:
            log.warning("divergence at step %d", exc.step_index)
            state.halted = HALT_DIVERGENCE
            break
        u, n = new, n_next
        state.u, state.stepIndex = u, n
        if diag_now:
            before = None
            if raw is not None:
                before = energy(grid, raw, params, strict=False).total
            rec = emit(n, u, before)
            if rec.uMax < plan.extinctionThreshold:
                state.halted = HALT_EXTINCTION
                maybe_snapshot(n, u)
                break
        maybe_snapshot(n, u)
    else:
        state.halted = HALT_MAX_STEPS
    return state
