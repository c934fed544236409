"""Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance.

Runs at full scale except the 3D sphere, which uses the N = 64 / 8 eps
variant unless UMCF_FULL_ACCEPTANCE=1 (N = 128 / 5 eps, tens of minutes).
UMCF_QUICK_ACCEPTANCE=1 swaps the 2D circle for its t <= 0.01 variant.

Also runnable as a script: ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import os
import time

import numpy as np
import pytest

from umcf import experiments as ex
from umcf.grid import Grid, forward, inverse
from umcf.potential import (CF, F_poly, F_prime, F_second, compute_cF,
                            profile_minus_qprime, profile_minus_qprime_d1)
from umcf.spectral_ops import laplacian

try:
    from conftest import ACCEPTANCE_LINES, dft_oracle
except ImportError:  # imported as tests.test_acceptance
    from tests.conftest import ACCEPTANCE_LINES, dft_oracle

FULL = os.environ.get("UMCF_FULL_ACCEPTANCE") == "1"
QUICK = os.environ.get("UMCF_QUICK_ACCEPTANCE") == "1"


def record(number: int, title: str, result: ex.ExperimentResult) -> str:
    flag = "PASS" if result.passed else "FAIL"
    details = "; ".join(f"{c.name} = {c.measured:.6g} ({c.limit})" for c in result.checks)
    line = f"{flag} criterion {number} {title} [{result.seconds:.1f} s]: {details}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def timed(fn):
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


def runtime_check(res, limit):
    res.check("runtime s", res.seconds, res.seconds < limit, f"< {limit:g}")


# criteria ---------------------------------------------------------------

def criterion_1():
    def body():
        res = ex.ExperimentResult("potential")
        res.check("F'(1/4)", F_prime(0.25), F_prime(0.25) == -0.125, "== -1/8")
        res.check("F'(1/6)", F_prime(1 / 6), F_prime(1 / 6) == 0.0, "== 0")
        res.check("F''(1/12)", F_second(1 / 12), F_second(1 / 12) == 0.0, "== 0")
        cf = compute_cF()
        res.check("|c_F - 1/30|", abs(cf - 1 / 30), abs(cf - 1 / 30) <= 1e-10 and CF == 1 / 30,
                  "<= 1e-10")
        s = np.linspace(-12, 12, 241)
        h = 1e-4
        y = profile_minus_qprime
        resid = np.max(np.abs((y(s + h) - 2 * y(s) + y(s - h)) / h ** 2 - F_prime(y(s))))
        res.check("ODE residual of -q'", resid, resid <= 1e-8, "<= 1e-8")
        s = np.linspace(-30, 30, 2001)
        disc = np.max(np.abs(profile_minus_qprime_d1(s) ** 2 - 2 * F_poly(y(s))))
        res.check("first-integral discrepancy", disc, disc <= 1e-12, "<= 1e-12")
        return res
    res = timed(body)
    runtime_check(res, 1.0)
    return res


def criterion_2():
    def body():
        res = ex.ExperimentResult("spectral")
        rng = np.random.default_rng(2)
        rt = pv = lap = oracle = 0.0
        for dim in (1, 2, 3):
            lengths = (1.0, 2.0, 0.5)[:dim]
            g = Grid((64,) * dim, lengths)
            f = rng.standard_normal(g.shape)
            c = forward(g, f)
            rt = max(rt, np.max(np.abs(inverse(g, c) - f)) / np.max(np.abs(f)))
            pv = max(pv, abs(np.sum(np.abs(c) ** 2) - np.mean(f ** 2)) / np.mean(f ** 2))
            ks = (3, 5, 2)[:dim]
            m, xi2 = np.ones(g.shape), 0.0
            for x, k, l in zip(g.coordinates(), ks, lengths):
                m = m * np.sin(2 * np.pi * k * x / l + 0.3)
                xi2 += (k / l) ** 2
            expect = -4 * np.pi ** 2 * xi2 * m
            lap = max(lap, np.max(np.abs(laplacian(g, m) - expect)) / np.max(np.abs(expect)))
            small = Grid({1: (32,), 2: (32, 16), 3: (8, 12, 16)}[dim], lengths)
            fs = rng.standard_normal(small.shape)
            ref = dft_oracle(fs)
            oracle = max(oracle, np.max(np.abs(forward(small, fs) - ref)) / np.max(np.abs(ref)))
        res.check("round trip rel", rt, rt <= 1e-10, "<= 1e-10")
        res.check("Parseval rel", pv, pv <= 1e-10, "<= 1e-10")
        res.check("Laplacian on modes rel", lap, lap <= 1e-10, "<= 1e-10")
        res.check("forward vs direct DFT rel", oracle, oracle <= 1e-10, "<= 1e-10")
        return res
    res = timed(body)
    runtime_check(res, 10.0)
    return res


def criterion_3():
    res = ex.profile1d()
    runtime_check(res, 30.0)
    return res


def criterion_4():
    return ex.circle2d(t_end=0.01) if QUICK else ex.circle2d()


def criterion_5():
    return ex.sigma_study()


def criterion_6():
    res = ex.energy_stability()
    runtime_check(res, 60.0)
    return res


def criterion_7():
    res = ex.gamma_limsup()
    runtime_check(res, 10.0)
    return res


def criterion_8():
    return ex.sphere3d(N=128) if FULL else ex.sphere3d(N=64)


def criterion_9():
    parts = [ex.triple_junction2d(), ex.dumbbell3d(), ex.ring3d()]
    res = ex.ExperimentResult("qualitative", seconds=sum(p.seconds for p in parts))
    for p in parts:
        for c in p.checks:
            res.checks.append(ex.Check(f"{p.name}: {c.name}", c.measured, c.limit, c.passed))
    return res


CRITERIA = {
    1: ("potential and profile", criterion_1),
    2: ("spectral oracle", criterion_2),
    3: ("1D profile stationarity", criterion_3),
    4: ("2D circle radius law" + (" (t <= 0.01 variant)" if QUICK else ""), criterion_4),
    5: ("sigma stability study", criterion_5),
    6: ("energy stability of the splitting", criterion_6),
    7: ("Gamma-limsup recovery energies", criterion_7),
    8: ("3D sphere law" + ("" if FULL else " (N = 64, 8 eps variant)"), criterion_8),
    9: ("qualitative triple junction, dumbbell and ring runs", criterion_9),
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance_criterion(number):
    title, fn = CRITERIA[number]
    res = fn()
    line = record(number, title, res)
    assert res.passed, line


# companions that locate the failing regimes ----------------------------

def test_energy_decreases_with_a_concave_explicit_part():
    res = ex.energy_stability(alpha_factor=32.0, beta=16.0)
    assert res.passed, res.report()


def test_energy_decreases_with_weaker_willmore_weight():
    res = ex.energy_stability(sigma_factor=1.0)
    assert res.passed, res.report()


def test_gamma_limsup_with_wider_truncation():
    res = ex.gamma_limsup(truncation_scale=2.0)
    assert res.passed, res.report()


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        title, fn = CRITERIA[n]
        res = fn()
        record(n, title, res)
        failed += not res.passed
    raise SystemExit(1 if failed else 0)
