"""Invariant checks behind ``decolab selftest``.

Fast, seeded versions of the properties the library promises. Each check
returns a short detail string and raises AssertionError on failure.
"""

from __future__ import annotations

import math
from typing import Callable, TextIO

import numpy as np

from . import hilbert
from .decoherence import (
    PointerModel,
    apply_common_unitary,
    pointer_overlap,
    pointer_states,
    product_overlap,
    reduced_system_density,
)
from .experiments import Scenario, ScenarioConfig, born_sample, dense_reduced_density

SEED = 20221017


def check_partial_trace_structure() -> str:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        space = hilbert.CompositeSpace(tuple(rng.integers(1, 4, size=3)))
        rho = hilbert.random_density(space, rng)
        red = hilbert.partial_trace(rho, {int(rng.integers(0, 3))})
        worst = max(worst, abs(red.trace() - 1), float(np.max(np.abs(red.entries - red.entries.conj().T))))
    assert worst <= hilbert.STRUCTURAL_TOL, worst
    return f"max trace/Hermiticity error {worst:.1e}"


def check_unitarity() -> str:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        space = hilbert.CompositeSpace((int(rng.integers(2, 17)),))
        u = hilbert.propagator(hilbert.random_hermitian(space, rng), float(rng.uniform(-5, 5)))
        worst = max(worst, u.unitarity_error())
    assert worst <= hilbert.STRUCTURAL_TOL, worst
    return f"max |U^dag U - I| {worst:.1e}"


def check_dense_agreement() -> str:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 8))
        theta = float(rng.uniform(0, math.pi))
        c = rng.normal(size=2) + 1j * rng.normal(size=2)
        c /= np.linalg.norm(c)
        model = PointerModel.symmetric(n, theta)
        analytic = reduced_system_density(c[0], c[1], model).entries
        dense = dense_reduced_density(c[0], c[1], model).entries
        worst = max(worst, float(np.max(np.abs(analytic - dense))))
    assert worst <= hilbert.STRUCTURAL_TOL, worst
    return f"max closed-form/dense deviation {worst:.1e}"


def check_exponential_decay() -> str:
    ns = np.arange(1, 21)
    theta = math.acos(0.9)
    logs = [pointer_overlap(PointerModel.symmetric(int(n), theta)).log_magnitude for n in ns]
    slope = np.polyfit(ns, logs, 1)[0]
    assert abs(slope - math.log(0.9)) <= 1e-9, slope
    return f"fitted slope {slope:.12f}"


def check_overlap_persistence() -> str:
    rng = np.random.default_rng(SEED)
    model = PointerModel.symmetric(6, float(rng.uniform(0, math.pi)))
    plus, minus = pointer_states(model)
    before = abs(product_overlap(minus, plus))
    us = [hilbert.random_unitary(hilbert.CompositeSpace((2,)), rng) for _ in range(6)]
    new_plus, new_minus = apply_common_unitary((plus, minus), us)
    change = abs(abs(product_overlap(new_minus, new_plus)) - before)
    assert change <= 1e-12, change
    return f"overlap change {change:.1e}"


def check_born_sampling() -> str:
    cfg = ScenarioConfig(trials=100_000, seed=SEED)
    stats = born_sample(cfg)
    assert abs(stats.frequency_plus - 0.5) <= 0.00633, stats
    assert born_sample(cfg).count_plus == stats.count_plus
    return f"frequency_plus {stats.frequency_plus:.5f}, z {stats.z_score:+.2f}"


def check_scenario_equivalence() -> str:
    from .experiments import run_macroscopic_superposition, run_qubit_measurement

    q = run_qubit_measurement(ScenarioConfig(n_particles=4, theta=1.0))
    x = run_macroscopic_superposition(
        ScenarioConfig(Scenario.MACROSCOPIC_SUPERPOSITION, n_particles=4, theta=1.0)
    )
    diff = float(np.max(np.abs(q.rho.entries - x.rho.entries)))
    assert diff <= 1e-12, diff
    return f"max difference {diff:.1e}"


CHECKS: list[tuple[str, Callable[[], str]]] = [
    ("partial trace preserves trace and Hermiticity", check_partial_trace_structure),
    ("spectral propagator is unitary", check_unitarity),
    ("closed-form reduced state matches dense partial trace", check_dense_agreement),
    ("log overlap slope equals ln cos(theta)", check_exponential_decay),
    ("common unitaries preserve branch overlap", check_overlap_persistence),
    ("Born sampling frequency within 4 sigma", check_born_sampling),
    ("qubit and position scenarios agree", check_scenario_equivalence),
]


def run_checks(stream: TextIO) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            detail = fn()
            print(f"PASS  {name}: {detail}", file=stream)
        except AssertionError as exc:
            ok = False
            print(f"FAIL  {name}: {exc}", file=stream)
    return ok
