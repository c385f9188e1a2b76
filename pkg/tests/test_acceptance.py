"""Acceptance gate: one test per exit criterion, each at its pinned tolerance.

Run ``pytest tests/test_acceptance.py -v`` (a PASS/FAIL line per criterion
is printed in the terminal summary) or ``python tests/test_acceptance.py``.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from decolab import hilbert
from decolab.decoherence import (
    PointerModel,
    apply_common_unitary,
    pointer_overlap,
    pointer_states,
    premeasure,
    product_overlap,
    reduced_system_density,
)
from decolab.experiments import (
    Scenario,
    ScenarioConfig,
    born_sample,
    run_macroscopic_superposition,
    run_qubit_measurement,
)
from decolab.hilbert import CompositeSpace, DensityMatrix, outer_product, partial_trace, purity

S = 1 / math.sqrt(2)
RESULTS: list[str] = []


def record(name, ok, detail):
    RESULTS.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def _random_amplitudes(rng):
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    c /= np.linalg.norm(c)
    return complex(c[0]), complex(c[1])


def test_c1_mixed_state_reproduction():
    rho = reduced_system_density(S, S, PointerModel.symmetric(3, math.pi / 2))
    dev = float(np.max(np.abs(rho.entries - np.diag([0.5, 0.5]))))
    p = purity(rho)
    record("C1 orthogonal pointers give diag(1/2,1/2), purity 1/2",
           dev <= 1e-10 and abs(p - 0.5) <= 1e-10, f"entry dev {dev:.1e}, purity {p!r}")


def test_c2_closed_form_matches_dense():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 12))
        theta = float(rng.uniform(0, math.pi))
        while theta == 0.0:
            theta = float(rng.uniform(0, math.pi))
        cp, cm = _random_amplitudes(rng)
        model = PointerModel.symmetric(n, theta)
        analytic = reduced_system_density(cp, cm, model).entries
        dense = partial_trace(outer_product(premeasure(cp, cm, model)), {0}).entries
        worst = max(worst, float(np.max(np.abs(analytic - dense))))
    record("C2 closed form equals partial_trace(outer_product(premeasure)) for 50 configs",
           worst <= 1e-10, f"max entry deviation {worst:.1e}")


def test_c3_exponential_law():
    theta = math.acos(0.9)
    ns = np.arange(1, 21)
    logs = np.array([math.log(pointer_overlap(PointerModel.symmetric(int(n), theta)).magnitude) for n in ns])
    slope = float(np.polyfit(ns, logs, 1)[0])
    err = abs(slope - math.log(0.9))
    record("C3 fitted slope of ln|<M-|M+>| vs N equals ln 0.9",
           err <= 1e-9, f"slope {slope:.12f}, error {err:.1e}")


def test_c4_unitarity():
    rng = np.random.default_rng(4)
    worst_u = worst_norm = 0.0
    for _ in range(20):
        space = CompositeSpace((int(rng.integers(2, 17)),))
        h = hilbert.random_hermitian(space, rng)
        t = float(rng.uniform(-10, 10))
        worst_u = max(worst_u, hilbert.propagator(h, t).unitarity_error())
        psi = hilbert.random_state(space, rng)
        worst_norm = max(worst_norm, abs(hilbert.evolve(h, t, psi).norm() - 1))
    record("C4 U^dag U = I and norm preserved for 20 random generators",
           worst_u <= 1e-10 and worst_norm <= 1e-10, f"|U^dag U - I| {worst_u:.1e}, norm dev {worst_norm:.1e}")


def test_c5_overlap_persistence():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 12))
        pairs = []
        for _ in range(n):
            space = CompositeSpace((int(rng.integers(2, 4)),))
            pairs.append((hilbert.random_state(space, rng), hilbert.random_state(space, rng)))
        e1, e2 = pointer_states(PointerModel.from_states(pairs))
        us = [hilbert.random_unitary(s.space, rng) for s in e1]
        f1, f2 = apply_common_unitary((e1, e2), us)
        worst = max(worst, abs(abs(product_overlap(f1, f2)) - abs(product_overlap(e1, e2))))
    record("C5 common unitaries leave |<E1|E2>| unchanged in 100 cases",
           worst <= 1e-12, f"max change {worst:.1e}")


def test_c6_born_statistics():
    equal = born_sample(ScenarioConfig(trials=100_000, seed=6))
    certain = born_sample(ScenarioConfig(c_plus=1, c_minus=0, trials=100_000, seed=6))
    dev = abs(equal.frequency_plus - 0.5)
    record("C6 Born frequencies: equal amplitudes within 4 sigma, (1,0) always +",
           dev <= 0.00633 and certain.frequency_plus == 1.0,
           f"|f - 0.5| {dev:.5f}, certain-case f {certain.frequency_plus}")


def test_c7_pure_and_mixed_purity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        psi = hilbert.random_state(CompositeSpace((int(rng.integers(2, 33)),)), rng)
        worst = max(worst, abs(purity(outer_product(psi)) - 1))
    mixture = DensityMatrix(CompositeSpace((2,)), np.diag([0.5, 0.5]))
    mixed = purity(mixture)
    record("C7 outer products have tr rho^2 = 1, equal mixture 1/2",
           worst <= 1e-10 and abs(mixed - 0.5) <= 1e-12, f"pure dev {worst:.1e}, mixture {mixed!r}")


def test_c8_scenario_equivalence():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(25):
        cp, cm = _random_amplitudes(rng)
        kw = dict(n_particles=int(rng.integers(1, 40)), theta=float(rng.uniform(0, math.pi)), c_plus=cp, c_minus=cm)
        q = run_qubit_measurement(ScenarioConfig(Scenario.QUBIT_MEASUREMENT, **kw))
        x = run_macroscopic_superposition(ScenarioConfig(Scenario.MACROSCOPIC_SUPERPOSITION, **kw))
        worst = max(worst, float(np.max(np.abs(q.rho.entries - x.rho.entries))), abs(q.purity - x.purity))
    record("C8 qubit and macroscopic scenarios give identical numerics",
           worst <= 1e-12, f"max difference {worst:.1e}")


REPRO_COMMANDS = [
    ["curve", "--theta", "1.0471975512", "--n-min", "1", "--n-max", "20", "--format", "csv"],
    ["curve", "--theta", "0.7", "--n-min", "1", "--n-max", "10", "--format", "json"],
    ["qubit", "--n", "6", "--theta", "1.1", "--c-plus", "0.6,0", "--c-minus", "0,0.8"],
    ["macro", "--n", "9", "--theta", "2.0", "--format", "csv"],
    ["sample", "--trials", "100000", "--seed", "123456789", "--format", "json"],
    ["sample", "--trials", "100000", "--seed", "123456789", "--format", "csv"],
]


def test_c9_cli_reproducibility():
    mismatched = []
    for argv in REPRO_COMMANDS:
        outs = [
            subprocess.run([sys.executable, "-m", "decolab", *argv], capture_output=True, check=True).stdout
            for _ in range(2)
        ]
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(" ".join(argv))
    record("C9 identical command and seed give byte-identical output",
           not mismatched, f"{len(REPRO_COMMANDS)} commands, mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
