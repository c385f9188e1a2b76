"""Scenario runners: qubit measurement, macroscopic superposition, decay
curves and Born-rule sampling.

Both scenarios run the same map; only the labels differ (``+/-`` with
apparatus states ``M+/M-`` versus positions ``x1/x2`` with environment
states ``E1/E2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import hilbert
from .decoherence import (
    OverlapReport,
    PointerModel,
    closed_form_purity,
    normalized_amplitudes,
    pointer_overlap,
    premeasure,
    reduced_density_from_overlap,
)

DENSE_MAX_PARTICLES = 11
FAPP_OVERLAP = 1e-6
SAMPLE_BLOCK = 8192
BORN_RULE_NOTE = (
    "outcome probabilities |c+|^2, |c-|^2 are applied as a postulate; "
    "their derivation from unitary dynamics is an open problem"
)


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


class Scenario(str, Enum):
    QUBIT_MEASUREMENT = "qubit_measurement"
    MACROSCOPIC_SUPERPOSITION = "macroscopic_superposition"


LABELS = {
    Scenario.QUBIT_MEASUREMENT: {"factor": "Q", "system": ("+", "-"), "pointer": ("M+", "M-")},
    Scenario.MACROSCOPIC_SUPERPOSITION: {"factor": "x", "system": ("x1", "x2"), "pointer": ("E1", "E2")},
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario = Scenario.QUBIT_MEASUREMENT
    n_particles: int = 1
    theta: float = math.pi / 2
    c_plus: complex = complex(1 / math.sqrt(2))
    c_minus: complex = complex(1 / math.sqrt(2))
    n_sweep: tuple[int, ...] | None = None
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "scenario", Scenario(self.scenario))
        except ValueError:
            raise ConfigError(f"unknown scenario {self.scenario!r}") from None
        object.__setattr__(self, "c_plus", complex(self.c_plus))
        object.__setattr__(self, "c_minus", complex(self.c_minus))
        object.__setattr__(self, "theta", float(self.theta))
        if not isinstance(self.n_particles, (int, np.integer)) or self.n_particles < 1:
            raise ConfigError("n_particles must be an integer >= 1")
        norm2 = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(norm2 - 1.0) > hilbert.SPECTRAL_TOL:
            raise ConfigError(f"amplitudes must satisfy |c+|^2 + |c-|^2 = 1 (got {norm2!r})")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"theta must lie in [0, pi] radians (got {self.theta!r})")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.n_sweep is not None:
            sweep = tuple(int(n) for n in self.n_sweep)
            if not sweep or any(n < 1 for n in sweep):
                raise ConfigError("n_sweep must be a nonempty sequence of N >= 1")
            if any(b <= a for a, b in zip(sweep, sweep[1:])):
                raise ConfigError("n_sweep must be strictly ascending")
            object.__setattr__(self, "n_sweep", sweep)

    def model(self, n: int | None = None) -> PointerModel:
        return PointerModel.symmetric(self.n_particles if n is None else n, self.theta)


@dataclass(frozen=True)
class ScenarioReport:
    scenario: Scenario
    system_labels: tuple[str, str]
    pointer_labels: tuple[str, str]
    rho: hilbert.DensityMatrix
    purity: float
    overlap: OverlapReport
    offdiag_magnitude: float
    dense_deviation: float | None
    fapp_mixed: bool

    @property
    def dense_agrees(self) -> bool | None:
        if self.dense_deviation is None:
            return None
        return self.dense_deviation <= hilbert.STRUCTURAL_TOL


@dataclass(frozen=True)
class CurvePoint:
    n: int
    overlap_magnitude: float
    offdiag_magnitude: float
    purity: float
    log_overlap: float


@dataclass(frozen=True)
class SampleStats:
    trials: int
    count_plus: int
    frequency_plus: float
    expected: float
    z_score: float
    note: str = field(default=BORN_RULE_NOTE)


def dense_reduced_density(c_plus: complex, c_minus: complex, model: PointerModel) -> hilbert.DensityMatrix:
    psi = premeasure(c_plus, c_minus, model)
    return hilbert.partial_trace(hilbert.outer_product(psi), {0})


def _run(config: ScenarioConfig, model: PointerModel | None) -> ScenarioReport:
    labels = LABELS[config.scenario]
    model = model or config.model()
    c_plus, c_minus = normalized_amplitudes(config.c_plus, config.c_minus)
    overlap = pointer_overlap(model)
    rho = reduced_density_from_overlap(
        c_plus, c_minus, overlap.overlap, hilbert.CompositeSpace((2,), (labels["factor"],))
    )

    deviation = None
    if model.n_particles <= DENSE_MAX_PARTICLES and 2 * math.prod(model.particle_dims) <= hilbert.MAX_DENSE_DIM:
        dense = dense_reduced_density(c_plus, c_minus, model)
        deviation = float(np.max(np.abs(dense.entries - rho.entries)))

    offdiag = abs(complex(rho.entries[0, 1]))
    fapp = overlap.magnitude < FAPP_OVERLAP
    if fapp and offdiag > abs(c_plus) * abs(c_minus) * FAPP_OVERLAP:
        raise InvariantViolation("off-diagonal coherence survives despite negligible overlap")

    return ScenarioReport(
        scenario=config.scenario,
        system_labels=labels["system"],
        pointer_labels=labels["pointer"],
        rho=rho,
        purity=hilbert.purity(rho),
        overlap=overlap,
        offdiag_magnitude=offdiag,
        dense_deviation=deviation,
        fapp_mixed=fapp,
    )


def run_qubit_measurement(config: ScenarioConfig, model: PointerModel | None = None) -> ScenarioReport:
    """Measure a qubit with an N-particle apparatus and reduce to the qubit."""
    if config.scenario is not Scenario.QUBIT_MEASUREMENT:
        raise ConfigError("run_qubit_measurement needs scenario=qubit_measurement")
    return _run(config, model)


def run_macroscopic_superposition(config: ScenarioConfig, model: PointerModel | None = None) -> ScenarioReport:
    """Object at x1 + x2 scattering N environment particles; reduce to position."""
    if config.scenario is not Scenario.MACROSCOPIC_SUPERPOSITION:
        raise ConfigError("run_macroscopic_superposition needs scenario=macroscopic_superposition")
    return _run(config, model)


def curve_point(n: int, config: ScenarioConfig) -> CurvePoint:
    c_plus, c_minus = normalized_amplitudes(config.c_plus, config.c_minus)
    report = pointer_overlap(config.model(n))
    rho = reduced_density_from_overlap(c_plus, c_minus, report.overlap)
    return CurvePoint(
        n=n,
        overlap_magnitude=report.magnitude,
        offdiag_magnitude=abs(complex(rho.entries[0, 1])),
        purity=hilbert.purity(rho),
        log_overlap=report.log_magnitude,
    )


def decoherence_curve(config: ScenarioConfig) -> list[CurvePoint]:
    if config.n_sweep is None:
        raise ConfigError("decoherence_curve needs n_sweep")
    points = [curve_point(n, config) for n in config.n_sweep]
    for p in points:
        expected = closed_form_purity(config.c_plus, config.c_minus, p.overlap_magnitude)
        if abs(p.purity - expected) > hilbert.STRUCTURAL_TOL:
            raise InvariantViolation(f"purity at N={p.n} departs from the closed form")
    return points


def trial_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform draws for trials ``start .. start+count-1``.

    Trial ``i`` reads position ``i % SAMPLE_BLOCK`` of a Philox4x64 stream
    keyed by ``seed`` whose counter word 2 is set to ``i // SAMPLE_BLOCK``.
    Each draw depends only on ``(seed, i)``, so blocks can be evaluated in
    any order or in parallel.
    """
    out = np.empty(count)
    i = start
    while i < start + count:
        block, offset = divmod(i, SAMPLE_BLOCK)
        take = min(SAMPLE_BLOCK - offset, start + count - i)
        gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, block, 0]))
        out[i - start:i - start + take] = gen.random(offset + take)[offset:]
        i += take
    return out


def born_sample(config: ScenarioConfig) -> SampleStats:
    c_plus, _ = normalized_amplitudes(config.c_plus, config.c_minus)
    p = min(abs(c_plus) ** 2, 1.0)
    draws = trial_uniforms(config.seed, 0, config.trials)
    count = int(np.count_nonzero(draws < p))
    freq = count / config.trials
    if 0.0 < p < 1.0:
        z = (freq - p) / math.sqrt(p * (1 - p) / config.trials)
    else:
        z = 0.0 if freq == p else math.copysign(math.inf, freq - p)
    return SampleStats(config.trials, count, freq, p, z)
