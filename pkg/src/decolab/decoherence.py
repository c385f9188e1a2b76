"""Pointer states, premeasurement and branch overlaps.

Each of the N apparatus/environment particles ends up in ``e_plus[i]`` or
``e_minus[i]`` depending on the measured outcome, so the two pointer states
are product states and their overlap is a product of single-particle inner
products. Nothing here builds a 2**N vector except :func:`premeasure`, which
is the dense cross-check path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .hilbert import (
    MAX_DENSE_DIM,
    SPECTRAL_TOL,
    STRUCTURAL_TOL,
    CompositeSpace,
    DensityMatrix,
    DimensionError,
    Operator,
    StateVector,
    tensor_all,
)

ProductState = tuple[StateVector, ...]

# |cos(theta)| below this is treated as exact zero: the float nearest pi/2
# has cos of ~6e-17, so "orthogonal pointers" would otherwise never be exact.
_COS_ZERO_SNAP = 1e-15


class DenseCapExceeded(DimensionError):
    """Dense premeasurement requested beyond the dense dimension cap."""


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


def symmetric_overlap_factor(theta: float) -> float:
    """Closed-form single-particle overlap ``<e-|e+> = cos(theta)``."""
    c = math.cos(theta)
    return 0.0 if abs(c) < _COS_ZERO_SNAP else c


def symmetric_pair(theta: float) -> tuple[StateVector, StateVector]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    space = CompositeSpace((2,))
    return StateVector(space, np.array([c, s])), StateVector(space, np.array([c, -s]))


@dataclass(frozen=True)
class PointerModel:
    """N particles with branch-conditional single-particle states.

    Build with :meth:`symmetric` for the single-angle model (every particle
    rotated by +-theta/2) or :meth:`from_states` for arbitrary pairs.
    """

    n_particles: int
    conditional_states: tuple[tuple[StateVector, StateVector], ...] = field(repr=False)
    symmetric_angle: float | None = None

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be a positive integer")
        if len(self.conditional_states) != self.n_particles:
            raise ValueError("need one (e_plus, e_minus) pair per particle")
        for i, (ep, em) in enumerate(self.conditional_states):
            if ep.space.factor_dims != em.space.factor_dims or ep.space.n_factors != 1:
                raise DimensionError(f"particle {i}: conditional states must share one factor")
            if ep.space.dim < 2:
                raise DimensionError(f"particle {i}: single-particle dimension must be >= 2")
            for s in (ep, em):
                if abs(s.norm() - 1.0) > STRUCTURAL_TOL:
                    raise ValueError(f"particle {i}: conditional state not normalized")

    @classmethod
    def symmetric(cls, n_particles: int, theta: float) -> PointerModel:
        pair = symmetric_pair(theta)
        return cls(n_particles, (pair,) * n_particles, float(theta))

    @classmethod
    def from_states(cls, pairs: Sequence[tuple[StateVector, StateVector]]) -> PointerModel:
        return cls(len(pairs), tuple((ep, em) for ep, em in pairs))

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return tuple(ep.space.dim for ep, _ in self.conditional_states)


@dataclass(frozen=True)
class BranchState:
    label: Branch
    amplitude: complex
    environment: ProductState

    def __post_init__(self):
        if abs(self.amplitude) > 1.0 + STRUCTURAL_TOL:
            raise ValueError("branch amplitude magnitude exceeds 1")


@dataclass(frozen=True)
class OverlapReport:
    overlap: complex
    log_magnitude: float
    per_particle_factors: tuple[complex, ...]

    @property
    def magnitude(self) -> float:
        return abs(self.overlap)


def pointer_states(model: PointerModel) -> tuple[ProductState, ProductState]:
    plus = tuple(ep for ep, _ in model.conditional_states)
    minus = tuple(em for _, em in model.conditional_states)
    return plus, minus


def product_overlap(bra: ProductState, ket: ProductState) -> complex:
    """``<bra|ket>`` for two product states, one factor at a time."""
    if len(bra) != len(ket):
        raise ValueError("product states have different particle counts")
    return math.prod((b.inner(k) for b, k in zip(bra, ket)), start=1 + 0j)


def _log_abs_sum(factors: Sequence[complex]) -> float:
    total = 0.0
    for f in factors:
        if f == 0:
            return -math.inf
        total += math.log(abs(f))
    return total


def pointer_overlap(model: PointerModel) -> OverlapReport:
    """Return ``<M-|M+>`` as a product of single-particle overlaps."""
    n = model.n_particles
    if model.symmetric_angle is not None:
        c = symmetric_overlap_factor(model.symmetric_angle)
        factors = (complex(c),) * n
        log_mag = -math.inf if c == 0.0 else n * math.log(abs(c))
        return OverlapReport(complex(c ** n), log_mag, factors)

    factors = tuple(em.inner(ep) for ep, em in model.conditional_states)
    overlap = math.prod(factors, start=1 + 0j)
    return OverlapReport(overlap, _log_abs_sum(factors), factors)


def normalized_amplitudes(c_plus: complex, c_minus: complex) -> tuple[complex, complex]:
    """Check ``|c+|^2 + |c-|^2 = 1`` to 1e-8 and remove the residual."""
    c_plus, c_minus = complex(c_plus), complex(c_minus)
    total = abs(c_plus) ** 2 + abs(c_minus) ** 2
    if abs(total - 1.0) > SPECTRAL_TOL:
        raise ValueError(f"|c+|^2 + |c-|^2 must be 1 (got {total!r})")
    if total == 1.0:
        return c_plus, c_minus
    scale = math.sqrt(total)
    return c_plus / scale, c_minus / scale


def branches(c_plus: complex, c_minus: complex, model: PointerModel) -> tuple[BranchState, BranchState]:
    c_plus, c_minus = normalized_amplitudes(c_plus, c_minus)
    plus, minus = pointer_states(model)
    return BranchState(Branch.PLUS, c_plus, plus), BranchState(Branch.MINUS, c_minus, minus)


def premeasure(c_plus: complex, c_minus: complex, model: PointerModel) -> StateVector:
    """Dense ``c+ |+>|M+> + c- |->|M->`` with the measured qubit as factor 0."""
    c_plus, c_minus = normalized_amplitudes(c_plus, c_minus)
    dims = (2,) + model.particle_dims
    space = CompositeSpace(dims)
    if space.dim > MAX_DENSE_DIM:
        raise DenseCapExceeded(
            f"dense premeasurement needs dimension {space.dim} > {MAX_DENSE_DIM}; "
            "use pointer_overlap/reduced_system_density for large N"
        )
    plus, minus = pointer_states(model)
    up = StateVector.basis(2, 0)
    down = StateVector.basis(2, 1)
    branch_p = tensor_all((up,) + plus).amplitudes
    branch_m = tensor_all((down,) + minus).amplitudes
    return StateVector(space, c_plus * branch_p + c_minus * branch_m)


def reduced_density_from_overlap(c_plus: complex, c_minus: complex, overlap: complex,
                                 space: CompositeSpace | None = None) -> DensityMatrix:
    # (+,-) entry carries <M-|M+>, the (-,+) entry its conjugate
    normalized_amplitudes(c_plus, c_minus)
    c_plus, c_minus = complex(c_plus), complex(c_minus)
    # divide by the squared norm so equal amplitudes give exactly 1/2
    total = abs(c_plus) ** 2 + abs(c_minus) ** 2
    off = c_plus * c_minus.conjugate() * overlap / total
    rho = np.array(
        [[abs(c_plus) ** 2 / total, off], [off.conjugate(), abs(c_minus) ** 2 / total]],
        dtype=complex,
    )
    return DensityMatrix(space or CompositeSpace((2,)), rho)


def reduced_system_density(c_plus: complex, c_minus: complex, model: PointerModel,
                           labels: tuple[str, ...] | None = None) -> DensityMatrix:
    """Closed-form reduced state of the measured qubit, valid for any N."""
    overlap = pointer_overlap(model).overlap
    space = CompositeSpace((2,), labels)
    return reduced_density_from_overlap(c_plus, c_minus, overlap, space)


def closed_form_purity(c_plus: complex, c_minus: complex, overlap_magnitude: float) -> float:
    p, m = abs(c_plus) ** 2, abs(c_minus) ** 2
    return p * p + m * m + 2 * p * m * overlap_magnitude ** 2


def apply_common_unitary(branch_pair: tuple[ProductState, ProductState],
                         unitaries: Sequence[Operator]) -> tuple[ProductState, ProductState]:
    """Apply ``unitaries[i]`` to particle ``i`` of both branches."""
    first, second = branch_pair
    if not (len(first) == len(second) == len(unitaries)):
        raise ValueError("branches and unitary sequence must have equal length")
    for i, (u, s) in enumerate(zip(unitaries, first)):
        if u.space.factor_dims != s.space.factor_dims:
            raise DimensionError(f"unitary {i} does not match particle dimension")
        if not u.is_unitary():
            raise ValueError(f"factor {i} is not unitary (error {u.unitarity_error():.3e})")
    return (
        tuple(u @ s for u, s in zip(unitaries, first)),
        tuple(u @ s for u, s in zip(unitaries, second)),
    )
