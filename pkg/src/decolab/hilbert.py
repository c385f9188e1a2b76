"""Dense linear algebra on small composite Hilbert spaces.

Index convention: the leftmost factor is the most significant digit of the
flattened basis index, i.e. ``|i0>|i1>...`` maps to
``i0*d1*d2*... + i1*d2*... + ...``. This matches ``np.kron`` and C-order
reshapes, so ``amplitudes.reshape(factor_dims)`` gives the tensor view.

Units: hbar = 1, so ``U(t) = exp(-i H t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

STRUCTURAL_TOL = 1e-10
SPECTRAL_TOL = 1e-8
MAX_DENSE_DIM = 4096


class DimensionError(ValueError):
    """Spaces or shapes do not line up."""


class NotHermitianError(ValueError):
    pass


def _check_dense_cap(space: CompositeSpace):
    if space.dim > MAX_DENSE_DIM:
        raise DimensionError(
            f"dense matrices are capped at dimension {MAX_DENSE_DIM}, got {space.dim}"
        )


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CompositeSpace:
    factor_dims: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims:
            raise DimensionError("a composite space needs at least one factor")
        if any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "factor_dims", dims)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(dims):
                raise DimensionError("one label per factor is required")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def flat_index(self, multi: Sequence[int]) -> int:
        if len(multi) != self.n_factors:
            raise DimensionError("multi-index length does not match factor count")
        flat = 0
        for i, d in zip(multi, self.factor_dims):
            if not 0 <= i < d:
                raise IndexError(f"index {i} out of range for factor of dim {d}")
            flat = flat * d + i
        return flat

    def multi_index(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.dim:
            raise IndexError(f"flat index {flat} out of range for dim {self.dim}")
        digits = []
        for d in reversed(self.factor_dims):
            flat, r = divmod(flat, d)
            digits.append(r)
        return tuple(reversed(digits))

    def concat(self, other: CompositeSpace) -> CompositeSpace:
        labels = None
        if self.labels is not None and other.labels is not None:
            labels = self.labels + other.labels
        return CompositeSpace(self.factor_dims + other.factor_dims, labels)

    def subspace(self, keep: Sequence[int]) -> CompositeSpace:
        labels = None if self.labels is None else tuple(self.labels[k] for k in keep)
        return CompositeSpace(tuple(self.factor_dims[k] for k in keep), labels)


def qubits(n: int, labels: Sequence[str] | None = None) -> CompositeSpace:
    return CompositeSpace((2,) * n, None if labels is None else tuple(labels))


@dataclass(frozen=True)
class StateVector:
    space: CompositeSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.space.dim,):
            raise DimensionError(
                f"expected {self.space.dim} amplitudes, got {amps.shape[0]}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, space: CompositeSpace | int, index: int | Sequence[int] = 0) -> StateVector:
        if isinstance(space, int):
            space = CompositeSpace((space,))
        if not isinstance(index, int):
            index = space.flat_index(index)
        amps = np.zeros(space.dim, dtype=complex)
        amps[index] = 1.0
        return cls(space, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Iterable[complex], dims: Sequence[int] | None = None) -> StateVector:
        amps = np.asarray(list(amplitudes), dtype=complex)
        space = CompositeSpace(tuple(dims) if dims is not None else (amps.size,))
        return cls(space, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / n)

    def inner(self, other: StateVector) -> complex:
        """Return <self|other>."""
        if self.space.factor_dims != other.space.factor_dims:
            raise DimensionError("inner product between different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.space, factor * self.amplitudes)

    def __add__(self, other: StateVector) -> StateVector:
        if self.space.factor_dims != other.space.factor_dims:
            raise DimensionError("cannot add states on different spaces")
        return StateVector(self.space, self.amplitudes + other.amplitudes)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.factor_dims)


@dataclass(frozen=True)
class Operator:
    space: CompositeSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dense_cap(self.space)
        entries = _frozen(self.entries)
        d = self.space.dim
        if entries.shape != (d, d):
            raise DimensionError(f"operator must be {d}x{d}, got {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_matrix(cls, matrix, dims: Sequence[int] | None = None) -> Operator:
        matrix = np.asarray(matrix, dtype=complex)
        space = CompositeSpace(tuple(dims) if dims is not None else (matrix.shape[0],))
        return cls(space, matrix)

    @classmethod
    def identity(cls, space: CompositeSpace) -> Operator:
        return cls(space, np.eye(space.dim, dtype=complex))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tol: float = STRUCTURAL_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def unitarity_error(self) -> float:
        e = self.entries
        return float(np.max(np.abs(e.conj().T @ e - np.eye(self.space.dim))))

    def is_unitary(self, tol: float = STRUCTURAL_TOL) -> bool:
        return self.unitarity_error() <= tol

    def dagger(self) -> Operator:
        return Operator(self.space, self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            _check_same_space(self.space, other.space)
            return StateVector(other.space, self.entries @ other.amplitudes)
        if isinstance(other, Operator):
            _check_same_space(self.space, other.space)
            return Operator(self.space, self.entries @ other.entries)
        return NotImplemented


def _check_same_space(a: CompositeSpace, b: CompositeSpace):
    if a.factor_dims != b.factor_dims:
        raise DimensionError(f"space mismatch: {a.factor_dims} vs {b.factor_dims}")


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(name: str) -> Operator:
    matrix = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}[name.lower()]
    return Operator.from_matrix(matrix)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    Construction validates Hermiticity and trace to 1e-10 and the smallest
    eigenvalue of the Hermitian part against -1e-8. Pass ``check=False`` only
    for matrices that are valid by construction.
    """

    space: CompositeSpace
    entries: np.ndarray = field(repr=False)
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        _check_dense_cap(self.space)
        entries = _frozen(self.entries)
        d = self.space.dim
        if entries.shape != (d, d):
            raise DimensionError(f"density matrix must be {d}x{d}, got {entries.shape}")
        object.__setattr__(self, "entries", entries)
        if self.check:
            self.validate()

    def validate(self):
        herm = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if herm > STRUCTURAL_TOL:
            raise NotHermitianError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = self.trace()
        if abs(tr - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lam = self.min_eigenvalue()
        if lam < -SPECTRAL_TOL:
            raise ValueError(f"density matrix not positive semidefinite (min eigenvalue {lam:.3e})")

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def min_eigenvalue(self) -> float:
        hermitian_part = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(hermitian_part)[0])

    def is_pure(self) -> bool:
        return abs(purity(self) - 1.0) <= SPECTRAL_TOL


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.space.concat(b.space), np.kron(a.amplitudes, b.amplitudes))


def tensor_all(states: Sequence[StateVector]) -> StateVector:
    if not states:
        raise ValueError("need at least one state")
    out = states[0]
    for s in states[1:]:
        out = tensor_product(out, s)
    return out


def operator_tensor(a: Operator, b: Operator) -> Operator:
    return Operator(a.space.concat(b.space), np.kron(a.entries, b.entries))


def outer_product(psi: StateVector) -> DensityMatrix:
    n = psi.norm()
    if abs(n - 1.0) > SPECTRAL_TOL:
        raise ValueError(f"outer_product needs a normalized state (norm {n!r})")
    a = psi.amplitudes
    # rank one with unit trace: valid by construction
    return DensityMatrix(psi.space, np.outer(a, a.conj()), check=False)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``.

    Kept factors appear in their original relative order whatever order
    ``keep`` is given in.
    """
    keep = sorted(set(keep))
    n = rho.space.n_factors
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"factor index out of range for {n} factors: {keep}")
    if len(keep) == n:
        return rho

    dims = rho.space.factor_dims
    drop = [k for k in range(n) if k not in keep]
    d_keep = math.prod(dims[k] for k in keep)
    d_drop = math.prod(dims[k] for k in drop)
    t = rho.entries.reshape(dims + dims)
    order = keep + drop
    t = t.transpose(order + [n + k for k in order]).reshape(d_keep, d_drop, d_keep, d_drop)
    reduced = np.einsum("ajbj->ab", t)
    # trace, Hermiticity and positivity are inherited from rho
    return DensityMatrix(rho.space.subspace(keep), reduced, check=False)


def purity(rho: DensityMatrix) -> float:
    # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.vdot(rho.entries, rho.entries).real)


def expectation(obs: Operator, rho: DensityMatrix) -> float:
    _check_same_space(obs.space, rho.space)
    if not obs.is_hermitian():
        raise NotHermitianError("observable must be Hermitian")
    value = complex(np.sum(obs.entries * rho.entries.T))
    if abs(value.imag) > STRUCTURAL_TOL:
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return value.real


def propagator(h: Operator, t: float) -> Operator:
    """``exp(-i h t)`` from the eigendecomposition of ``h``."""
    if not h.is_hermitian():
        raise NotHermitianError("generator must be Hermitian")
    herm = 0.5 * (h.entries + h.entries.conj().T)
    energies, vecs = np.linalg.eigh(herm)
    phases = np.exp(-1j * energies * t)
    return Operator(h.space, (vecs * phases) @ vecs.conj().T)


def evolve(h: Operator, t: float, psi: StateVector) -> StateVector:
    _check_same_space(h.space, psi.space)
    return propagator(h, t) @ psi


def random_state(space: CompositeSpace, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVector(space, amps).normalize()


def random_hermitian(space: CompositeSpace, rng: np.random.Generator) -> Operator:
    d = space.dim
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(space, 0.5 * (g + g.conj().T))


def random_unitary(space: CompositeSpace, rng: np.random.Generator) -> Operator:
    # Haar measure via QR of a Ginibre matrix with the phase fix on R's diagonal
    d = space.dim
    g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return Operator(space, q * (diag / np.abs(diag)))


def random_density(space: CompositeSpace, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    d = space.dim
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(space, 0.5 * (rho + rho.conj().T))
