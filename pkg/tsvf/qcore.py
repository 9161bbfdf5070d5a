# tsvf/qcore.py
"""
Finite-dimensional Hilbert-space primitives: kets, bras, operators,
spectral decomposition and piecewise-constant unitary evolution (hbar = 1).

Tensor products use the numpy.kron convention: the left factor is the slow
(most significant) index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Sequence, Tuple, Union

import numpy as np

from tsvf.errors import DimensionError, NotHermitianError, TimeWindowError, ZeroStateError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
DEGENERACY_TOL = 1e-9

# a vector whose norm is already 1 within this is stored as given
_NORM_SLACK = 4 * np.finfo(float).eps


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _normalized(amplitudes, kind: str) -> np.ndarray:
    vec = np.array(amplitudes, dtype=complex)
    if vec.ndim != 1:
        raise DimensionError(f"{kind} amplitudes must be one-dimensional, got shape {vec.shape}")
    if vec.size == 0:
        raise DimensionError(f"{kind} needs at least one amplitude")
    norm = np.linalg.norm(vec)
    if not np.isfinite(norm):
        raise ZeroStateError(f"{kind} norm is not finite")
    if norm == 0.0:
        raise ZeroStateError(f"{kind} is the zero vector")
    if abs(norm - 1.0) > _NORM_SLACK:
        vec = vec / norm
    return _readonly(vec)


@dataclass(frozen=True, eq=False)
class _State:
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _normalized(self.amplitudes, type(self).__name__))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


class Ket(_State):
    """Forward-evolving state |psi>."""

    def bra(self) -> "Bra":
        return Bra(self.amplitudes)


class Bra(_State):
    """
    Backward-evolving state <phi|. Stores the components of the underlying
    ket; conjugation happens in the pairing.
    """

    def pair(self, vector) -> complex:
        vec = vector.amplitudes if isinstance(vector, Ket) else np.asarray(vector)
        if vec.shape[0] != self.dim:
            raise DimensionError(f"cannot pair bra of dim {self.dim} with vector of dim {vec.shape[0]}")
        return complex(np.vdot(self.amplitudes, vec))


def make_ket(amplitudes: Sequence[complex]) -> Ket:
    return Ket(amplitudes)


def make_bra(amplitudes: Sequence[complex]) -> Bra:
    return Bra(amplitudes)


def basis_ket(dim: int, index: int) -> Ket:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return Ket(vec)


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"operator must be a non-empty square matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def hermitian(self) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= HERMITIAN_TOL)

    @cached_property
    def unitary(self) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(self.dim))) <= UNITARY_TOL)

    def adjoint(self) -> "Operator":
        return Operator(self.matrix.conj().T)

    def _check(self, other: "Operator"):
        if other.dim != self.dim:
            raise DimensionError(f"operator dims differ: {self.dim} vs {other.dim}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix @ other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(scalar * self.matrix)

    __rmul__ = __mul__

    def apply(self, vector) -> np.ndarray:
        vec = vector.amplitudes if isinstance(vector, _State) else np.asarray(vector)
        if vec.shape[0] != self.dim:
            raise DimensionError(f"operator of dim {self.dim} applied to vector of dim {vec.shape[0]}")
        return self.matrix @ vec


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


def projector(state) -> Operator:
    """|v><v| for a normalized state."""
    vec = state.amplitudes if isinstance(state, _State) else Ket(state).amplitudes
    return Operator(np.outer(vec, vec.conj()))


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> Operator:
    return Operator(_PAULI[axis.lower()])


def spin_along(direction: Sequence[float]) -> Operator:
    """n . sigma for a (not necessarily unit) direction n."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return Operator(n[0] * _PAULI["x"] + n[1] * _PAULI["y"] + n[2] * _PAULI["z"])


Tensorable = Union[Ket, Bra, Operator]


def _kron(a: Tensorable, b: Tensorable) -> Tensorable:
    if type(a) is not type(b):
        raise TypeError(f"tensor operands must be the same kind, got {type(a).__name__} and {type(b).__name__}")
    if isinstance(a, Operator):
        return Operator(np.kron(a.matrix, b.matrix))
    return type(a)(np.kron(a.amplitudes, b.amplitudes))


def tensor(a: Tensorable, b: Tensorable, *rest: Tensorable) -> Tensorable:
    return reduce(_kron, rest, _kron(a, b))


@dataclass(frozen=True, eq=False)
class Observable:
    op: Operator
    spectrum: Tuple[Tuple[float, Operator], ...]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def eigenvalues(self) -> Tuple[float, ...]:
        return tuple(value for value, _ in self.spectrum)

    @property
    def projectors(self) -> Tuple[Operator, ...]:
        return tuple(proj for _, proj in self.spectrum)

    @property
    def dichotomic(self) -> bool:
        return len(self.spectrum) == 2


def spectral_decompose(op, degeneracy_tol: float = DEGENERACY_TOL, label: str = "") -> Observable:
    op = op if isinstance(op, Operator) else Operator(op)
    if not op.hermitian:
        raise NotHermitianError(f"operator {label!r} is not Hermitian within {HERMITIAN_TOL}")

    m = 0.5 * (op.matrix + op.matrix.conj().T)
    values, vectors = np.linalg.eigh(m)

    # a cluster never spans more than degeneracy_tol from its lowest eigenvalue
    clusters = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[clusters[-1][0]] <= degeneracy_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    spectrum = []
    for idx in clusters:
        if len(idx) > 1:
            log.debug("merged eigenvalues %s into one eigenspace", values[idx])
        v = vectors[:, idx]
        spectrum.append((float(np.mean(values[idx])), Operator(v @ v.conj().T)))
    return Observable(op=op, spectrum=tuple(spectrum), label=label)


def unitary_exponential(hamiltonian: Operator, duration: float) -> Operator:
    """exp(-i H t) via the eigendecomposition of the Hermitian generator."""
    values, vectors = np.linalg.eigh(0.5 * (hamiltonian.matrix + hamiltonian.matrix.conj().T))
    phases = np.exp(-1j * values * duration)
    return Operator((vectors * phases) @ vectors.conj().T)


@dataclass(frozen=True, eq=False)
class Segment:
    duration: float
    hamiltonian: Operator

    def __post_init__(self):
        h = self.hamiltonian if isinstance(self.hamiltonian, Operator) else Operator(self.hamiltonian)
        if not h.hermitian:
            raise NotHermitianError("segment Hamiltonian is not Hermitian")
        if not self.duration >= 0:
            raise ValueError(f"segment duration must be non-negative, got {self.duration}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "duration", float(self.duration))

    @cached_property
    def unitary(self) -> Operator:
        return unitary_exponential(self.hamiltonian, self.duration)


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """Piecewise-constant H(t); segments run back to back from `start`."""

    segments: Tuple[Segment, ...] = ()
    start: float = 0.0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        dims = {s.hamiltonian.dim for s in segs}
        if len(dims) > 1:
            raise DimensionError(f"segment Hamiltonians have different dims: {sorted(dims)}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "start", float(self.start))

    @classmethod
    def constant(cls, hamiltonian, duration: float, start: float = 0.0) -> "HamiltonianSchedule":
        return cls(segments=(Segment(duration, hamiltonian),), start=start)

    @property
    def dim(self):
        return self.segments[0].hamiltonian.dim if self.segments else None

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def stop(self) -> float:
        return self.start + self.duration

    def window(self, t_a: float, t_b: float) -> "HamiltonianSchedule":
        """The part of the schedule between t_a and t_b, starting at t_a."""
        if not self.start <= t_a <= t_b <= self.stop:
            raise TimeWindowError(f"window [{t_a}, {t_b}] outside schedule [{self.start}, {self.stop}]")
        clipped = []
        t0 = self.start
        for seg in self.segments:
            t1 = t0 + seg.duration
            lo, hi = max(t0, t_a), min(t1, t_b)
            if hi > lo:
                clipped.append(Segment(hi - lo, seg.hamiltonian))
            t0 = t1
        return HamiltonianSchedule(segments=tuple(clipped), start=t_a)

    def _check(self, dim: int):
        if self.dim is not None and self.dim != dim:
            raise DimensionError(f"schedule acts on dim {self.dim}, state has dim {dim}")


def propagator(schedule: HamiltonianSchedule, dim: int) -> Operator:
    """Time-ordered product U_K ... U_1 (earliest segment rightmost)."""
    schedule._check(dim)
    u = np.eye(dim, dtype=complex)
    for seg in schedule.segments:
        u = seg.unitary.matrix @ u
    return Operator(u)


def evolve_forward(state: Ket, schedule: HamiltonianSchedule) -> Ket:
    schedule._check(state.dim)
    vec = state.amplitudes
    for seg in schedule.segments:
        vec = seg.unitary.matrix @ vec
    return Ket(vec)


def evolve_backward(bra: Bra, schedule: HamiltonianSchedule) -> Bra:
    """The backward state at the schedule's start: <phi| U_K ... U_1."""
    schedule._check(bra.dim)
    vec = bra.amplitudes
    for seg in reversed(schedule.segments):
        vec = seg.unitary.matrix.conj().T @ vec
    return Bra(vec)


def orthonormal_completion(state) -> np.ndarray:
    """
    Columns form an orthonormal basis whose first column is `state`; the
    others come from a QR orthogonalization of the standard basis against it.
    """
    first = state.amplitudes if isinstance(state, _State) else Ket(state).amplitudes
    q, _ = np.linalg.qr(np.column_stack([first, np.eye(first.shape[0], dtype=complex)]))
    # q[:, 0] equals first up to a unit phase
    q[:, 0] = first
    return q
