# tsvf/tsv.py
"""
Two-state vectors <phi| |psi> and their calculus: ABL probabilities, weak
values, generalized two-state vectors, elements of reality and the
two-time correlation kernel.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from tsvf.errors import (
    DimensionError,
    NotMeasurableError,
    NotProjectorError,
    NullEnsembleError,
    OrthogonalSelectionError,
    TimeWindowError,
    ZeroStateError,
)
from tsvf.qcore import (
    DEGENERACY_TOL,
    Bra,
    HamiltonianSchedule,
    Ket,
    Observable,
    Operator,
    evolve_backward,
    evolve_forward,
    spectral_decompose,
)

log = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-10
CERTAINTY_TOL = 1e-10
# sum of squared ABL amplitudes below this counts as an empty ensemble
NULL_TOL = 1e-24


def _matrix(op) -> np.ndarray:
    if isinstance(op, Observable):
        return op.op.matrix
    if isinstance(op, Operator):
        return op.matrix
    return np.asarray(op, dtype=complex)


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    backward: Bra
    forward: Ket

    def __post_init__(self):
        bwd = self.backward if isinstance(self.backward, Bra) else Bra(self.backward)
        fwd = self.forward if isinstance(self.forward, Ket) else Ket(self.forward)
        if bwd.dim != fwd.dim:
            raise DimensionError(f"backward dim {bwd.dim} != forward dim {fwd.dim}")
        object.__setattr__(self, "backward", bwd)
        object.__setattr__(self, "forward", fwd)

    @property
    def dim(self) -> int:
        return self.forward.dim

    @cached_property
    def overlap(self) -> complex:
        return self.backward.pair(self.forward)

    def amplitude(self, op) -> complex:
        """<phi|O|psi>"""
        m = _matrix(op)
        if m.shape[0] != self.dim:
            raise DimensionError(f"operator dim {m.shape[0]} != two-state vector dim {self.dim}")
        return complex(np.vdot(self.backward.amplitudes, m @ self.forward.amplitudes))

    @property
    def scale(self) -> float:
        return 1.0

    def as_generalized(self) -> "GeneralizedTwoStateVector":
        return GeneralizedTwoStateVector((Term(1.0, self.backward, self.forward),))


@dataclass(frozen=True, eq=False)
class Term:
    alpha: complex
    backward: Bra
    forward: Ket

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not isinstance(self.backward, Bra):
            object.__setattr__(self, "backward", Bra(self.backward))
        if not isinstance(self.forward, Ket):
            object.__setattr__(self, "forward", Ket(self.forward))


@dataclass(frozen=True, eq=False)
class GeneralizedTwoStateVector:
    """sum_i alpha_i <phi_i| |psi_i>"""

    terms: Tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        if not terms:
            raise ValueError("generalized two-state vector needs at least one term")
        dims = {d for t in terms for d in (t.backward.dim, t.forward.dim)}
        if len(dims) != 1:
            raise DimensionError(f"terms have different dims: {sorted(dims)}")
        if all(t.alpha == 0 for t in terms):
            raise ZeroStateError("all term weights are zero")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return self.terms[0].forward.dim

    @cached_property
    def scale(self) -> float:
        """sum_i |alpha_i|; overlaps and amplitudes are compared relative to it"""
        return float(sum(abs(t.alpha) for t in self.terms))

    @cached_property
    def overlap(self) -> complex:
        return sum(t.alpha * t.backward.pair(t.forward) for t in self.terms)

    def amplitude(self, op) -> complex:
        """sum_i alpha_i <phi_i|O|psi_i>"""
        m = _matrix(op)
        if m.shape[0] != self.dim:
            raise DimensionError(f"operator dim {m.shape[0]} != two-state vector dim {self.dim}")
        return complex(sum(t.alpha * np.vdot(t.backward.amplitudes, m @ t.forward.amplitudes) for t in self.terms))


Selection = Union[TwoStateVector, GeneralizedTwoStateVector]


@dataclass(frozen=True)
class Distribution:
    entries: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        probs = [p for _, p in self.entries]
        if any(p < 0 for p in probs):
            raise ValueError("negative probability in distribution")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(probs)!r}, not 1")

    @classmethod
    def from_weights(cls, outcomes: Sequence[float], weights: Sequence[float]) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        p = w / w.sum()
        return cls(tuple((float(o), float(x)) for o, x in zip(outcomes, p)))

    @property
    def outcomes(self) -> Tuple[float, ...]:
        return tuple(o for o, _ in self.entries)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    def probability(self, outcome: float, tol: float = 1e-9) -> float:
        for o, p in self.entries:
            if abs(o - outcome) <= tol:
                return p
        return 0.0

    def most_likely(self) -> Tuple[float, float]:
        return max(self.entries, key=lambda e: e[1])

    def as_dict(self) -> Dict[float, float]:
        return dict(self.entries)


def _check_dims(selection: Selection, obs: Observable):
    if selection.dim != obs.dim:
        raise DimensionError(f"observable {obs.label!r} has dim {obs.dim}, two-state vector has dim {selection.dim}")


def _abl(selection: Selection, obs: Observable) -> Distribution:
    _check_dims(selection, obs)
    weights = [abs(selection.amplitude(p)) ** 2 for p in obs.projectors]
    if sum(weights) <= NULL_TOL * selection.scale ** 2:
        raise NullEnsembleError(
            f"this pre/post-selection is incompatible with measuring {obs.label or 'this observable'} at this time"
        )
    return Distribution.from_weights(obs.eigenvalues, weights)


def abl_probabilities(tsv: TwoStateVector, obs: Observable) -> Distribution:
    return _abl(tsv, obs)


def abl_probabilities_generalized(g: Selection, obs: Observable) -> Distribution:
    """Coherent sum over terms inside the modulus."""
    if isinstance(g, TwoStateVector):
        g = g.as_generalized()
    return _abl(g, obs)


def abl_at_time(pre: Ket, post: Bra, schedule: HamiltonianSchedule, t: float, obs: Observable) -> Distribution:
    """
    ABL at an intermediate time t. `pre` is the state at schedule.start,
    `post` the backward state at schedule.stop. Only the two selected states
    are evolved.
    """
    if not schedule.start <= t <= schedule.stop:
        raise TimeWindowError(f"t={t} outside [{schedule.start}, {schedule.stop}]")
    forward = evolve_forward(pre, schedule.window(schedule.start, t))
    backward = evolve_backward(post, schedule.window(t, schedule.stop))
    return abl_probabilities(TwoStateVector(backward, forward), obs)


def gtsv_from_ancilla(joint_pre: Ket, joint_post: Bra, system_dim: int, ancilla_dim: int) -> GeneralizedTwoStateVector:
    """
    Expand a joint system (x) ancilla selection over the computational ancilla
    basis: joint_pre = sum_i |psi_i>|i>, joint_post = sum_i <phi_i|<i|.
    """
    if joint_pre.dim != system_dim * ancilla_dim or joint_post.dim != system_dim * ancilla_dim:
        raise DimensionError(
            f"joint dims ({joint_pre.dim}, {joint_post.dim}) do not factor as {system_dim} x {ancilla_dim}"
        )
    psi = joint_pre.amplitudes.reshape(system_dim, ancilla_dim)
    phi = joint_post.amplitudes.reshape(system_dim, ancilla_dim)

    terms = []
    for i in range(ancilla_dim):
        n_psi = np.linalg.norm(psi[:, i])
        n_phi = np.linalg.norm(phi[:, i])
        if n_psi < 1e-14 or n_phi < 1e-14:
            continue
        terms.append(Term(n_psi * n_phi, Bra(phi[:, i] / n_phi), Ket(psi[:, i] / n_psi)))
    if not terms:
        raise NullEnsembleError("pre- and post-selection share no ancilla component")
    log.debug("ancilla expansion kept %d of %d terms", len(terms), ancilla_dim)
    return GeneralizedTwoStateVector(tuple(terms))


def _weak(selection: Selection, op, threshold: float) -> complex:
    m = _matrix(op)
    overlap = selection.overlap
    if abs(overlap) <= threshold * selection.scale:
        raise OrthogonalSelectionError(
            f"normalized overlap |<phi|psi>| = {abs(overlap) / selection.scale:.3e} is below {threshold:.1e}"
        )
    return selection.amplitude(m) / overlap


def weak_value(tsv: TwoStateVector, op, threshold: float = ORTHOGONALITY_TOL) -> complex:
    """O_w = <phi|O|psi> / <phi|psi>"""
    return _weak(tsv, op, threshold)


def weak_value_generalized(g: Selection, op, threshold: float = ORTHOGONALITY_TOL) -> complex:
    if isinstance(g, TwoStateVector):
        g = g.as_generalized()
    return _weak(g, op, threshold)


def _distribution(selection: Selection, obs: Observable) -> Distribution:
    if isinstance(selection, GeneralizedTwoStateVector):
        return abl_probabilities_generalized(selection, obs)
    return abl_probabilities(selection, obs)


def weak_value_any(selection: Selection, op, threshold: float = ORTHOGONALITY_TOL) -> complex:
    if isinstance(selection, GeneralizedTwoStateVector):
        return weak_value_generalized(selection, op, threshold)
    return weak_value(selection, op, threshold)


@dataclass(frozen=True)
class CertaintyReport:
    label: str
    certain: bool
    value: Optional[float]
    probability: float


def element_of_reality(selection: Selection, obs: Observable, tol: float = CERTAINTY_TOL) -> CertaintyReport:
    outcome, prob = _distribution(selection, obs).most_likely()
    certain = prob >= 1.0 - tol
    return CertaintyReport(obs.label, certain, outcome if certain else None, prob)


@dataclass(frozen=True)
class ProductRuleReport:
    a: CertaintyReport
    b: CertaintyReport
    ab: CertaintyReport
    holds: Optional[bool]  # None unless A, B and AB are all certain

    @property
    def failed(self) -> bool:
        return self.holds is False


def product_rule_report(
    selection: Selection,
    obs_a: Observable,
    obs_b: Observable,
    tol: float = CERTAINTY_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> ProductRuleReport:
    product = obs_a.op @ obs_b.op
    if not product.hermitian:
        raise NotMeasurableError(f"{obs_a.label}*{obs_b.label} is not Hermitian; the product is not measurable")
    obs_ab = spectral_decompose(product, degeneracy_tol, label=f"{obs_a.label}*{obs_b.label}")

    a = element_of_reality(selection, obs_a, tol)
    b = element_of_reality(selection, obs_b, tol)
    ab = element_of_reality(selection, obs_ab, tol)
    holds = None
    if a.certain and b.certain and ab.certain:
        holds = abs(ab.value - a.value * b.value) <= 1e-9
    return ProductRuleReport(a, b, ab, holds)


@dataclass(frozen=True)
class HeisenbergReport:
    a: CertaintyReport
    b: CertaintyReport
    commute: bool
    violated: bool  # two noncommuting elements of reality


def heisenberg_report(selection: Selection, obs_a: Observable, obs_b: Observable, tol: float = CERTAINTY_TOL) -> HeisenbergReport:
    a = element_of_reality(selection, obs_a, tol)
    b = element_of_reality(selection, obs_b, tol)
    commutator = obs_a.op.matrix @ obs_b.op.matrix - obs_b.op.matrix @ obs_a.op.matrix
    commute = bool(np.max(np.abs(commutator)) <= 1e-10)
    return HeisenbergReport(a, b, commute, a.certain and b.certain and not commute)


@dataclass(frozen=True, eq=False)
class TwoTimeKernel:
    """
    K = sum_ij k_ij |i>_A <j|_B: forward-evolving particle A, backward-evolving
    particle B. Rows index A, columns index B.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(_matrix(self.matrix), dtype=complex)
        if m.ndim != 2 or m.size == 0:
            raise DimensionError(f"kernel must be a non-empty matrix, got shape {m.shape}")
        if not np.any(m):
            raise ZeroStateError("two-time kernel is zero")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim_a(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_b(self) -> int:
        return self.matrix.shape[1]


def _rank_one_vector(proj, dim: int) -> np.ndarray:
    p = _matrix(proj)
    if p.shape != (dim, dim):
        raise DimensionError(f"projector shape {p.shape} does not match dim {dim}")
    if np.max(np.abs(p @ p - p)) > 1e-9 or np.max(np.abs(p - p.conj().T)) > 1e-9 or abs(np.trace(p) - 1) > 1e-9:
        raise NotProjectorError("expected a rank-1 orthogonal projector")
    _, vectors = np.linalg.eigh(0.5 * (p + p.conj().T))
    return vectors[:, -1]


def two_time_joint(k: TwoTimeKernel, proj_a, proj_b) -> float:
    """Prob(a, b) = |<a|K|b>|^2 / sum_{a',b'} |<a'|K|b'>|^2."""
    a = _rank_one_vector(proj_a, k.dim_a)
    b = _rank_one_vector(proj_b, k.dim_b)
    # the denominator is basis independent: the Frobenius norm of K
    total = float(np.sum(np.abs(k.matrix) ** 2))
    if total <= NULL_TOL:
        raise NullEnsembleError("two-time kernel has zero normalization")
    return float(abs(np.vdot(a, k.matrix @ b)) ** 2 / total)


def two_time_distribution(k: TwoTimeKernel, obs_a: Observable, obs_b: Observable) -> Dict[Tuple[float, float], float]:
    """Joint outcome table; eigenspaces of any rank, weight ||P_a K P_b||^2."""
    if obs_a.dim != k.dim_a or obs_b.dim != k.dim_b:
        raise DimensionError("observable dims do not match the kernel")
    total = float(np.sum(np.abs(k.matrix) ** 2))
    table = {}
    for va, pa in obs_a.spectrum:
        for vb, pb in obs_b.spectrum:
            block = pa.matrix @ k.matrix @ pb.matrix
            table[(va, vb)] = float(np.sum(np.abs(block) ** 2)) / total
    return table


def same_outcome_probability(k: TwoTimeKernel, obs_a: Observable, obs_b: Observable, tol: float = 1e-9) -> float:
    return sum(p for (va, vb), p in two_time_distribution(k, obs_a, obs_b).items() if abs(va - vb) <= tol)
