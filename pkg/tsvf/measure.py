# tsvf/measure.py
"""
Measurement dynamics in standard (forward-only) quantum mechanics, used to
check the two-state calculus independently:

- ideal von Neumann measurement with collapse
- Monte Carlo of pre/post-selected ensembles (seeded, parallel, deterministic merge)
- exact conditional-probability oracle from two sequential Born rules
- Gaussian pointer coupled impulsively to an observable
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from tsvf.errors import ConfigError, DimensionError, NullEnsembleError, OrthogonalSelectionError
from tsvf.qcore import Bra, HamiltonianSchedule, Ket, Observable, evolve_forward, orthonormal_completion, propagator
from tsvf.tsv import (
    CERTAINTY_TOL,
    NULL_TOL,
    ORTHOGONALITY_TOL,
    CertaintyReport,
    Distribution,
    Selection,
    element_of_reality,
    weak_value_any,
)

log = logging.getLogger(__name__)

MIN_POINTS = 4096
HALF_RANGE_FACTOR = 10.0
# bumps this many sigma apart count as resolved
STRONG_SEPARATION = 8.0


def _check_dims(dim: int, obs: Observable):
    if dim != obs.dim:
        raise DimensionError(f"observable {obs.label!r} has dim {obs.dim}, state has dim {dim}")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome: float
    post_state: Ket
    probability: float


def born_probabilities(state: Ket, obs: Observable) -> np.ndarray:
    _check_dims(state.dim, obs)
    return np.array([np.linalg.norm(p.apply(state)) ** 2 for p in obs.projectors])


def ideal_measure(state: Ket, obs: Observable, rng: np.random.Generator) -> MeasurementRecord:
    _check_dims(state.dim, obs)
    collapsed = [p.apply(state) for p in obs.projectors]
    probs = np.array([np.vdot(v, v).real for v in collapsed])
    probs = probs / probs.sum()
    n = int(rng.choice(len(probs), p=probs))
    return MeasurementRecord(obs.eigenvalues[n], Ket(collapsed[n]), float(probs[n]))


def exact_conditional_oracle(pre: Ket, post: Bra, obs: Observable) -> Distribution:
    """p(o_n) * p(post | collapsed on o_n), normalized over n."""
    _check_dims(pre.dim, obs)
    joint = []
    for p in obs.projectors:
        collapsed = p.apply(pre)
        p_n = float(np.vdot(collapsed, collapsed).real)
        if p_n == 0.0:
            joint.append(0.0)
            continue
        p_post = abs(post.pair(collapsed / np.sqrt(p_n))) ** 2
        joint.append(p_n * p_post)
    if sum(joint) <= NULL_TOL:
        raise NullEnsembleError("no intermediate outcome is compatible with the post-selection")
    return Distribution.from_weights(obs.eigenvalues, joint)


def standard_abl_at_time(pre: Ket, post: Bra, schedule: HamiltonianSchedule, t: float, obs: Observable) -> Distribution:
    """
    The standard route to abl_at_time: every collapsed state is evolved on to
    schedule.stop and tested against the post-selection there.
    """
    state_t = evolve_forward(pre, schedule.window(schedule.start, t))
    u_rest = propagator(schedule.window(t, schedule.stop), pre.dim)
    joint = []
    for p in obs.projectors:
        collapsed = p.apply(state_t)
        joint.append(abs(post.pair(u_rest.apply(collapsed))) ** 2)
    if sum(joint) <= NULL_TOL:
        raise NullEnsembleError("no intermediate outcome is compatible with the post-selection")
    return Distribution.from_weights(obs.eigenvalues, joint)


@dataclass(frozen=True)
class MonteCarloReport:
    samples_total: int
    samples_postselected: int
    counts: Dict[float, int]
    conditional_frequencies: Dict[float, float]
    standard_errors: Dict[float, float]
    seed: int
    workers: int

    def frequency(self, outcome: float, tol: float = 1e-9) -> float:
        for o, f in self.conditional_frequencies.items():
            if abs(o - outcome) <= tol:
                return f
        raise KeyError(outcome)

    def z_scores(self, dist: Distribution) -> Dict[float, float]:
        return {
            o: (f - dist.probability(o)) / self.standard_errors[o]
            for o, f in self.conditional_frequencies.items()
        }


def _standard_error(k: int, n: int) -> float:
    p = k / n
    if k in (0, n):
        p = (k + 1) / (n + 2)
    return float(np.sqrt(p * (1 - p) / n))


def _run_trials(n: int, seed_seq: np.random.SeedSequence, born: np.ndarray, final_cdf: np.ndarray) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    outcomes = rng.choice(len(born), size=n, p=born)
    u = rng.random(n)
    kept = np.zeros(n, dtype=bool)
    for k in range(len(born)):
        idx = outcomes == k
        # complete final measurement; basis index 0 is the post-selected state
        final = np.searchsorted(final_cdf[k], u[idx], side="right")
        kept[idx] = final == 0
    return np.bincount(outcomes[kept], minlength=len(born))


def monte_carlo_abl(
    pre: Ket,
    post: Bra,
    obs: Observable,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> MonteCarloReport:
    """
    Prepare `pre`, measure `obs`, then measure in an orthonormal basis that
    contains `post`; keep the trial iff the post outcome occurs.

    Worker w runs n // workers trials (plus one for w < n % workers) on the
    stream SeedSequence(seed).spawn(workers)[w]; counts are merged by worker
    index, so (seed, workers) fixes the report bit for bit.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    _check_dims(pre.dim, obs)
    if post.dim != pre.dim:
        raise DimensionError(f"post dim {post.dim} != pre dim {pre.dim}")

    basis = orthonormal_completion(post)
    born = born_probabilities(pre, obs)
    born = born / born.sum()
    final_cdf = np.ones((len(born), pre.dim))
    for k, p in enumerate(obs.projectors):
        collapsed = p.apply(pre)
        norm = np.linalg.norm(collapsed)
        if norm > 0:
            final_cdf[k] = np.cumsum(np.abs(basis.conj().T @ (collapsed / norm)) ** 2)

    shares = [n_samples // workers + (1 if w < n_samples % workers else 0) for w in range(workers)]
    streams = np.random.SeedSequence(seed).spawn(workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_worker = list(pool.map(lambda w: _run_trials(shares[w], streams[w], born, final_cdf), range(workers)))

    counts = np.zeros(len(born), dtype=np.int64)
    for w, c in enumerate(per_worker):
        log.debug("worker %d: %d trials, %d kept", w, shares[w], int(c.sum()))
        counts += c

    kept = int(counts.sum())
    outcomes = obs.eigenvalues
    freqs, errors = {}, {}
    if kept > 0:
        freqs = {o: int(c) / kept for o, c in zip(outcomes, counts)}
        errors = {o: _standard_error(int(c), kept) for o, c in zip(outcomes, counts)}
    else:
        log.warning("no trial survived the post-selection (%d trials)", n_samples)
    log.info("monte carlo: %d trials, %d post-selected, seed %d, %d workers", n_samples, kept, seed, workers)
    return MonteCarloReport(
        samples_total=n_samples,
        samples_postselected=kept,
        counts={o: int(c) for o, c in zip(outcomes, counts)},
        conditional_frequencies=freqs,
        standard_errors=errors,
        seed=seed,
        workers=workers,
    )


@dataclass(frozen=True)
class PointerConfig:
    g: float
    sigma: float
    half_range: float
    points: int

    def __post_init__(self):
        if not self.g > 0:
            raise ConfigError(f"coupling g must be > 0, got {self.g}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if self.points < MIN_POINTS:
            raise ConfigError(f"pointer grid needs >= {MIN_POINTS} points, got {self.points}")

    @classmethod
    def auto(
        cls,
        g: float,
        sigma: float,
        eigenvalues,
        half_range_factor: float = HALF_RANGE_FACTOR,
        min_points: int = MIN_POINTS,
        points_per_sigma: int = 10,
    ) -> "PointerConfig":
        reach = max(abs(o) for o in eigenvalues)
        half_range = max(half_range_factor, HALF_RANGE_FACTOR) * (sigma + g * reach)
        points = max(min_points, MIN_POINTS, int(np.ceil(2 * half_range * points_per_sigma / sigma)) + 1)
        return cls(g=g, sigma=sigma, half_range=half_range, points=points)

    @property
    def spacing(self) -> float:
        return 2 * self.half_range / (self.points - 1)

    def validate(self, eigenvalues):
        need = HALF_RANGE_FACTOR * (self.sigma + self.g * max(abs(o) for o in eigenvalues))
        if self.half_range < need:
            raise ConfigError(f"half_range {self.half_range} < {need} required for g={self.g}, sigma={self.sigma}")
        if self.spacing > self.sigma / 4:
            raise ConfigError(f"grid spacing {self.spacing:.3g} does not resolve sigma={self.sigma}")

    def positions(self) -> np.ndarray:
        return np.linspace(-self.half_range, self.half_range, self.points)


@dataclass(frozen=True, eq=False)
class PointerResult:
    positions: np.ndarray
    density: np.ndarray
    mean_shift: float
    postselection_rate: float
    g: float


def _gaussian(q: np.ndarray, sigma: float) -> np.ndarray:
    return (np.pi * sigma ** 2) ** -0.25 * np.exp(-(q ** 2) / (2 * sigma ** 2))


def weak_measure_pointer(
    selection: Selection,
    obs: Observable,
    cfg: PointerConfig,
    allow_orthogonal: bool = False,
    threshold: float = ORTHOGONALITY_TOL,
) -> PointerResult:
    """
    Conditional pointer wavefunction phi(q) = sum_n <phi|P_n|psi> G(q - g o_n)
    after an impulsive coupling that translates the pointer by g * o_n.
    """
    _check_dims(selection.dim, obs)
    cfg.validate(obs.eigenvalues)
    scale = selection.scale
    if not allow_orthogonal and abs(selection.overlap) <= threshold * scale:
        raise OrthogonalSelectionError(
            f"normalized overlap |<phi|psi>| = {abs(selection.overlap) / scale:.3e}; weak value undefined"
        )

    q = cfg.positions()
    phi = np.zeros_like(q, dtype=complex)
    for value, p in obs.spectrum:
        phi += selection.amplitude(p) * _gaussian(q - cfg.g * value, cfg.sigma)

    raw = np.abs(phi) ** 2
    norm = float(trapezoid(raw, q))
    # relative to (sum_i |alpha_i|)^2; a plain two-state vector has scale 1
    rate = norm / scale ** 2
    if rate <= NULL_TOL:
        raise NullEnsembleError("pointer wavefunction vanishes after post-selection")
    density = raw / norm
    mean = float(trapezoid(q * density, q))
    return PointerResult(positions=q, density=density, mean_shift=mean, postselection_rate=min(rate, 1.0), g=cfg.g)


def is_strong_regime(cfg: PointerConfig, obs: Observable) -> bool:
    values = np.asarray(obs.eigenvalues)
    if len(values) < 2:
        return True
    return bool(cfg.g * np.min(np.diff(values)) >= STRONG_SEPARATION * cfg.sigma)


def bump_masses(result: PointerResult, obs: Observable) -> Dict[float, float]:
    """Pointer mass around each g * o_n, split at the midpoints between centers."""
    centers = result.g * np.asarray(obs.eigenvalues)
    cuts = 0.5 * (centers[1:] + centers[:-1])
    cdf = cumulative_trapezoid(result.density, result.positions, initial=0.0)
    edges = np.concatenate([[0.0], np.interp(cuts, result.positions, cdf), [cdf[-1]]])
    return {o: float(m) for o, m in zip(obs.eigenvalues, np.diff(edges))}


def write_pointer_csv(result: PointerResult, path: str):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["position", "density"])
        for q, d in zip(result.positions, result.density):
            writer.writerow([repr(float(q)), repr(float(d))])


@dataclass(frozen=True)
class ConsistencyReport:
    certainty: CertaintyReport
    weak_value: complex
    strong_implies_weak: Optional[bool]  # None when no outcome is certain
    weak_implies_strong: Optional[bool]  # None unless dichotomic and O_w hits an eigenvalue

    @property
    def passed(self) -> bool:
        return self.strong_implies_weak is not False and self.weak_implies_strong is not False


def strong_weak_consistency(
    selection: Selection,
    obs: Observable,
    tol: float = CERTAINTY_TOL,
    weak_tol: float = 1e-10,
) -> ConsistencyReport:
    cert = element_of_reality(selection, obs, tol)
    w = weak_value_any(selection, obs.op)

    strong_implies_weak = None
    if cert.certain:
        strong_implies_weak = abs(w - cert.value) <= weak_tol

    weak_implies_strong = None
    if obs.dichotomic:
        hit = [o for o in obs.eigenvalues if abs(w - o) <= weak_tol]
        if hit:
            weak_implies_strong = cert.certain and abs(cert.value - hit[0]) <= 1e-9

    report = ConsistencyReport(cert, w, strong_implies_weak, weak_implies_strong)
    if not report.passed:
        log.warning("strong/weak mismatch for %s: certainty %s, weak value %s", obs.label, cert, w)
    return report
