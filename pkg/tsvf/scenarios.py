# tsvf/scenarios.py
"""
Worked pre/post-selection systems as self-checking scenario definitions.

A scenario is data plus deferred checks; run_scenario evaluates every check
and reports expected vs actual with a provenance tag:

    PUBLISHED  a published value for this textbook system
    DERIVED    the value follows from evaluating the formulas (or an oracle)
    TRIVIAL    bookkeeping identity
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from numbers import Number
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from tsvf.errors import SearchFailedError
from tsvf.measure import monte_carlo_abl, strong_weak_consistency
from tsvf.qcore import (
    Bra,
    Ket,
    Operator,
    basis_ket,
    identity,
    pauli,
    projector,
    spectral_decompose,
    spin_along,
    tensor,
)
from tsvf.tsv import (
    GeneralizedTwoStateVector,
    TwoStateVector,
    TwoTimeKernel,
    abl_probabilities,
    abl_probabilities_generalized,
    element_of_reality,
    gtsv_from_ancilla,
    heisenberg_report,
    product_rule_report,
    same_outcome_probability,
    two_time_joint,
    weak_value,
    weak_value_generalized,
)

log = logging.getLogger(__name__)

MC_SAMPLES = 100_000
MC_SEED = 20240607
Z_LIMIT = 5.0


class Provenance(str, Enum):
    PUBLISHED = "PUBLISHED"
    DERIVED = "DERIVED"
    TRIVIAL = "TRIVIAL"


@dataclass(frozen=True)
class Check:
    description: str
    anchor: str
    provenance: Provenance
    expected: Any
    evaluate: Callable[[], Any] = field(repr=False)
    tol: float = 1e-10


@dataclass(frozen=True)
class SystemSpec:
    dims: Tuple[int, ...]
    labels: Tuple[str, ...]


Selection = Union[TwoStateVector, GeneralizedTwoStateVector, TwoTimeKernel]


@dataclass(frozen=True)
class Scenario:
    name: str
    title: str
    system: SystemSpec
    selections: Tuple[Selection, ...]
    observables: Dict[str, Operator]
    checks: Tuple[Check, ...]


@dataclass(frozen=True)
class CheckResult:
    description: str
    anchor: str
    provenance: Provenance
    expected: Any
    actual: Any
    passed: bool


@dataclass(frozen=True)
class Report:
    scenario: str
    results: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "checks": [
                {
                    "description": r.description,
                    "anchor": r.anchor,
                    "provenance": r.provenance.value,
                    "expected": to_plain(r.expected),
                    "actual": to_plain(r.actual),
                    "passed": r.passed,
                }
                for r in self.results
            ],
        }


def to_plain(value):
    """JSON-friendly copy: complex -> [re, im], tuples -> lists, float keys -> str."""
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Number):
        return float(value) if not isinstance(value, int) else value
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (tuple, list, np.ndarray)):
        return [to_plain(v) for v in value]
    return str(value)


def _matches(expected, actual, tol: float) -> bool:
    if isinstance(expected, (bool, str)) or expected is None:
        return expected == actual
    if isinstance(expected, Number):
        if not isinstance(actual, Number) or isinstance(actual, bool):
            return False
        return abs(complex(actual) - complex(expected)) <= tol
    if isinstance(expected, dict):
        return isinstance(actual, dict) and expected.keys() == actual.keys() and all(
            _matches(expected[k], actual[k], tol) for k in expected
        )
    if isinstance(expected, (tuple, list)):
        return (
            isinstance(actual, (tuple, list))
            and len(expected) == len(actual)
            and all(_matches(e, a, tol) for e, a in zip(expected, actual))
        )
    return expected == actual


def run_scenario(s: Scenario) -> Report:
    results = []
    for check in s.checks:
        actual = check.evaluate()
        ok = _matches(check.expected, actual, check.tol)
        log.debug("%s: %s -> %s (%s)", s.name, check.description, actual, "ok" if ok else "FAIL")
        results.append(CheckResult(check.description, check.anchor, check.provenance, check.expected, actual, ok))
    report = Report(s.name, tuple(results))
    log.info("scenario %s: %d checks, %s", s.name, len(results), "passed" if report.passed else "FAILED")
    return report


def _certainty(selection, obs) -> Tuple[bool, Optional[float]]:
    r = element_of_reality(selection, obs)
    return r.certain, r.value


def _max_abs_z(tsv: TwoStateVector, obs, samples: int, seed: int, workers: int) -> float:
    report = monte_carlo_abl(tsv.forward, tsv.backward, obs, samples, seed, workers)
    z = report.z_scores(abl_probabilities(tsv, obs))
    return max(abs(v) for v in z.values())


def _mc_frequency(tsv: TwoStateVector, obs, outcome: float, samples: int, seed: int, workers: int) -> float:
    report = monte_carlo_abl(tsv.forward, tsv.backward, obs, samples, seed, workers)
    return report.frequency(outcome)


def _diagonal_projectors(dim: int, names) -> Dict[str, Operator]:
    return {name: projector(basis_ket(dim, i)) for i, name in enumerate(names)}


def scenario_spin_box(samples: int = MC_SAMPLES, seed: int = MC_SEED, workers: int = 1) -> Scenario:
    """
    Spin-1/2 particle in two boxes A and B. Basis (A up, A down, B up, B down);
    the selections have no support on (B, down).
    """
    box = {"A": basis_ket(2, 0), "B": basis_ket(2, 1)}
    spin = {"up": basis_ket(2, 0), "down": basis_ket(2, 1)}
    ops = {
        f"P_{b}_{s}": tensor(projector(box[b]), projector(spin[s]))
        for b in ("A", "B")
        for s in ("up", "down")
    }
    ops["identity"] = identity(4)
    obs = {name: spectral_decompose(op, label=name) for name, op in ops.items()}

    tsv = TwoStateVector(Bra([1, 1, -1, 0]), Ket([1, 1, 1, 0]))

    # the same selection on the 3-dim support (A up, A down, B up)
    small = TwoStateVector(Bra([1, 1, -1]), Ket([1, 1, 1]))
    small_obs = {
        name: spectral_decompose(op, label=name)
        for name, op in _diagonal_projectors(3, ("P_A_up", "P_A_down", "P_B_up")).items()
    }

    def product():
        return product_rule_report(tsv, obs["P_A_up"], obs["P_A_down"])

    def support_subspace():
        return (
            _certainty(small, small_obs["P_A_up"]),
            _certainty(small, small_obs["P_A_down"]),
            weak_value(small, small_obs["P_B_up"].op),
        )

    checks = (
        Check("P_A_up is certain with value 1", "particle in box A with spin up", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["P_A_up"])),
        Check("P_A_down is certain with value 1", "other projection also certain", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["P_A_down"])),
        Check("P_A_up * P_A_down is certain with value 0", "product of the projections", Provenance.PUBLISHED,
              (True, 0.0), lambda: (product().ab.certain, product().ab.value)),
        Check("product rule fails", "failure of the product rule", Provenance.PUBLISHED,
              True, lambda: product().failed),
        Check("weak value of P_B_up is -1", "weak value outside the spectrum", Provenance.DERIVED,
              -1.0, lambda: weak_value(tsv, ops["P_B_up"]), tol=1e-12),
        Check("projector weak values sum to 1", "completeness", Provenance.TRIVIAL,
              1.0, lambda: sum(weak_value(tsv, ops[n]) for n in ("P_A_up", "P_A_down", "P_B_up", "P_B_down")),
              tol=1e-12),
        Check("strong and weak values agree for P_A_up", "strong/weak consistency", Provenance.DERIVED,
              True, lambda: strong_weak_consistency(tsv, obs["P_A_up"]).passed),
        Check("3-dim support subspace gives the same certainties and weak value", "dimension independence",
              Provenance.DERIVED, ((True, 1.0), (True, 1.0), -1.0), support_subspace, tol=1e-12),
        Check("Monte Carlo: every post-selected trial finds P_A_up = 1", "conditional ensemble",
              Provenance.DERIVED, 1.0, lambda: _mc_frequency(tsv, obs["P_A_up"], 1.0, samples, seed, workers), tol=0.0),
        Check(f"Monte Carlo: P_B_up frequencies within {Z_LIMIT:g} standard errors", "conditional ensemble",
              Provenance.DERIVED, True, lambda: _max_abs_z(tsv, obs["P_B_up"], samples, seed, workers) <= Z_LIMIT),
    )
    return Scenario(
        name="spin-box",
        title="spin-1/2 particle in two boxes",
        system=SystemSpec(dims=(2, 2), labels=("A,up", "A,down", "B,up", "B,down")),
        selections=(tsv,),
        observables=ops,
        checks=checks,
    )


def scenario_three_box(samples: int = MC_SAMPLES, seed: int = MC_SEED, workers: int = 1) -> Scenario:
    ops = _diagonal_projectors(3, ("P_A", "P_B", "P_C"))
    ops["identity"] = identity(3)
    obs = {name: spectral_decompose(op, label=name) for name, op in ops.items()}
    tsv = TwoStateVector(Bra([1, 1, -1]), Ket([1, 1, 1]))

    checks = (
        Check("P_A is certain with value 1", "found with certainty in box A", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["P_A"])),
        Check("P_B is certain with value 1", "and in box B if searched there instead", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["P_B"])),
        Check("weak value of P_C is -1", "negative weak occupation", Provenance.DERIVED,
              -1.0, lambda: weak_value(tsv, ops["P_C"]), tol=1e-12),
        Check("projector weak values sum to 1", "completeness", Provenance.TRIVIAL,
              1.0, lambda: sum(weak_value(tsv, ops[n]) for n in ("P_A", "P_B", "P_C")), tol=1e-12),
        Check("Monte Carlo: every post-selected trial finds P_A = 1", "conditional ensemble", Provenance.DERIVED,
              1.0, lambda: _mc_frequency(tsv, obs["P_A"], 1.0, samples, seed, workers), tol=0.0),
        Check("Monte Carlo: every post-selected trial finds P_B = 1", "conditional ensemble", Provenance.DERIVED,
              1.0, lambda: _mc_frequency(tsv, obs["P_B"], 1.0, samples, seed + 1, workers), tol=0.0),
        Check(f"Monte Carlo: P_C frequencies within {Z_LIMIT:g} standard errors", "conditional ensemble",
              Provenance.DERIVED, True, lambda: _max_abs_z(tsv, obs["P_C"], samples, seed + 2, workers) <= Z_LIMIT),
    )
    return Scenario(
        name="three-box",
        title="three-box system",
        system=SystemSpec(dims=(3,), labels=("A", "B", "C")),
        selections=(tsv,),
        observables=ops,
        checks=checks,
    )


def scenario_spin_xz(samples: int = MC_SAMPLES, seed: int = MC_SEED, workers: int = 1) -> Scenario:
    """sigma_z = +1 pre-selected, sigma_x = +1 post-selected, no field."""
    ops = {f"sigma_{a}": pauli(a) for a in "xyz"}
    ops["sigma_45"] = spin_along((1.0, 0.0, 1.0))
    obs = {name: spectral_decompose(op, label=name) for name, op in ops.items()}
    tsv = TwoStateVector(Bra([1, 1]), Ket([1, 0]))

    checks = (
        Check("sigma_z is certain with value +1", "pre-selected sigma_z, post-selected sigma_x", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["sigma_z"])),
        Check("sigma_x is certain with value +1", "pre-selected sigma_z, post-selected sigma_x", Provenance.PUBLISHED,
              (True, 1.0), lambda: _certainty(tsv, obs["sigma_x"])),
        Check("two noncommuting elements of reality", "uncertainty relation does not hold", Provenance.PUBLISHED,
              True, lambda: heisenberg_report(tsv, obs["sigma_z"], obs["sigma_x"]).violated),
        Check("strong and weak values agree for sigma_z", "strong/weak consistency", Provenance.TRIVIAL,
              True, lambda: strong_weak_consistency(tsv, obs["sigma_z"]).passed),
        Check("weak value of sigma_y is i", "complex weak value", Provenance.DERIVED,
              1j, lambda: weak_value(tsv, ops["sigma_y"]), tol=1e-12),
        Check("weak value of spin at 45 degrees is sqrt(2)", "weak value outside the spectrum", Provenance.DERIVED,
              float(np.sqrt(2)), lambda: weak_value(tsv, ops["sigma_45"]), tol=1e-12),
        Check("Monte Carlo: every post-selected trial finds sigma_z = +1", "conditional ensemble", Provenance.DERIVED,
              1.0, lambda: _mc_frequency(tsv, obs["sigma_z"], 1.0, samples, seed, workers), tol=0.0),
        Check(f"Monte Carlo: sigma_y frequencies within {Z_LIMIT:g} standard errors", "conditional ensemble",
              Provenance.DERIVED, True, lambda: _max_abs_z(tsv, obs["sigma_y"], samples, seed + 1, workers) <= Z_LIMIT),
    )
    return Scenario(
        name="spin-xz",
        title="spin-1/2 between sigma_z and sigma_x selections",
        system=SystemSpec(dims=(2,), labels=("up", "down")),
        selections=(tsv,),
        observables=ops,
        checks=checks,
    )


MEAN_KING_PRE = Ket([1, 0, 0, 1])  # (|up,up> + |down,down>)/sqrt(2), system (x) ancilla


def mean_king_post_state(signs) -> Bra:
    """Joint post-selection C = (I + s.sigma)/(2 sqrt 2), row-major system (x) ancilla."""
    c = np.eye(2, dtype=complex) + sum(s * pauli(a).matrix for s, a in zip(signs, "xyz"))
    return Bra(c.reshape(-1) / (2 * np.sqrt(2)))


def _dispersion_free(g: GeneralizedTwoStateVector, obs, tol: float = 1e-10) -> Optional[float]:
    r = element_of_reality(g, obs, tol)
    return r.value if r.certain else None


def find_mean_king_basis(tol: float = 1e-10):
    """
    Search sign patterns s in {+1,-1}^3 for four mutually orthonormal post
    states whose induced generalized two-state vectors make sigma_x, sigma_y
    and sigma_z all dispersion-free. Returns [(signs, post), ...].
    """
    sigmas = [spectral_decompose(pauli(a), label=f"sigma_{a}") for a in "xyz"]
    patterns = list(itertools.product((1, -1), repeat=3))
    for quad in itertools.combinations(patterns, 4):
        posts = [mean_king_post_state(s) for s in quad]
        gram = np.array([[np.vdot(a.amplitudes, b.amplitudes) for b in posts] for a in posts])
        if np.max(np.abs(gram - np.eye(4))) > 1e-12:
            continue
        ok = True
        for signs, post in zip(quad, posts):
            g = gtsv_from_ancilla(MEAN_KING_PRE, post, 2, 2)
            values = [_dispersion_free(g, s, tol) for s in sigmas]
            if any(v is None for v in values):
                ok = False
                break
        if ok:
            log.info("mean king basis: sign patterns %s", quad)
            return list(zip(quad, posts))
    raise SearchFailedError("no post-selection basis makes sigma_x, sigma_y, sigma_z dispersion-free")


def scenario_mean_king(samples: int = MC_SAMPLES, seed: int = MC_SEED, workers: int = 1) -> Scenario:
    basis = find_mean_king_basis()
    sigma_ops = {f"sigma_{a}": pauli(a) for a in "xyz"}
    sigmas = {name: spectral_decompose(op, label=name) for name, op in sigma_ops.items()}
    gtsvs = tuple(gtsv_from_ancilla(MEAN_KING_PRE, post, 2, 2) for _, post in basis)

    def orthonormal():
        vecs = np.column_stack([post.amplitudes for _, post in basis])
        return bool(np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-12))

    def value_table():
        return {
            i + 1: tuple(element_of_reality(g, sigmas[f"sigma_{a}"]).value for a in "xyz")
            for i, g in enumerate(gtsvs)
        }

    def weak_table():
        return {
            i + 1: tuple(weak_value_generalized(g, sigma_ops[f"sigma_{a}"]) for a in "xyz")
            for i, g in enumerate(gtsvs)
        }

    def joint_matches_generalized():
        # generalized ABL against the joint system with sigma (x) I
        worst = 0.0
        for g, (_, post) in zip(gtsvs, basis):
            joint = TwoStateVector(post, MEAN_KING_PRE)
            for op in sigma_ops.values():
                lifted = spectral_decompose(tensor(op, identity(2)))
                a = abl_probabilities(joint, lifted).probabilities
                b = abl_probabilities_generalized(g, spectral_decompose(op)).probabilities
                worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    def mc_joint_frequency():
        post = basis[0][1]
        lifted = spectral_decompose(tensor(pauli("z"), identity(2)), label="sigma_z (x) I")
        report = monte_carlo_abl(MEAN_KING_PRE, post, lifted, samples, seed, workers)
        return report.frequency(float(basis[0][0][2]))

    expected_table = {i + 1: tuple(float(s) for s in signs) for i, (signs, _) in enumerate(basis)}
    checks = [
        Check("post-selection basis is orthonormal", "complete post-selection measurement", Provenance.DERIVED,
              True, orthonormal),
    ]
    for i, g in enumerate(gtsvs):
        for a in "xyz":
            checks.append(
                Check(f"outcome {i + 1}: sigma_{a} is dispersion-free", "many noncommuting dispersion-free observables",
                      Provenance.DERIVED, True,
                      lambda g=g, a=a: element_of_reality(g, sigmas[f"sigma_{a}"]).certain)
            )
    checks += [
        Check("value table (outcome -> sigma_x, sigma_y, sigma_z)", "mean king problem", Provenance.DERIVED,
              expected_table, value_table),
        Check("generalized weak values equal the certain values", "strong/weak consistency", Provenance.DERIVED,
              {k: tuple(complex(v) for v in vals) for k, vals in expected_table.items()}, weak_table, tol=1e-10),
        Check("generalized ABL equals joint-system ABL", "ancilla reduction", Provenance.DERIVED,
              0.0, joint_matches_generalized, tol=1e-12),
        Check("Monte Carlo on the joint system: outcome 1 always shows its sigma_z value", "conditional ensemble",
              Provenance.DERIVED, 1.0, mc_joint_frequency, tol=1e-12),
    ]
    return Scenario(
        name="mean-king",
        title="spin-1/2 with an entangled ancilla",
        system=SystemSpec(dims=(2, 2), labels=("up,up", "up,down", "down,up", "down,down")),
        selections=gtsvs,
        observables=sigma_ops,
        checks=tuple(checks),
    )


CORRELATED_KERNEL = TwoTimeKernel(np.eye(2) / np.sqrt(2))
# diagonal but not proportional to the identity: correlated along z only
CONTROL_KERNEL = TwoTimeKernel(np.diag([1.0, 0.5]))


def scenario_correlated_pair(directions: int = 100, seed: int = 7) -> Scenario:
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(directions, 3))
    up, down = projector(basis_ket(2, 0)), projector(basis_ket(2, 1))
    sz = spectral_decompose(pauli("z"), label="sigma_z")

    def worst_direction(kernel: TwoTimeKernel) -> float:
        worst = 1.0
        for n in dirs:
            obs = spectral_decompose(spin_along(n))
            worst = min(worst, same_outcome_probability(kernel, obs, obs))
        return worst

    def control_fails():
        sx = spectral_decompose(pauli("x"))
        if same_outcome_probability(CONTROL_KERNEL, sx, sx) < 1 - 1e-6:
            return True
        return worst_direction(CONTROL_KERNEL) < 1 - 1e-6

    checks = (
        Check("sigma_z on both particles agrees with probability 1", "same result for both particles",
              Provenance.PUBLISHED, 1.0,
              lambda: two_time_joint(CORRELATED_KERNEL, up, up) + two_time_joint(CORRELATED_KERNEL, down, down),
              tol=1e-12),
        Check(f"spin along {directions} random directions agrees with probability 1", "in any direction",
              Provenance.PUBLISHED, 1.0, lambda: worst_direction(CORRELATED_KERNEL), tol=1e-12),
        Check("same-outcome probability along z via joint table", "same result for both particles",
              Provenance.TRIVIAL, 1.0, lambda: same_outcome_probability(CORRELATED_KERNEL, sz, sz), tol=1e-12),
        Check("rank-1 kernel |up><up| gives Prob(up, up) = 1", "rank-1 kernel", Provenance.TRIVIAL,
              1.0, lambda: two_time_joint(TwoTimeKernel(up.matrix), up, up), tol=1e-12),
        Check("a kernel not proportional to the identity fails for some direction", "negative control",
              Provenance.DERIVED, True, control_fails),
    )
    return Scenario(
        name="correlated-pair",
        title="forward/backward correlated spin pair",
        system=SystemSpec(dims=(2, 2), labels=("A", "B")),
        selections=(CORRELATED_KERNEL,),
        observables={"sigma_x": pauli("x"), "sigma_y": pauli("y"), "sigma_z": pauli("z")},
        checks=checks,
    )


SCENARIOS = {
    "spin-box": scenario_spin_box,
    "three-box": scenario_three_box,
    "spin-xz": scenario_spin_xz,
    "mean-king": scenario_mean_king,
    "correlated-pair": scenario_correlated_pair,
}


def build_scenario(name: str, cfg=None) -> Scenario:
    """Build a scenario by CLI name; Monte Carlo and direction settings come from cfg."""
    if name not in SCENARIOS:
        raise KeyError(name)
    if cfg is None:
        return SCENARIOS[name]()
    if name == "correlated-pair":
        return scenario_correlated_pair(directions=cfg.directions, seed=cfg.scenario_seed)
    return SCENARIOS[name](samples=cfg.mc_samples, seed=cfg.mc_seed, workers=cfg.mc_workers)
