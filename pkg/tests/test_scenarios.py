import json

import numpy as np
import pytest

from tsvf.config import Config
from tsvf.errors import SearchFailedError
from tsvf.qcore import pauli, spectral_decompose
from tsvf.scenarios import (
    MEAN_KING_PRE,
    SCENARIOS,
    Provenance,
    _matches,
    build_scenario,
    find_mean_king_basis,
    mean_king_post_state,
    run_scenario,
    scenario_correlated_pair,
    to_plain,
)
from tsvf.tsv import element_of_reality, gtsv_from_ancilla, weak_value

SMALL = Config(monte_carlo={"samples": 20_000, "workers": 2}, scenarios={"directions": 40})
FULL = Config(monte_carlo={"samples": 100_000, "workers": 4})


@pytest.mark.parametrize("name", list(SCENARIOS))
def test_every_scenario_passes(name):
    report = run_scenario(build_scenario(name, SMALL))
    failed = [r.description for r in report.results if not r.passed]
    assert report.passed, failed
    assert report.scenario == name
    assert all(isinstance(r.provenance, Provenance) for r in report.results)


@pytest.mark.parametrize("name", list(SCENARIOS))
def test_every_scenario_passes_at_full_sample_size(name):
    report = run_scenario(build_scenario(name, FULL))
    assert report.passed, [r.description for r in report.results if not r.passed]


@pytest.mark.parametrize("name", list(SCENARIOS))
def test_reports_are_deterministic(name):
    first = run_scenario(build_scenario(name, SMALL)).as_dict()
    second = run_scenario(build_scenario(name, SMALL)).as_dict()
    assert first == second


def test_report_dict_is_json_ready():
    doc = run_scenario(build_scenario("spin-xz", SMALL)).as_dict()
    text = json.dumps(doc)
    assert '"provenance": "PUBLISHED"' in text
    weak_y = next(c for c in doc["checks"] if "sigma_y is i" in c["description"])
    assert weak_y["expected"] == [0.0, 1.0]


def test_unknown_scenario():
    with pytest.raises(KeyError):
        build_scenario("five-box")


def test_build_scenario_uses_config():
    scenario = build_scenario("correlated-pair", Config(scenarios={"directions": 3}))
    assert any("3 random directions" in c.description for c in scenario.checks)


def test_spin_box_weak_value_of_b_up():
    scenario = build_scenario("spin-box", SMALL)
    tsv = scenario.selections[0]
    assert weak_value(tsv, scenario.observables["P_B_up"]) == pytest.approx(-1.0, abs=1e-12)


def test_mean_king_basis_value_table():
    basis = find_mean_king_basis()
    assert len(basis) == 4
    patterns = {signs for signs, _ in basis}
    assert patterns == {(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)}
    sigmas = [spectral_decompose(pauli(a)) for a in "xyz"]
    for signs, post in basis:
        g = gtsv_from_ancilla(MEAN_KING_PRE, post, 2, 2)
        values = tuple(element_of_reality(g, s).value for s in sigmas)
        assert values == pytest.approx(tuple(float(s) for s in signs))


def test_mean_king_wrong_sign_pattern_is_not_orthogonal():
    a = mean_king_post_state((1, 1, 1))
    b = mean_king_post_state((1, 1, -1))
    assert abs(np.vdot(a.amplitudes, b.amplitudes)) > 0.1


def test_mean_king_search_fails_when_nothing_can_be_certain():
    with pytest.raises(SearchFailedError):
        find_mean_king_basis(tol=-1.0)


def test_correlated_pair_negative_control_detected():
    report = run_scenario(scenario_correlated_pair(directions=10, seed=1))
    control = next(r for r in report.results if r.provenance is Provenance.DERIVED)
    assert control.actual is True


def test_to_plain():
    assert to_plain({1.0: (1j, np.float64(2.5))}) == {"1.0": [[0.0, 1.0], 2.5]}
    assert to_plain(np.array([1, 2])) == [1, 2]
    assert to_plain(Provenance.PUBLISHED) == "PUBLISHED"
    assert to_plain(None) is None


@pytest.mark.parametrize(
    "expected, actual, tol, ok",
    [
        (1.0, 1.0 + 1e-11, 1e-10, True),
        (1.0, 1.1, 1e-10, False),
        (True, True, 0.0, True),
        (1.0, True, 1e-10, False),
        ((True, 1.0), (True, 1.0), 0.0, True),
        ((True, 1.0), (True, None), 0.0, False),
        ({1: (1.0,)}, {1: (1.0,)}, 0.0, True),
        ({1: (1.0,)}, {2: (1.0,)}, 0.0, False),
        (1j, 1j, 1e-12, True),
        ((1.0, 2.0), (1.0,), 1.0, False),
    ],
)
def test_matches(expected, actual, tol, ok):
    assert _matches(expected, actual, tol) is ok

