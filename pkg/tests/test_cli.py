import csv
import json

import pytest

from helpers import fixture_path
from tsvf.cli import EXIT_FAILED, EXIT_NO_SAMPLES, EXIT_NULL_ENSEMBLE, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "monte_carlo:\n  samples: 20000\n  workers: 2\n  seed: 99\n"
        "scenarios:\n  directions: 30\n"
    )
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_scenario_table(capsys, small_config):
    code, out, _ = run(capsys, "--config", small_config, "run", "spin-box")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "scenario spin-box: PASS"
    assert "[PUBLISHED]" in out


def test_run_scenario_json(capsys, small_config):
    code, out, _ = run(capsys, "--config", small_config, "run", "three-box", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["passed"] is True
    checks = doc["reports"][0]["checks"]
    assert {c["provenance"] for c in checks} >= {"PUBLISHED", "DERIVED", "TRIVIAL"}


def test_run_all(capsys, small_config):
    code, out, _ = run(capsys, "--config", small_config, "run", "all")
    assert code == EXIT_OK
    assert [line for line in out.splitlines() if line.startswith("scenario ")] == [
        f"scenario {name}: PASS" for name in ("spin-box", "three-box", "spin-xz", "mean-king", "correlated-pair")
    ]


def test_run_unknown_scenario(capsys):
    code, _, err = run(capsys, "run", "nosuch")
    assert code == EXIT_USAGE
    assert "unknown scenario" in err


def test_abl_certain_outcome(capsys):
    code, out, _ = run(capsys, "abl", "--file", fixture_path("spin_box.json"), "--observable", "P_A_up")
    assert code == EXIT_OK
    assert out.splitlines() == ["0: 0.0", "1: 1.0"]


def test_abl_pre_selected_eigenstate(capsys):
    code, out, _ = run(capsys, "abl", "--file", fixture_path("eigenstate.json"), "--observable", "sigma_z")
    assert code == EXIT_OK
    assert out.splitlines() == ["-1: 0.0", "1: 1.0"]


def test_abl_null_ensemble(capsys):
    code, _, err = run(capsys, "abl", "--file", fixture_path("orthogonal.json"), "--observable", "sigma_z")
    assert code == EXIT_NULL_ENSEMBLE
    assert err.startswith("error:")


def test_abl_json(capsys):
    code, out, _ = run(
        capsys, "abl", "--file", fixture_path("three_box.json"), "--observable", "P_C", "--format", "json"
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["observable"] == "P_C"
    assert [o for o, _ in doc["distribution"]] == [0.0, 1.0]
    assert [p for _, p in doc["distribution"]] == pytest.approx([0.8, 0.2])


def test_abl_at_intermediate_time(capsys):
    code, out, _ = run(
        capsys, "abl", "--file", fixture_path("spin_xz_timed.json"), "--observable", "sigma_x", "--time", "1.0"
    )
    assert code == EXIT_OK
    assert out.splitlines() == ["-1: 0.0", "1: 1.0"]


def test_abl_time_needs_hamiltonian(capsys):
    code, _, err = run(
        capsys, "abl", "--file", fixture_path("spin_box.json"), "--observable", "P_A_up", "--time", "0.5"
    )
    assert code == EXIT_USAGE
    assert "hamiltonian" in err


def test_abl_unknown_observable(capsys):
    code, _, _ = run(capsys, "abl", "--file", fixture_path("spin_box.json"), "--observable", "P_C")
    assert code == EXIT_USAGE


def test_abl_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "abl", "--file", str(tmp_path / "nope.json"), "--observable", "x")
    assert code == EXIT_USAGE


def test_weak_value_outside_spectrum(capsys):
    code, out, _ = run(capsys, "weak", "--file", fixture_path("three_box.json"), "--observable", "P_C")
    assert code == EXIT_OK
    assert out.strip() == "-1.0 + 0.0i"


def test_weak_value_of_identity(capsys):
    code, out, _ = run(capsys, "weak", "--file", fixture_path("three_box.json"), "--observable", "identity")
    assert code == EXIT_OK
    assert out.strip() == "1.0 + 0.0i"


def test_weak_value_orthogonal_selection(capsys):
    code, _, _ = run(capsys, "weak", "--file", fixture_path("orthogonal.json"), "--observable", "sigma_x")
    assert code == EXIT_NULL_ENSEMBLE


def test_verify_certain_outcome(capsys):
    code, out, _ = run(
        capsys, "verify", "--file", fixture_path("spin_box.json"), "--observable", "P_A_up", "--samples", "5000"
    )
    assert code == EXIT_OK
    assert "post-selected" in out.splitlines()[0]


def test_verify_random_problem_json(capsys):
    code, out, _ = run(
        capsys, "verify", "--file", fixture_path("random3.json"), "--observable", "H",
        "--samples", "40000", "--seed", "5", "--workers", "3", "--format", "json",
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["workers"] == 3
    assert doc["samples_total"] == 40000
    assert sum(row["frequency"] for row in doc["outcomes"]) == pytest.approx(1.0)
    assert all(abs(row["z"]) <= 5 for row in doc["outcomes"])


def test_verify_is_reproducible(capsys):
    argv = ("verify", "--file", fixture_path("random3.json"), "--observable", "H", "--samples", "3000", "--seed", "1")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_verify_impossible_post_selection(capsys):
    code, _, err = run(
        capsys, "verify", "--file", fixture_path("impossible.json"), "--observable", "levels", "--samples", "1000"
    )
    assert code == EXIT_NO_SAMPLES
    assert "no post-selected samples" in err


def test_verify_tight_threshold_fails(capsys, tmp_path):
    path = tmp_path / "strict.yaml"
    path.write_text("monte_carlo:\n  z_threshold: 0.0\n")
    code, _, _ = run(
        capsys, "--config", str(path), "verify", "--file", fixture_path("random3.json"), "--observable", "H",
        "--samples", "2000",
    )
    assert code == EXIT_FAILED


@pytest.mark.parametrize("flag", ["--samples", "--workers"])
def test_verify_rejects_non_positive_counts(capsys, flag):
    code, _, _ = run(capsys, "verify", "--file", fixture_path("random3.json"), "--observable", "H", flag, "0")
    assert code == EXIT_USAGE


def test_pointer_weak_regime(capsys):
    code, out, _ = run(
        capsys, "pointer", "--file", fixture_path("spin_box.json"), "--observable", "P_B_up",
        "--g", "0.001", "--format", "json",
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["mean_shift_over_g"] == pytest.approx(-1.0, abs=0.01)
    assert doc["weak_value_real"] == pytest.approx(-1.0)
    assert "strong_regime" not in doc


def test_pointer_identity_shifts_by_g(capsys):
    code, out, _ = run(
        capsys, "pointer", "--file", fixture_path("three_box.json"), "--observable", "identity",
        "--g", "0.01", "--format", "json",
    )
    assert code == EXIT_OK
    assert json.loads(out)["mean_shift"] == pytest.approx(0.01, abs=1e-9)


def test_pointer_strong_regime(capsys):
    code, out, _ = run(
        capsys, "pointer", "--file", fixture_path("three_box.json"), "--observable", "P_A",
        "--g", "1000", "--format", "json",
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["points"] == 200201
    strong = doc["strong_regime"]
    assert strong["max_difference"] <= 1e-6
    assert strong["bump_masses"]["1.0"] == pytest.approx(1.0, abs=1e-6)


def test_pointer_strong_regime_table(capsys):
    code, out, _ = run(
        capsys, "pointer", "--file", fixture_path("three_box.json"), "--observable", "P_C", "--g", "1000"
    )
    assert code == EXIT_OK
    assert "strong regime: bump masses vs ABL" in out


def test_pointer_csv(capsys, tmp_path):
    target = tmp_path / "pointer.csv"
    code, _, _ = run(
        capsys, "pointer", "--file", fixture_path("spin_box.json"), "--observable", "P_B_up",
        "--g", "0.001", "--out", str(target),
    )
    assert code == EXIT_OK
    with open(target, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["position", "density"]
    assert len(rows) == 1 + 4096
    assert float(rows[1][0]) == pytest.approx(-10.01)


def test_pointer_explicit_grid_too_coarse(capsys):
    code, _, err = run(
        capsys, "pointer", "--file", fixture_path("three_box.json"), "--observable", "P_C", "--points", "10"
    )
    assert code == EXIT_USAGE
    assert "points" in err


def test_pointer_orthogonal_selection(capsys):
    code, _, _ = run(capsys, "pointer", "--file", fixture_path("orthogonal.json"), "--observable", "sigma_x")
    assert code == EXIT_NULL_ENSEMBLE


def test_export_and_reload(capsys, tmp_path, small_config):
    target = tmp_path / "spin_box.json"
    code, _, _ = run(capsys, "--config", small_config, "export-scenario", "spin-box", "--out", str(target))
    assert code == EXIT_OK
    code, out, _ = run(capsys, "abl", "--file", str(target), "--observable", "P_A_up")
    assert code == EXIT_OK
    assert out.splitlines() == ["0: 0.0", "1: 1.0"]
    code, out, _ = run(capsys, "weak", "--file", str(target), "--observable", "P_B_up")
    assert out.strip() == "-1.0 + 0.0i"


def test_export_mean_king_outcome_to_stdout(capsys):
    code, out, _ = run(capsys, "export-scenario", "mean-king", "--outcome", "3")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["dims"] == [2]
    assert len(doc["generalized"]) >= 2


def test_export_unknown_scenario(capsys):
    code, _, _ = run(capsys, "export-scenario", "nosuch")
    assert code == EXIT_USAGE


def test_export_writes_the_same_document_as_stdout(capsys, tmp_path):
    target = tmp_path / "three_box.json"
    run(capsys, "export-scenario", "three-box", "--out", str(target))
    _, out, _ = run(capsys, "export-scenario", "three-box")
    text = target.read_text()
    assert text.endswith("\n")
    assert json.loads(text) == json.loads(out)


def test_exported_kernel_reloads_through_abl(capsys, tmp_path):
    target = tmp_path / "pair.json"
    code, _, _ = run(capsys, "export-scenario", "correlated-pair", "--out", str(target))
    assert code == EXIT_OK

    code, out, _ = run(capsys, "abl", "--file", str(target), "--observable", "sigma_z")
    assert code == EXIT_OK
    assert out.splitlines() == ["-1, -1: 0.5", "-1, 1: 0.0", "1, -1: 0.0", "1, 1: 0.5", "same outcome: 1.0"]

    code, out, _ = run(
        capsys, "abl", "--file", str(target), "--observable", "sigma_x", "--observable-b", "sigma_z", "--format", "json"
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["observable_b"] == "sigma_z"
    assert doc["same_outcome"] == pytest.approx(0.5)
    assert sum(p for _, _, p in doc["joint"]) == pytest.approx(1.0)


@pytest.mark.parametrize("command", ["weak", "pointer", "verify"])
def test_kernel_problem_has_no_selection(capsys, tmp_path, command):
    target = tmp_path / "pair.json"
    run(capsys, "export-scenario", "correlated-pair", "--out", str(target))
    code, _, _ = run(capsys, command, "--file", str(target), "--observable", "sigma_z")
    assert code == EXIT_USAGE


def test_kernel_with_unequal_particle_dims(capsys, tmp_path):
    doc = {
        "dims": [2, 3],
        "kernel": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]]],
        "observables": [
            {"name": "sigma_z", "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
            {"name": "z3", "matrix": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [-1, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]]},
        ],
    }
    target = tmp_path / "kernel23.json"
    target.write_text(json.dumps(doc))

    code, out, _ = run(
        capsys, "abl", "--file", str(target), "--observable", "sigma_z", "--observable-b", "z3", "--format", "json"
    )
    assert code == EXIT_OK
    assert json.loads(out)["same_outcome"] == pytest.approx(1.0)

    code, _, _ = run(capsys, "abl", "--file", str(target), "--observable", "z3")
    assert code == EXIT_USAGE


def test_observable_b_needs_a_kernel_problem(capsys):
    code, _, err = run(
        capsys, "abl", "--file", fixture_path("spin_box.json"), "--observable", "P_A_up", "--observable-b", "P_A_up"
    )
    assert code == EXIT_USAGE
    assert "kernel" in err


def test_bad_config(capsys, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("output:\n  format: xml\n")
    code, _, err = run(capsys, "--config", str(path), "run", "spin-xz")
    assert code == EXIT_USAGE
    assert err.startswith("config:")


def test_config_format_is_the_default(capsys, tmp_path):
    path = tmp_path / "json.yaml"
    path.write_text("output:\n  format: json\n")
    code, out, _ = run(
        capsys, "--config", str(path), "weak", "--file", fixture_path("three_box.json"), "--observable", "P_A"
    )
    assert code == EXIT_OK
    assert json.loads(out)["weak_value"] == pytest.approx([1.0, 0.0])


def test_missing_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE
