import json

import numpy as np
import pytest

from fmesim.cli import main
from fmesim.config import ConfigError, load_config, setup_from_spec
from fmesim.sweep import emit_results, parse_results


def read_lines_without_wall_time(path):
    """File content with the wall-time column masked; timing is the one
    field allowed to differ between identical runs."""
    columns, rows = parse_results(path)
    idx = columns.index("wall_time_s")
    out = [",".join(columns)]
    with open(path) as fh:
        for line in fh.read().splitlines()[1:]:
            parts = line.split(",")
            parts[idx] = "-"
            out.append(",".join(parts))
    return out


def test_load_config_defaults_and_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "two-qubit",
        "out": "from_file.csv",
        "seed": 5,
        "params": {"z_grid": [0.2, 0.4]},
    }))
    config = load_config("two-qubit", str(cfg), out="override.csv", seed=9)
    assert config.out == "override.csv"
    assert config.seed == 9
    assert config.params["z_grid"] == [0.2, 0.4]


def test_load_config_rejects_wrong_experiment(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"experiment": "ring"}))
    with pytest.raises(ConfigError, match="experiment"):
        load_config("two-qubit", str(cfg))


def test_load_config_rejects_out_of_range_grid(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"params": {"z_grid": [0.5, 1.5]}}))
    with pytest.raises(ConfigError, match=r"z_grid\[1\]"):
        load_config("two-qubit", str(cfg))


def test_setup_from_spec_round_trip():
    setup = setup_from_spec({
        "dims": [2, 2],
        "system_ops": [
            {"site": 0, "op": "sigma_minus"},
            {"site": 1, "matrix": [[0, 1], [0, 0]], "scale": 2.0},
        ],
        "interferometer": [[[0.0, 1.0], 0.0], [0.0, 1.0]],
        "feedback_ops": [{"channel": 0, "site": 1, "op": "sigma_x", "scale": 0.5}],
    })
    assert setup.n_channels == 2
    assert setup.interferometer[0, 0] == 1j
    assert np.allclose(setup.feedback_table[0][1], 0.5 * np.array([[0, 1], [1, 0]]))
    assert setup.feedback_table[1][0] is None


def test_setup_from_spec_reports_field():
    with pytest.raises(ConfigError, match=r"system_ops\[0\]"):
        setup_from_spec({
            "dims": [2],
            "system_ops": [{"site": 0, "op": "not_a_pauli"}],
            "interferometer": [[1.0]],
        })


def test_cli_invalid_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["two-qubit", "--config", str(cfg)]) == 1


def test_cli_two_qubit_default_sweep(tmp_path, capsys):
    out = tmp_path / "tq.csv"
    assert main(["two-qubit", "--out", str(out)]) == 0
    columns, rows = parse_results(str(out))
    assert len(rows) == 9
    assert columns[0] == "z"
    for row in rows:
        assert row["fidelity_target"] >= 1.0 - 1e-8
        assert row["unique"] is True
        assert row["status"] == "ok"
    manifest = json.loads((tmp_path / "tq.csv.manifest.json").read_text())
    assert manifest["rows"] == 9
    assert manifest["config"]["experiment"] == "two-qubit"


def test_emit_empty_sweep_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_results([], ["a", "b"], str(path))
    assert path.read_text() == "a,b\n"


def test_emit_parse_round_trip(tmp_path):
    rows = [
        {"x": 0.1234567890123456, "flag": True, "k": 3, "status": "ok"},
        {"x": 7.5e-11, "flag": False, "k": -1, "status": "failed: solver"},
    ]
    path = tmp_path / "rt.csv"
    emit_results(rows, ["x", "flag", "k", "status"], str(path))
    _, parsed = parse_results(str(path))
    for original, back in zip(rows, parsed):
        assert back["x"] == pytest.approx(original["x"], rel=1e-12)
        assert back["flag"] is original["flag"]
        assert back["k"] == original["k"]
        assert back["status"] == original["status"]


def test_cli_rerun_reproducible(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"params": {"z_grid": [0.1, 0.3]}}))
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["two-qubit", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["two-qubit", "--config", str(cfg), "--out", str(out_b)]) == 0
    assert read_lines_without_wall_time(str(out_a)) == read_lines_without_wall_time(
        str(out_b)
    )


def test_cli_worker_count_does_not_change_results(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "ring",
        "params": {"n": 3, "z_grid": [0.1, 0.2, 0.3], "periodic": True},
    }))
    out_1, out_2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    assert main(["ring", "--config", str(cfg), "--out", str(out_1), "--workers", "1"]) == 0
    assert main(["ring", "--config", str(cfg), "--out", str(out_2), "--workers", "2"]) == 0
    assert read_lines_without_wall_time(str(out_1)) == read_lines_without_wall_time(
        str(out_2)
    )


def test_cli_ising_h0_pairing(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "ising",
        "params": {
            "n": 3,
            "delta": 1.0,
            "g_grid": [0.5],
            "alpha_grid": [1.0],
            "include_hamiltonian_off": True,
        },
    }))
    out = tmp_path / "ising.csv"
    assert main(["ising", "--config", str(cfg), "--out", str(out)]) == 0
    _, rows = parse_results(str(out))
    assert [row["hamiltonian_on"] for row in rows] == [True, False]
    assert all(row["status"] == "ok" for row in rows)


def test_cli_locc_check_two_qubit(tmp_path):
    out = tmp_path / "locc.csv"
    assert main(["locc-check", "--out", str(out)]) == 0
    columns, rows = parse_results(str(out))
    assert len(rows) == 4  # 2 channels x 2 sites
    assert any(row["violation_norm"] > 1e-10 for row in rows)
    manifest = json.loads((tmp_path / "locc.csv.manifest.json").read_text())
    assert manifest["is_locc_sufficient"] is False


def test_cli_locc_check_identity_target(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "locc-check",
        "params": {"target": "identity", "n": 3},
    }))
    out = tmp_path / "locc.csv"
    assert main(["locc-check", "--config", str(cfg), "--out", str(out)]) == 0
    manifest = json.loads((tmp_path / "locc.csv.manifest.json").read_text())
    assert manifest["is_locc_sufficient"] is True


def test_cli_oracle_run(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "oracle",
        "seed": 77,
        "params": {"target": "single-qubit", "n_traj": 2000, "steps": 3},
    }))
    out = tmp_path / "oracle.csv"
    assert main(["oracle", "--config", str(cfg), "--out", str(out)]) == 0
    columns, rows = parse_results(str(out))
    assert [row["step"] for row in rows] == [1, 2, 3]
    assert all(row["trace_distance"] < 0.05 for row in rows)
    manifest = json.loads((tmp_path / "oracle.csv.manifest.json").read_text())
    assert manifest["oracle"]["n_samples"] == 2000 * 3
    assert abs(manifest["oracle"]["sample_mean"]) < 0.1


def test_cli_oracle_reproducible_with_seed(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "oracle",
        "params": {"target": "single-qubit", "n_traj": 500, "steps": 2},
    }))
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["oracle", "--config", str(cfg), "--out", str(out_a), "--seed", "12"]) == 0
    assert main(["oracle", "--config", str(cfg), "--out", str(out_b), "--seed", "12"]) == 0
    assert read_lines_without_wall_time(str(out_a)) == read_lines_without_wall_time(
        str(out_b)
    )


def test_cli_strict_mode_solver_failure(tmp_path):
    # a deliberately leaky field discretization: the oracle refuses the run
    bad_setup = {
        "dims": [2],
        "system_ops": [{"site": 0, "op": "sigma_x", "scale": 8.0}],
        "interferometer": [[1.0]],
        "feedback_ops": [],
    }
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "experiment": "oracle",
        "params": {
            "setup": bad_setup,
            "epsilon": 0.2,
            "n_traj": 10,
            "steps": 1,
            "fock_dim": 8,
            "x_max": 4.0,
            "n_points": 161,
        },
    }))
    out = tmp_path / "oracle.csv"
    assert main(["oracle", "--config", str(cfg), "--out", str(out), "--strict"]) == 2
    _, rows = parse_results(str(out))
    assert rows[0]["status"].startswith("failed:")
    # without strict mode the run flags the row but exits cleanly
    assert main(["oracle", "--config", str(cfg), "--out", str(out)]) == 0
