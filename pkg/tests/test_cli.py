import csv
import subprocess
import sys

import pytest

from metasense import cli, harness


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_help_lists_every_key(capsys):
    with pytest.raises(SystemExit) as exc:
        run("--help")
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for key, _ in harness.config_keys():
        assert key in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "metasense.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sweep-ntr" in proc.stdout


def test_simulate(tmp_path):
    assert run("simulate", "--out", tmp_path, "--temperature", 40, "--light", 50) == 0
    header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert header == "time_s,reflectance_db"
    assert (tmp_path / "states.csv").exists()


def test_simulate_transmit_mode(tmp_path):
    assert run("simulate", "--out", tmp_path, "--mode", "line_transmit") == 0
    rows = list(csv.reader(open(tmp_path / "trace.csv")))[1:]
    assert float(rows[-1][1]) > float(rows[len(rows) // 2][1])


def test_freq_sweep(tmp_path):
    assert run("freq-sweep", "--out", tmp_path, "--points", 51) == 0
    for regime in ("short_pulse", "cw"):
        lines = (tmp_path / f"freq_{regime}.csv").read_text().splitlines()
        assert len(lines) == 52


def test_dataset_train_eval_report(tmp_path, small_config_file):
    cfg = ["--config", small_config_file, "--out", tmp_path]
    assert run("gen-dataset", *cfg) == 0
    data = tmp_path / "dataset.csv"
    assert len(data.read_text().splitlines()) == 41

    assert run("train", *cfg, "--dataset", data, "--target", "light", "--regressor", "ridge") == 0
    model = tmp_path / "model_ridge_light.json"
    assert model.exists()

    assert run("eval", *cfg, "--model", model, "--dataset", data) == 0
    preds = list(csv.reader(open(tmp_path / "predictions.csv")))
    assert preds[0] == ["trace_id", "actual", "estimated"] and len(preds) == 41

    assert run("sweep-ntr", *cfg, "--dataset", data) == 0
    assert (tmp_path / "sweep.csv").exists() and (tmp_path / "plot_results.py").exists()
    assert run("report", *cfg) == 0


def test_global_flags_either_side(tmp_path, small_config_file):
    before, after = tmp_path / "before", tmp_path / "after"
    assert run("--config", small_config_file, "--out", before, "--seed", 4, "gen-dataset") == 0
    assert run("gen-dataset", "--config", small_config_file, "--out", after, "--seed", 4) == 0
    assert (before / "dataset.csv").read_bytes() == (after / "dataset.csv").read_bytes()


def test_seed_changes_dataset(tmp_path, small_config_file):
    run("gen-dataset", "--config", small_config_file, "--out", tmp_path / "a", "--seed", 1)
    run("gen-dataset", "--config", small_config_file, "--out", tmp_path / "b", "--seed", 2)
    assert (tmp_path / "a" / "dataset.csv").read_bytes() != (tmp_path / "b" / "dataset.csv").read_bytes()


class TestExitCodes:
    def test_missing_config(self, tmp_path):
        assert run("gen-dataset", "--config", tmp_path / "none.ini", "--out", tmp_path) == cli.EXIT_CONFIG == 2

    def test_unknown_key(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("grid.pointz = 3\n")
        assert run("gen-dataset", "--config", bad, "--out", tmp_path) == 2

    def test_numerical_failure(self, tmp_path):
        cfg = tmp_path / "short.ini"
        cfg.write_text("stimulus.duration = 1e-7\n")
        assert run("simulate", "--config", cfg, "--out", tmp_path) == cli.EXIT_NUMERIC == 3

    def test_missing_dataset(self, tmp_path):
        code = run("train", "--out", tmp_path, "--dataset", tmp_path / "none.csv", "--target", "light")
        assert code == cli.EXIT_IO == 4

    def test_missing_sweep(self, tmp_path):
        assert run("report", "--out", tmp_path) == 4

    def test_bad_choice_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("simulate", "--mode", "mirror")
        assert exc.value.code == 2
