"""run_corevac.py のコマンドライン実行"""
import os
import subprocess
import sys

from core.report import CSV_COLUMNS

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _run(*args, env=None):
    return subprocess.run([sys.executable, os.path.join(ROOT, "run_corevac.py"), *args],
                          cwd=ROOT, capture_output=True, text=True, encoding="utf-8", env=env)


def test_presets_are_listed():
    result = _run("presets")
    assert result.returncode == 0
    for name in ("stationarity", "decay", "spectrum", "window-sweep", "poisson-equilibrium", "hardy"):
        assert name in result.stdout


def test_unknown_preset_is_a_config_error(tmp_path):
    config = tmp_path / "unknown.yaml"
    config.write_text("preset: unknown\nradius.outer: 2.5\n", encoding="utf-8")
    result = _run("run", "--config", str(config), "--out", str(tmp_path / "out"), "--silent")
    assert result.returncode == 2
    assert "unknown_preset" in result.stdout
    assert not (tmp_path / "out").exists()


def test_invalid_config_is_a_config_error(tmp_path):
    config = tmp_path / "both.yaml"
    config.write_text("preset: decay\nradius.outer: 2.5\nradius.mass: 1.0\n", encoding="utf-8")
    result = _run("run", "--config", str(config), "--silent")
    assert result.returncode == 2
    assert "validation_error" in result.stdout


def test_stationarity_run(tmp_path):
    config = tmp_path / "stationarity.yaml"
    config.write_text("preset: stationarity\ngrid.n_cells: 16\nrun.t_end: 1.0\nrun.snapshot_every: 0.5\n"
                      "run.fit_start: 0.0\nrun.fit_end: 1.0\n", encoding="utf-8")
    out_dir = tmp_path / "out"
    log_dir = tmp_path / "logs"
    result = _run("run", "--config", str(config), "--out", str(out_dir), "--log-dir", str(log_dir), "--no-html")
    assert result.returncode == 0, result.stdout
    with open(out_dir / "timeseries.csv", encoding="utf-8") as f:
        assert f.readline().rstrip("\n") == ",".join(CSV_COLUMNS)
    assert (out_dir / "report.json").exists()
    assert not (out_dir / "report.html").exists()
    assert len(list(log_dir.glob("corevac_stationarity_*.log"))) == 1


def test_output_dir_from_environment(tmp_path):
    config = tmp_path / "stationarity.yaml"
    config.write_text("preset: stationarity\ngrid.n_cells: 16\nrun.t_end: 0.5\nrun.snapshot_every: 0.5\n"
                      "run.fit_start: 0.0\nrun.fit_end: 0.5\n", encoding="utf-8")
    env = dict(os.environ, COREVAC_OUT=str(tmp_path / "env_out"))
    result = _run("run", "--config", str(config), "--silent", env=env)
    assert result.returncode == 0, result.stdout
    assert (tmp_path / "env_out" / "timeseries.csv").exists()
