import csv
import io
import json
import subprocess
import sys

import pytest

from qsumlab.cli import (
    CSV_COLUMNS,
    EXIT_CAP,
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    main,
    parse_config,
    worker_count,
)

BASE = """[experiment]
problem = boolean-sum
variants = deterministic, randomized
epsilon = 0.2
delta = 0.25
N = 16
omega_samples = 40
seed = 3
"""


def _write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text + "output = out.csv\n")
    return p


def test_parse_defaults_and_paths(tmp_path):
    cfg = parse_config(BASE + "output = sub/out.csv\n", base=tmp_path)
    assert cfg.variants == ("deterministic", "randomized")
    assert cfg.epsilons == (0.2,) and cfg.N == 16
    assert cfg.output == str(tmp_path / "sub" / "out.csv")
    assert len(cfg.config_hash) == 16


@pytest.mark.parametrize("text,match", [
    ("[other]\n", "missing \\[experiment\\]"),
    (BASE.replace("boolean-sum", "nope"), "problem"),
    (BASE.replace("epsilon = 0.2", "epsilon = 0.9"), "epsilon must lie"),
    (BASE.replace("epsilon = 0.2", "epsilon = abc"), "not a list"),
    (BASE.replace("seed = 3\n", ""), "seed"),
    (BASE.replace("omega_samples = 40", "omega_samples = 20"), "W \\* min"),
    (BASE.replace("N = 16", "N = 12"), "power of two"),
    (BASE.replace("variants = deterministic, randomized", "variants = quantum"), "variants"),
    (BASE + "backend = gpu\n", "backend"),
    (BASE + "qubit_cap = 40\n", "qubit_cap"),
    ("not an ini", "syntax"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_run_writes_csv_and_is_reproducible(tmp_path, capsys):
    cfgp = _write(tmp_path, BASE)
    assert main(["run", str(cfgp)]) == EXIT_OK
    first = (tmp_path / "out.csv").read_bytes()
    assert main(["run", str(cfgp)]) == EXIT_OK
    assert (tmp_path / "out.csv").read_bytes() == first
    rows = list(csv.DictReader(io.StringIO(first.decode())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r["variant"] for r in rows] == ["deterministic", "randomized"]
    assert all(r["error_ok"] == "1" and r["chebyshev_ok"] == "1" for r in rows)
    man = json.loads((tmp_path / "out.json").read_text())
    assert man["rows"] == 2 and man["csv_columns"] == list(CSV_COLUMNS)


def test_workers_give_identical_output(tmp_path, monkeypatch):
    cfgp = _write(tmp_path, BASE.replace("epsilon = 0.2", "epsilon = 0.2, 0.1"))
    assert main(["run", str(cfgp), "-o", str(tmp_path / "a.csv")]) == EXIT_OK
    monkeypatch.setenv("QSUMLAB_WORKERS", "2")
    assert main(["run", str(cfgp), "-o", str(tmp_path / "b.csv")]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_worker_env_validation(monkeypatch):
    monkeypatch.setenv("QSUMLAB_WORKERS", "many")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.setenv("QSUMLAB_WORKERS", "0")
    assert worker_count() == 1


def test_config_error_exit_code(tmp_path, capsys):
    cfgp = _write(tmp_path, BASE.replace("epsilon = 0.2", "epsilon = 0.9"))
    assert main(["run", str(cfgp)]) == EXIT_CONFIG
    assert "epsilon must lie in (0, 0.5)" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_resource_cap_exit_code(tmp_path, capsys):
    cfgp = _write(tmp_path, BASE.replace("variants = deterministic, randomized", "variants = deterministic")
                  + "backend = statevector\nqubit_cap = 5\n")
    assert main(["run", str(cfgp)]) == EXIT_CAP
    assert "qubit_cap" in capsys.readouterr().err


def test_catalog(capsys):
    assert main(["catalog", "path-integrate"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == sorted(lines) and all(l.startswith("path-integrate\t") for l in lines)
    assert any("\tzero\tclosed-form\t" in l for l in lines)
    assert main(["catalog", "nothing-matches"]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_check_rejects_unknown_criterion(capsys):
    assert main(["check", "--only", "99"]) == EXIT_CONFIG
    assert main(["check", "--only", "x"]) == EXIT_CONFIG


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "qsumlab", "version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("qsumlab 0.1.0")
