import json
import subprocess
import sys

import pytest

from qjl.cli import canonical_json, git_blob_sha1, main


def run(args, tmp_path, capsys):
    code = main(args + ["--out", str(tmp_path)])
    return code, capsys.readouterr()


def test_params_writes_json_and_csv(tmp_path, capsys):
    code, _ = run(["params"], tmp_path, capsys)
    assert code == 0
    record = json.loads((tmp_path / "params-12345.json").read_text())
    assert record["passed"]
    assert record["results"]["reference"]["t"] == 512
    assert record["input_hash"] == git_blob_sha1(canonical_json(record["config"]).encode())
    assert "workers" not in record["config"]
    header = (tmp_path / "params-12345.csv").read_text().splitlines()[0]
    assert header.startswith("d1,d2,eps")


def test_blob_hash_matches_git():
    # `printf 'hello\n' | git hash-object --stdin`
    assert git_blob_sha1(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_config_file_and_seed_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "block-dist", "seed": 1, "params": {"samples": 500}}))
    code, _ = run(["block-dist", "--config", str(cfg), "--seed", "9"], tmp_path, capsys)
    record = json.loads((tmp_path / "block-dist-9.json").read_text())
    assert record["config"]["params"]["samples"] == 500
    assert code in (0, 1)


def test_trials_override_and_format(tmp_path, capsys):
    code, _ = run(["block-dist", "--trials", "300", "--format", "json"], tmp_path, capsys)
    assert code in (0, 1)
    record = json.loads((tmp_path / "block-dist-12345.json").read_text())
    assert record["config"]["params"]["samples"] == 300
    assert not (tmp_path / "block-dist-12345.csv").exists()


@pytest.mark.parametrize("payload", [
    {"params": {"d1": 1000, "d2": 64}},
    {"params": {"bogus": 1}},
    {"surprise": True},
    {"experiment": "pir"},
    {"experiment": "not-a-thing"},
    {"workers": 0},
])
def test_config_errors_exit_2_and_write_nothing(tmp_path, capsys, payload):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(payload))
    out = tmp_path / "out"
    code = main(["block-dist", "--config", str(cfg), "--out", str(out)])
    assert code == 2
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


def test_circuit_dimensions_must_be_powers_of_two(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"d1": 768, "d2": 64, "unitary": "circuit"}}))
    assert main(["jl-demo", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_unreadable_config(tmp_path, capsys):
    assert main(["params", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["params", "--config", str(bad)]) == 2


def test_trials_override_needs_a_trial_field(tmp_path, capsys):
    assert main(["params", "--trials", "5", "--out", str(tmp_path)]) == 2


def test_statistical_failure_exits_1(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"samples": 200, "threshold": 0.01}}))
    assert main(["block-dist", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    record = json.loads((tmp_path / "block-dist-12345.json").read_text())
    assert record["passed"] is False


def test_env_var_sets_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("QJL_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["design-quality"]) == 0
    assert (tmp_path / "env" / "design-quality-12345.json").exists()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qjl.cli", "params", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "params: PASS" in proc.stdout
