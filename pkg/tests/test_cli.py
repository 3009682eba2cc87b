import json
import subprocess
import sys

import pytest

from unravel.cli import main
from unravel.experiment import CSV_COLUMNS, run_experiment, validate_config

BASE = {
    "version": 1,
    "model": "heisenberg",
    "n": 4,
    "steps": 4,
    "chi": 2,
    "noise": {"model": "amplitude_damping", "rate": 0.05},
    "strategies": ["orthogonal", "locally_optimal"],
    "trajectories": 4,
    "seed": 9,
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", "--config", str(write(tmp_path, BASE)), "--out", str(tmp_path / "a")]) == 0
    out = tmp_path / "a"
    header = (out / "aggregates_orthogonal.csv").read_text(encoding="utf-8").splitlines()
    assert header[0] == ",".join(CSV_COLUMNS)
    assert len(header) == 1 + BASE["steps"]
    lines = (out / "trajectories_locally_optimal.ndjson").read_text().splitlines()
    assert len(lines) == BASE["trajectories"]
    assert json.loads(lines[0])["strategy"] == "locally_optimal"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 9 and manifest["config"]["n"] == 4
    assert "git" in manifest
    assert "saturation S_mid" in capsys.readouterr().out


def test_manifest_replay_and_workers(tmp_path):
    cfg = write(tmp_path, BASE)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["run", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b"), "--workers", "2"])
    assert outputs(tmp_path / "a") == outputs(tmp_path / "b")


def test_seed_flag_overrides(tmp_path):
    cfg = write(tmp_path, BASE)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b")])
    assert outputs(tmp_path / "a") != outputs(tmp_path / "b")
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["seed"] == 1


def test_full_bond_certificate_is_buffer_only(tmp_path):
    cfg = dict(BASE, chi=4, strategies=["haar_optimal"])
    m = run_experiment(cfg, tmp_path / "x")
    cert = m["summary"]["haar_optimal"]["certificate"]
    assert cert["mean_eps"] == 0.0
    assert cert["bound"] == pytest.approx(cert["buffer"])


@pytest.mark.parametrize(
    "bad",
    [
        {k: v for k, v in BASE.items() if k != "model"},
        dict(BASE, strategies=["greedy"]),
        dict(BASE, chi=0),
        dict(BASE, unknown_key=1),
        dict(BASE, version=2),
        dict(BASE, model="lindblad"),
    ],
)
def test_schema_errors(tmp_path, bad, capsys):
    assert main(["run", "--config", str(write(tmp_path, bad)), "--out", str(tmp_path / "o")]) == 2
    assert "invalid config" in capsys.readouterr().err
    with pytest.raises(ValueError):
        validate_config(bad)


def test_lindblad_and_brickwork_models(tmp_path):
    lind = dict(BASE, model="lindblad", strategies=["orthogonal"],
                lindblad={"terms": [{"pauli": "XX"}, {"pauli": "Z", "coef": 0.3}],
                          "jumps": [{"op": "lowering", "gamma": 0.2}]})
    lind.pop("noise")
    run_experiment(lind, tmp_path / "l")
    brick = dict(BASE, model="brickwork", gate="low_entangling", strategies=["projective"],
                 noise={"model": "dephasing", "rate": 0.1}, layering_mode="local")
    run_experiment(brick, tmp_path / "b")
    assert (tmp_path / "b" / "aggregates_projective.csv").exists()


def test_bad_workers(tmp_path):
    assert main(["run", "--config", str(write(tmp_path, BASE)), "--out", str(tmp_path / "o"), "--workers", "0"]) == 2


def test_verify_exit_code(capsys):
    assert main(["verify", "--suite", "lindblad"]) == 0
    assert capsys.readouterr().out.startswith("[PASS] AC6")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "unravel", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout
