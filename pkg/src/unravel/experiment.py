"""Config-driven experiments: build a circuit, sample trajectories, write results."""

from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .channels import channel_from_spec
from .circuits import brickwork_circuit, heisenberg_model
from .lindblad import half_step_noise, model_from_spec, trotterize
from .mps import MpsState
from .trajectory import (
    CircuitDescription,
    estimate_error,
    hoeffding_buffer,
    run_trajectories,
)
from .unraveler import STRATEGIES, effective_two_qubit
from ._linalg import shannon

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "model", "n", "steps", "chi", "strategies", "trajectories"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": 1},
        "name": {"type": "string"},
        "model": {"enum": ["heisenberg", "brickwork", "lindblad"]},
        "n": {"type": "integer", "minimum": 2, "maximum": 64},
        "steps": {"type": "integer", "minimum": 1},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "swap_xy": {"type": "boolean"},
        "gate": {"enum": ["haar", "low_entangling", "low_entangling_local"]},
        "theta": {"type": "number", "minimum": 0},
        "lindblad": {"type": "object"},
        "noise": {"type": "object"},
        "chi": {"type": "integer", "minimum": 1},
        "strategies": {
            "type": "array",
            "minItems": 1,
            "items": {"enum": list(STRATEGIES)},
        },
        "trajectories": {"type": "integer", "minimum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "eps_max": {"type": "number", "minimum": 2},
        "layering_mode": {"enum": ["global", "local"]},
        "target_entropy": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULTS = {
    "dt": 0.1,
    "swap_xy": False,
    "gate": "haar",
    "theta": 0.05,
    "delta": 0.05,
    "eps_max": 2.0,
    "layering_mode": "global",
    "target_entropy": True,
    "seed": 0,
}

CSV_COLUMNS = (
    "depth",
    "mean_entropy_midcut",
    "mean_eps",
    "bound",
    "sem_entropy_midcut",
    "mean_entropy_target",
)


def validate_config(config: dict) -> dict:
    """Check a config against the schema and fill in defaults."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"invalid config: {exc.message}") from exc
    if config["model"] == "lindblad" and "lindblad" not in config:
        raise ValueError("invalid config: model 'lindblad' needs a 'lindblad' section")
    return {**DEFAULTS, **config}


def build_circuit(cfg: dict) -> CircuitDescription:
    n, steps, mode = cfg["n"], cfg["steps"], cfg["layering_mode"]
    noise = channel_from_spec(cfg["noise"]) if "noise" in cfg else None
    if cfg["model"] == "brickwork":
        return brickwork_circuit(n, steps, cfg["gate"], noise, None, mode, cfg["seed"], cfg["theta"])
    if cfg["model"] == "heisenberg":
        model = heisenberg_model(n, cfg["dt"], swap_xy=cfg["swap_xy"])
    else:
        model = model_from_spec({"dt": cfg["dt"], **cfg["lindblad"], "n": n})
    override = half_step_noise(n, noise) if noise is not None else None
    return trotterize(model, steps, mode, noise_override=override)


def entropy_observables(state: MpsState) -> tuple[float, float]:
    """Mid-cut entropy and mean single-site (target:rest) entropy."""
    n = state.n_qubits
    mid = state.entropy_at_cut(n // 2)
    sites = []
    for q in range(n):
        s = effective_two_qubit(state, q).schmidt
        sites.append(shannon(s**2))
    return mid, float(np.mean(sites))


def midcut_entropy(state: MpsState) -> tuple[float, float]:
    return state.entropy_at_cut(state.n_qubits // 2), float("nan")


def git_hash() -> str | None:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True,
            text=True,
            check=True,
            cwd=Path(__file__).resolve().parent,
        )
    except (OSError, subprocess.CalledProcessError):
        return None
    return out.stdout.strip() or None


def aggregate(records, delta: float) -> list[dict]:
    """Per-depth statistics over trajectories."""
    obs = np.array([r.observations for r in records], dtype=float)
    cum = np.array([r.cumulative_bound() for r in records])
    n = len(records)
    steps = obs.shape[1]
    eps_max = records[0].eps_max
    buffer = hoeffding_buffer(eps_max, n, delta)
    rows = []
    for d in range(steps):
        mid = obs[:, d, 0]
        mean_eps = float(cum[:, d].mean()) if cum.size else 0.0
        rows.append(
            {
                "depth": d + 1,
                "mean_entropy_midcut": float(mid.mean()),
                "mean_eps": mean_eps,
                "bound": mean_eps + buffer,
                "sem_entropy_midcut": float(mid.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                "mean_entropy_target": float(obs[:, d, 1].mean()),
            }
        )
    return rows


def saturation(records, fraction: float = 1 / 3) -> tuple[float, float]:
    """Mean and standard error of the per-trajectory mid-cut entropy over the final steps."""
    obs = np.array([[o[0] for o in r.observations] for r in records])
    tail = max(1, int(round(obs.shape[1] * fraction)))
    per_traj = obs[:, -tail:].mean(axis=1)
    sem = per_traj.std(ddof=1) / np.sqrt(len(per_traj)) if len(per_traj) > 1 else 0.0
    return float(per_traj.mean()), float(sem)


def run_experiment(
    config: dict, out_dir: str | Path, workers: int = 1, seed: int | None = None
) -> dict:
    """Run every strategy in ``config`` and write CSV, NDJSON and manifest files.

    A manifest written by a previous run is accepted as ``config`` and
    replays that run exactly.
    """
    if "config" in config and "seed" in config:
        seed = config["seed"] if seed is None else seed
        config = config["config"]
    cfg = validate_config(config)
    if seed is not None:
        cfg["seed"] = int(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    circuit = build_circuit(cfg)
    observe = entropy_observables if cfg["target_entropy"] else midcut_entropy
    summary = {}
    for strategy in cfg["strategies"]:
        records = run_trajectories(
            circuit, cfg["chi"], strategy, cfg["trajectories"], cfg["seed"], workers,
            eps_max=cfg["eps_max"], observe=observe,
        )
        rows = aggregate(records, cfg["delta"])
        with open(out / f"aggregates_{strategy}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
        with open(out / f"trajectories_{strategy}.ndjson", "w", encoding="utf-8") as fh:
            for r in records:
                line = r.to_json()
                line["strategy"] = strategy
                line["entropy_midcut"] = [o[0] for o in r.observations]
                fh.write(json.dumps(line) + "\n")
        est = estimate_error(records, cfg["delta"])
        mean, sem = saturation(records)
        summary[strategy] = {
            "saturation_entropy_midcut": mean,
            "saturation_sem": sem,
            "certificate": {
                "n": est.n,
                "mean_eps": est.mean,
                "buffer": est.buffer,
                "bound": est.total,
                "delta": est.delta,
                "eps_max": est.eps_max,
            },
        }
    manifest = {
        "package_version": __version__,
        "git": git_hash(),
        "seed": cfg["seed"],
        "config": {k: v for k, v in cfg.items() if k != "seed"},
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest
