"""``qjl <subcommand> [--config path] [overrides]``.

Exit codes: 0 when every check passes, 1 when a statistical check fails,
2 on a configuration error (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .experiments import EXPERIMENTS

OUTPUT_DIR_ENV = "QJL_OUTPUT_DIR"
DEFAULT_SEED = 12345
TRIAL_FIELDS = ("trials", "runs", "samples")


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str | None = None
    format: str = Field("both", pattern="^(json|csv|both)$")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    experiment: str | None = None
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)
    params: dict = Field(default_factory=dict)
    output: OutputSpec = Field(default_factory=OutputSpec)
    workers: int = Field(1, ge=1)

    @field_validator("experiment")
    @classmethod
    def _known(cls, v):
        if v is not None and v not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {v!r}")
        return v


class ConfigError(Exception):
    pass


def _clean(obj):
    """Plain JSON types only; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def git_blob_sha1(data: bytes) -> str:
    """Hash in the form ``git hash-object`` would give."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def build_config(experiment: str, config_path: str | None, seed=None, trials=None, workers=None,
                 out=None, fmt=None):
    """Merge the config file with flag overrides; return (config, validated params)."""
    raw = {}
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    try:
        cfg = ExperimentConfig(**raw)
    except (ValidationError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.experiment is not None and cfg.experiment != experiment:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {experiment!r}")
    updates = {"experiment": experiment}
    if seed is not None:
        updates["seed"] = seed
    if workers is not None:
        updates["workers"] = workers
    params = dict(cfg.params)
    model, _ = EXPERIMENTS[experiment]
    if trials is not None:
        key = next((f for f in TRIAL_FIELDS if f in model.model_fields), None)
        if key is None:
            raise ConfigError(f"{experiment} has no trial count to override")
        params[key] = trials
    output = cfg.output.model_copy(update={k: v for k, v in (("path", out), ("format", fmt)) if v is not None})
    try:
        cfg = ExperimentConfig(**{**cfg.model_dump(), **updates, "params": params, "output": output.model_dump()})
        validated = model(**params)
    except (ValidationError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, validated


def run_experiment(cfg: ExperimentConfig, params) -> tuple[dict, list]:
    """Run, returning the self-describing JSON record and the CSV rows."""
    _, fn = EXPERIMENTS[cfg.experiment]
    result = fn(params, cfg.seed, cfg.workers)
    embedded = {"experiment": cfg.experiment, "seed": cfg.seed, "params": params.model_dump()}
    record = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": embedded,
        "input_hash": git_blob_sha1(canonical_json(embedded).encode()),
        "passed": bool(result["passed"]),
        "analytic_bounds": result["analytic_bounds"],
        "results": result["results"],
    }
    return record, result["csv_rows"]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    if rows:
        fields = list(rows[0])
        for r in rows[1:]:
            fields += [k for k in r if k not in fields]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _clean(v) for k, v in r.items()})
    return buf.getvalue()


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output.path or os.environ.get(OUTPUT_DIR_ENV) or ".")


def write_outputs(cfg: ExperimentConfig, record: dict, rows) -> list[Path]:
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.experiment}-{cfg.seed}"
    written = []
    if cfg.output.format in ("json", "both"):
        path = out / f"{stem}.json"
        path.write_text(canonical_json(record) + "\n")
        written.append(path)
    if cfg.output.format in ("csv", "both"):
        path = out / f"{stem}.csv"
        path.write_text(rows_to_csv(rows))
        written.append(path)
    return written


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qjl", description="Quantum JL transform experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--format", choices=("json", "csv", "both"))
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg, params = build_config(args.experiment, args.config, args.seed, args.trials,
                                   args.workers, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    record, rows = run_experiment(cfg, params)
    for path in write_outputs(cfg, record, rows):
        print(path)
    status = "PASS" if record["passed"] else "FAIL"
    print(f"{cfg.experiment}: {status}")
    return 0 if record["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
