"""Campaign configuration: one JSON document, defaults merged in, dotted-path overrides."""
from __future__ import annotations

import copy
import json
from pathlib import Path

DEFAULTS = {
    "seed": 0,
    "problem": {"dim": 8, "generator": "uniform", "seed": 1},
    "embedding": {"chimera": {"rows": 3, "cols": 3}, "offset": [0, 0], "chain_strength": 1.0},
    "backend": {
        "kind": "simulator",
        "noise": {"level": "logical", "sigma": 0.01, "scale": 0.02, "seed": 0},
        "schedule": {"sweeps": 1000, "beta_start": 0.1, "beta_end": 10.0, "kind": "geometric"},
        "endpoint": None,
        "timeout": 30.0,
    },
    "sampling": {"eta": 0.05, "m": 500, "reads": 200, "keying": "index"},
    "strategy": {
        "metric": "success_rate",
        "eta_list": [0.01, 0.02, 0.05, 0.1, 0.15],
        "repeats": 10,
        "reads": 200,
        "k": 5,
        "de": {"popsize": None, "mutation": 0.8, "crossover": 0.9, "max_generations": 3000,
               "tol": 1e-12},
    },
    "analysis": {
        "curve_sizes": [1, 10, 100, 500],
        "bootstrap_reps": 1000,
        "learning_sizes": [],
        "learning_reps": 100,
        "walks": 14,
        "walk_delta": 0.01,
        "walk_steps": 20,
        "walk_repeats": 10,
        "walk_reads": 200,
        "hist_offsets": [[0, 0], [0, 1], [1, 0]],
        "hist_samplings": 3,
        "hist_experiments": 100,
        "hist_reads": 200,
    },
    "output": "out",
}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _merge(base: dict, override: dict, prefix="") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(path, "unknown field")
        if isinstance(base[key], dict) and value is not None:
            if not isinstance(value, dict):
                raise ConfigError(path, "expected an object")
            out[key] = _merge(base[key], value, path + ".")
        else:
            out[key] = value
    return out


def parse_override(text: str):
    """``a.b.c=value``; the value is read as JSON when possible, else as a string."""
    if "=" not in text:
        raise ConfigError(text, "override must look like path.to.field=value")
    path, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.strip(), value


def apply_override(config: dict, path: str, value) -> None:
    node = config
    keys = path.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(path, "unknown field")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(path, "unknown field")
    node[keys[-1]] = value


def load_config(path=None, overrides=()) -> dict:
    """Read, merge with defaults, apply overrides and validate."""
    doc = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file {path} not found")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("<document>", "top level must be an object")
    config = _merge(DEFAULTS, doc)
    for item in overrides:
        apply_override(config, *parse_override(item))
    validate(config)
    return config


def _require(cond, field, message):
    if not cond:
        raise ConfigError(field, message)


def _int(config, path, minimum=None):
    node = config
    for key in path.split("."):
        node = node[key]
    _require(isinstance(node, int) and not isinstance(node, bool), path, "must be an integer")
    if minimum is not None:
        _require(node >= minimum, path, f"must be >= {minimum}")
    return node


def _eta(value, field):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), field,
             "must be a number")
    _require(0.0 <= value <= 1.0, field, f"eta must lie in [0, 1], got {value}")


def validate(config: dict) -> None:
    _int(config, "seed", 0)
    _int(config, "problem.dim", 2)
    _int(config, "problem.seed", 0)
    _require(config["problem"]["generator"] in ("uniform", "frustrated"), "problem.generator",
             "must be 'uniform' or 'frustrated'")
    _int(config, "embedding.chimera.rows", 1)
    _int(config, "embedding.chimera.cols", 1)
    off = config["embedding"]["offset"]
    _require(isinstance(off, list) and len(off) == 2 and all(isinstance(v, int) for v in off),
             "embedding.offset", "must be [drow, dcol]")
    _require(config["embedding"]["chain_strength"] > 0, "embedding.chain_strength",
             "must be positive")
    backend = config["backend"]
    _require(backend["kind"] in ("simulator", "remote"), "backend.kind",
             "must be 'simulator' or 'remote'")
    if backend["noise"] is not None:
        noise = backend["noise"]
        _require(noise["level"] in ("logical", "physical"), "backend.noise.level",
                 "must be 'logical' or 'physical'")
        _require(noise["sigma"] >= 0, "backend.noise.sigma", "must be non-negative")
        _require(noise["scale"] >= 0, "backend.noise.scale", "must be non-negative")
        _int(config, "backend.noise.seed", 0)
    _int(config, "backend.schedule.sweeps", 1)
    _eta(config["sampling"]["eta"], "sampling.eta")
    _int(config, "sampling.m", 1)
    _int(config, "sampling.reads", 1)
    _require(config["sampling"]["keying"] in ("index", "content"), "sampling.keying",
             "must be 'index' or 'content'")
    strategy = config["strategy"]
    _require(strategy["metric"] in ("success_rate", "mean_relative_energy"), "strategy.metric",
             "must be 'success_rate' or 'mean_relative_energy'")
    _require(isinstance(strategy["eta_list"], list) and strategy["eta_list"],
             "strategy.eta_list", "must be a nonempty list")
    for i, eta in enumerate(strategy["eta_list"]):
        _eta(eta, f"strategy.eta_list[{i}]")
    _int(config, "strategy.repeats", 1)
    _int(config, "strategy.reads", 1)
    _int(config, "strategy.k", 2)
