"""Experiment configs (TOML or JSON) and their validation."""

from __future__ import annotations

import copy
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(Exception):
    """Malformed or inconsistent experiment config (CLI exit status 2)."""


STEP_OPS = {"fiber_scale": {"s"}, "cheeger": {"group", "l"}, "conformal": {"amplitude", "axis"}}


@dataclass(frozen=True)
class StepSpec:
    op: str
    params: dict


@dataclass(frozen=True)
class CheckSpec:
    name: str
    tolerance: float | None
    params: dict


@dataclass
class ExperimentConfig:
    fixture: str
    pipeline: list
    checks: list
    grids: dict = field(default_factory=dict)
    seed: int = 0
    name: str = "experiment"
    raw: dict = field(default_factory=dict, repr=False)

    def canonical_json(self):
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _known_fixtures():
    from .. import fixtures
    from ..submersion import SUBMERSIONS
    return set(fixtures.CATALOG) | set(SUBMERSIONS) | {"none"}


def from_dict(d):
    from .checks import CHECKS

    if not isinstance(d, dict):
        raise ConfigError("config must be a table/object")
    d = copy.deepcopy(d)
    fixture = d.get("fixture", "none")
    if fixture not in _known_fixtures():
        raise ConfigError(f"unknown fixture {fixture!r}")
    steps = []
    for i, st in enumerate(d.get("pipeline", [])):
        if not isinstance(st, dict) or "op" not in st:
            raise ConfigError(f"pipeline step {i} needs an 'op'")
        op = st["op"]
        if op not in STEP_OPS:
            raise ConfigError(f"unknown pipeline op {op!r}")
        params = {k: v for k, v in st.items() if k != "op"}
        missing = STEP_OPS[op] - set(params)
        if missing:
            raise ConfigError(f"pipeline step {i} ({op}) missing {sorted(missing)}")
        steps.append(StepSpec(op, params))
    checks = []
    raw_checks = d.get("checks", [])
    if not raw_checks:
        raise ConfigError("config lists no checks")
    for i, ch in enumerate(raw_checks):
        if isinstance(ch, str):
            ch = {"name": ch}
        if not isinstance(ch, dict) or "name" not in ch:
            raise ConfigError(f"check {i} needs a 'name'")
        if ch["name"] not in CHECKS:
            raise ConfigError(f"unknown check {ch['name']!r}")
        tol = ch.get("tolerance")
        if tol is not None:
            if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol < 0:
                raise ConfigError(f"check {ch['name']!r}: tolerance must be a non-negative number")
            tol = float(tol)
        params = {k: v for k, v in ch.items() if k not in ("name", "tolerance")}
        checks.append(CheckSpec(ch["name"], tol, params))
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    grids = d.get("grids", {})
    if not isinstance(grids, dict):
        raise ConfigError("grids must be a table")
    return ExperimentConfig(fixture, steps, checks, grids, seed, str(d.get("name", "experiment")), d)


def parse_text(text, suffix=""):
    if suffix == ".json":
        return json.loads(text)
    if suffix == ".toml":
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return tomllib.loads(text)


def load_dict(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        return parse_text(text, path.suffix.lower())
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None


def load_config(path, seed=None):
    d = load_dict(path)
    if seed is not None and isinstance(d, dict):
        d["seed"] = seed
    return from_dict(d)


def set_path(d, path, value):
    """Set ``value`` at a dotted path like ``pipeline.0.s`` inside a raw config dict."""
    d = copy.deepcopy(d)
    keys = path.split(".")
    node = d
    try:
        for k in keys[:-1]:
            node = node[int(k)] if isinstance(node, list) else node[k]
        last = keys[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            if last not in node:
                raise KeyError(last)
            node[last] = value
    except (KeyError, IndexError, ValueError, TypeError):
        raise ConfigError(f"parameter path {path!r} not addressable in config") from None
    return d
