"""Run configuration: plain-text ``name = value`` lines, values in YAML flow syntax.

Example::

    # harmonic ladder with a quadratic nonlinearity
    spectrum = {kind: harmonic, n: 8}
    solver = {T: 20, tol: 1e-10, gamma: 0.25, grid_theta: 0.9}
    nonlinear = {kind: bilinear, amplitude: 0.02, seed: 3}
    g0 = {kind: random, scale: 0.5, seed: 1}

A value may span several lines while brackets are open.  ``#`` starts a
comment.  Command-line flags override entries after parsing.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .errors import BistableError
from .nonlinear import GAMMA_MAX, GAMMA_DEFAULT

SOLVER_DEFAULTS = {"T": 20.0, "tol": 1e-10, "gamma": GAMMA_DEFAULT, "grid_theta": 0.9,
                   "max_iter": 200, "t_min": 1e-4, "h_max": 0.01}


class ConfigError(BistableError, ValueError):
    """Malformed or inconsistent configuration."""


def _strip_comment(line: str) -> str:
    depth_quote = None
    for i, ch in enumerate(line):
        if ch in "'\"":
            depth_quote = None if depth_quote == ch else (depth_quote or ch)
        elif ch == "#" and depth_quote is None:
            return line[:i]
    return line


def parse_text(text: str) -> dict:
    entries: dict = {}
    pending, start = "", 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line and not pending:
            continue
        pending = f"{pending} {line}".strip() if pending else line
        start = start or lineno
        opened = sum(pending.count(c) for c in "[{") - sum(pending.count(c) for c in "]}")
        if opened > 0:
            continue
        name, sep, value = pending.partition("=")
        name = name.strip()
        if not sep or not name.isidentifier():
            raise ConfigError(f"line {start}: expected 'name = value'")
        if name in entries:
            raise ConfigError(f"line {start}: duplicate entry {name!r}")
        try:
            entries[name] = yaml.safe_load(value.strip()) if value.strip() else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"line {start}: cannot parse value of {name!r}: {exc}") from None
        pending, start = "", 0
    if pending:
        raise ConfigError(f"line {start}: unbalanced brackets")
    return entries


@dataclass
class RunConfig:
    text: str = ""
    entries: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(text, parse_text(text))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None

    def override(self, block: str, key: str | None, value) -> None:
        """Apply a command-line value; ``key=None`` replaces the whole entry."""
        if value is None:
            return
        if key is None:
            self.entries[block] = value
        else:
            cur = self.entries.get(block)
            cur = dict(cur) if isinstance(cur, dict) else {}
            cur[key] = value
            self.entries[block] = cur
        self.overrides[f"{block}.{key}" if key else block] = value

    def block(self, name: str, required: bool = False) -> dict:
        val = self.entries.get(name)
        if val is None:
            if required:
                raise ConfigError(f"missing {name!r} block")
            return {}
        if not isinstance(val, dict):
            raise ConfigError(f"{name!r} must be a mapping")
        return copy.deepcopy(val)

    def get(self, name: str, default=None):
        return self.entries.get(name, default)

    @property
    def seed(self) -> int:
        s = self.entries.get("seed", 0)
        if not isinstance(s, int) or isinstance(s, bool):
            raise ConfigError("seed must be an integer")
        return s

    def solver(self) -> dict:
        s = dict(SOLVER_DEFAULTS)
        s.update(self.block("solver"))
        for key in ("T", "tol", "t_min", "h_max"):
            s[key] = _positive(s[key], f"solver.{key}")
        gamma = float(s["gamma"])
        if not 0 < gamma <= GAMMA_MAX:
            raise ConfigError(f"solver.gamma must lie in (0, {GAMMA_MAX}]")
        theta = float(s["grid_theta"])
        if not 0 < theta < 1:
            raise ConfigError("solver.grid_theta must lie in (0, 1)")
        s["gamma"], s["grid_theta"], s["max_iter"] = gamma, theta, int(s["max_iter"])
        return s

    def canonical(self) -> str:
        """Config text followed by the sorted override list; the hash input."""
        ov = json.dumps(self.overrides, sort_keys=True, default=_jsonable)
        return f"{self.text}\n#overrides {ov}\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def provenance(self) -> dict:
        return {"config_hash": self.digest, "version": __version__, "config": self.text,
                "overrides": json.loads(json.dumps(self.overrides, default=_jsonable))}


def _positive(v, name: str) -> float:
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{name} must be positive")
    return v


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v).__name__}")
