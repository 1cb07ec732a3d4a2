"""Experiment configuration: TOML text with one table per concern.

Every table and key is optional; missing entries take the defaults in
:data:`SCHEMA`.  Unknown tables or keys, wrong types and TOML syntax errors
raise :class:`~fracnls.exceptions.ConfigError` naming the offending line.

Example::

    [params]
    N = 2
    alpha = 0.8
    gamma = 0.4
    p = 4.0

    [grid]
    n = 256
    L = 12.0
"""

from __future__ import annotations

import copy
import re
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exceptions import ConfigError, InvalidParameterError
from .field import DEFAULT_GRIDS, GridSpec
from .params import ModelParams

_NUM = (int, float)
_LIST = (list,)

#: table -> key -> (accepted types, default); ``None`` default means "derive"
SCHEMA: dict[str, dict[str, tuple]] = {
    "params": {
        "N": ((int,), 2),
        "alpha": (_NUM, 0.8),
        "gamma": (_NUM, 0.4),
        "p": (_NUM, 4.0),
        "epsilon": ((int,), 1),
        "debug": ((bool,), False),
    },
    "grid": {
        "n": ((int,), None),
        "L": (_NUM, None),
    },
    "solver": {
        "tol": (_NUM, 1e-10),
        "max_iter": ((int,), 3000),
        "j_tol": (_NUM, 1e-8),
        "j_residual_tol": (_NUM, 1e-2),
        "j_max_iter": ((int,), 2000),
        "residual_gate": (_NUM, 1e-6),
        "agreement_gate": (_NUM, 1e-3),
    },
    "constant": {
        "fields": ((int,), 20),
        "refine": ((bool,), True),
        "gap_gate": (_NUM, 1e-2),
    },
    "evolution": {
        "dt": (_NUM, 1e-3),
        "T": (_NUM, 1.0),
        "record_every": ((int,), 10),
        "blowup_norm_factor": (_NUM, 1e3),
        "spectral_tail_limit": (_NUM, 0.1),
        "initial": ((str,), "gaussian"),
        "amplitude": (_NUM, 1.0),
        "width": (_NUM, 0.5),
        "deltas": (_LIST, [0.01, 0.05]),
        "amplitudes": (_LIST, [0.5, 0.6, 0.7, 0.8, 0.9]),
        "mass_fraction": (_NUM, 0.5),
        "growth_limit": (_NUM, 2.0),
        "orbit_factor": (_NUM, 10.0),
        "mass_gate": (_NUM, 1e-10),
        "energy_gate": (_NUM, 1e-6),
    },
    "sweep": {
        "command": ((str,), "derive"),
        "alpha": (_LIST, [0.7, 0.8, 0.9]),
        "gamma": (_LIST, [0.0, 0.2, 0.4]),
        "p": (_LIST, [2.5, 3.0, 4.0]),
    },
    "run": {
        "seed": ((int,), 0),
    },
}

INITIAL_KINDS = ("gaussian", "groundstate")


def _locate(text: str, table: Optional[str], key: Optional[str] = None) -> int:
    """1-based line of ``[table]`` (or of ``key`` inside it); 0 if not found."""
    current = None
    header = re.compile(r"^\s*\[\s*([^\]\s]+)\s*\]")
    for i, line in enumerate(text.splitlines(), 1):
        m = header.match(line)
        if m:
            current = m.group(1)
            if key is None and current == table:
                return i
            continue
        if key is not None and current == table:
            lhs = line.split("=", 1)[0].strip().strip('"')
            if "=" in line and lhs == key:
                return i
    return 0


def _error(text: str, source: str, lineno: int, msg: str) -> ConfigError:
    if lineno:
        line = text.splitlines()[lineno - 1]
        return ConfigError(f"{source}:{lineno}: {msg}\n    {lineno} | {line}")
    return ConfigError(f"{source}: {msg}")


@dataclass
class ExperimentConfig:
    params: dict = dc_field(default_factory=dict)
    grid: dict = dc_field(default_factory=dict)
    solver: dict = dc_field(default_factory=dict)
    constant: dict = dc_field(default_factory=dict)
    evolution: dict = dc_field(default_factory=dict)
    sweep: dict = dc_field(default_factory=dict)
    run: dict = dc_field(default_factory=dict)
    source: str = "<defaults>"

    @property
    def seed(self) -> int:
        return self.run["seed"]

    def model(self) -> ModelParams:
        return ModelParams(**self.params)

    def grid_spec(self) -> GridSpec:
        N = self.params["N"]
        n0, L0 = DEFAULT_GRIDS[N]
        n = self.grid["n"] if self.grid["n"] is not None else n0
        L = self.grid["L"] if self.grid["L"] is not None else L0
        return GridSpec(N, n, float(L))

    def as_dict(self) -> dict:
        return {t: copy.deepcopy(getattr(self, t)) for t in SCHEMA}

    def with_params(self, **changes) -> "ExperimentConfig":
        new = copy.deepcopy(self)
        new.params.update(changes)
        return new


def default_config() -> ExperimentConfig:
    return ExperimentConfig(**{t: {k: copy.deepcopy(v[1]) for k, v in keys.items()} for t, keys in SCHEMA.items()})


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise _error(text, source, int(m.group(1)) if m else 0, f"syntax error: {exc}") from None
    cfg = default_config()
    cfg.source = source
    for table, body in raw.items():
        if table not in SCHEMA:
            raise _error(text, source, _locate(text, table), f"unknown table [{table}]")
        if not isinstance(body, dict):
            raise _error(text, source, _locate(text, None, table), f"'{table}' must be a table")
        target = getattr(cfg, table)
        for key, value in body.items():
            if key not in SCHEMA[table]:
                raise _error(text, source, _locate(text, table, key), f"unknown key '{key}' in [{table}]")
            types = SCHEMA[table][key][0]
            ok = isinstance(value, types) and not (isinstance(value, bool) and bool not in types)
            if types is _LIST and ok:
                ok = all(isinstance(v, _NUM) and not isinstance(v, bool) for v in value) and len(value) > 0
            if not ok:
                want = "list of numbers" if types is _LIST else "/".join(t.__name__ for t in types)
                raise _error(text, source, _locate(text, table, key),
                             f"[{table}] {key} must be {want}, got {value!r}")
            target[key] = float(value) if types is _NUM else value
    _semantic_checks(cfg, text, source)
    return cfg


def _semantic_checks(cfg: ExperimentConfig, text: str, source: str) -> None:
    try:
        cfg.model()
    except InvalidParameterError as exc:
        raise _error(text, source, _locate(text, "params"), f"invalid [params]: {exc}") from None
    try:
        cfg.grid_spec()
    except InvalidParameterError as exc:
        raise _error(text, source, _locate(text, "grid"), f"invalid [grid]: {exc}") from None
    if cfg.evolution["initial"] not in INITIAL_KINDS:
        raise _error(text, source, _locate(text, "evolution", "initial"),
                     f"[evolution] initial must be one of {INITIAL_KINDS}")
    for key in ("dt", "T"):
        if not cfg.evolution[key] > 0:
            raise _error(text, source, _locate(text, "evolution", key), f"[evolution] {key} must be positive")


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, str(p))
