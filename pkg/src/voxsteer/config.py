"""Run-configuration and mutation-schedule files for headless runs.

A run config is one JSON object:

    {
      "domain":    {"lx": 2.0, "ly": 1.0, "lz": 1.0,
                    "position": [0, 0, 0], "yaw": 0.0},
      "elem_size": 0.125,
      "bcs":       {"entities": {"face:x-": {"state": "clamped"},
                                 "edge:x+z-": {"state": "traction",
                                                "force": [0, 0, -1]}}},
      "params":    {"volfrac": 0.3, "maxiter": 60},
      "outputs":   {"dir": "out", "formats": ["csv", "vtk", "frame", "png"]}
    }

A schedule is a JSON list of {"applied_at_iteration": k, "command": {...}}
with non-decreasing k >= 1; the command objects use the same encoding a
live session records, so recordings replay directly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .bc import BoundaryConditions
from .errors import ConfigError
from .mesh import DomainSpec
from .optimizer import OptimizerParams
from .session import MutationCommand

FORMATS = ("csv", "vtk", "frame", "png")
_PARAM_FIELDS = {f.name for f in dataclasses.fields(OptimizerParams)}


@dataclass
class RunConfig:
    domain: DomainSpec
    elem_size: float
    bcs: BoundaryConditions
    params: OptimizerParams
    out_dir: str
    formats: tuple[str, ...]


def _load_json(path, what: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file is not valid JSON: {exc}") from None


def parse_run_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("run config must be a JSON object")
    try:
        dom = data.get("domain", {})
        domain = DomainSpec(
            lx=float(dom["lx"]),
            ly=float(dom["ly"]),
            lz=float(dom["lz"]),
            position=tuple(dom.get("position", (0.0, 0.0, 0.0))),
            yaw=float(dom.get("yaw", 0.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"domain is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain: {exc}") from None

    elem_size = data.get("elem_size")
    if not isinstance(elem_size, (int, float)) or elem_size <= 0:
        raise ConfigError(f"elem_size must be a positive number, got {elem_size!r}")

    try:
        bcs = BoundaryConditions.from_json(data.get("bcs", {"entities": {}}))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad bcs: {exc}") from None

    raw_params = data.get("params", {})
    unknown = set(raw_params) - _PARAM_FIELDS
    if unknown:
        raise ConfigError(f"unknown params: {sorted(unknown)}")
    try:
        params = OptimizerParams(**raw_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from None

    outputs = data.get("outputs", {})
    out_dir = outputs.get("dir", "out")
    formats = tuple(outputs.get("formats", ["csv", "vtk", "frame", "png"]))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown output formats {bad}; known: {list(FORMATS)}")
    return RunConfig(domain, float(elem_size), bcs, params, str(out_dir), formats)


def load_run_config(path) -> RunConfig:
    return parse_run_config(_load_json(path, "config"))


def parse_schedule(data) -> list[tuple[int, MutationCommand]]:
    if not isinstance(data, list):
        raise ConfigError("schedule must be a JSON list")
    out: list[tuple[int, MutationCommand]] = []
    prev = 1
    for i, entry in enumerate(data):
        if not isinstance(entry, dict) or "applied_at_iteration" not in entry or "command" not in entry:
            raise ConfigError(
                f"schedule entry {i} needs 'applied_at_iteration' and 'command'"
            )
        k = entry["applied_at_iteration"]
        if not isinstance(k, int) or k < 1:
            raise ConfigError(f"schedule entry {i}: applied_at_iteration must be an integer >= 1")
        if k < prev:
            raise ConfigError(f"schedule entry {i}: iterations must be non-decreasing")
        prev = k
        try:
            cmd = MutationCommand.from_json(entry["command"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"schedule entry {i}: {exc}") from None
        out.append((k, cmd))
    return out


def load_schedule(path) -> list[tuple[int, MutationCommand]]:
    return parse_schedule(_load_json(path, "schedule"))
