"""TOML run configuration: a ``[cell]`` table plus one table per module."""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .lattice import CellSpec, GroupPreset, apply_texture

# every accepted key per section, with its default
SECTION_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "group": {"label": "P2'm'm", "detuning": 0.0},
    "bands": {"n_k": 512, "flat_tol": 1e-9},
    "zak": {"n_k": 512, "origin_shift": 0.0, "tol": 1e-3},
    "critical": {"eps": 0.1, "bracket": None, "eps_list": [0.05, 0.1, 0.15, 0.2], "tol": 1e-6},
    "finite": {"n_cells": 6, "state": None, "trials": 50, "amplitude": 0.0, "symmetric": True},
    "transport": {"eta": 1e-9, "device_eta": 0.0, "e_min": -3.0, "e_max": 3.0, "n_energies": 2001,
                  "lead_hopping": 1.0, "energy": None},
    "run": {"seed": 0, "format": "csv", "out": None},
}
CELL_KEYS = set(CellSpec.__dataclass_fields__)
FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    cell: CellSpec
    group: Optional[GroupPreset] = None
    params: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.params.get(section, {}).get(key, SECTION_DEFAULTS[section][key])

    @property
    def spec(self) -> CellSpec:
        """The cell with the group texture applied (if a group is set)."""
        return self.cell if self.group is None else apply_texture(self.cell, self.group)


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = re.match(r"^\[\s*([^\]]+?)\s*\]", stripped)
        if header:
            current = header.group(1)
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section and re.match(rf"^{re.escape(key)}\s*=", stripped):
            return number
    return None


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"cannot parse configuration: {exc}", line=int(match.group(1)) if match else None) from exc

    for section, table in data.items():
        if section != "cell" and section not in SECTION_DEFAULTS:
            raise ConfigError("unknown section", key=section, line=_line_of(text, section))
        if not isinstance(table, dict):
            raise ConfigError("expected a table", key=section, line=_line_of(text, section))
        allowed = CELL_KEYS if section == "cell" else set(SECTION_DEFAULTS[section])
        for key in table:
            if key not in allowed:
                raise ConfigError(f"unknown key in [{section}]", key=key, line=_line_of(text, section, key))

    if "cell" not in data:
        raise ConfigError("missing [cell] table", key="cell")
    try:
        cell = CellSpec.from_dict(data["cell"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [cell]: {exc}", key="cell", line=_line_of(text, "cell")) from exc

    group = None
    if "group" in data:
        g = {**SECTION_DEFAULTS["group"], **data["group"]}
        try:
            group = GroupPreset(g["label"], g["detuning"])
        except ValueError as exc:
            raise ConfigError(f"invalid [group]: {exc}", key="group", line=_line_of(text, "group")) from exc

    params = {name: dict(table) for name, table in data.items() if name not in ("cell", "group")}
    cfg = RunConfig(cell=cell, group=group, params=params)
    validate(cfg, text)
    return cfg


def validate(cfg: RunConfig, text: str = "") -> None:
    for section, key in (("bands", "flat_tol"), ("zak", "tol"), ("critical", "tol"), ("transport", "eta")):
        value = cfg.get(section, key)
        if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
            raise ConfigError("tolerance must be a positive number", key=key, line=_line_of(text, section, key))
    device_eta = cfg.get("transport", "device_eta")
    if not (isinstance(device_eta, (int, float)) and device_eta >= 0 and math.isfinite(device_eta)):
        raise ConfigError("device_eta must be a non-negative number", key="device_eta",
                          line=_line_of(text, "transport", "device_eta"))
    seed = cfg.get("run", "seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", key="seed", line=_line_of(text, "run", "seed"))
    if str(cfg.get("run", "format")).lower() not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}", key="format", line=_line_of(text, "run", "format"))
    for section, key in (("bands", "n_k"), ("zak", "n_k"), ("finite", "n_cells")):
        value = cfg.get(section, key)
        if not isinstance(value, int) or value < 1:
            raise ConfigError("must be a positive integer", key=key, line=_line_of(text, section, key))


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return str(value)


def dump_config(cfg: RunConfig) -> str:
    """Serialize back to TOML; ``None`` values are omitted."""
    lines = ["[cell]"]
    lines += [f"{k} = {_toml_value(v)}" for k, v in cfg.cell.to_dict().items()]
    if cfg.group is not None:
        lines += ["", "[group]", f"label = {_toml_value(cfg.group.label.value)}",
                  f"detuning = {_toml_value(cfg.group.detuning)}"]
    for section, table in cfg.params.items():
        body = [f"{k} = {_toml_value(v)}" for k, v in table.items() if v is not None]
        if body:
            lines += ["", f"[{section}]"] + body
    return "\n".join(lines) + "\n"
