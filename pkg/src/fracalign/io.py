"""
Configuration parsing, CSV/JSON emission and run manifests.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .diagnostics import DiagnosticsRecord
from .hydro import PRESET_PARAMS, PRESETS, HydroState, SolverConfig
from .particles import ParticleConfig, ParticleRecord

TIMESERIES_HEADER = "t,M,P,e_mass,V,sup_ux,sup_uxx,sup_rhox,rho_min,rho_max,er_min,er_max,q_min,q_max,flock_residual"
PARTICLE_HEADER = "t,velocity_diameter,position_diameter,mean_velocity"


class ConfigError(ValueError):
    """Malformed or out-of-range configuration; ``key``/``line`` locate the problem when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _power_of_two(v):
    return _is_int(v) and v >= 16 and not v & (v - 1)


# key -> (default, type check, range check, range description)
HYDRO_SCHEMA = {
    "alpha": (0.5, _is_real, lambda v: 0.0 < v < 2.0, "in (0, 2)"),
    "n": (512, _is_int, _power_of_two, "a power of two >= 16"),
    "t_end": (20.0, _is_real, lambda v: v >= 0.0, ">= 0"),
    "cfl_safety": (0.5, _is_real, lambda v: 0.0 < v <= 1.0, "in (0, 1]"),
    "output_stride": (20, _is_int, lambda v: v >= 1, ">= 1"),
    "preset": ("paper-like", lambda v: isinstance(v, str), lambda v: v in PRESETS,
               f"one of {sorted(PRESETS)}"),
    "preset_params": ({}, lambda v: isinstance(v, dict), lambda v: True, "a mapping"),
    "snapshot_stride": (0, _is_int, lambda v: v >= 0, ">= 0"),
}

PARTICLE_SCHEMA = {
    "n_agents": (64, _is_int, lambda v: v >= 2, ">= 2"),
    "alpha": (0.5, _is_real, lambda v: 0.0 < v < 2.0, "in (0, 2)"),
    "epsilon": (1e-3, _is_real, lambda v: v > 0.0, "> 0"),
    "k_images": (64, _is_int, lambda v: v >= 8, ">= 8"),
    "t_end": (10.0, _is_real, lambda v: v >= 0.0, ">= 0"),
    "dt": (None, lambda v: v is None or _is_real(v), lambda v: v is None or v > 0.0, "> 0"),
    "seed": (0, _is_int, lambda v: v >= 0, ">= 0"),
    "v_amplitude": (0.5, _is_real, lambda v: v > 0.0, "> 0"),
    "output_stride": (10, _is_int, lambda v: v >= 1, ">= 1"),
}


def _resolve(doc: dict, schema: dict) -> dict:
    unknown = sorted(set(doc) - set(schema) - {"mode"})
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}", key=unknown[0])
    resolved = {}
    for key, (default, type_ok, range_ok, desc) in schema.items():
        value = doc.get(key, default)
        if not type_ok(value):
            raise ConfigError(f"{key}: invalid value {value!r}", key=key)
        if not range_ok(value):
            raise ConfigError(f"{key}: value {value!r} out of range (must be {desc})", key=key)
        resolved[key] = float(value) if isinstance(default, float) and value is not None else value
    return resolved


def parse_config(text: str) -> SolverConfig | ParticleConfig:
    """Parse a YAML document with ``mode: hydro`` or ``mode: particles``."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        where = f" at line {line}" if line is not None else ""
        raise ConfigError(f"parse error{where}: {getattr(exc, 'problem', exc)}", line=line) from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a key-value mapping")
    mode = doc.get("mode")
    if mode == "hydro":
        cfg = _resolve(doc, HYDRO_SCHEMA)
        params = cfg["preset_params"]
        allowed = PRESET_PARAMS[cfg["preset"]]
        bad = sorted(set(params) - set(allowed))
        if bad:
            raise ConfigError(f"preset_params: unknown key(s) {', '.join(bad)} for preset "
                              f"{cfg['preset']!r}", key="preset_params")
        for k, v in params.items():
            if not _is_real(v):
                raise ConfigError(f"preset_params.{k}: invalid value {v!r}", key=f"preset_params.{k}")
        cfg["preset_params"] = {k: float(v) for k, v in params.items()}
        return SolverConfig(**cfg)
    if mode == "particles":
        return ParticleConfig(**_resolve(doc, PARTICLE_SCHEMA))
    raise ConfigError(f"mode: expected 'hydro' or 'particles', got {mode!r}", key="mode")


def load_config(path) -> SolverConfig | ParticleConfig:
    return parse_config(Path(path).read_text())


def config_snapshot(config) -> dict:
    d = asdict(config)
    d["mode"] = "hydro" if isinstance(config, SolverConfig) else "particles"
    if isinstance(config, ParticleConfig):
        d["dt"] = config.step
    return d


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_rows(rows, header: str, path) -> Path:
    rows = list(rows)
    if not rows:
        raise ValueError("no records to write")
    path = Path(path)
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_timeseries(records, path) -> Path:
    """Write hydrodynamic diagnostics as CSV with 17 significant digits."""
    return _write_rows((r.as_tuple() for r in records), TIMESERIES_HEADER, path)


def write_particle_timeseries(records, path) -> Path:
    rows = ((r.t, r.velocity_diameter, r.position_diameter, r.mean_velocity) for r in records)
    return _write_rows(rows, PARTICLE_HEADER, path)


def read_table(path) -> dict[str, np.ndarray]:
    """Read a CSV written by this module into ``{column: array}``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) for x in row] for row in reader if row]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def read_timeseries(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
    if header != TIMESERIES_HEADER:
        raise ValueError(f"unexpected header in {path}: {header!r}")
    table = read_table(path)
    cols = [table[name] for name in DiagnosticsRecord.field_names()]
    return [DiagnosticsRecord(*map(float, row)) for row in zip(*cols)]


def read_particle_timeseries(path) -> list[ParticleRecord]:
    table = read_table(path)
    return [ParticleRecord(*map(float, row)) for row in
            zip(*(table[k] for k in PARTICLE_HEADER.split(",")))]


def write_snapshot(state: HydroState, alpha: float, path) -> Path:
    """Self-describing JSON snapshot of ``(rho, u)`` with grid metadata."""
    doc = {
        "n": state.grid.n,
        "period": state.grid.period,
        "t": state.t,
        "alpha": alpha,
        "x": state.grid.nodes.tolist(),
        "rho": state.rho.samples.tolist(),
        "u": state.u.samples.tolist(),
    }
    path = Path(path)
    path.write_text(json.dumps(doc))
    return path


def read_snapshot(path) -> HydroState:
    from .spectral import RealField, TorusGrid

    doc = json.loads(Path(path).read_text())
    grid = TorusGrid(int(doc["n"]))
    return HydroState(RealField(doc["rho"], grid), RealField(doc["u"], grid), float(doc["t"]))


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


@dataclass
class RunManifest:
    """Bookkeeping for one run; rewritten to ``manifest.json`` on every change."""

    path: Path
    config: dict
    artifact_version: str = __version__
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)
    status: str = "running"

    def save(self) -> None:
        doc = {
            "artifact_version": self.artifact_version,
            "config": self.config,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "status": self.status,
        }
        tmp = self.path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, self.path)

    def add(self, output) -> None:
        name = Path(output).name
        if name not in self.outputs:
            self.outputs.append(name)
        self.save()

    def finish(self, status: str) -> None:
        self.status = status
        self.finished = _now()
        self.save()
