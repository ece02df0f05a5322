"""Config-driven trajectory runs: JSON in, CSV + JSON sidecar out."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .dynamics import (
    RegularityLost,
    Trajectory,
    conserved_suite,
    integrate,
    write_sidecar,
    write_trajectory_csv,
)
from .linalg import EPS_REG, random_angles, random_hermitian
from .observables import evaluate, format_observable, parse_observable
from .points import ReducedPoint, Torus

SCHEMA = "biham.simulate/1"


class ConfigError(ValueError):
    """Bad simulation config; the message carries line diagnostics."""


class RandomStart(BaseModel):
    model_config = ConfigDict(extra="forbid")
    seed: int = 0
    min_gap: float = Field(0.5, gt=0)
    scale: float = Field(0.5, gt=0)


class ExplicitStart(BaseModel):
    model_config = ConfigDict(extra="forbid")
    q: list[float]
    L_re: list[list[float]]
    L_im: list[list[float]] | None = None


class Initial(BaseModel):
    model_config = ConfigDict(extra="forbid")
    random: RandomStart | None = None
    explicit: ExplicitStart | None = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.random is None) == (self.explicit is None):
            raise ValueError("give exactly one of 'random' or 'explicit'")
        return self


class SimConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    schema_: Literal["biham.simulate/1"] = Field(alias="schema")
    n: int = Field(ge=1)
    k: int = Field(1, ge=1)
    t_end: float = Field(gt=0)
    dt: float = Field(gt=0)
    method: Literal["rk4"] = "rk4"
    eps_reg: float = Field(EPS_REG, gt=0)
    initial: Initial = Field(default_factory=lambda: Initial(random=RandomStart()))
    degree_cap: int = Field(4, ge=1)
    drift_tol: float = Field(1e-7, gt=0)
    observables: list[str] = Field(default_factory=list)
    output: str = "trajectory"

    @field_validator("observables")
    @classmethod
    def _parse(cls, v):
        for text in v:
            parse_observable(text)
        return v

    def start_point(self) -> ReducedPoint:
        if self.initial.random is not None:
            r = self.initial.random
            rng = np.random.default_rng(r.seed)
            q = random_angles(rng, self.n, r.min_gap)
            return ReducedPoint(Torus(q, self.eps_reg), random_hermitian(rng, self.n, r.scale))
        e = self.initial.explicit
        L = np.asarray(e.L_re, dtype=float) + 1j * np.asarray(
            e.L_im if e.L_im is not None else np.zeros_like(e.L_re), dtype=float)
        if len(e.q) != self.n or L.shape != (self.n, self.n):
            raise ValueError(f"initial state must have n = {self.n} angles and an n x n L")
        return ReducedPoint(Torus(e.q, self.eps_reg), L)


DEMO_CONFIG = {
    "schema": SCHEMA,
    "n": 3,
    "k": 1,
    "t_end": 10.0,
    "dt": 0.01,
    "initial": {"random": {"seed": 0, "min_gap": 0.5, "scale": 0.5}},
    "observables": ["1*Re tr(L^2)", "1*Re tr(L Qinv L Q)"],
}


def _line_of(text: str, key) -> int | None:
    if not isinstance(key, str):
        return None
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path: Path) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    try:
        return SimConfig.model_validate(raw)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = [p for p in err["loc"] if not isinstance(p, int)]
            line = next((ln for ln in (_line_of(text, p) for p in reversed(loc)) if ln), 1)
            where = ".".join(str(p) for p in err["loc"]) or "<root>"
            lines.append(f"{path}:{line}: {where}: {err['msg']}")
        raise ConfigError("\n".join(lines)) from None


def run_simulation(config: SimConfig, out_dir: Path) -> tuple[dict, int]:
    """Integrate, write ``<output>.csv`` and ``<output>.json``; return (sidecar, exit code)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        start = config.start_point()
    except ValueError as exc:
        raise ConfigError(f"initial state: {exc}") from None
    abort = None
    try:
        traj = integrate(config.k, start, config.t_end, config.dt, config.method, config.eps_reg)
    except RegularityLost as exc:
        traj = exc.partial
        abort = {"time": exc.t, "gap": exc.gap, "message": str(exc)}
    records = conserved_suite(traj, config.degree_cap)
    drifts = {r.observable: {"initial": r.initial, "max_drift": r.max_drift} for r in records}
    for text in config.observables:
        f = parse_observable(text)
        vals = np.array([evaluate(f, traj.point(i)) for i in range(len(traj))])
        drifts[format_observable(f)] = {"initial": float(vals[0]),
                                        "max_drift": float(np.max(np.abs(vals - vals[0])))}
    worst = max(d["max_drift"] for d in drifts.values())
    ok = abort is None and worst <= config.drift_tol
    csv_path = out_dir / f"{config.output}.csv"
    write_trajectory_csv(traj, csv_path)
    sidecar = {
        "version": __version__,
        "config": config.model_dump(by_alias=True),
        "csv": csv_path.name,
        "steps": len(traj) - 1,
        "min_gap": traj.min_gap,
        "max_herm_drift": traj.max_herm_drift,
        "drift": drifts,
        "max_drift": worst,
        "abort": abort,
        "pass": ok,
    }
    write_sidecar(out_dir / f"{config.output}.json", sidecar)
    return sidecar, (0 if ok else 1)


def drift_summary(sidecar: dict, tol: float) -> list[str]:
    out = []
    for name, d in sidecar["drift"].items():
        flag = "ok  " if d["max_drift"] <= tol else "HIGH"
        out.append(f"{flag} {d['max_drift']:.3e}  {name}")
    out.append(f"min regularity gap {sidecar['min_gap']:.4f}; "
               f"max drift {sidecar['max_drift']:.3e} (tol {tol:.0e})")
    if sidecar["abort"]:
        out.append(f"ABORTED: {sidecar['abort']['message']}")
    return out


def trajectory_from_csv(path: Path) -> Trajectory:
    """Read a trajectory CSV back (used by tests and downstream scripts)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = int(round(np.sqrt(data.shape[1]))) - 1  # columns: 1 + n + n(n+1)
    if n + n * (n + 1) + 1 != data.shape[1]:
        raise ValueError("unexpected column count")
    t, q = data[:, 0], data[:, 1:n + 1]
    Ls = np.zeros((len(t), n, n), dtype=complex)
    iu = np.triu_indices(n)
    vals = data[:, n + 1:].reshape(len(t), -1, 2)
    Ls[:, iu[0], iu[1]] = vals[..., 0] + 1j * vals[..., 1]
    Ls = Ls + np.conj(np.transpose(np.triu(Ls, 1), (0, 2, 1)))
    return Trajectory(0, t, q, Ls, float("nan"), 0.0)
