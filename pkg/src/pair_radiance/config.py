"""JSON run configuration with SI-suffixed keys.

Example (binary_metric)::

    {
      "scenario": "binary_metric",
      "system": {"mass_kg": 3.97784e30, "mu": 0.5, "period_s": 3600,
                 "radius1_m": 1e7, "radius2_m": 1e7},
      "numerics": {"seed": 1},
      "output": {"format": "csv"}
    }

Validation reports every problem at once, schema violations first and
then physical invariants (non-overlap, subluminal orbit, density/mass
consistency).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, PairRadianceError
from .sources import DENSITY_RTOL, BinaryConfig, SphereConfig
from .units import C, G, OrbitInput

Scenario = Literal["sphere", "binary_dielectric", "binary_metric", "compare"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Timing(_Strict):
    omega_rad_s: Optional[float] = Field(None, gt=0)
    period_s: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _one_timing(self):
        if (self.omega_rad_s is None) == (self.period_s is None):
            raise ValueError("give exactly one of omega_rad_s or period_s")
        return self

    @property
    def omega(self) -> float:
        return self.omega_rad_s if self.omega_rad_s is not None else 2.0 * math.pi / self.period_s


class SphereSystem(_Timing):
    radius_m: float = Field(gt=0)
    orbit_radius_m: float = Field(gt=0)
    kappa: float = Field(gt=-1)


class BinarySystem(_Timing):
    mass_kg: float = Field(gt=0)
    mu: float
    radius1_m: float = Field(gt=0)
    radius2_m: float = Field(gt=0)
    density1_kg_m3: Optional[float] = Field(None, gt=0)
    density2_kg_m3: Optional[float] = Field(None, gt=0)
    kappa1: float = Field(0.0, gt=-1)
    kappa2: float = Field(0.0, gt=-1)

    @field_validator("mu")
    @classmethod
    def _mu_open_interval(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("mu must lie in the open interval (0, 1)")
        return v


class Numerics(_Strict):
    orders: int = Field(32, ge=4, le=128)
    mc_samples: int = Field(1_000_000, ge=1000)
    seed: int = Field(0, ge=0)
    tolerance: float = Field(1e-6, gt=0, le=1)
    n_events: int = Field(10_000, ge=1)
    harmonic: Optional[int] = Field(None, ge=1)
    grid_points: int = Field(19, ge=2)
    alpha_variant: Literal["paper", "rederived"] = "paper"
    numeric_report: bool = True


ScanParameter = Literal[
    "omega_rad_s", "period_s", "mass_kg", "mu", "orbit_radius_m", "radius_m",
    "radius1_m", "radius2_m", "kappa", "kappa1", "kappa2",
]


class ScanSpec(_Strict):
    parameter: ScanParameter
    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = Field(None, ge=1)
    spacing: Literal["linear", "log"] = "log"

    @model_validator(mode="after")
    def _values_or_range(self):
        has_range = None not in (self.start, self.stop, self.num)
        if (self.values is None) == (not has_range):
            raise ValueError("give either values or start/stop/num")
        if has_range and self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log spacing needs positive start and stop")
        return self

    def grid(self) -> list[float]:
        if self.values is not None:
            return list(self.values)
        space = np.geomspace if self.spacing == "log" else np.linspace
        return [float(x) for x in space(self.start, self.stop, self.num)]


class Output(_Strict):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class _Raw(_Strict):
    scenario: Scenario
    system: dict
    numerics: Numerics = Numerics()
    scan: Optional[ScanSpec] = None
    output: Output = Output()


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    system: SphereSystem | BinarySystem
    numerics: Numerics
    scan: ScanSpec | None
    output: Output
    physics: SphereConfig | BinaryConfig

    def canonical(self) -> dict:
        return {
            "scenario": self.scenario,
            "system": self.system.model_dump(),
            "numerics": self.numerics.model_dump(),
            "scan": self.scan.model_dump() if self.scan else None,
            "output": self.output.model_dump(),
        }

    @property
    def config_hash(self) -> str:
        data = self.canonical()
        data["output"].pop("path")  # where the artifact goes is not part of the run
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_updates(self, *, system: dict | None = None, numerics: dict | None = None,
                     output: dict | None = None) -> "RunConfig":
        data = self.canonical()
        for key, upd in (("system", system), ("numerics", numerics), ("output", output)):
            if upd:
                data[key] = {**data[key], **upd}
        return build_config(data)


def _fmt_loc(loc) -> str:
    return ".".join(str(p) for p in loc)


def _physics_errors(scenario: str, system) -> list[str]:
    errs = []
    omega = system.omega
    if scenario == "sphere":
        if system.radius_m >= system.orbit_radius_m:
            errs.append("system.radius_m: sphere must be smaller than its orbit (radius_m < orbit_radius_m)")
        if system.orbit_radius_m * omega / C >= 1.0:
            errs.append("system: orbital speed must be subluminal (orbit_radius_m * omega / c < 1)")
        return errs
    R = (G * system.mass_kg / omega**2) ** (1.0 / 3.0)
    if R * omega / C >= 1.0:
        errs.append("system: orbital speed must be subluminal (v_R < 1)")
    if system.radius1_m + system.radius2_m >= R:
        errs.append(
            f"system.radius1_m/radius2_m: bodies must not overlap (a1 + a2 < R = {R!r} m, "
            f"got {system.radius1_m + system.radius2_m!r} m)"
        )
    masses = (system.mu * system.mass_kg, (1.0 - system.mu) * system.mass_kg)
    for i, (a, rho) in enumerate(((system.radius1_m, system.density1_kg_m3),
                                  (system.radius2_m, system.density2_kg_m3))):
        if rho is None:
            continue
        implied = masses[i] / (4.0 * math.pi * a**3 / 3.0)
        if abs(rho / implied - 1.0) > DENSITY_RTOL:
            errs.append(
                f"system.density{i + 1}_kg_m3: inconsistent with body mass and radius "
                f"(4 pi a^3 rho / 3 must equal M_{i + 1}; expected {implied!r})"
            )
    if scenario in ("binary_dielectric", "compare") and system.kappa1 == 0.0 and system.kappa2 == 0.0:
        errs.append("system.kappa1/kappa2: a dielectric scenario needs a nonzero kappa")
    return errs


def build_config(data: dict) -> RunConfig:
    """Validate a decoded config mapping; raise :class:`ConfigError` listing all problems."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    try:
        raw = _Raw.model_validate(data)
    except ValidationError as exc:
        errors.extend(f"{_fmt_loc(e['loc'])}: {e['msg']}" for e in exc.errors())
        raw = None
    # the system block is validated against its scenario model even when
    # other sections failed, so that every problem is reported
    scenario = data.get("scenario")
    system_model = SphereSystem if scenario == "sphere" else BinarySystem
    system = None
    if isinstance(data.get("system"), dict) and scenario in ("sphere", "binary_dielectric", "binary_metric", "compare"):
        try:
            system = system_model.model_validate(data["system"])
        except ValidationError as exc:
            errors.extend(f"system.{_fmt_loc(e['loc'])}: {e['msg']}" for e in exc.errors())
    if system is not None:
        errors.extend(_physics_errors(scenario, system))
    if errors:
        raise ConfigError(errors)

    try:
        if scenario == "sphere":
            physics = SphereConfig(a=system.radius_m, kappa=system.kappa, R=system.orbit_radius_m, omega=system.omega)
        else:
            orbit = OrbitInput(system.mass_kg, system.mu, omega=system.omega_rad_s, T=system.period_s)
            physics = BinaryConfig(orbit, a1=system.radius1_m, a2=system.radius2_m,
                                   kappa1=system.kappa1, kappa2=system.kappa2,
                                   rho1=system.density1_kg_m3, rho2=system.density2_kg_m3)
    except PairRadianceError as exc:
        raise ConfigError([f"system: {exc}"]) from exc
    return RunConfig(raw.scenario, system, raw.numerics, raw.scan, raw.output, physics)


def parse_config(path) -> RunConfig:
    """Read and validate a JSON config file.

    Missing or unreadable files raise ``OSError``; malformed JSON and any
    schema or physics violation raise :class:`ConfigError`.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from exc
    return build_config(data)
