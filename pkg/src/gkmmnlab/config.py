"""Run configuration: a JSON document validated against a strict schema.

Unknown keys are rejected and every default is materialized in the
effective configuration written next to the run's artifacts.  Complex
numbers are written as ``[re, im]`` pairs.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


Complex = tuple[float, float]


def to_complex(v: Complex) -> complex:
    return complex(v[0], v[1])


class DomainCfg(_Strict):
    Lx: float = 2 * math.pi
    Ly: float = 2 * math.pi
    Nx: int = 64
    Ny: int = 64


class Tolerances(_Strict):
    triple_numeric: float = 1e-6
    cross_layer: float = 1e-9
    cole_hopf_1d: float = 1e-10
    constraint: float = 1e-9
    b2_residual: float = 1e-6
    separability: float = 1e-8
    separability_control: float = 1e-2
    truncation: float = 1e-8
    linear_rate: float = 1e-7
    ba_interpolation: float = 1e-11
    ba_L: float = 1e-9
    ba_spread: float = 1e-9
    ba_t_flow: float = 1e-6
    ba_triple: float = 1e-6
    pauli_linear: float = 1e-8
    pauli_harmonic: float = 1e-10
    pauli_identity: float = 1e-10
    pauli_collapse: float = 1e-10
    growth: float = 10.0


class TrigCfg(_Strict):
    a0: float = 0.0
    cos: list[float] = []
    sin: list[float] = []


class PotentialCfg(_Strict):
    U: TrigCfg = TrigCfg()
    V: TrigCfg = TrigCfg()
    random_degree: Optional[int] = None
    random_amplitude: float = 1.0


class InitialCfg(_Strict):
    mean: float = 3.0
    amplitude: float = 1.0
    kmax: int = 3


class LinearCfg(_Strict):
    times: list[float] = [0.0, 0.05, 0.1]
    modal_cap: int = 15
    fd_step: float = 5e-4


class HeatCfg(_Strict):
    alpha: list[Complex]
    kappa: list[Complex]


class LatticeCfg(_Strict):
    x0: float = -1.0
    y0: float = -1.0
    Lx: float = 2.0
    Ly: float = 2.0
    Nx: int = 16
    Ny: int = 16
    t: float = 0.0


class BACfg(_Strict):
    k: int = 2
    Q: Optional[list[Complex]] = None
    p: Optional[list[Complex]] = None
    heat: Optional[list[HeatCfg]] = None
    sigma: Optional[list[int]] = None
    spectral_points: int = 10
    sample_points: int = 5
    sample_radius: float = 0.5
    richardson_step: float = 1e-3
    lattice: LatticeCfg = LatticeCfg()


class PauliCfg(_Strict):
    input: Optional[str] = None
    T: float = 0.0
    t: float = 0.05
    mean: float = 3.0
    amplitude: float = 0.5
    kmax: int = 2


class EvolveCfg(_Strict):
    dt: float = 1e-3
    steps: int = 50
    amplitude: float = 0.2
    kmax: int = 3
    input_G: Optional[str] = None
    input_S: Optional[str] = None


class AuditCfg(_Strict):
    states: int = 5
    psis: int = 3
    fd_step: float = 1e-3
    amplitude: float = 0.2
    kmax: int = 3


class DeriveCfg(_Strict):
    L: str = "Dx*Dy + G*Dy + S"
    H: str = "Dx^2 + Dy^2 + F*Dy + A"


class SweepRun(_Strict):
    command: str
    config: str


class SweepCfg(_Strict):
    runs: list[SweepRun] = []


class RunConfig(_Strict):
    seed: int = 0
    strict: bool = False
    out: Optional[str] = None
    domain: DomainCfg = DomainCfg()
    tolerances: Tolerances = Tolerances()
    gauges: dict[str, float] = Field(default_factory=lambda: {"F": 0.0, "A": 0.0})
    potential: PotentialCfg = PotentialCfg()
    initial: InitialCfg = InitialCfg()
    linear: LinearCfg = LinearCfg()
    ba: BACfg = BACfg()
    pauli: PauliCfg = PauliCfg()
    evolve: EvolveCfg = EvolveCfg()
    audit: AuditCfg = AuditCfg()
    derive: DeriveCfg = DeriveCfg()
    sweep: SweepCfg = SweepCfg()

    @field_validator("seed")
    @classmethod
    def _seed_u64(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return v

    @field_validator("gauges")
    @classmethod
    def _gauge_keys(cls, v: dict) -> dict:
        extra = set(v) - {"F", "A"}
        if extra:
            raise ValueError(f"unknown gauge keys {sorted(extra)}")
        return {"F": float(v.get("F", 0.0)), "A": float(v.get("A", 0.0))}


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def effective_json(cfg: RunConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
