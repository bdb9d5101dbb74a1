import os
from enum import Enum
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from src.core.errors import ConfigError

HARD_CAP_QUBITS = 12


class Precision(str, Enum):
    F32 = "f32"
    F64 = "f64"


class FusionMode(str, Enum):
    NONE = "none"
    SIZE_ONLY = "size-only"
    ADAPTIVE = "adaptive"


class AppConfig(BaseModel):
    log_level: str = "INFO"
    threads_env: str = "TILEFUSE_THREADS"
    cost_model_env: str = "TILEFUSE_COST_MODEL"
    memory_budget_fraction: float = 0.8


class SimConfig(BaseModel):
    precision: Precision = Precision.F64
    simd_s: int = 0
    threads: int = 0

    @field_validator("simd_s")
    @classmethod
    def _simd_range(cls, v: int) -> int:
        if not 0 <= v <= 8:
            raise ValueError("simd exponent must be in [0, 8]")
        return v

    @field_validator("threads")
    @classmethod
    def _threads_range(cls, v: int) -> int:
        if v < 0:
            raise ValueError("threads must be >= 0 (0 = host logical cores)")
        return v


class KernelConfig(BaseModel):
    zero_tolerance: float = 1e-8
    one_tolerance: float = 1e-8
    force_dense: bool = False
    runtime_matrix: bool = False

    @field_validator("zero_tolerance", "one_tolerance")
    @classmethod
    def _non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("tolerances must be >= 0")
        return v


class FusionConfig(BaseModel):
    mode: FusionMode = FusionMode.SIZE_ONLY
    k_max: int = 5
    max_op_count: Optional[int] = None
    agglomerative: bool = True
    multi_traversal: bool = True
    zero_tol: float = 1e-8
    one_tol: float = 1e-8
    max_traversals: int = 64
    hard_cap: int = HARD_CAP_QUBITS

    @field_validator("zero_tol", "one_tol")
    @classmethod
    def _non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("tolerances must be >= 0")
        return v

    @field_validator("max_op_count")
    @classmethod
    def _positive_cap(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v <= 0:
            raise ValueError("max_op_count must be positive when set")
        return v

    @field_validator("max_traversals")
    @classmethod
    def _positive_traversals(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_traversals must be >= 1")
        return v

    @model_validator(mode="after")
    def _k_within_cap(self) -> "FusionConfig":
        if self.hard_cap > HARD_CAP_QUBITS:
            raise ValueError(f"hard_cap cannot exceed {HARD_CAP_QUBITS}")
        if not 1 <= self.k_max <= self.hard_cap:
            raise ValueError(f"k_max must be in [1, {self.hard_cap}]")
        return self


FUSION_PRESETS: dict[str, dict] = {
    "none": {"mode": FusionMode.NONE},
    "size-only": {"mode": FusionMode.SIZE_ONLY, "k_max": 5, "max_op_count": None},
    "paper-cpu": {"mode": FusionMode.ADAPTIVE, "k_max": 7, "max_op_count": 4096},
}


class FusionSection(BaseModel):
    preset: Optional[str] = "size-only"
    mode: Optional[FusionMode] = None
    k_max: Optional[int] = None
    max_op_count: Optional[int] = None
    agglomerative: bool = True
    multi_traversal: bool = True
    zero_tolerance: float = 1e-8
    one_tolerance: float = 1e-8
    max_traversals: int = 64

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in FUSION_PRESETS:
            raise ValueError(f"unknown fusion preset '{v}' (known: {', '.join(FUSION_PRESETS)})")
        return v


class CostModelSection(BaseModel):
    path: str = ""
    bench_n: int = 22
    k_min: int = 1
    k_max: int = 7
    thread_counts: list[int] = [1]
    repetitions: int = 3

    @model_validator(mode="after")
    def _ranges(self) -> "CostModelSection":
        if not 1 <= self.k_min <= self.k_max <= HARD_CAP_QUBITS:
            raise ValueError("costmodel k range must satisfy 1 <= k_min <= k_max <= 12")
        if self.bench_n <= self.k_max:
            raise ValueError("bench_n must exceed the largest benchmarked gate size")
        if not self.thread_counts or any(t < 1 for t in self.thread_counts):
            raise ValueError("thread_counts must list positive integers")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        return self


class TileFuseConfig(BaseModel):
    app: AppConfig = AppConfig()
    sim: SimConfig = SimConfig()
    kernel: KernelConfig = KernelConfig()
    fusion: FusionSection = FusionSection()
    costmodel: CostModelSection = CostModelSection()


def build_fusion_config(section: FusionSection) -> FusionConfig:
    """Resolve a preset plus explicit overrides into a validated FusionConfig."""
    fields: dict = {}
    if section.preset:
        fields.update(FUSION_PRESETS[section.preset])
    if section.mode is not None:
        fields["mode"] = section.mode
    if section.k_max is not None:
        fields["k_max"] = section.k_max
    if section.max_op_count is not None:
        fields["max_op_count"] = section.max_op_count
    fields.update(
        agglomerative=section.agglomerative,
        multi_traversal=section.multi_traversal,
        zero_tol=section.zero_tolerance,
        one_tol=section.one_tolerance,
        max_traversals=section.max_traversals,
    )
    try:
        return FusionConfig(**fields)
    except ValidationError as e:
        raise ConfigError(f"invalid fusion configuration: {first_error(e)}") from e


def resolve_threads(config: TileFuseConfig) -> int:
    if config.sim.threads:
        return config.sim.threads
    raw = os.environ.get(config.app.threads_env, "")
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigError(f"{config.app.threads_env} must be an integer, got '{raw}'") from e
        if value < 1:
            raise ConfigError(f"{config.app.threads_env} must be >= 1")
        return value
    return os.cpu_count() or 1


def resolve_cost_model_path(config: TileFuseConfig) -> str:
    return config.costmodel.path or os.environ.get(config.app.cost_model_env, "")


def load_config(path: str = "config/tilefuse.yml") -> TileFuseConfig:
    resolved = Path(path).resolve()
    if not resolved.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(resolved) as f:
        data = yaml.safe_load(f) or {}
    return parse_config(data)


def parse_config(data: dict) -> TileFuseConfig:
    try:
        return TileFuseConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {first_error(e)}") from e


def first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    loc = ".".join(str(p) for p in err.get("loc", ()))
    return f"{loc}: {err.get('msg', '')}" if loc else err.get("msg", "")
