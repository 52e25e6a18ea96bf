"""
Contratos Pydantic v2 para configuraciones de ejecución.

    - GeneratorParams  → instancia aleatoria (m, a, z, h, rango, separación)
    - RunConfigSchema  → una ejecución de pipeline (`lmab run`)
    - SweepSpec        → barrido sobre H, M o N (`lmab sweep`)

Los ficheros de configuración usan el mismo formato JSON que las instancias.
Los flags del CLI sobrescriben campos antes de validar.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from src.config import Config

PipelineName = Literal["algorithm1-moments", "ed-mle", "tensor-init-em", "ucb", "genie"]

PIPELINES: tuple[str, ...] = ("algorithm1-moments", "ed-mle", "tensor-init-em", "ucb", "genie")


class GeneratorParams(BaseModel):
    m: int = Field(ge=1, description="Contextos M")
    a: int = Field(ge=1, description="Acciones A")
    z: int = Field(default=2, ge=2, description="Tamaño del soporte (modo discreto)")
    h: int = Field(ge=1, description="Horizonte H")
    rank: int | None = Field(default=None, ge=1, description="Rango r (por defecto min(M, A·(Z−1)))")
    gamma: float | None = Field(default=None, gt=0.0, description="Separación γ (rechazo)")
    gaussian: bool = False
    seed: int | None = Field(default=None, description="Semilla de la instancia (por defecto la de la ejecución)")

    model_config = {"extra": "forbid"}


class RunConfigSchema(BaseModel):
    """Una ejecución: fuente de instancia, pipeline y presupuestos de episodios."""

    instance_path: str | None = None
    generator: GeneratorParams | None = None
    horizon: int | None = Field(default=None, ge=1, description="Sobrescribe H de la instancia")

    pipeline: PipelineName = "ed-mle"

    # Presupuestos de episodios
    n0: int = Field(default=10_000, ge=0, description="Episodios para M̂₂ (Paso 1)")
    n1: int = Field(default=1_000, ge=0, description="Episodios por celda de tensor (Paso 2)")
    n: int = Field(default=10_000, ge=0, description="Episodios MLE / UCB")
    eval_episodes: int = Field(default=Config.EVAL_EPISODES, ge=1)
    selection_episodes: int = Field(default=1_000, ge=1, description="Episodios para elegir w_min")

    # Precisión
    epsilon: float = Field(default=0.1, gt=0.0)
    eta: float = Field(default=0.05, gt=0.0, lt=1.0)
    delta_sub: float | Literal["auto"] = "auto"
    delta_tsr: float | Literal["auto"] = "auto"
    w_min: float | None = Field(default=None, gt=0.0, le=1.0, description="None → esquema geométrico")
    w_min_levels: int = Field(default=3, ge=1)

    # Optimizadores
    design_tol: float = Field(default=1e-2, gt=0.0)
    design_max_iter: int = Field(default=10_000, ge=1)
    em_max_iter: int = Field(default=500, ge=0)
    em_tol: float = Field(default=1e-8, gt=0.0)
    restarts: int = Field(default=3, ge=0, description="Reinicios aleatorios de fit_moments")
    ucb_c: float = Field(default=2.0, gt=0.0, description="Anchura de confianza UCB1")

    oracle: bool = Field(default=False, description="Inyecta M₂ y T_l exactos (0 episodios)")
    seed: int = Config.SEED
    output: str | None = None
    record_wallclock: bool = False

    model_config = {"extra": "forbid"}

    @field_validator("delta_sub", "delta_tsr")
    @classmethod
    def positive_delta(cls, v: float | str) -> float | str:
        if v != "auto" and float(v) <= 0.0:
            raise ValueError(f"delta debe ser > 0 o 'auto', recibido: {v}")
        return v

    @model_validator(mode="after")
    def one_instance_source(self) -> RunConfigSchema:
        if (self.instance_path is None) == (self.generator is None):
            raise ValueError("Se requiere exactamente una fuente: instance_path o generator")
        return self


class SweepSpec(BaseModel):
    """Barrido de un parámetro sobre una rejilla con R repeticiones."""

    vary: Literal["h", "m", "n"] = "h"
    grid: list[int] = Field(default_factory=lambda: list(range(2, 10)), min_length=1)
    reps: int = Field(default=10, ge=1)
    pipelines: list[PipelineName] = Field(default_factory=lambda: ["ed-mle", "ucb", "genie"], min_length=1)
    workers: int = Field(default=1, ge=1)

    model_config = {"extra": "forbid"}

    @field_validator("grid")
    @classmethod
    def positive_grid(cls, v: list[int]) -> list[int]:
        if any(x < 0 for x in v):
            raise ValueError(f"La rejilla debe ser no negativa, recibido: {v}")
        return v


class SweepConfigSchema(BaseModel):
    """Fichero de `lmab sweep`: configuración base más especificación del barrido."""

    base: RunConfigSchema
    sweep: SweepSpec = Field(default_factory=SweepSpec)

    model_config = {"extra": "forbid"}
