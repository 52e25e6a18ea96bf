"""
Contratos Pydantic v2 para los ficheros de instancias y políticas.

    - InstanceDocument    → fichero de instancia LMAB (JSON, UTF-8)
    - PolicyTreeDocument  → árbol de política en orden BFS

Los floats se escriben con repr de Python, así que escribir y leer devuelve
exactamente los mismos dobles.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.model.instance import LmabInstance, RewardKind, RewardSupport
from src.model.policies import PolicyTree


def _support(values: list[float]) -> RewardSupport:
    return RewardSupport(tuple(values), bounded=all(abs(v) <= 1.0 for v in values))


class InstanceDocument(BaseModel):
    """Instancia LMAB serializable: dimensiones, pesos y tablas de recompensa."""

    m: int = Field(ge=1, description="Número de contextos M")
    a: int = Field(ge=1, description="Número de acciones A")
    z: int = Field(ge=0, description="Tamaño del soporte Z (0 en modo gaussiano)")
    h: int = Field(ge=1, description="Horizonte H")
    reward_kind: Literal["discrete", "gaussian"] = "discrete"
    weights: list[float] = Field(description="Pesos de mezcla w (longitud M)")
    support: list[float] | None = Field(
        default=None, description="Valores de recompensa 𝒵 en orden creciente"
    )
    reward_probs: list[list[list[float]]] | None = Field(
        default=None, description="Tabla μ_m(a, z) como listas anidadas M×A×Z"
    )
    gaussian_means: list[list[float]] | None = Field(
        default=None, description="Medias M×A en modo gaussiano"
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_shapes(self) -> InstanceDocument:
        if len(self.weights) != self.m:
            raise ValueError(f"weights tiene {len(self.weights)} entradas, se esperaban m={self.m}")

        if self.reward_kind == "discrete":
            if self.reward_probs is None:
                raise ValueError("reward_probs es obligatorio en modo discreto")
            shape = np.shape(self.reward_probs)
            if shape != (self.m, self.a, self.z):
                raise ValueError(f"reward_probs con forma {shape}, esperada {(self.m, self.a, self.z)}")
            if self.support is not None and len(self.support) != self.z:
                raise ValueError(f"support tiene {len(self.support)} valores, se esperaban z={self.z}")
        else:
            if self.gaussian_means is None:
                raise ValueError("gaussian_means es obligatorio en modo gaussiano")
            shape = np.shape(self.gaussian_means)
            if shape != (self.m, self.a):
                raise ValueError(f"gaussian_means con forma {shape}, esperada {(self.m, self.a)}")
        return self

    def to_instance(self) -> LmabInstance:
        if self.reward_kind == "gaussian":
            return LmabInstance(
                weights=np.array(self.weights),
                horizon=self.h,
                reward_kind=RewardKind.GAUSSIAN,
                gaussian_means=np.array(self.gaussian_means),
            )
        values = self.support if self.support is not None else list(np.linspace(0.0, 1.0, self.z))
        return LmabInstance(
            weights=np.array(self.weights),
            horizon=self.h,
            support=_support(values),
            reward_probs=np.array(self.reward_probs),
        )

    @classmethod
    def from_instance(cls, inst: LmabInstance) -> InstanceDocument:
        return cls(
            m=inst.M,
            a=inst.A,
            z=inst.Z,
            h=inst.H,
            reward_kind=inst.reward_kind.value,
            weights=inst.weights.tolist(),
            support=None if inst.support is None else list(inst.support.values),
            reward_probs=None if inst.reward_probs is None else inst.reward_probs.tolist(),
            gaussian_means=None if inst.gaussian_means is None else inst.gaussian_means.tolist(),
        )


class PolicyTreeDocument(BaseModel):
    """Árbol de política: una acción por nodo de historia, en orden BFS."""

    a: int = Field(ge=1)
    depth: int = Field(ge=1)
    support: list[float] = Field(min_length=2)
    actions: list[int]

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_actions(self) -> PolicyTreeDocument:
        expected = sum(len(self.support) ** t for t in range(self.depth))
        if len(self.actions) != expected:
            raise ValueError(f"Se esperaban {expected} acciones BFS, recibido {len(self.actions)}")
        bad = [x for x in self.actions if not 0 <= x < self.a]
        if bad:
            raise ValueError(f"Acciones fuera de rango [0, {self.a}): {bad[:5]}")
        return self

    def to_policy(self) -> PolicyTree:
        return PolicyTree.from_bfs_actions(self.actions, _support(self.support), self.depth)

    @classmethod
    def from_policy(cls, tree: PolicyTree, A: int) -> PolicyTreeDocument:
        return cls(
            a=A,
            depth=tree.depth,
            support=list(tree.support.values),
            actions=tree.compile().actions.tolist(),
        )
