"""
Modelo LMAB: tipos de dominio
==============================
Contratos numéricos del bandido multi-brazo latente:

    - RewardSupport     → soporte finito de recompensas 𝒵
    - LmabInstance      → (w, μ_m(a, z)) o medias gaussianas, con M, A, Z, H
    - Episode           → trayectoria con contexto oculto (solo diagnóstico)
    - LearnerEpisode    → vista del aprendiz, sin contexto
    - SeparationConfig  → separación γ entre contextos

Las instancias son inmutables: los arrays se marcan como read-only al construir,
por lo que pueden compartirse entre workers sin copias.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_SUM_TOL = 1e-12


class RewardKind(str, Enum):
    """Tipo de distribución de recompensas."""

    DISCRETE = "discrete"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class RewardSupport:
    """Valores de recompensa ordenados; |z| ≤ 1 salvo soportes discretizados."""

    values: tuple[float, ...]
    bounded: bool = True

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)

        if len(values) < 2:
            raise ValueError(f"El soporte necesita Z ≥ 2 valores, recibido: {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"Valores de soporte no estrictamente crecientes: {values}")
        if self.bounded and any(abs(v) > 1.0 for v in values):
            raise ValueError(f"Soporte acotado exige |z| ≤ 1, recibido: {values}")

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def index_of(self, value: float) -> int:
        """Índice del valor de recompensa; ValueError si no pertenece al soporte."""
        idx = int(np.searchsorted(self.values, value))
        if idx < len(self.values) and self.values[idx] == value:
            return idx
        raise ValueError(f"Recompensa {value} fuera del soporte {self.values[:5]}...")


BERNOULLI_SUPPORT = RewardSupport((0.0, 1.0))


def _frozen_array(values: object) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LmabInstance:
    """
    Instancia LMAB (w, μ) de horizonte H.

    La construcción solo valida formas; las invariantes numéricas (sumas,
    cotas) las comprueba `validate_instance`, que devuelve un reporte.
    """

    weights: np.ndarray
    horizon: int
    support: RewardSupport | None = None
    reward_probs: np.ndarray | None = None
    reward_kind: RewardKind = RewardKind.DISCRETE
    gaussian_means: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        object.__setattr__(self, "reward_kind", RewardKind(self.reward_kind))

        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ValueError(f"weights debe ser un vector no vacío, forma {self.weights.shape}")
        if self.horizon < 1:
            raise ValueError(f"El horizonte H debe ser ≥ 1, recibido: {self.horizon}")

        if self.reward_kind is RewardKind.DISCRETE:
            if self.support is None or self.reward_probs is None:
                raise ValueError("Modo discreto requiere support y reward_probs")
            probs = _frozen_array(self.reward_probs)
            if probs.ndim != 3 or probs.shape[0] != self.weights.size:
                raise ValueError(
                    f"reward_probs debe tener forma (M, A, Z) con M={self.weights.size}, "
                    f"recibido: {probs.shape}"
                )
            if probs.shape[2] != self.support.size:
                raise ValueError(
                    f"Z de reward_probs ({probs.shape[2]}) ≠ tamaño del soporte "
                    f"({self.support.size})"
                )
            object.__setattr__(self, "reward_probs", probs)
        else:
            if self.gaussian_means is None:
                raise ValueError("Modo gaussiano requiere gaussian_means (M × A)")
            means = _frozen_array(self.gaussian_means)
            if means.ndim != 2 or means.shape[0] != self.weights.size:
                raise ValueError(f"gaussian_means debe ser (M, A), recibido: {means.shape}")
            object.__setattr__(self, "gaussian_means", means)

    # ------------------------------------------------------------------ #
    # DIMENSIONES                                                          #
    # ------------------------------------------------------------------ #

    @property
    def M(self) -> int:
        return int(self.weights.size)

    @property
    def A(self) -> int:
        if self.reward_kind is RewardKind.GAUSSIAN:
            return int(self.means_table.shape[1])
        return int(self.probs.shape[1])

    @property
    def Z(self) -> int:
        return 0 if self.support is None else self.support.size

    @property
    def H(self) -> int:
        return int(self.horizon)

    @property
    def is_gaussian(self) -> bool:
        return self.reward_kind is RewardKind.GAUSSIAN

    @property
    def probs(self) -> np.ndarray:
        if self.reward_probs is None:
            raise ValueError("La instancia gaussiana no tiene tabla μ_m(a, z)")
        return self.reward_probs

    @property
    def means_table(self) -> np.ndarray:
        if self.gaussian_means is None:
            raise ValueError("La instancia discreta no tiene medias gaussianas")
        return self.gaussian_means

    # ------------------------------------------------------------------ #
    # DERIVADOS                                                            #
    # ------------------------------------------------------------------ #

    def mean_rewards(self) -> np.ndarray:
        """Tabla M × A de recompensas medias por contexto."""
        if self.is_gaussian:
            return np.array(self.means_table)
        assert self.support is not None
        return self.probs @ self.support.array

    def mixture_probs(self, action: int) -> np.ndarray:
        """Σ_m w_m μ_m(a, ·)."""
        return self.weights @ self.probs[:, action, :]

    def flat_reward_vectors(self) -> np.ndarray:
        """Vectores μ_m ∈ ℝ^{A·Z} (fila m), orden (a, z) con a mayor."""
        if self.is_gaussian:
            return np.array(self.means_table)
        return self.probs.reshape(self.M, -1)

    def with_horizon(self, horizon: int) -> LmabInstance:
        return LmabInstance(
            weights=self.weights,
            horizon=horizon,
            support=self.support,
            reward_probs=self.reward_probs,
            reward_kind=self.reward_kind,
            gaussian_means=self.gaussian_means,
        )

    def permuted(self, order: list[int] | np.ndarray) -> LmabInstance:
        """Reetiqueta contextos (misma instancia salvo orden)."""
        order = np.asarray(order, dtype=int)
        return LmabInstance(
            weights=self.weights[order],
            horizon=self.horizon,
            support=self.support,
            reward_probs=None if self.reward_probs is None else self.reward_probs[order],
            reward_kind=self.reward_kind,
            gaussian_means=None if self.gaussian_means is None else self.gaussian_means[order],
        )


@dataclass(frozen=True)
class Episode:
    """Trayectoria completa; `context` se conserva solo para diagnóstico."""

    context: int
    actions: tuple[int, ...]
    rewards: tuple[float, ...]

    def learner_view(self) -> LearnerEpisode:
        return LearnerEpisode(actions=self.actions, rewards=self.rewards)


@dataclass(frozen=True)
class LearnerEpisode:
    """Lo que observa el aprendiz: acciones y recompensas, nunca el contexto."""

    actions: tuple[int, ...]
    rewards: tuple[float, ...]

    @property
    def history(self) -> list[tuple[int, float]]:
        return list(zip(self.actions, self.rewards))


@dataclass(frozen=True)
class SeparationConfig:
    """Separación γ: ∀ m ≠ m′ ∃ a con ‖μ_m(a,·) − μ_m′(a,·)‖₁ ≥ γ."""

    gamma: float
    enforced: bool = True
    max_retries: int = 10_000

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError(f"gamma debe ser > 0, recibido: {self.gamma}")

    def is_satisfied(self, reward_probs: np.ndarray) -> bool:
        M = reward_probs.shape[0]
        for m in range(M):
            for k in range(m + 1, M):
                gaps = np.abs(reward_probs[m] - reward_probs[k]).sum(axis=1)
                if gaps.max() < self.gamma:
                    return False
        return True


# ============================================================================
# VALIDACIÓN (basada en reporte, no lanza)
# ============================================================================


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def add(self, code: str, detail: str) -> None:
        self.violations.append(Violation(code, detail))


def validate_instance(inst: LmabInstance) -> ValidationReport:
    """
    Comprueba las invariantes numéricas de una instancia.

    Códigos posibles: weights_negative, weights_sum, row_negative, row_sum,
    mean_bound, non_finite.
    """
    report = ValidationReport()
    w = inst.weights

    if not np.all(np.isfinite(w)):
        report.add("non_finite", "weights contiene valores no finitos")
    if np.any(w < 0):
        report.add("weights_negative", f"pesos negativos: {w[w < 0].tolist()}")
    total = float(w.sum())
    if abs(total - 1.0) > _SUM_TOL:
        report.add("weights_sum", f"los pesos suman {total:.12g}")

    if inst.is_gaussian:
        means = inst.means_table
        if not np.all(np.isfinite(means)):
            report.add("non_finite", "gaussian_means contiene valores no finitos")
        elif np.any(np.abs(means) > 1.0):
            report.add("mean_bound", f"|media| máxima {np.abs(means).max():.6g} > 1")
        return report

    probs = inst.probs
    if not np.all(np.isfinite(probs)):
        report.add("non_finite", "reward_probs contiene valores no finitos")
        return report
    if np.any(probs < 0):
        report.add("row_negative", f"{int((probs < 0).sum())} probabilidad(es) negativa(s)")
    row_sums = probs.sum(axis=2)
    bad = np.argwhere(np.abs(row_sums - 1.0) > _SUM_TOL)
    for m, a in bad[:10]:
        report.add("row_sum", f"fila (m={m}, a={a}) suma {row_sums[m, a]:.12g}")

    return report
