"""
Paso 3: del ajuste núcleo al modelo empírico B̂.

    v̂_m = T̂ ν̂_m        μ̃_m = clip(v̂_m, 0, 1)        μ̂_m(a, ·) = μ̃_m(a, ·) / Σ_z μ̃_m(a, z)

Las filas que quedan a cero tras el recorte se sustituyen por la uniforme
sobre 𝒵 y se anotan en el reporte.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.design.optimal_design import CoreSet, reconstruct_from_core
from src.model.instance import LmabInstance, RewardKind, RewardSupport
from src.moments.params import LatentParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClipReport:
    """Masa recortada y factor de normalización por fila (m, a)."""

    clipped_mass: np.ndarray
    normalizers: np.ndarray
    degenerate_rows: tuple[tuple[int, int], ...] = ()

    @property
    def total_clipped(self) -> float:
        return float(self.clipped_mass.sum())


@dataclass(frozen=True, eq=False)
class RecoveredModel:
    instance: LmabInstance
    pre_clip: np.ndarray
    clip_report: ClipReport


def clip_and_normalize(raw: np.ndarray) -> tuple[np.ndarray, ClipReport]:
    """Recorte a [0, 1] y normalización por la última dimensión de (M, A, Z)."""
    clipped = np.clip(raw, 0.0, 1.0)
    mass = np.abs(raw - clipped).sum(axis=2)
    norm = clipped.sum(axis=2)

    degenerate = np.argwhere(norm <= 0.0)
    Z = raw.shape[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(norm[..., None] > 0.0, clipped / norm[..., None], 1.0 / Z)
    if degenerate.size:
        logger.warning("[Paso 3] %d fila(s) nulas tras el recorte → uniforme", len(degenerate))

    report = ClipReport(
        clipped_mass=mass,
        normalizers=norm,
        degenerate_rows=tuple((int(m), int(a)) for m, a in degenerate),
    )
    return probs, report


def recover_reward_model(
    params: LatentParams,
    core: CoreSet,
    support: RewardSupport,
    horizon: int,
) -> RecoveredModel:
    d = core.transform.shape[0]
    Z = support.size
    if d % Z:
        raise ValueError(f"Dimensión d={d} no es múltiplo de Z={Z}")

    raw = reconstruct_from_core(core, params.core_values).reshape(params.M, d // Z, Z)
    probs, report = clip_and_normalize(raw)
    logger.info(
        "[Paso 3] Modelo recuperado: M=%d, A=%d, masa recortada %.3g",
        params.M,
        d // Z,
        report.total_clipped,
    )
    instance = LmabInstance(
        weights=params.weights,
        horizon=horizon,
        support=support,
        reward_probs=probs,
    )
    return RecoveredModel(instance, raw, report)


def recover_gaussian_means(params: LatentParams, core: CoreSet, horizon: int) -> LmabInstance:
    """Medias μ̂_m = T̂ ν̂_m sin recorte (régimen identificable gaussiano)."""
    means = reconstruct_from_core(core, params.core_values)
    return LmabInstance(
        weights=params.weights,
        horizon=horizon,
        reward_kind=RewardKind.GAUSSIAN,
        gaussian_means=means,
    )
