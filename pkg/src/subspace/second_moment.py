"""
Paso 1: estimación del subespacio de {μ_m}.

Cada episodio juega dos acciones uniformes a₁, a₂ en t = 1, 2 y acumula
e_{(a₁,r₁)} e_{(a₂,r₂)}ᵀ. La media cruda tiene esperanza M₂/A², así que se
guarda reescalada por A²:

    M̂₂ = A²/(2N₀) Σ_k (e₁ e₂ᵀ + e₂ e₁ᵀ)       𝔼[M̂₂] = Σ_m w_m μ_m μ_mᵀ

En modo gaussiano la matriz es A × A con r₁·r₂ en la celda (a₁, a₂).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.design.optimal_design import FeatureMatrix
from src.model.instance import LmabInstance
from src.model.simulator import LmabEnvironment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SecondMomentEstimate:
    matrix: np.ndarray
    episodes_used: int
    gaussian: bool = False


@dataclass(frozen=True)
class SubspaceEstimate:
    """Base ortonormal Û (columnas β̂_j), autovalores top-M y el (M+1)-ésimo."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    residual: float


def estimate_second_moment(
    env: LmabEnvironment, n0: int, rng: np.random.Generator
) -> SecondMomentEstimate:
    if env.H < 2:
        raise ValueError(f"La estimación de M₂ requiere H ≥ 2, recibido H={env.H}")
    if n0 < 1:
        raise ValueError(f"N₀ debe ser ≥ 1, recibido: {n0}")

    A = env.A
    actions = rng.integers(A, size=(n0, 2))
    obs = env.sample_open_loop(actions, rng)

    if env.is_gaussian:
        counts = np.zeros((A, A))
        np.add.at(counts, (actions[:, 0], actions[:, 1]), obs[:, 0] * obs[:, 1])
    else:
        assert env.support is not None
        Z = env.support.size
        rows = actions[:, 0] * Z + obs[:, 0]
        cols = actions[:, 1] * Z + obs[:, 1]
        counts = np.zeros((A * Z, A * Z))
        np.add.at(counts, (rows, cols), 1.0)

    matrix = (A * A / (2.0 * n0)) * (counts + counts.T)
    logger.info("[Paso 1] M̂₂ estimada con N₀=%d episodios, dimensión %d", n0, matrix.shape[0])
    return SecondMomentEstimate(matrix, n0, env.is_gaussian)


def exact_second_moment(inst: LmabInstance) -> SecondMomentEstimate:
    """M₂ = Σ_m w_m μ_m μ_mᵀ (o sobre medias gaussianas); no consume episodios."""
    flat = inst.flat_reward_vectors()
    matrix = flat.T @ (inst.weights[:, None] * flat)
    return SecondMomentEstimate(0.5 * (matrix + matrix.T), 0, inst.is_gaussian)


def top_m_eigenspace(est: SecondMomentEstimate, M: int) -> SubspaceEstimate:
    dim = est.matrix.shape[0]
    if not 1 <= M <= dim:
        raise ValueError(f"M={M} fuera de rango para una matriz de dimensión {dim}")

    try:
        values, vectors = scipy.linalg.eigh(est.matrix)
    except scipy.linalg.LinAlgError as err:
        raise RuntimeError(f"eigh no convergió sobre M̂₂: {err}") from err

    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    basis = vectors[:, order[:M]]

    # signo: la coordenada de mayor módulo de cada autovector es positiva
    pivots = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[pivots, np.arange(M)])
    basis = basis * np.where(signs == 0, 1.0, signs)

    residual = float(values[M]) if M < dim else 0.0
    return SubspaceEstimate(basis=basis, eigenvalues=values[:M].copy(), residual=residual)


def subspace_residual(sub: SubspaceEstimate, vector: np.ndarray) -> float:
    """‖(I − ÛÛᵀ) v‖∞."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (sub.basis.shape[0],):
        raise ValueError(f"Vector de dimensión {v.shape}, se esperaba ({sub.basis.shape[0]},)")
    return float(np.abs(v - sub.basis @ (sub.basis.T @ v)).max())


def feature_matrix_from_subspace(
    sub: SubspaceEstimate, A: int, support_values: tuple[float, ...] | None = None
) -> FeatureMatrix:
    """Φ̂ con Φ̂_{:,j}(a, z) = β̂_j(a, z); filas (a, None) en modo gaussiano."""
    if support_values is None:
        index = tuple((a, None) for a in range(A))
    else:
        index = tuple((a, z) for a in range(A) for z in support_values)
    return FeatureMatrix(sub.basis, index)


def delta_sub_schedule(epsilon: float, M: int, Z: int, H: int, w_min: float) -> float:
    """
    Precisión del subespacio en los dos regímenes (constante 1):

        H ≥ 2M−1:  ε / (2 Z M H²)
        H < 2M−1:  min(√(w_min + ε/(M H² (Z√(2M))^H)), ε/(H√M)) / (2 Z √M H)
    """
    if H >= 2 * M - 1:
        return epsilon / (2 * Z * M * H**2)
    inner = math.sqrt(w_min + epsilon / (M * H**2 * (Z * math.sqrt(2 * M)) ** H))
    return min(inner, epsilon / (H * math.sqrt(M))) / (2 * Z * math.sqrt(M) * H)
