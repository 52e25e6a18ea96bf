"""
Diseño G-óptimo y conjunto núcleo
=================================
Dado Φ ∈ ℝ^{d×k} (filas = pares acción-valor, columnas = base del subespacio):

    G(ρ) = Σ_i ρ(i) Φ_i Φ_iᵀ          g(ρ) = max_i Φ_iᵀ G(ρ)⁻¹ Φ_i

Kiefer–Wolfowitz: min_ρ g(ρ) = k, y existe ρ con g(ρ) ≤ 2k y soporte
≤ 4k log log k + 16. Se resuelve con Frank–Wolfe con pasos de alejamiento
sobre el objetivo D-óptimo log det G(ρ) (búsqueda lineal exacta), seguido de
un redondeo del soporte.

El conjunto núcleo son las filas del soporte; la matriz de reconstrucción
T̂ = Φ G(ρ)⁻¹ Φ_Sᵀ diag(ρ_S) recupera cualquier elemento del span a partir de
sus coordenadas núcleo, con ‖T̂_{i,:}‖₁ ≤ √g(ρ) ≤ √(2k).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

_REG = 1e-12
_ZERO_ROW = 1e-14


def support_bound(k: int) -> int:
    """⌊4k log log k + 16⌋ (16 para k = 1, donde log log k no está definido)."""
    if k < 2:
        return 16
    return int(math.floor(4 * k * math.log(math.log(k)) + 16))


@dataclass(frozen=True)
class FeatureMatrix:
    """Φ (d × k) con el par (acción, valor) que indexa cada fila."""

    rows: np.ndarray
    row_index: tuple[tuple[int, Hashable], ...]

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError(f"Φ debe ser una matriz, forma {rows.shape}")
        d, k = rows.shape
        if k > d:
            raise ValueError(f"Φ con k={k} columnas > d={d} filas")
        if len(self.row_index) != d:
            raise ValueError(f"row_index tiene {len(self.row_index)} entradas, d={d}")
        if np.linalg.matrix_rank(rows) < k:
            raise ValueError(f"Φ sin rango completo de columnas (k={k})")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "row_index", tuple(tuple(p) for p in self.row_index))

    @property
    def d(self) -> int:
        return int(self.rows.shape[0])

    @property
    def k(self) -> int:
        return int(self.rows.shape[1])

    @classmethod
    def from_array(cls, rows: np.ndarray) -> FeatureMatrix:
        """Índice trivial (i, None) por fila, para diseños sin pares acción-valor."""
        return cls(rows, tuple((i, None) for i in range(len(rows))))


@dataclass(frozen=True)
class DesignWeights:
    rho: np.ndarray
    support: tuple[int, ...]
    g_value: float
    design_matrix: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class CoreSet:
    """Pares núcleo {(a_j, z_j)}, su diseño y la matriz de reconstrucción T̂ (d × n)."""

    pairs: tuple[tuple[int, Hashable], ...]
    indices: tuple[int, ...]
    design: DesignWeights
    transform: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def actions(self) -> np.ndarray:
        return np.array([int(a) for a, _ in self.pairs], dtype=int)

    def restrict(self, full: np.ndarray) -> np.ndarray:
        """Coordenadas núcleo de vectores completos (último eje de longitud d)."""
        return np.asarray(full)[..., list(self.indices)]


# ============================================================================
# SOLVER
# ============================================================================


def _design_matrix(X: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return X.T @ (rho[:, None] * X)


def _leverages(X: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    G = _design_matrix(X, rho)
    G_inv = np.linalg.inv(G + _REG * np.eye(X.shape[1]))
    return np.einsum("ij,jk,ik->i", X, G_inv, X), G


def g_value(X: np.ndarray, rho: np.ndarray) -> float:
    return float(_leverages(X, rho)[0].max())


def solve_optimal_design(
    phi: FeatureMatrix,
    tolerance: float = 1e-2,
    max_iter: int = 10_000,
) -> DesignWeights:
    """Frank–Wolfe con pasos de alejamiento hasta g(ρ) ≤ (1+tol)·k, luego redondeo."""
    X = phi.rows
    d, k = X.shape
    norms = (X**2).sum(axis=1)
    candidates = norms > _ZERO_ROW * norms.max()

    rho = np.zeros(d)
    rho[candidates] = 1.0 / candidates.sum()

    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        lev, _ = _leverages(X, rho)
        j = int(np.argmax(lev))
        g = float(lev[j])
        if g <= (1.0 + tolerance) * k:
            converged = True
            break

        support = np.flatnonzero(rho > 0)
        i = int(support[np.argmin(lev[support])])
        toward_gap = g - k
        away_gap = k - float(lev[i])

        if toward_gap >= away_gap or rho[i] >= 1.0 - 1e-15:
            gamma = (g - k) / (k * (g - 1.0))
            rho *= 1.0 - gamma
            rho[j] += gamma
        else:
            max_drop = rho[i] / (1.0 - rho[i])
            li = float(lev[i])
            step = max_drop if li <= 1.0 else min((k - li) / (k * (li - 1.0)), max_drop)
            rho *= 1.0 + step
            rho[i] -= step
            if step == max_drop or rho[i] < 1e-15:
                rho[i] = 0.0
            rho /= rho.sum()

    g_raw = g_value(X, rho)
    logger.debug("[Diseño] FW: %d iteraciones, g=%.6g (k=%d, d=%d)", iteration, g_raw, k, d)
    if g_raw > 2 * k:
        raise RuntimeError(
            f"Frank–Wolfe no alcanzó g(ρ) ≤ 2k={2 * k} en {max_iter} iteraciones "
            f"(g={g_raw:.6g}); Φ de rango completo no debería producir esto"
        )

    rho = _round_support(X, rho, k)
    lev, G = _leverages(X, rho)
    support = tuple(int(i) for i in np.flatnonzero(rho > 0))
    rho.setflags(write=False)
    return DesignWeights(
        rho=rho,
        support=support,
        g_value=float(lev.max()),
        design_matrix=G,
        iterations=iteration,
        converged=converged,
    )


def _round_support(X: np.ndarray, rho: np.ndarray, k: int) -> np.ndarray:
    """Descarta pesos < 1e-6/d y luego los menores mientras g ≤ 2k y soporte > cota."""
    d = X.shape[0]
    limit = 2.0 * k

    trial = np.where(rho < 1e-6 / d, 0.0, rho)
    trial /= trial.sum()
    if g_value(X, trial) <= limit:
        rho = trial

    bound = support_bound(k)
    while np.count_nonzero(rho) > bound:
        support = np.flatnonzero(rho > 0)
        order = support[np.argsort(rho[support], kind="stable")]
        for i in order:
            trial = rho.copy()
            trial[i] = 0.0
            trial /= trial.sum()
            if g_value(X, trial) <= limit:
                rho = trial
                break
        else:
            logger.warning(
                "[Diseño] Redondeo detenido con soporte %d > cota %d",
                np.count_nonzero(rho),
                bound,
            )
            break
    return rho


# ============================================================================
# CONJUNTO NÚCLEO Y RECONSTRUCCIÓN
# ============================================================================


def select_core_coordinates(phi: FeatureMatrix, design: DesignWeights) -> CoreSet:
    X = phi.rows
    S = list(design.support)
    G = _design_matrix(X, design.rho)
    G_inv = np.linalg.inv(G + _REG * np.eye(phi.k))
    transform = X @ G_inv @ X[S].T * design.rho[S][None, :]
    transform.setflags(write=False)
    return CoreSet(
        pairs=tuple(phi.row_index[i] for i in S),
        indices=tuple(S),
        design=design,
        transform=transform,
    )


def reconstruct_from_core(core: CoreSet, core_values: Sequence[float] | np.ndarray) -> np.ndarray:
    """T̂ · v para v de longitud n, o fila a fila para una matriz (M × n)."""
    values = np.asarray(core_values, dtype=float)
    if values.shape[-1] != core.n:
        raise ValueError(f"Se esperaban {core.n} coordenadas núcleo, recibido {values.shape[-1]}")
    return values @ core.transform.T
