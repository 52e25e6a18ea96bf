"""
Recompensas gaussianas de varianza unitaria.

Discretización: rejilla uniforme de paso ε/H² sobre [−L, L) con
L = 4√log(H/ε), Z = ⌊8H²√log(H/ε)/ε⌋ valores z_i = −L + (i−1)·ε/H².
La celda s es [z_s, z_{s+1}) y la masa fuera de [z_1, z_Z) va al símbolo 0.
Las filas q_m(a, ·) se normalizan explícitamente (suman 1 por telescopía
de la CDF salvo redondeo).

Momentos crudos: T̂_l(i_1..i_l) = (1/N₁) Σ_k Π_t r_t^k con a_{i_t} jugada en t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from src.config import Config
from src.design.optimal_design import CoreSet
from src.model.instance import LmabInstance, RewardSupport
from src.model.policies import History, Policy
from src.model.simulator import LmabEnvironment
from src.moments.tensors import MomentTensor, core_cells, play_cells

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiscretizationGrid:
    """Rejilla z_1..z_Z y posición del símbolo 0 en el soporte resultante."""

    epsilon: float
    horizon: int
    grid: np.ndarray
    support: RewardSupport
    zero_index: int

    @property
    def spacing(self) -> float:
        return self.epsilon / self.horizon**2

    @property
    def Z(self) -> int:
        return int(self.grid.size)

    @classmethod
    def build(cls, epsilon: float, horizon: int) -> DiscretizationGrid:
        if not 0.0 < epsilon < horizon:
            raise ValueError(f"ε debe estar en (0, H), recibido: {epsilon}")
        root = math.sqrt(math.log(horizon / epsilon))
        Z = int(math.floor(8 * horizon**2 * root / epsilon))
        if Z < 2:
            raise ValueError(f"ε={epsilon} demasiado grande: Z={Z} < 2")
        grid = -4.0 * root + np.arange(Z) * (epsilon / horizon**2)

        hit = np.flatnonzero(np.isclose(grid, 0.0, rtol=0.0, atol=1e-12))
        if hit.size:
            values = grid.copy()
            values[hit[0]] = 0.0
            zero_index = int(hit[0])
        else:
            zero_index = int(np.searchsorted(grid, 0.0))
            values = np.insert(grid, zero_index, 0.0)
        support = RewardSupport(tuple(values.tolist()), bounded=False)
        return cls(epsilon, horizon, grid, support, zero_index)

    def _grid_to_support(self) -> np.ndarray:
        """Índice en el soporte de cada z_i de la rejilla."""
        idx = np.arange(self.Z)
        if self.support.size == self.Z:
            return idx
        return np.where(idx >= self.zero_index, idx + 1, idx)

    def quantize(self, rewards: np.ndarray) -> np.ndarray:
        """
        r ↦ r̄: z_s si r ∈ [z_s, z_{s+1}), 0 fuera de [z_1, z_Z).
        Devuelve valores exactos del soporte (el z_i próximo a 0 sale como 0.0).
        """
        r = np.asarray(rewards, dtype=float)
        cell = np.floor((r - self.grid[0]) / self.spacing).astype(np.int64)
        inside = (r >= self.grid[0]) & (r < self.grid[-1]) & (cell >= 0) & (cell < self.Z - 1)
        out = np.zeros_like(r)
        out[inside] = self.support.array[self._grid_to_support()[cell[inside]]]
        return out

    def cell_masses(self, means: np.ndarray) -> np.ndarray:
        """q(·, z) sobre el soporte para cada media (…, support.size)."""
        mu = np.asarray(means, dtype=float)[..., None]
        cdf = norm.cdf(self.grid - mu)
        cells = np.diff(cdf, axis=-1)
        probs = np.zeros(mu.shape[:-1] + (self.support.size,))
        col = self._grid_to_support()
        probs[..., col[:-1]] = cells
        overflow = np.clip(1.0 - cells.sum(axis=-1), 0.0, None)
        probs[..., self.zero_index] += overflow
        return probs / probs.sum(axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class QuantizedPolicy:
    """Ejecuta una política del modelo discretizado sobre recompensas gaussianas crudas."""

    policy: Policy
    grid: DiscretizationGrid

    @property
    def depth(self) -> int:
        return self.policy.depth

    def act(self, history: History) -> int:
        if not history:
            return self.policy.act(history)
        rewards = self.grid.quantize(np.array([r for _, r in history], dtype=float))
        return self.policy.act([(a, float(r)) for (a, _), r in zip(history, rewards)])


def discretize_gaussian(
    inst: LmabInstance, epsilon: float
) -> tuple[LmabInstance, DiscretizationGrid]:
    if not inst.is_gaussian:
        raise ValueError("discretize_gaussian requiere una instancia gaussiana")
    grid = DiscretizationGrid.build(epsilon, inst.H)

    cells = inst.M * inst.A * grid.support.size
    if cells > Config.TENSOR_GUARD:
        raise ValueError(
            f"Tabla discretizada de {cells} celdas supera la guarda {Config.TENSOR_GUARD}; "
            f"aumentar ε"
        )

    probs = grid.cell_masses(inst.means_table)
    logger.info("[Gauss] Discretización ε=%.3g: Z=%d valores", epsilon, grid.support.size)
    discrete = LmabInstance(
        weights=inst.weights,
        horizon=inst.H,
        support=grid.support,
        reward_probs=probs,
    )
    return discrete, grid


def gaussian_raw_moment_tensor(
    env: LmabEnvironment,
    core: CoreSet,
    order: int,
    n1: int,
    rng: np.random.Generator,
) -> MomentTensor:
    if not env.is_gaussian:
        raise ValueError("gaussian_raw_moment_tensor requiere modo gaussiano")
    if order > env.H:
        raise ValueError(f"Orden l={order} > H={env.H}")
    if n1 < 1:
        raise ValueError(f"N₁ debe ser ≥ 1, recibido: {n1}")

    cells = core_cells(core.n, order)
    obs = play_cells(env, core.actions[cells], n1, rng)
    entries = obs.prod(axis=2).mean(axis=1).reshape((core.n,) * order)
    logger.info("[Gauss] T̂_%d crudo: %d celdas × N₁=%d episodios", order, len(cells), n1)
    return MomentTensor(order, entries, len(cells) * n1)
