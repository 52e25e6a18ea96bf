"""
Tensores de momentos sobre coordenadas núcleo.

    T_l = Σ_m w_m ν_m^{⊗l}          (tensor denso n^l)

La estimación juega, para cada multi-índice (i_1, …, i_l), la secuencia de
acciones (a_{i_1}, …, a_{i_l}) durante N₁ episodios frescos y promedia
Π_t 1{r_t = z_{i_t}}. Episodios totales: n^l · N₁.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.config import Config
from src.design.optimal_design import CoreSet
from src.model.instance import LmabInstance
from src.model.simulator import LmabEnvironment
from src.moments.params import LatentParams

logger = logging.getLogger(__name__)

# filas (episodios) por lote al jugar celdas
_BATCH_ROWS = 1_000_000


@dataclass(frozen=True)
class MomentTensor:
    order: int
    entries: np.ndarray
    episodes_used: int = 0

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"El orden debe ser ≥ 1, recibido: {self.order}")
        if self.entries.ndim != self.order:
            raise ValueError(
                f"entries con {self.entries.ndim} ejes para un tensor de orden {self.order}"
            )

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])


def _check_size(dim: int, order: int) -> None:
    if dim**order > Config.TENSOR_GUARD:
        raise ValueError(
            f"Tensor de {dim}^{order} celdas supera la guarda {Config.TENSOR_GUARD}"
        )


def mixture_tensor(weights: np.ndarray, atoms: np.ndarray, order: int) -> np.ndarray:
    """Σ_m w_m a_m^{⊗order} para átomos (M × n)."""
    atoms = np.asarray(atoms, dtype=float)
    M, n = atoms.shape
    _check_size(n, order)
    cur = atoms
    for _ in range(order - 1):
        cur = cur[..., None] * atoms.reshape((M,) + (1,) * (cur.ndim - 1) + (n,))
    return np.tensordot(np.asarray(weights, dtype=float), cur, axes=1)


def exact_moment_tensor(inst: LmabInstance, core: CoreSet, order: int) -> MomentTensor:
    """T_l exacto a partir de la instancia verdadera (oráculo)."""
    nu = core.restrict(inst.flat_reward_vectors())
    return MomentTensor(order, mixture_tensor(inst.weights, nu, order), 0)


def core_cells(n: int, order: int) -> np.ndarray:
    """Todos los multi-índices de [n]^order en orden lexicográfico (n^order × order)."""
    _check_size(n, order)
    return np.array(list(itertools.product(range(n), repeat=order)), dtype=int).reshape(
        -1, order
    )


def play_cells(
    env: LmabEnvironment,
    cell_actions: np.ndarray,
    n1: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Juega N₁ episodios por celda; devuelve observaciones (celdas, N₁, l).

    Índices de soporte en modo discreto, recompensas crudas en gaussiano.
    """
    n_cells, order = cell_actions.shape
    cells_per_batch = max(1, _BATCH_ROWS // n1)
    chunks = []
    for start in range(0, n_cells, cells_per_batch):
        block = cell_actions[start : start + cells_per_batch]
        obs = env.sample_open_loop(np.repeat(block, n1, axis=0), rng)
        chunks.append(obs.reshape(len(block), n1, order))
    return np.concatenate(chunks, axis=0)


def estimate_moment_tensor(
    env: LmabEnvironment,
    core: CoreSet,
    order: int,
    n1: int,
    rng: np.random.Generator,
) -> MomentTensor:
    if order > env.H:
        raise ValueError(f"Orden l={order} > H={env.H}")
    if n1 < 1:
        raise ValueError(f"N₁ debe ser ≥ 1, recibido: {n1}")
    if env.support is None:
        raise ValueError("estimate_moment_tensor requiere modo discreto")

    Z = env.support.size
    cells = core_cells(core.n, order)
    core_z = np.array(core.indices, dtype=int) % Z
    obs = play_cells(env, core.actions[cells], n1, rng)
    hits = (obs == core_z[cells][:, None, :]).all(axis=2)
    entries = hits.mean(axis=1).reshape((core.n,) * order)

    used = len(cells) * n1
    logger.info("[Paso 2] T̂_%d estimado: %d celdas × N₁=%d episodios", order, len(cells), n1)
    return MomentTensor(order, entries, used)


def moment_residual(params: LatentParams, tensors: list[MomentTensor]) -> list[float]:
    """‖Σ_m ŵ_m ν̂_m^{⊗l} − T̂_l‖∞ para cada tensor de la lista."""
    out = []
    for tensor in tensors:
        if tensor.dim != params.n:
            raise ValueError(f"Tensor de dimensión {tensor.dim} ≠ n={params.n}")
        fitted = mixture_tensor(params.weights, params.core_values, tensor.order)
        out.append(float(np.abs(fitted - tensor.entries).max()))
    return out


def lift_tensor(entries: np.ndarray, transform: np.ndarray) -> np.ndarray:
    """Aplica T̂ (d × n) en cada modo: ℝ^{n^l} → ℝ^{d^l}."""
    _check_size(transform.shape[0], entries.ndim)
    out = entries
    for _ in range(entries.ndim):
        out = np.tensordot(out, transform, axes=([0], [1]))
    return out


def full_moment_discrepancy(inst: LmabInstance, other: LmabInstance, order: int) -> float:
    """‖Σ w_m μ_m^{⊗l} − Σ ŵ_m μ̂_m^{⊗l}‖∞ sobre (A·Z)^l."""
    lhs = mixture_tensor(inst.weights, inst.flat_reward_vectors(), order)
    rhs = mixture_tensor(other.weights, other.flat_reward_vectors(), order)
    return float(np.abs(lhs - rhs).max())


def delta_tsr_schedule(epsilon: float, M: int, Z: int, H: int, n: int) -> float:
    """
    Precisión de tensores con constante 1:

        H ≥ 2M−1:  (ε / (Z H² M^3.5 n))^{2M−1}
        H < 2M−1:  (ε/H) / (Z √(2M))^H
    """
    if H >= 2 * M - 1:
        return (epsilon / (Z * H**2 * M**3.5 * n)) ** (2 * M - 1)
    return (epsilon / H) / (Z * math.sqrt(2 * M)) ** H
