"""
Datos MLE sobre coordenadas núcleo.

En cada paso de cada episodio se elige i_t uniforme en [n], se juega a_{i_t}
y se registra b_t = 1{r_t = z_{i_t}}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.design.optimal_design import CoreSet
from src.model.simulator import LmabEnvironment
from src.moments.params import LatentParams
from src.moments.tensors import MomentTensor


@dataclass(frozen=True, eq=False)
class MleDataset:
    """N episodios: índices núcleo (N × H) e indicadores (N × H)."""

    indices: np.ndarray
    indicators: np.ndarray
    n: int

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=int)
        ind = np.asarray(self.indicators, dtype=np.int8)
        if idx.ndim != 2 or idx.shape != ind.shape:
            raise ValueError(f"Formas incompatibles: indices {idx.shape}, indicators {ind.shape}")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ValueError(f"Índices núcleo fuera de [0, {self.n})")
        if ind.size and not np.isin(ind, (0, 1)).all():
            raise ValueError("Los indicadores deben ser 0/1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "indicators", ind)

    @property
    def N(self) -> int:
        return int(self.indices.shape[0])

    @property
    def H(self) -> int:
        return int(self.indices.shape[1])

    @cached_property
    def counts1(self) -> np.ndarray:
        """(N × n): veces con b_t = 1 en el índice j."""
        out = np.zeros((self.N, self.n))
        rows = np.repeat(np.arange(self.N), self.H)
        np.add.at(out, (rows, self.indices.ravel()), self.indicators.ravel())
        return out

    @cached_property
    def counts0(self) -> np.ndarray:
        out = np.zeros((self.N, self.n))
        rows = np.repeat(np.arange(self.N), self.H)
        np.add.at(out, (rows, self.indices.ravel()), 1 - self.indicators.ravel())
        return out


def collect_mle_data(
    env: LmabEnvironment, core: CoreSet, N: int, rng: np.random.Generator
) -> MleDataset:
    if N < 0:
        raise ValueError(f"N debe ser ≥ 0, recibido: {N}")
    if env.support is None:
        raise ValueError("collect_mle_data requiere modo discreto")

    idx = rng.integers(core.n, size=(N, env.H))
    if N == 0:
        return MleDataset(idx, np.zeros_like(idx), core.n)
    core_z = np.array(core.indices, dtype=int) % env.support.size
    obs = env.sample_open_loop(core.actions[idx], rng)
    return MleDataset(idx, (obs == core_z[idx]).astype(np.int8), core.n)


def simulate_dataset(
    params: LatentParams, N: int, H: int, rng: np.random.Generator
) -> MleDataset:
    """Datos sintéticos directamente desde parámetros núcleo (ν como probabilidades)."""
    contexts = rng.choice(params.M, size=N, p=params.weights)
    idx = rng.integers(params.n, size=(N, H))
    probs = params.core_values[contexts[:, None], idx]
    return MleDataset(idx, (rng.random((N, H)) < probs).astype(np.int8), params.n)


def empirical_core_tensors(data: MleDataset, max_order: int = 3) -> list[MomentTensor]:
    """
    T̂_1..T̂_3 insesgados a partir de productos en tiempos distintos.

    Con y_t = n·b_t·e_{i_t}, 𝔼[y_t | m] = ν_m y los y_t son independientes
    dado m, así que los momentos factoriales de los conteos por episodio
    c = counts1 estiman Σ_m w_m ν_m^{⊗l}.
    """
    H, n, N = data.H, data.n, data.N
    order = min(max_order, H, 3)
    if N == 0:
        raise ValueError("No hay episodios para estimar tensores")

    c = data.counts1
    tensors = [MomentTensor(1, n * c.mean(axis=0) / H, N)]
    if order >= 2:
        P = c.T @ c / N
        T2 = (P - np.diag(c.mean(axis=0))) * n**2 / (H * (H - 1))
        tensors.append(MomentTensor(2, 0.5 * (T2 + T2.T), N))
    if order >= 3:
        raw = np.empty((n, n, n))
        for i in range(n):
            raw[i] = (c * c[:, i, None]).T @ c / N
        idx = np.arange(n)
        raw[idx, idx, :] -= P
        raw[idx, :, idx] -= P
        raw[:, idx, idx] -= P
        raw[idx, idx, idx] += 2.0 * c.mean(axis=0)
        tensors.append(MomentTensor(3, raw * n**3 / (H * (H - 1) * (H - 2)), N))
    return tensors
