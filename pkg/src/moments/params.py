"""Parámetros latentes θ = {(ŵ_m, ν̂_m)} sobre coordenadas núcleo."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LatentParams:
    """
    Pesos ŵ (M,) y valores núcleo ν̂ (M × n).

    ν̂_m(j) = μ_m(a_j, z_j) en modo discreto, o la media del brazo a_j en
    modo gaussiano. La caja de ν̂ la impone quien ajusta, no este tipo.
    """

    weights: np.ndarray
    core_values: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        v = np.array(self.core_values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if w.ndim != 1 or v.ndim != 2 or v.shape[0] != w.size:
            raise ValueError(f"Formas incompatibles: weights {w.shape}, core_values {v.shape}")
        if np.any(w < -_WEIGHT_TOL) or abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"ŵ debe estar en el símplex, recibido: {w.tolist()}")
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "core_values", v)

    @property
    def M(self) -> int:
        return int(self.weights.size)

    @property
    def n(self) -> int:
        return int(self.core_values.shape[1])

    def permuted(self, order: list[int] | np.ndarray) -> LatentParams:
        order = np.asarray(order, dtype=int)
        return LatentParams(self.weights[order], self.core_values[order])

    def clipped(self, lower: float = 0.0, upper: float = 1.0, w_min: float = 0.0) -> LatentParams:
        """Proyección simple a Θ: ν̂ a la caja, ŵ con suelo w_min y renormalizado."""
        w = np.maximum(self.weights, w_min)
        return LatentParams(w / w.sum(), np.clip(self.core_values, lower, upper))

    @classmethod
    def uniform(cls, M: int, n: int, value: float = 0.5) -> LatentParams:
        return cls(np.full(M, 1.0 / M), np.full((M, n), value))
