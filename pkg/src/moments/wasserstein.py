"""
Distancia de Wasserstein entre mezclas atómicas.

Transporte óptimo exacto (simplex de red de POT) con marginales (w, ŵ):

    W(θ, θ̂) = min_{π ∈ Π(w, ŵ)} Σ_{m,m′} π(m, m′) · ‖ν_m − ν̂_{m′}‖∞
"""

from __future__ import annotations

import numpy as np
import ot

from src.model.instance import LmabInstance
from src.moments.params import LatentParams

_MARGINAL_TOL = 1e-9


def optimal_transport_cost(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> float:
    """Coste del plan óptimo entre marginales a y b para la matriz de coste dada."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.shape != (a.size, b.size):
        raise ValueError(f"Coste de forma {cost.shape}, esperada {(a.size, b.size)}")
    if abs(a.sum() - b.sum()) > _MARGINAL_TOL:
        raise ValueError(f"Las marginales suman distinto: {a.sum():.12g} vs {b.sum():.12g}")
    b = b * (a.sum() / b.sum())
    return float(ot.emd2(a, b, cost))


def wasserstein_distance(p: LatentParams, q: LatentParams) -> float:
    if p.n != q.n:
        raise ValueError(f"Dimensiones núcleo distintas: {p.n} vs {q.n}")
    cost = np.abs(p.core_values[:, None, :] - q.core_values[None, :, :]).max(axis=2)
    return optimal_transport_cost(p.weights, q.weights, cost)


def max_row_l1_cost(inst: LmabInstance, other: LmabInstance) -> np.ndarray:
    """Coste (M × M̂): max_a ‖μ_m(a,·) − μ̂_{m′}(a,·)‖₁."""
    diff = np.abs(inst.probs[:, None] - other.probs[None, :])
    return diff.sum(axis=3).max(axis=2)


def model_transport_distance(inst: LmabInstance, other: LmabInstance) -> float:
    """OT entre modelos completos con coste max-fila-L1."""
    return optimal_transport_cost(inst.weights, other.weights, max_row_l1_cost(inst, other))
