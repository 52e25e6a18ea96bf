"""
EM para mezclas de productos de Bernoulli sobre datos núcleo.

    l_N(θ) = (1/N) Σ_k log Σ_m w_m Π_t ν_m(i_t)^{b_t} (1 − ν_m(i_t))^{1−b_t}

ν se recorta a [1e-9, 1 − 1e-9] para que el logaritmo sea finito. El M-step
maximiza sobre esa misma caja, así que l_N no decrece nunca.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from src.mle.dataset import MleDataset
from src.moments.params import LatentParams

logger = logging.getLogger(__name__)

LIKELIHOOD_CLIP = 1e-9
_EMPTY_COUNT = 1e-12


@dataclass(frozen=True, eq=False)
class EmState:
    params: LatentParams
    log_likelihood: float
    responsibilities: np.ndarray
    iteration: int = 0


def _log_joint(data: MleDataset, params: LatentParams) -> np.ndarray:
    """(N × M): log w_m + log Π_t Bernoulli."""
    nu = np.clip(params.core_values, LIKELIHOOD_CLIP, 1.0 - LIKELIHOOD_CLIP)
    with np.errstate(divide="ignore"):
        log_w = np.log(params.weights)
    return log_w + data.counts1 @ np.log(nu).T + data.counts0 @ np.log1p(-nu).T


def _e_step(data: MleDataset, params: LatentParams) -> tuple[np.ndarray, float]:
    log_joint = _log_joint(data, params)
    log_norm = logsumexp(log_joint, axis=1, keepdims=True)
    resp = np.exp(log_joint - log_norm)
    ll = float(log_norm.mean()) if data.N else 0.0
    return resp, ll


def log_likelihood(data: MleDataset, params: LatentParams) -> float:
    if data.N == 0:
        return 0.0
    return float(logsumexp(_log_joint(data, params), axis=1).mean())


def initial_state(data: MleDataset, params: LatentParams) -> EmState:
    resp, ll = _e_step(data, params)
    return EmState(params, ll, resp, 0)


def em_step(data: MleDataset, state: EmState) -> EmState:
    if data.N == 0:
        return state

    resp = state.responsibilities
    weights = resp.mean(axis=0)

    hits = resp.T @ data.counts1
    totals = hits + resp.T @ data.counts0
    prev = state.params.core_values
    with np.errstate(invalid="ignore", divide="ignore"):
        nu = np.where(totals >= _EMPTY_COUNT, hits / totals, prev)
    nu = np.clip(nu, LIKELIHOOD_CLIP, 1.0 - LIKELIHOOD_CLIP)

    params = LatentParams(weights / weights.sum(), nu)
    new_resp, ll = _e_step(data, params)
    return EmState(params, ll, new_resp, state.iteration + 1)


def em_fit(
    data: MleDataset,
    init: LatentParams,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> EmState:
    """Itera em_step hasta |Δ l_N| < tol o max_iter."""
    state = initial_state(data, init)
    for _ in range(max_iter):
        nxt = em_step(data, state)
        delta = nxt.log_likelihood - state.log_likelihood
        state = nxt
        if abs(delta) < tol:
            break
    logger.debug(
        "[EM] %d iteraciones, l_N=%.10g (N=%d)", state.iteration, state.log_likelihood, data.N
    )
    return state


# ============================================================================
# DIAGNÓSTICO DE SEPARACIÓN
# ============================================================================


@dataclass(frozen=True)
class SeparationReport:
    """Error por componente tras emparejar θ̂ con la verdad."""

    matching: tuple[int, ...]
    core_errors: np.ndarray
    weight_errors: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.core_errors.max())


def separation_diagnostic(params: LatentParams, truth: LatentParams) -> SeparationReport:
    """Emparejamiento óptimo por ‖ν̂ − ν*‖∞ (asignación húngara)."""
    if params.M != truth.M or params.n != truth.n:
        raise ValueError("θ̂ y θ* deben tener las mismas dimensiones")
    cost = np.abs(truth.core_values[:, None, :] - params.core_values[None, :, :]).max(axis=2)
    rows, cols = linear_sum_assignment(cost)
    return SeparationReport(
        matching=tuple(int(c) for c in cols),
        core_errors=cost[rows, cols],
        weight_errors=np.abs(truth.weights[rows] - params.weights[cols]),
    )
