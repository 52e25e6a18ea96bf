"""
Inicialización espectral (Jennrich) y k-means++ como respaldo.

Con T₂ = Σ w_m ν_m ν_mᵀ de rango M:
    1. blanqueo W = U₂ Λ^{-1/2} (top-M de T₂) → o_m = √w_m Wᵀν_m ortonormales
    2. T₃ blanqueado proyectado en dos direcciones aleatorias x, y:
       M_x = Σ_m w_m^{-1/2} ⟨o_m, x⟩ o_m o_mᵀ
    3. autovectores de M_x M_y⁻¹ → o_m; √w_m = o_mᵀ Wᵀ T₁
    4. ν_m = U₂ Λ^{1/2} o_m / √w_m; pesos por NNLS sobre el sistema T₁/T₂
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg
from scipy.cluster.vq import kmeans2
from scipy.optimize import nnls

from src.mle.dataset import MleDataset, empirical_core_tensors
from src.moments.params import LatentParams
from src.moments.tensors import MomentTensor

logger = logging.getLogger(__name__)

_SPECTRAL_TOL = 1e-8


def jennrich_decomposition(
    T1: np.ndarray,
    T2: np.ndarray,
    T3: np.ndarray,
    M: int,
    rng: np.random.Generator,
) -> LatentParams | None:
    """Descomposición simultánea; None si el espectro es degenerado."""
    n = T1.size
    if M > n:
        return None

    values, vectors = scipy.linalg.eigh(0.5 * (T2 + T2.T))
    order = np.argsort(values)[::-1][:M]
    lam, U = values[order], vectors[:, order]
    if lam[-1] <= _SPECTRAL_TOL * max(lam[0], 1.0):
        logger.debug("[Espectral] T₂ con rango < M (λ_M=%.3g)", lam[-1])
        return None

    W = U / np.sqrt(lam)
    T3w = np.einsum("ijk,ia,jb,kc->abc", T3, W, W, W, optimize=True)
    x, y = rng.standard_normal(M), rng.standard_normal(M)
    Mx = T3w @ x
    My = T3w @ y

    try:
        eigvals, eigvecs = np.linalg.eig(Mx @ np.linalg.inv(My))
    except np.linalg.LinAlgError:
        return None
    gaps = np.diff(np.sort(eigvals.real))
    if np.abs(eigvals.imag).max() > 1e-6 or (gaps.size and gaps.min() < _SPECTRAL_TOL):
        logger.debug("[Espectral] Autovalores complejos o repetidos en M_x M_y⁻¹")
        return None

    O = eigvecs.real
    O /= np.linalg.norm(O, axis=0)
    coeffs = O.T @ (W.T @ T1)
    O *= np.where(coeffs < 0, -1.0, 1.0)
    coeffs = np.abs(coeffs)
    if coeffs.min() <= _SPECTRAL_TOL:
        return None

    nu = ((U * np.sqrt(lam)) @ O / coeffs).T
    weights = _nnls_weights(nu, T1, T2, fallback=coeffs**2)
    return LatentParams(weights, nu)


def _nnls_weights(nu: np.ndarray, T1: np.ndarray, T2: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """w ≥ 0 con [ν_m; vec(ν_m ν_mᵀ); 1] w ≈ [T₁; vec(T₂); 1]."""
    M = nu.shape[0]
    design = np.vstack(
        [nu.T, np.stack([np.outer(v, v).ravel() for v in nu], axis=1), np.ones((1, M))]
    )
    target = np.concatenate([T1, T2.ravel(), [1.0]])
    weights, _ = nnls(design, target)
    if weights.sum() <= _SPECTRAL_TOL:
        weights = fallback
    return weights / weights.sum()


def init_kmeans(
    data: MleDataset, M: int, rng: np.random.Generator, lower: float = 0.0, upper: float = 1.0
) -> LatentParams:
    """k-means++ sobre vectores de frecuencia por episodio."""
    totals = data.counts1 + data.counts0
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = np.where(totals > 0, data.counts1 / totals, 0.5)

    _, labels = kmeans2(freq, M, minit="++", seed=int(rng.integers(2**31 - 1)))

    weights = np.empty(M)
    nu = np.empty((M, data.n))
    for m in range(M):
        members = labels == m
        hits = data.counts1[members].sum(axis=0)
        tot = totals[members].sum(axis=0)
        nu[m] = np.where(tot > 0, hits / np.maximum(tot, 1.0), 0.5)
        weights[m] = max(members.sum(), 1)
    return LatentParams(weights / weights.sum(), np.clip(nu, lower, upper))


def init_spectral(
    tensors: list[MomentTensor] | None,
    M: int,
    rng: np.random.Generator,
    data: MleDataset | None = None,
    lower: float = 0.0,
    upper: float = 1.0,
) -> LatentParams:
    """
    Jennrich sobre T₁, T₂, T₃ (de `tensors` o estimados de `data`).

    Si el espectro es degenerado o faltan órdenes, recurre a k-means++ sobre
    `data`; sin datos, a T₁ más ruido con pesos uniformes.
    """
    if tensors is None and data is not None and data.N > 0:
        tensors = empirical_core_tensors(data, 3)
    by_order = {t.order: t.entries for t in tensors or []}

    if M == 1 and 1 in by_order:
        return LatentParams(np.ones(1), np.clip(by_order[1], lower, upper)[None, :])

    if {1, 2, 3} <= by_order.keys():
        params = jennrich_decomposition(by_order[1], by_order[2], by_order[3], M, rng)
        if params is not None:
            logger.info("[Espectral] Inicialización de Jennrich (M=%d)", M)
            return params.clipped(lower, upper)

    if data is not None and data.N >= M:
        logger.warning("[Espectral] Espectro degenerado: respaldo k-means++ (M=%d)", M)
        return init_kmeans(data, M, rng, lower, upper)

    logger.warning("[Espectral] Sin datos para k-means: T₁ con ruido y pesos uniformes")
    if by_order:
        n = next(iter(by_order.values())).shape[0]
    elif data is not None:
        n = data.n
    else:
        raise ValueError("init_spectral necesita tensores o datos")
    base = by_order.get(1, np.full(n, 0.5 * (lower + upper)))
    nu = base[None, :] + 0.05 * (upper - lower) * rng.standard_normal((M, n))
    return LatentParams(np.full(M, 1.0 / M), np.clip(nu, lower, upper))
