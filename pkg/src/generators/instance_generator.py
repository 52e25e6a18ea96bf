# src/generators/instance_generator.py
"""
Generador de instancias LMAB aleatorias.

Construcción de rango r:
    1. r tablas base B_j ∈ ℝ^{A×Z} con filas Dirichlet(α) simétricas
    2. los r primeros contextos toman una tabla base cada uno (asignación
       identidad); el resto son combinaciones convexas Dirichlet(1) de las bases
    3. pesos w ~ Dirichlet(1, …, 1)

Así rank(Σ_m w_m μ_m μ_mᵀ) ≤ r, con igualdad casi segura.
Opcionalmente se impone separación γ por muestreo con rechazo.
"""

from __future__ import annotations

import logging

import numpy as np

from src.model.instance import (
    BERNOULLI_SUPPORT,
    LmabInstance,
    RewardKind,
    RewardSupport,
    SeparationConfig,
)

logger = logging.getLogger(__name__)


def _mixing_coefficients(M: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    coeffs = np.zeros((M, rank))
    coeffs[: min(M, rank), : min(M, rank)] = np.eye(min(M, rank))
    if M > rank:
        coeffs[rank:] = rng.dirichlet(np.ones(rank), size=M - rank)
    return coeffs


def generate_random_instance(
    M: int,
    A: int,
    Z: int,
    H: int,
    rank: int,
    rng: np.random.Generator,
    *,
    support: RewardSupport | None = None,
    separation: SeparationConfig | None = None,
    alpha: float = 1.0,
) -> LmabInstance:
    """Instancia discreta con vectores μ_m en un subespacio de dimensión `rank`."""
    if support is None:
        support = BERNOULLI_SUPPORT if Z == 2 else RewardSupport(tuple(np.linspace(0.0, 1.0, Z)))
    if support.size != Z:
        raise ValueError(f"Soporte de tamaño {support.size} ≠ Z={Z}")
    if not 1 <= rank <= min(M, A * (Z - 1)):
        raise ValueError(
            f"Rango inviable r={rank}: se requiere 1 ≤ r ≤ min(M, A·(Z−1)) = "
            f"{min(M, A * (Z - 1))}"
        )

    attempts = 1 if separation is None or not separation.enforced else separation.max_retries
    for attempt in range(attempts):
        basis = rng.dirichlet(np.full(Z, alpha), size=(rank, A))
        coeffs = _mixing_coefficients(M, rank, rng)
        probs = np.einsum("mr,raz->maz", coeffs, basis)
        weights = rng.dirichlet(np.ones(M))

        if separation is None or not separation.enforced or separation.is_satisfied(probs):
            if attempt > 0:
                logger.debug("[Generador] Separación γ alcanzada tras %d rechazos", attempt)
            return LmabInstance(
                weights=weights,
                horizon=H,
                support=support,
                reward_probs=probs,
            )

    assert separation is not None
    raise RuntimeError(
        f"Separación γ={separation.gamma} no alcanzada en {separation.max_retries} intentos"
    )


def generate_random_gaussian_instance(
    M: int,
    A: int,
    H: int,
    rank: int,
    rng: np.random.Generator,
) -> LmabInstance:
    """Medias en [−1, 1] como combinaciones convexas de `rank` vectores base."""
    if not 1 <= rank <= min(M, A):
        raise ValueError(f"Rango inviable r={rank}: se requiere 1 ≤ r ≤ min(M, A)")

    basis = rng.uniform(-1.0, 1.0, size=(rank, A))
    means = _mixing_coefficients(M, rank, rng) @ basis
    return LmabInstance(
        weights=rng.dirichlet(np.ones(M)),
        horizon=H,
        reward_kind=RewardKind.GAUSSIAN,
        gaussian_means=means,
    )


class LmabInstanceGenerator:
    """
    Generador con semilla propia.

    Cada llamada avanza el mismo stream, por lo que una secuencia de
    llamadas con la misma semilla produce las mismas instancias.
    """

    def __init__(self, seed: int = 42) -> None:
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def generate_instance(
        self,
        M: int,
        A: int,
        Z: int = 2,
        H: int = 3,
        rank: int | None = None,
        separation: SeparationConfig | None = None,
        support: RewardSupport | None = None,
    ) -> LmabInstance:
        return generate_random_instance(
            M,
            A,
            Z,
            H,
            min(M, A * (Z - 1)) if rank is None else rank,
            self._rng,
            support=support,
            separation=separation,
        )

    def generate_gaussian_instance(
        self, M: int, A: int, H: int = 3, rank: int | None = None
    ) -> LmabInstance:
        return generate_random_gaussian_instance(
            M, A, H, min(M, A) if rank is None else rank, self._rng
        )

    def generate_batch(self, count: int, **kwargs: object) -> list[LmabInstance]:
        return [self.generate_instance(**kwargs) for _ in range(count)]  # type: ignore[arg-type]
