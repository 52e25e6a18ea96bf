"""
Línea base UCB ingenua: trata la mezcla como un único bandido y agrupa
todos los pasos de todos los episodios. Devuelve una política estacionaria
(el brazo con mejor media empírica repetido H veces).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.model.policies import OpenLoopPolicy
from src.model.simulator import LmabEnvironment

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UcbResult:
    policy: OpenLoopPolicy
    best_arm: int
    rewards: np.ndarray
    counts: np.ndarray
    means: np.ndarray
    episodes: int

    @property
    def per_step_reward(self) -> float:
        """Recompensa media por paso durante el aprendizaje."""
        return float(self.rewards.mean()) if self.rewards.size else 0.0


def ucb_baseline(
    env: LmabEnvironment,
    episodes: int,
    rng: np.random.Generator,
    c: float = 2.0,
) -> UcbResult:
    """UCB1: índice mean_a + √(c·log t / n_a); cada brazo se juega una vez primero."""
    if episodes < 0:
        raise ValueError(f"episodes debe ser ≥ 0, recibido: {episodes}")
    A, H = env.A, env.H
    counts = np.zeros(A)
    sums = np.zeros(A)
    trace = np.zeros((episodes, H))
    t = 0

    for k in range(episodes):
        session = env.open_session(rng)
        for h in range(H):
            t += 1
            untried = np.flatnonzero(counts == 0)
            if untried.size:
                arm = int(untried[0])
            else:
                index = sums / counts + np.sqrt(c * np.log(t) / counts)
                arm = int(np.argmax(index))
            reward = session.step(arm)
            counts[arm] += 1
            sums[arm] += reward
            trace[k, h] = reward

    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), -np.inf)
    best = int(np.argmax(means)) if episodes else 0
    logger.info("[UCB] %d episodios: brazo elegido %d", episodes, best)
    return UcbResult(OpenLoopPolicy((best,) * H), best, trace.ravel(), counts, means, episodes)
