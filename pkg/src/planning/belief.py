"""Belief sobre el contexto latente y su actualización bayesiana."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from src.model.instance import LmabInstance
from src.model.policies import History

logger = logging.getLogger(__name__)

_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Belief:
    """Posterior b(m) sobre los M contextos; `degenerate` si hubo verosimilitud nula."""

    probs: np.ndarray
    degenerate: bool = False

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError(f"Belief debe ser un vector no vacío, forma {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"Belief fuera del símplex: {p.tolist()}")
        p /= p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def M(self) -> int:
        return int(self.probs.size)

    @classmethod
    def prior(cls, model: LmabInstance) -> Belief:
        return cls(model.weights)

    @classmethod
    def uniform(cls, M: int, degenerate: bool = False) -> Belief:
        return cls(np.full(M, 1.0 / M), degenerate)

    def key(self, decimals: int = 12) -> tuple[float, ...]:
        """Clave hashable (redondeo a `decimals` cifras)."""
        return tuple(np.round(self.probs, decimals).tolist())


def likelihood(model: LmabInstance, action: int, reward: float) -> np.ndarray:
    """ℙ(r | m, a) por contexto (densidad normal en modo gaussiano)."""
    if model.is_gaussian:
        return norm.pdf(reward - model.means_table[:, action])
    assert model.support is not None
    return model.probs[:, action, model.support.index_of(reward)]


def belief_update(model: LmabInstance, belief: Belief, action: int, reward: float) -> Belief:
    """b′(m) ∝ b(m)·μ_m(a, r); uniforme y marcado si la verosimilitud total es 0."""
    post = belief.probs * likelihood(model, action, reward)
    total = float(post.sum())
    if total <= 0.0:
        logger.debug("[Belief] Verosimilitud nula para (a=%d, r=%s)", action, reward)
        return Belief.uniform(belief.M, degenerate=True)
    return Belief(post / total, belief.degenerate)


def belief_from_history(model: LmabInstance, history: History) -> Belief:
    belief = Belief.prior(model)
    for action, reward in history:
        belief = belief_update(model, belief, action, reward)
    return belief
