"""
Política QMDP ("genie" cuando se usa con el modelo verdadero).

    Q_t(b, a) = Σ_m b(m) · (mean_m(a) + (H − t − 1) · max_a′ mean_m(a′))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.model.instance import LmabInstance
from src.model.policies import History
from src.planning.belief import Belief, belief_from_history

_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QmdpPolicy:
    model: LmabInstance
    horizon: int
    _means: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_means", self.model.mean_rewards())

    @property
    def depth(self) -> int:
        return self.horizon

    def q_values(self, belief: Belief, t: int) -> np.ndarray:
        remaining = self.horizon - t - 1
        future = remaining * self._means.max(axis=1)
        return belief.probs @ (self._means + future[:, None])

    def choose(self, belief: Belief, t: int) -> int:
        q = self.q_values(belief, t)
        return int(np.flatnonzero(q >= q.max() - _TIE_TOL)[0])

    def act(self, history: History) -> int:
        return self.choose(belief_from_history(self.model, history), len(history))


def qmdp_policy(model: LmabInstance, horizon: int | None = None) -> QmdpPolicy:
    return QmdpPolicy(model, model.H if horizon is None else horizon)


def best_fixed_arm_value(inst: LmabInstance) -> float:
    """H · max_a Σ_m w_m mean_m(a)."""
    return float(inst.H * (inst.weights @ inst.mean_rewards()).max())


def best_fixed_arm(inst: LmabInstance) -> int:
    return int(np.argmax(inst.weights @ inst.mean_rewards()))
