"""
Oráculo de planificación exacto: inducción hacia atrás sobre beliefs alcanzables.

    V_t(b) = max_a Σ_z ℙ(z | b, a) · (z + V_{t+1}(b′(a, z)))

Los beliefs se memoizan por (t, b redondeado a 12 decimales); el número de
estados está acotado por `Config.PLAN_STATE_GUARD`. Empates → menor acción.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.config import Config
from src.errors import PlanningBudgetError
from src.model.instance import LmabInstance
from src.model.policies import PolicyNode, PolicyTree
from src.planning.belief import Belief

logger = logging.getLogger(__name__)

_TIE_TOL = 1e-12
_KEY_DECIMALS = 12


@dataclass(frozen=True)
class PlanResult:
    policy: PolicyTree
    value: float
    node_count: int


def plan_exact(
    model: LmabInstance,
    horizon: int | None = None,
    prior: Belief | None = None,
    guard: int | None = None,
) -> PlanResult:
    if model.is_gaussian:
        raise ValueError("plan_exact requiere modo discreto; usar qmdp_policy")
    assert model.support is not None

    H = model.H if horizon is None else horizon
    limit = Config.PLAN_STATE_GUARD if guard is None else guard
    Z, A = model.Z, model.A
    tree_nodes = sum(Z**t for t in range(H))
    if tree_nodes > limit:
        raise PlanningBudgetError(f"Árbol de {tree_nodes} nodos supera la guarda {limit}")
    # en t pasos el belief solo depende del multiconjunto de pares (a, z)
    reachable = sum(math.comb(A * Z + t - 1, t) for t in range(H))
    if reachable > limit:
        raise PlanningBudgetError(
            f"Hasta {reachable} beliefs alcanzables superan la guarda {limit}; usar qmdp_policy"
        )

    values = model.support.array
    probs = model.probs
    memo: dict[tuple[int, tuple[float, ...]], tuple[float, int]] = {}

    def solve(t: int, b: np.ndarray) -> tuple[float, int]:
        key = (t, tuple(np.round(b, _KEY_DECIMALS).tolist()))
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= limit:
            raise PlanningBudgetError(f"Más de {limit} beliefs alcanzables; usar qmdp_policy")

        best_value, best_action = -math.inf, 0
        for a in range(A):
            joint = b[:, None] * probs[:, a, :]
            pz = joint.sum(axis=0)
            q = float(pz @ values)
            if t + 1 < H:
                for z in np.flatnonzero(pz > 0.0):
                    q += float(pz[z]) * solve(t + 1, joint[:, z] / pz[z])[0]
            if q > best_value + _TIE_TOL:
                best_value, best_action = q, a
        memo[key] = (best_value, best_action)
        return best_value, best_action

    def build(t: int, b: np.ndarray) -> PolicyNode:
        _, action = solve(t, b)
        if t == H - 1:
            return PolicyNode(action)
        joint = b[:, None] * probs[:, action, :]
        pz = joint.sum(axis=0)
        # ramas de masa nula: inalcanzables, se rellenan con el mismo belief
        return PolicyNode(
            action,
            tuple(build(t + 1, joint[:, z] / pz[z] if pz[z] > 0.0 else b) for z in range(Z)),
        )

    b0 = np.array((prior or Belief.prior(model)).probs)
    value, _ = solve(0, b0)
    tree = PolicyTree(build(0, b0), model.support, H)
    logger.info("[Plan] DP exacto: V*=%.6f, %d beliefs (H=%d)", value, len(memo), H)
    return PlanResult(tree, value, len(memo))
