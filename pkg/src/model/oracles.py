"""
Oráculos exactos de valor de política.

V(π) = 𝔼^π[Σ_t r_t] se calcula recorriendo el árbol de historias y llevando,
por cada historia, el vector de verosimilitudes por contexto
w_m · Π_t μ_m(a_t, r_t). Coste O(M · Z^H): protegido por
`Config.ENUMERATION_GUARD`.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.config import Config
from src.errors import EnumerationGuardError
from src.model.instance import LmabInstance
from src.model.policies import OpenLoopPolicy, Policy, as_policy

Trajectory = tuple[tuple[int, ...], tuple[float, ...]]


def _check_enumerable(inst: LmabInstance, guard: int | None) -> None:
    if inst.is_gaussian:
        raise ValueError("La enumeración exacta requiere modo discreto")
    limit = Config.ENUMERATION_GUARD if guard is None else guard
    if inst.Z**inst.H > limit:
        raise EnumerationGuardError(
            f"Z^H = {inst.Z}^{inst.H} supera la guarda {limit}; "
            "usar monte_carlo_policy_value"
        )


def exact_open_loop_value(inst: LmabInstance, actions: Sequence[int]) -> float:
    """Σ_t Σ_m w_m · mean_m(a_t); sin enumeración (vale en modo gaussiano)."""
    if len(actions) < inst.H:
        raise ValueError(f"Secuencia de {len(actions)} acciones < H={inst.H}")
    mixture_means = inst.weights @ inst.mean_rewards()
    return float(sum(mixture_means[a] for a in actions[: inst.H]))


def exact_policy_value(
    inst: LmabInstance,
    policy: Policy | Sequence[int],
    guard: int | None = None,
) -> float:
    pol = as_policy(policy)
    if pol.depth < inst.H:
        raise ValueError(f"Política de profundidad {pol.depth} < H={inst.H}")
    if isinstance(pol, OpenLoopPolicy):
        return exact_open_loop_value(inst, pol.actions)
    _check_enumerable(inst, guard)

    assert inst.support is not None
    values = inst.support.values
    probs = inst.probs

    def recurse(history: list[tuple[int, float]], like: np.ndarray) -> float:
        if len(history) == inst.H:
            return 0.0
        action = int(pol.act(history))
        total = 0.0
        for z_idx, z in enumerate(values):
            nxt = like * probs[:, action, z_idx]
            mass = float(nxt.sum())
            if mass == 0.0:
                continue
            total += mass * z + recurse(history + [(action, z)], nxt)
        return total

    return recurse([], np.array(inst.weights))


def exact_trajectory_distribution(
    inst: LmabInstance,
    policy: Policy | Sequence[int],
    guard: int | None = None,
) -> dict[Trajectory, float]:
    """ℙ^π(a_{1:H}, r_{1:H}) para todas las trayectorias con masa positiva."""
    pol = as_policy(policy)
    if pol.depth < inst.H:
        raise ValueError(f"Política de profundidad {pol.depth} < H={inst.H}")
    _check_enumerable(inst, guard)

    assert inst.support is not None
    values = inst.support.values
    probs = inst.probs
    dist: dict[Trajectory, float] = {}

    def recurse(history: list[tuple[int, float]], like: np.ndarray) -> None:
        if len(history) == inst.H:
            actions, rewards = zip(*history)
            dist[(tuple(actions), tuple(rewards))] = float(like.sum())
            return
        action = int(pol.act(history))
        for z_idx, z in enumerate(values):
            nxt = like * probs[:, action, z_idx]
            if nxt.sum() > 0.0:
                recurse(history + [(action, z)], nxt)

    recurse([], np.array(inst.weights))
    return dist


def total_variation(p: dict[Trajectory, float], q: dict[Trajectory, float]) -> float:
    keys = p.keys() | q.keys()
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
