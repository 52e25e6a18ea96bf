"""
Simulación de episodios LMAB.

Cada episodio sortea un contexto oculto m ~ w una única vez y luego las
recompensas r_t ~ μ_m(a_t, ·) (o N(mean_m(a_t), 1) en modo gaussiano).

El aprendiz solo accede al entorno a través de `LmabEnvironment`, que oculta
el contexto y contabiliza los episodios consumidos (presupuesto N₀, N₁, N).
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.model.instance import Episode, LearnerEpisode, LmabInstance, RewardSupport
from src.model.policies import OpenLoopPolicy, Policy, PolicyTree, as_policy

logger = logging.getLogger(__name__)

# nodos máximos al materializar una política genérica para simular vectorizado
_MATERIALIZE_GUARD = 100_000


def sample_episode(
    inst: LmabInstance,
    policy: Policy | Sequence[int],
    rng: np.random.Generator,
) -> Episode:
    """Simula un episodio completo de H pasos siguiendo la política."""
    pol = as_policy(policy)
    if pol.depth < inst.H:
        raise ValueError(f"Política de profundidad {pol.depth} < H={inst.H}")

    context = int(rng.choice(inst.M, p=inst.weights))
    actions: list[int] = []
    rewards: list[float] = []
    history: list[tuple[int, float]] = []

    for _ in range(inst.H):
        action = int(pol.act(history))
        reward = _draw_reward(inst, context, action, rng)
        actions.append(action)
        rewards.append(reward)
        history.append((action, reward))

    return Episode(context=context, actions=tuple(actions), rewards=tuple(rewards))


def _draw_reward(
    inst: LmabInstance, context: int, action: int, rng: np.random.Generator
) -> float:
    if inst.is_gaussian:
        return float(inst.means_table[context, action] + rng.standard_normal())
    assert inst.support is not None
    z_idx = int(rng.choice(inst.Z, p=inst.probs[context, action]))
    return inst.support.values[z_idx]


def sample_contexts(inst: LmabInstance, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(inst.M, size=n, p=inst.weights)


def sample_reward_indices(
    inst: LmabInstance,
    contexts: np.ndarray,
    actions: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Índices de recompensa (n, l) para contextos (n,) y acciones (n, l)."""
    cdf = np.cumsum(inst.probs[contexts[:, None], actions], axis=-1)
    u = rng.random(actions.shape)
    idx = (u[..., None] > cdf).sum(axis=-1)
    return np.minimum(idx, inst.Z - 1)


# ============================================================================
# ENTORNO DEL APRENDIZ
# ============================================================================


class EpisodeSession:
    """Episodio en curso paso a paso (aprendices adaptativos como UCB)."""

    def __init__(self, inst: LmabInstance, rng: np.random.Generator) -> None:
        self._inst = inst
        self._rng = rng
        self._context = int(rng.choice(inst.M, p=inst.weights))
        self.steps = 0

    def step(self, action: int) -> float:
        if self.steps >= self._inst.H:
            raise RuntimeError(f"Episodio agotado: H={self._inst.H} pasos ya jugados")
        self.steps += 1
        return _draw_reward(self._inst, self._context, int(action), self._rng)


class LmabEnvironment:
    """
    Vista del aprendiz sobre una instancia.

    Expone A, H y el soporte, nunca w, μ ni el contexto. `episodes_used`
    acumula todos los episodios simulados a través de este objeto.
    """

    def __init__(self, instance: LmabInstance) -> None:
        self._instance = instance
        self.episodes_used = 0

    @property
    def A(self) -> int:
        return self._instance.A

    @property
    def H(self) -> int:
        return self._instance.H

    @property
    def support(self) -> RewardSupport | None:
        return self._instance.support

    @property
    def is_gaussian(self) -> bool:
        return self._instance.is_gaussian

    def rollout(self, policy: Policy | Sequence[int], rng: np.random.Generator) -> LearnerEpisode:
        self.episodes_used += 1
        return sample_episode(self._instance, policy, rng).learner_view()

    def open_session(self, rng: np.random.Generator) -> EpisodeSession:
        self.episodes_used += 1
        return EpisodeSession(self._instance, rng)

    def sample_open_loop(self, actions: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Juega n episodios con acciones fijas (n, l), l ≤ H.

        Devuelve índices de soporte (modo discreto) o recompensas crudas
        (modo gaussiano), forma (n, l).
        """
        actions = np.atleast_2d(np.asarray(actions, dtype=int))
        n, length = actions.shape
        if length > self.H:
            raise ValueError(f"Secuencia de {length} acciones > H={self.H}")
        if n == 0:
            return np.zeros((0, length))

        self.episodes_used += n
        inst = self._instance
        contexts = sample_contexts(inst, n, rng)
        if inst.is_gaussian:
            return inst.means_table[contexts[:, None], actions] + rng.standard_normal(
                actions.shape
            )
        return sample_reward_indices(inst, contexts, actions, rng)


# ============================================================================
# EVALUACIÓN MONTE CARLO
# ============================================================================


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    episodes: int


def monte_carlo_policy_value(
    inst: LmabInstance,
    policy: Policy | Sequence[int],
    episodes: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Estimador insesgado de V(π) = 𝔼^π[Σ_t r_t] con error estándar."""
    if episodes < 1:
        raise ValueError(f"Se necesita al menos 1 episodio, recibido: {episodes}")
    pol = as_policy(policy)
    if pol.depth < inst.H:
        raise ValueError(f"Política de profundidad {pol.depth} < H={inst.H}")

    returns = _simulate_returns(inst, pol, episodes, rng)
    stderr = float(returns.std(ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return MonteCarloEstimate(float(returns.mean()), stderr, episodes)


def _simulate_returns(
    inst: LmabInstance, pol: Policy, episodes: int, rng: np.random.Generator
) -> np.ndarray:
    if isinstance(pol, OpenLoopPolicy):
        actions = np.broadcast_to(np.array(pol.actions[: inst.H]), (episodes, inst.H))
        contexts = sample_contexts(inst, episodes, rng)
        if inst.is_gaussian:
            rewards = inst.means_table[contexts[:, None], actions] + rng.standard_normal(
                actions.shape
            )
            return rewards.sum(axis=1)
        assert inst.support is not None
        idx = sample_reward_indices(inst, contexts, actions, rng)
        return inst.support.array[idx].sum(axis=1)

    if not inst.is_gaussian:
        assert inst.support is not None
        tree = pol
        if not isinstance(tree, PolicyTree):
            n_nodes = sum(inst.Z**t for t in range(inst.H))
            if n_nodes <= _MATERIALIZE_GUARD:
                tree = PolicyTree.from_policy(pol, inst.support, inst.H)
        if isinstance(tree, PolicyTree):
            return _simulate_tree(inst, tree, episodes, rng)

    logger.debug("[MC] Simulación episodio a episodio (%d episodios)", episodes)
    return np.array(
        [sum(sample_episode(inst, pol, rng).rewards) for _ in range(episodes)],
        dtype=float,
    )


def _simulate_tree(
    inst: LmabInstance, tree: PolicyTree, episodes: int, rng: np.random.Generator
) -> np.ndarray:
    assert inst.support is not None
    compiled = tree.compile()
    values = inst.support.array
    contexts = sample_contexts(inst, episodes, rng)
    nodes = np.zeros(episodes, dtype=int)
    total = np.zeros(episodes)

    for t in range(inst.H):
        actions = compiled.actions[nodes]
        idx = sample_reward_indices(inst, contexts, actions[:, None], rng)[:, 0]
        total += values[idx]
        if t < inst.H - 1:
            nodes = compiled.children[nodes, idx]
    return total
