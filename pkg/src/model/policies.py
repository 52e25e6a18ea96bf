"""
Políticas dependientes de la historia.

Una política recibe la historia [(a_1, r_1), ..., (a_t, r_t)] y devuelve la
acción a_{t+1}. Implementaciones:

    - PolicyTree      → árbol de decisión explícito (Z hijos por nodo interno)
    - OpenLoopPolicy  → secuencia fija de acciones
    - QmdpPolicy      → en src.planning.qmdp (belief + heurística QMDP)
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from src.model.instance import RewardSupport

History = Sequence[tuple[int, float]]


@runtime_checkable
class Policy(Protocol):
    @property
    def depth(self) -> int: ...

    def act(self, history: History) -> int: ...


@dataclass(frozen=True)
class OpenLoopPolicy:
    """Secuencia fija de acciones, ignora las recompensas observadas."""

    actions: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.actions)

    def act(self, history: History) -> int:
        return self.actions[len(history)]


@dataclass(frozen=True)
class PolicyNode:
    action: int
    children: tuple[PolicyNode, ...] = ()


@dataclass(frozen=True)
class CompiledTree:
    """Árbol aplanado en BFS: acción por nodo y tabla de hijos (−1 en hojas)."""

    actions: np.ndarray
    children: np.ndarray


@dataclass(frozen=True)
class PolicyTree:
    """Árbol de decisión sobre historias (acción, recompensa)."""

    root: PolicyNode
    support: RewardSupport
    depth: int

    def __post_init__(self) -> None:
        self._check(self.root, level=0)

    def _check(self, node: PolicyNode, level: int) -> None:
        if level == self.depth - 1:
            if node.children:
                raise ValueError(f"Nodo hoja en nivel {level} no debe tener hijos")
            return
        if len(node.children) != self.support.size:
            raise ValueError(
                f"Nodo interno en nivel {level} con {len(node.children)} hijos, "
                f"se esperaban Z={self.support.size}"
            )
        for child in node.children:
            self._check(child, level + 1)

    def act(self, history: History) -> int:
        node = self.root
        for _, reward in history:
            node = node.children[self.support.index_of(reward)]
        return node.action

    @property
    def node_count(self) -> int:
        return sum(self.support.size**t for t in range(self.depth))

    def compile(self) -> CompiledTree:
        Z = self.support.size
        actions: list[int] = []
        children: list[list[int]] = []
        frontier = [self.root]
        next_id = 1
        while frontier:
            nxt: list[PolicyNode] = []
            for node in frontier:
                actions.append(node.action)
                if node.children:
                    children.append(list(range(next_id, next_id + Z)))
                    next_id += Z
                    nxt.extend(node.children)
                else:
                    children.append([-1] * Z)
            frontier = nxt
        return CompiledTree(np.array(actions, dtype=int), np.array(children, dtype=int))

    # ------------------------------------------------------------------ #
    # CONSTRUCTORES                                                        #
    # ------------------------------------------------------------------ #

    @classmethod
    def from_bfs_actions(
        cls, actions: Sequence[int], support: RewardSupport, depth: int
    ) -> PolicyTree:
        """Construye el árbol a partir de la lista BFS de acciones por nodo."""
        Z = support.size
        expected = sum(Z**t for t in range(depth))
        if len(actions) != expected:
            raise ValueError(f"Se esperaban {expected} acciones BFS, recibido {len(actions)}")

        level_start = [sum(Z**s for s in range(t)) for t in range(depth + 1)]

        def build(level: int, offset: int) -> PolicyNode:
            action = int(actions[level_start[level] + offset])
            if level == depth - 1:
                return PolicyNode(action)
            return PolicyNode(
                action,
                tuple(build(level + 1, offset * Z + z) for z in range(Z)),
            )

        return cls(build(0, 0), support, depth)

    @classmethod
    def from_policy(
        cls,
        policy: Policy,
        support: RewardSupport,
        depth: int,
        guard: int = 10_000_000,
    ) -> PolicyTree:
        """Materializa cualquier política como árbol (Σ Z^t nodos ≤ guard)."""
        if sum(support.size**t for t in range(depth)) > guard:
            raise ValueError("Árbol demasiado grande para materializar")

        def build(history: list[tuple[int, float]]) -> PolicyNode:
            action = int(policy.act(history))
            if len(history) == depth - 1:
                return PolicyNode(action)
            return PolicyNode(
                action,
                tuple(build(history + [(action, z)]) for z in support.values),
            )

        return cls(build([]), support, depth)


def as_policy(policy: Policy | Sequence[int]) -> Policy:
    """Acepta una política o una secuencia fija de acciones."""
    if isinstance(policy, Policy):
        return policy
    return OpenLoopPolicy(tuple(int(a) for a in policy))


def random_policy_tree(
    A: int, support: RewardSupport, depth: int, rng: np.random.Generator
) -> PolicyTree:
    n_nodes = sum(support.size**t for t in range(depth))
    return PolicyTree.from_bfs_actions(rng.integers(A, size=n_nodes), support, depth)


def enumerate_policy_trees(
    A: int, support: RewardSupport, depth: int, limit: int = 1_000_000
) -> Iterator[PolicyTree]:
    """Todas las políticas deterministas dependientes de la historia (oráculo)."""
    n_nodes = sum(support.size**t for t in range(depth))
    if A**n_nodes > limit:
        raise ValueError(f"A^nodos = {A}^{n_nodes} supera el límite {limit}")
    for actions in itertools.product(range(A), repeat=n_nodes):
        yield PolicyTree.from_bfs_actions(actions, support, depth)
