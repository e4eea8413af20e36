"""Deterministic robust optimistic planning over a finite set of models.

The look-ahead tree is stored as an arena: node ``i`` has its parent, depth,
action, per-model simulated states and per-model partial returns held in
parallel lists, and its ``K`` children stored contiguously starting at
``first_child[i]``.

Robust values follow the usual optimistic-planning recipe with one twist:
the minimum over models is taken on complete path returns at the leaves,
and only the resulting robust values are backed up with ``max``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DiscreteAmbiguitySet, ParameterError, Reward, check_gamma


@dataclass(frozen=True)
class DropConfig:
    gamma: float = 0.8
    budget: int = 100

    def __post_init__(self):
        check_gamma(self.gamma)
        if self.budget < 1:
            raise ParameterError("budget must be at least one expansion")


class TreeLogicError(RuntimeError):
    pass


class JointTree:
    """Arena-backed joint look-ahead tree."""

    def __init__(self, s0, amb: DiscreteAmbiguitySet, reward: Reward, n_actions: int, gamma: float):
        if n_actions < 1:
            raise ParameterError("need at least one action")
        self.amb = amb
        self.reward = reward
        self.K = n_actions
        self.M = len(amb)
        self.gamma = check_gamma(gamma)
        self.tail = 1.0 / (1.0 - self.gamma)
        self.transition_calls = 0

        self.parent: list[int] = [-1]
        self.depth: list[int] = [0]
        self.action: list[int] = [-1]
        self.first_child: list[int] = [-1]
        self.states: list[list] = [[s0] * self.M]
        self.partial: list[list[float]] = [[0.0] * self.M]
        self.u: list[float] = [0.0]
        self.b: list[float] = [self.tail]

    def __len__(self) -> int:
        return len(self.parent)

    def is_leaf(self, i: int) -> bool:
        return self.first_child[i] < 0

    def children(self, i: int) -> range:
        c = self.first_child[i]
        return range(c, c + self.K) if c >= 0 else range(0)

    def sequence(self, i: int) -> tuple[int, ...]:
        seq = []
        while i > 0:
            seq.append(self.action[i])
            i = self.parent[i]
        return tuple(reversed(seq))

    def leaves(self) -> list[int]:
        return [i for i in range(len(self)) if self.first_child[i] < 0]

    def max_depth(self) -> int:
        return max(self.depth)

    def expand(self, i: int) -> range:
        """Create the ``K`` children of leaf ``i``; ``K * M`` model calls.

        Ambiguity sets exposing ``successors(states, K)`` compute all of them
        in one call; rewards flagged ``state_only`` are evaluated once per model.
        """
        if not self.is_leaf(i):
            raise TreeLogicError(f"node {self.sequence(i)} is already expanded")
        d = self.depth[i]
        weight = self.gamma**d
        states = self.states[i] = list(self.states[i])
        partial = self.partial[i]
        start = len(self.parent)
        batch = getattr(self.amb, "successors", None)
        nxt = batch(states, self.K) if batch is not None else None
        state_only = getattr(self.reward, "state_only", False)
        if state_only:
            base = [partial[m] + weight * self.reward(s, 0) for m, s in enumerate(states)]
        for k in range(self.K):
            if nxt is not None:
                child_states = nxt[k]
            else:
                child_states = [model(s, k) for model, s in zip(self.amb.models, states)]
            if state_only:
                child_partial = list(base)
            else:
                child_partial = [partial[m] + weight * self.reward(s, k) for m, s in enumerate(states)]
            self.transition_calls += self.M
            u, b = leaf_values(child_partial, d + 1, self.gamma)
            self.parent.append(i)
            self.depth.append(d + 1)
            self.action.append(k)
            self.first_child.append(-1)
            self.states.append(child_states)
            self.partial.append(child_partial)
            self.u.append(u)
            self.b.append(b)
        self.first_child[i] = start
        return range(start, start + self.K)

    def update_path(self, i: int) -> None:
        """Refresh the backed-up values from ``i`` up to the root."""
        while i >= 0:
            c = self.first_child[i]
            if c >= 0:
                self.u[i] = max(self.u[c:c + self.K])
                self.b[i] = max(self.b[c:c + self.K])
            i = self.parent[i]

    def best_leaf(self) -> int:
        """Leaf maximising the b-value; ties go to the lexicographically smallest path.

        Backed-up b-values are exact copies of leaf values, so following the
        first child that attains its parent's b-value ends at that leaf.
        """
        i = 0
        while self.first_child[i] >= 0:
            c = self.first_child[i]
            target = self.b[i]
            for j in range(c, c + self.K):
                if self.b[j] == target:
                    i = j
                    break
            else:  # pragma: no cover - values are kept consistent by update_path
                raise TreeLogicError("b-values out of sync with children")
        return i

    def root_actions(self) -> range:
        return self.children(0)


def leaf_values(partial_returns, depth: int, gamma: float) -> tuple[float, float]:
    """Robust ``(u, b)`` of a leaf from its per-model partial returns."""
    u = min(partial_returns)
    return u, u + gamma**depth / (1.0 - gamma)


def expand(tree: JointTree, node: int) -> range:
    return tree.expand(node)


def backup(tree: JointTree) -> None:
    """Recompute every internal node's values in one post-order pass."""
    order = []
    stack = [0]
    while stack:
        i = stack.pop()
        order.append(i)
        stack.extend(tree.children(i))
    for i in reversed(order):
        if tree.is_leaf(i):
            tree.u[i], tree.b[i] = leaf_values(tree.partial[i], tree.depth[i], tree.gamma)
        else:
            c = tree.first_child[i]
            tree.u[i] = max(tree.u[c:c + tree.K])
            tree.b[i] = max(tree.b[c:c + tree.K])


@dataclass
class DropDiagnostics:
    expansions: int
    depth: int
    root_u: float
    root_b: float
    transition_calls: int
    action_values: list[float]
    trace: list[tuple[int, tuple[int, ...], float, float]] = field(default_factory=list)
    snapshots: Optional[list[tuple[np.ndarray, np.ndarray]]] = None
    tree: Optional[JointTree] = None

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "sequence", "root_u", "root_b"])
        for n, seq, u, b in self.trace:
            writer.writerow([n, "-".join(map(str, seq)), repr(u), repr(b)])
        return buf.getvalue()


def _argmax_first(values) -> int:
    best, best_i = -math.inf, 0
    for i, v in enumerate(values):
        if v > best:
            best, best_i = v, i
    return best_i


def _grow(s0, amb, reward, n_actions, cfg: DropConfig, record: bool,
          on_iteration: Optional[Callable[[JointTree, int], None]] = None):
    tree = JointTree(s0, amb, reward, n_actions, cfg.gamma)
    trace = []
    snapshots = [] if record else None
    for n in range(1, cfg.budget + 1):
        leaf = tree.best_leaf()
        seq = tree.sequence(leaf)
        tree.expand(leaf)
        tree.update_path(leaf)
        trace.append((n, seq, tree.u[0], tree.b[0]))
        if record:
            snapshots.append((np.array(tree.u), np.array(tree.b)))
        if on_iteration is not None:
            on_iteration(tree, n)
    return tree, trace, snapshots


def plan(s0, amb: DiscreteAmbiguitySet, reward: Reward, cfg: DropConfig, n_actions: int,
         record: bool = False, keep_tree: bool = False):
    """Run ``cfg.budget`` optimistic expansions and return the robust first action.

    Returns ``(action, diagnostics)``.  With ``record=True`` the diagnostics
    hold the u/b arrays of every node after each iteration (nodes are indexed
    by creation order, so earlier arrays are prefixes of later ones).
    """
    tree, trace, snapshots = _grow(s0, amb, reward, n_actions, cfg, record)
    values = [tree.u[j] for j in tree.root_actions()]
    action = _argmax_first(values)
    diag = DropDiagnostics(
        expansions=len(trace),
        depth=tree.max_depth(),
        root_u=tree.u[0],
        root_b=tree.b[0],
        transition_calls=tree.transition_calls,
        action_values=values,
        trace=trace,
        snapshots=snapshots,
        tree=tree if keep_tree else None,
    )
    return action, diag


def naive_values(tree: JointTree) -> tuple[list[list[float]], list[list[float]]]:
    """Per-model u and b values backed up independently for each model."""
    n, M, K = len(tree), tree.M, tree.K
    u = [[0.0] * M for _ in range(n)]
    b = [[0.0] * M for _ in range(n)]
    for i in range(n - 1, -1, -1):
        c = tree.first_child[i]
        if c < 0:
            tail = tree.gamma ** tree.depth[i] * tree.tail
            u[i] = list(tree.partial[i])
            b[i] = [p + tail for p in tree.partial[i]]
        else:
            u[i] = [max(u[j][m] for j in range(c, c + K)) for m in range(M)]
            b[i] = [max(b[j][m] for j in range(c, c + K)) for m in range(M)]
    return u, b


def plan_naive_minmax(s0, amb: DiscreteAmbiguitySet, reward: Reward, cfg: DropConfig,
                      n_actions: int) -> int:
    """Baseline that backs up each model separately and takes the minimum at
    every node.  It is not a robust planner and is only kept for comparison.

    Leaf b-values coincide with the robust ones, so the expanded tree is the
    same as :func:`plan`'s; only the returned action differs.
    """
    tree, _, _ = _grow(s0, amb, reward, n_actions, cfg, record=False)
    u, _ = naive_values(tree)
    return _argmax_first([min(u[j]) for j in tree.root_actions()])
