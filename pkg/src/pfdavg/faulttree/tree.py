"""Static fault trees, exact top-event probability through a BDD, and minimal cut sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union

import numpy as np

from .laws import Law

__all__ = [
    "And", "BasicEvent", "Bdd", "FaultTree", "FaultTreeError", "Gate", "Or", "Vote",
    "minimal_cut_sets", "top_probability",
]


class FaultTreeError(ValueError):
    pass


@dataclass(frozen=True)
class BasicEvent:
    id: str
    law: Law | None = None


@dataclass(frozen=True)
class Gate:
    """``kind`` is ``"and"``, ``"or"`` or ``"vote"``; a vote gate fails when ``k`` children fail."""

    kind: str
    children: tuple["Node", ...]
    k: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("and", "or", "vote"):
            raise FaultTreeError(f"unknown gate kind {self.kind!r}")
        if not self.children:
            raise FaultTreeError(f"gate {self.name or self.kind} has no children")
        if self.kind == "vote" and not 1 <= self.k <= len(self.children):
            raise FaultTreeError(
                f"vote gate {self.name!r} needs 1 <= k <= {len(self.children)}, got {self.k}"
            )

    @property
    def threshold(self) -> int:
        if self.kind == "and":
            return len(self.children)
        if self.kind == "or":
            return 1
        return self.k


Node = Union[BasicEvent, Gate]


def And(*children: Node, name: str = "") -> Gate:
    return Gate("and", tuple(children), name=name)


def Or(*children: Node, name: str = "") -> Gate:
    return Gate("or", tuple(children), name=name)


def Vote(k: int, *children: Node, name: str = "") -> Gate:
    return Gate("vote", tuple(children), k=k, name=name)


class Bdd:
    """Reduced ordered BDD with hash-consing.

    Nodes are integers: 0 and 1 are the terminals, others index ``self.nodes``
    as ``(level, low, high)``. Children are always created before parents, so
    ``self.nodes`` is in topological order.
    """

    def __init__(self, variables: Iterable[str]):
        self.variables = list(variables)
        self.level = {v: i for i, v in enumerate(self.variables)}
        self.nodes: list[tuple[int, int, int]] = [(len(self.variables), 0, 0)] * 2
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}

    def make(self, level: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (level, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self.nodes)
            self.nodes.append(key)
            self._unique[key] = node
        return node

    def var(self, name: str) -> int:
        return self.make(self.level[name], 0, 1)

    def _top(self, u: int) -> int:
        return self.nodes[u][0]

    def _cofactors(self, u: int, level: int) -> tuple[int, int]:
        lvl, low, high = self.nodes[u]
        if lvl == level:
            return low, high
        return u, u

    def ite(self, f: int, g: int, h: int) -> int:
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        if g == 1 and h == 0:
            return f
        key = (f, g, h)
        hit = self._ite_cache.get(key)
        if hit is not None:
            return hit
        level = min(self._top(f), self._top(g), self._top(h))
        f0, f1 = self._cofactors(f, level)
        g0, g1 = self._cofactors(g, level)
        h0, h1 = self._cofactors(h, level)
        result = self.make(level, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = result
        return result

    def conj(self, f: int, g: int) -> int:
        return self.ite(f, g, 0)

    def disj(self, f: int, g: int) -> int:
        return self.ite(f, 1, g)

    def threshold(self, k: int, operands: list[int]) -> int:
        """At least ``k`` of ``operands`` true."""
        memo: dict[tuple[int, int], int] = {}

        def go(need: int, start: int) -> int:
            if need <= 0:
                return 1
            if len(operands) - start < need:
                return 0
            key = (need, start)
            if key not in memo:
                memo[key] = self.ite(operands[start], go(need - 1, start + 1),
                                     go(need, start + 1))
            return memo[key]

        return go(k, 0)

    def probability(self, root: int, q: Mapping[str, object]):
        """Shannon expansion bottom-up; ``q`` values may be floats or equal-shape arrays."""
        values: list[object] = [0.0, 1.0] + [None] * (len(self.nodes) - 2)
        for u in range(2, len(self.nodes)):
            level, low, high = self.nodes[u]
            p = q[self.variables[level]]
            values[u] = p * values[high] + (1.0 - p) * values[low]
        return values[root]


@dataclass(frozen=True)
class FaultTree:
    top: Node
    events: Mapping[str, BasicEvent] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        found: dict[str, BasicEvent] = {}
        self._collect(self.top, found)
        object.__setattr__(self, "events", found)

    @staticmethod
    def _collect(node: Node, found: dict[str, BasicEvent]):
        stack = [node]
        while stack:
            current = stack.pop()
            if isinstance(current, BasicEvent):
                other = found.get(current.id)
                if other is not None and other.law != current.law:
                    raise FaultTreeError(
                        f"basic event {current.id!r} repeated with different laws"
                    )
                found.setdefault(current.id, current)
            else:
                stack.extend(reversed(current.children))

    @cached_property
    def order(self) -> list[str]:
        """Depth-first appearance order of basic events from the top gate."""
        seen: dict[str, None] = {}

        def visit(node):
            if isinstance(node, BasicEvent):
                seen.setdefault(node.id, None)
            else:
                for child in node.children:
                    visit(child)

        visit(self.top)
        return list(seen)

    @cached_property
    def compiled(self) -> tuple[Bdd, int]:
        bdd = Bdd(self.order)
        memo: dict[int, int] = {}

        def build(node):
            key = id(node)
            if key in memo:
                return memo[key]
            if isinstance(node, BasicEvent):
                result = bdd.var(node.id)
            else:
                result = bdd.threshold(node.threshold, [build(c) for c in node.children])
            memo[key] = result
            return result

        return bdd, build(self.top)

    def probability(self, q: Mapping[str, object]):
        return top_probability(self, q)


def top_probability(tree: FaultTree, q: Mapping[str, object]):
    """Exact top-event probability for independent basic events."""
    extra = set(q) - set(tree.events)
    if extra:
        raise FaultTreeError(f"unknown basic event id {sorted(extra)[0]!r}")
    missing = [e for e in tree.events if e not in q]
    if missing:
        raise FaultTreeError(f"no probability for basic event {missing[0]!r}")
    for name, p in q.items():
        arr = np.asarray(p, dtype=float)
        if np.any((arr < 0) | (arr > 1)):
            raise FaultTreeError(f"probability of {name!r} outside [0, 1]")
    bdd, root = tree.compiled
    return bdd.probability(root, q)


def _minimize(sets: Iterable[frozenset]) -> set[frozenset]:
    ordered = sorted(set(sets), key=len)
    kept: list[frozenset] = []
    for candidate in ordered:
        if not any(k <= candidate for k in kept):
            kept.append(candidate)
    return set(kept)


def minimal_cut_sets(tree: FaultTree) -> set[frozenset[str]]:
    """Complete list of minimal cut sets by top-down expansion with absorption."""
    memo: dict[int, set[frozenset]] = {}

    def expand(node) -> set[frozenset]:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, BasicEvent):
            result = {frozenset([node.id])}
        else:
            child_sets = [expand(c) for c in node.children]
            result = set()
            for group in itertools.combinations(child_sets, node.threshold):
                partial = {frozenset()}
                for options in group:
                    partial = _minimize(a | b for a in partial for b in options)
                result |= partial
            result = _minimize(result)
        memo[key] = result
        return result

    return expand(tree.top)
