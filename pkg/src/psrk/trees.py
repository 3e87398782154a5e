"""Rooted trees and the combinatorial quantities attached to them.

A tree is stored as the tuple of its root's subtrees, kept in a canonical
(descending) order so that structurally equal trees compare and hash equal.
Trees are written as nested parentheses: ``"()"`` is a single vertex,
``"(())"`` the tree of order two and ``"(()())"`` the bushy tree of order
three.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Iterator

import numpy as np

__all__ = [
    "RootedTree",
    "enumerate_trees",
    "trees_of_order",
    "tree_factorial",
    "symmetry_order",
    "monotonic_labelings",
    "derivative_weights",
    "elementary_weight",
    "MAX_ENUMERATION_ORDER",
]

MAX_ENUMERATION_ORDER = 10


class RootedTree:
    """Unlabeled rooted tree in canonical form.

    ``RootedTree(children)`` accepts the subtrees in any order; they are
    sorted on construction. Instances are immutable and hashable.
    """

    __slots__ = ("children", "order", "_key", "_hash")

    def __init__(self, children=()):
        kids = tuple(sorted(children, key=_sort_key, reverse=True))
        self.children: tuple[RootedTree, ...] = kids
        self.order: int = 1 + sum(c.order for c in kids)
        self._key = (self.order, tuple(c._key for c in kids))
        self._hash = hash(self._key)

    @classmethod
    def parse(cls, text: str) -> "RootedTree":
        """Build a tree from its nested-parentheses form."""
        text = "".join(text.split())
        tree, pos = _parse_at(text, 0)
        if pos != len(text):
            raise ValueError(f"trailing characters in tree literal at column {pos}: {text!r}")
        return tree

    def __str__(self) -> str:
        return "(" + "".join(str(c) for c in self.children) + ")"

    def __repr__(self) -> str:
        return f"RootedTree.parse({str(self)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self._key == other._key

    def __lt__(self, other: "RootedTree") -> bool:
        return self._key < other._key

    def __hash__(self) -> int:
        return self._hash

    def graft(self, *children: "RootedTree") -> "RootedTree":
        """The tree obtained by attaching ``children`` to a new root (``[t1 ... tn]``)."""
        return RootedTree(children)

    @classmethod
    def leaf(cls) -> "RootedTree":
        return _LEAF

    @classmethod
    def tall(cls, order: int) -> "RootedTree":
        """The path tree with ``order`` vertices."""
        t = _LEAF
        for _ in range(order - 1):
            t = RootedTree((t,))
        return t

    @classmethod
    def bushy(cls, order: int) -> "RootedTree":
        """A root with ``order - 1`` leaf children."""
        return RootedTree((_LEAF,) * (order - 1))


def _sort_key(t: RootedTree):
    return t._key


def _parse_at(text: str, pos: int) -> tuple[RootedTree, int]:
    if pos >= len(text) or text[pos] != "(":
        raise ValueError(f"expected '(' at column {pos} in {text!r}")
    pos += 1
    children = []
    while pos < len(text) and text[pos] == "(":
        child, pos = _parse_at(text, pos)
        children.append(child)
    if pos >= len(text) or text[pos] != ")":
        raise ValueError(f"expected ')' at column {pos} in {text!r}")
    return RootedTree(children), pos + 1


_LEAF = RootedTree()


@lru_cache(maxsize=None)
def trees_of_order(n: int) -> tuple[RootedTree, ...]:
    """All trees with exactly ``n`` vertices, sorted in canonical order."""
    if n < 1:
        return ()
    if n == 1:
        return (_LEAF,)
    found = {RootedTree(kids) for kids in _forests(n - 1, n - 1)}
    return tuple(sorted(found))


def _forests(total: int, cap: int) -> Iterator[tuple[RootedTree, ...]]:
    # Multisets of trees with ``total`` vertices overall, each tree of order
    # <= cap, emitted with non-increasing child order so each multiset shows
    # up a bounded number of times.
    if total == 0:
        yield ()
        return
    for k in range(min(total, cap), 0, -1):
        for first in trees_of_order(k):
            for rest in _forests(total - k, k):
                if rest and rest[0].order == k and rest[0] > first:
                    continue
                yield (first,) + rest


def enumerate_trees(max_order: int) -> list[list[RootedTree]]:
    """Every rooted tree of order <= ``max_order``, grouped by order.

    ``result[k - 1]`` holds the trees of order ``k``.
    """
    if not isinstance(max_order, (int, np.integer)) or not 1 <= max_order <= MAX_ENUMERATION_ORDER:
        raise ValueError(f"max_order must be an integer in [1, {MAX_ENUMERATION_ORDER}], got {max_order!r}")
    return [list(trees_of_order(k)) for k in range(1, max_order + 1)]


@lru_cache(maxsize=None)
def tree_factorial(t: RootedTree) -> int:
    """t! = |t| times the product of the children's factorials."""
    out = t.order
    for child in t.children:
        out *= tree_factorial(child)
    return out


@lru_cache(maxsize=None)
def symmetry_order(t: RootedTree) -> int:
    """Order of the automorphism group of ``t``."""
    out = 1
    i = 0
    kids = t.children
    while i < len(kids):
        j = i
        while j < len(kids) and kids[j] == kids[i]:
            j += 1
        mult = j - i
        out *= factorial(mult) * symmetry_order(kids[i]) ** mult
        i = j
    return out


def monotonic_labelings(t: RootedTree) -> int:
    """Number of labelings increasing away from the root: |t|! / (t! sigma(t))."""
    num = factorial(t.order)
    den = tree_factorial(t) * symmetry_order(t)
    q, r = divmod(num, den)
    assert r == 0
    return q


def derivative_weights(t: RootedTree, tab) -> np.ndarray:
    """Stage vector Phi(t): ones for a leaf, else the elementwise product of A Phi(child)."""
    return _phi(t, tab.A, {})


def _phi(t: RootedTree, A: np.ndarray, memo: dict) -> np.ndarray:
    got = memo.get(t)
    if got is not None:
        return got
    out = np.ones(A.shape[0])
    for child in t.children:
        out = out * (A @ _phi(child, A, memo))
    memo[t] = out
    return out


def derivative_weight_table(trees, tab) -> dict[RootedTree, np.ndarray]:
    """Phi(t) for every tree in ``trees`` with shared memoisation."""
    memo: dict = {}
    return {t: _phi(t, tab.A, memo) for t in trees}


def elementary_weight(t: RootedTree, tab) -> float:
    """b . Phi(t)."""
    return float(tab.b @ derivative_weights(t, tab))
