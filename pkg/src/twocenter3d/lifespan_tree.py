"""Segment tree of item life-spans over a cell tour, with offline per-leaf evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .arrangement import CellTour


class SpanOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class LifeSpan:
    item: int
    lo: int
    hi: int  # exclusive


def compute_spans(tour: CellTour, initial, n_items: int) -> tuple[list[LifeSpan], list[LifeSpan]]:
    """Spans of membership in the "+" set (starting as ``initial``) and its complement.

    A toggle at tour position k flips the item's membership from position k on.
    """
    L = len(tour)
    inside = [False] * n_items
    for i in initial:
        inside[i] = True
    start = [0] * n_items
    plus: list[LifeSpan] = []
    minus: list[LifeSpan] = []
    for k in range(1, L):
        t = tour.toggles[k]
        if t is None:
            continue
        (plus if inside[t] else minus).append(LifeSpan(t, start[t], k))
        inside[t] = not inside[t]
        start[t] = k
    for i in range(n_items):
        if L:
            (plus if inside[i] else minus).append(LifeSpan(i, start[i], L))
    plus.sort(key=lambda s: (s.lo, s.item))
    minus.sort(key=lambda s: (s.lo, s.item))
    return plus, minus


@dataclass
class SpanTree:
    leaf_count: int
    size: int  # number of leaves in the padded complete tree
    nodes: list[list[int]]
    payloads: list[object] | None = None
    stored: int = 0
    per_span_nodes: list[int] = field(default_factory=list)

    def path(self, leaf: int) -> list[int]:
        """Node indices from the root down to ``leaf``."""
        v = leaf + self.size
        out = []
        while v >= 1:
            out.append(v)
            v //= 2
        return out[::-1]

    def members_at(self, leaf: int) -> set[int]:
        s: set[int] = set()
        for v in self.path(leaf):
            s.update(self.nodes[v])
        return s


def build(spans: list[LifeSpan], leaf_count: int, payload: Callable | None = None) -> SpanTree:
    """Canonical decomposition of each span; ``payload(ids)`` is precomputed per nonempty node."""
    size = 1
    while size < max(1, leaf_count):
        size *= 2
    nodes: list[list[int]] = [[] for _ in range(2 * size)]
    counts = []
    stored = 0
    for sp in spans:
        if not (0 <= sp.lo < sp.hi <= leaf_count):
            raise SpanOutOfRange(f"span [{sp.lo}, {sp.hi}) outside [0, {leaf_count})")
        lo, hi = sp.lo + size, sp.hi + size
        c = 0
        while lo < hi:
            if lo & 1:
                nodes[lo].append(sp.item)
                lo += 1
                c += 1
            if hi & 1:
                hi -= 1
                nodes[hi].append(sp.item)
                c += 1
            lo //= 2
            hi //= 2
        counts.append(c)
        stored += c
    tree = SpanTree(leaf_count, size, nodes, None, stored, counts)
    if payload is not None:
        tree.payloads = [payload(ids) if ids else None for ids in nodes]
    return tree


def node_bound(leaf_count: int) -> int:
    return 2 * max(1, math.ceil(math.log2(max(2, leaf_count))))


def evaluate_leaves(tree: SpanTree, predicate: Callable, use_payloads: bool = False,
                    memo: bool = True) -> list:
    """Outcome per leaf of ``predicate`` over the membership at that leaf.

    A DFS keeps the ids inserted along the current root path on a stack; at each leaf
    the predicate sees the sorted ids (or the list of node payloads when
    ``use_payloads``).  Leaves with equal membership share one evaluation when ``memo``.
    """
    L = tree.leaf_count
    out: list = [None] * L
    cache: dict = {}
    stack: list[int] = []
    pay_stack: list = []
    todo = [(1, False)]
    while todo:
        v, leaving = todo.pop()
        if leaving:
            del stack[len(stack) - len(tree.nodes[v]):]
            if use_payloads and tree.nodes[v]:
                pay_stack.pop()
            continue
        lo_leaf = (v << (tree.size.bit_length() - v.bit_length())) - tree.size
        if lo_leaf >= L:
            continue
        stack.extend(tree.nodes[v])
        if use_payloads and tree.nodes[v]:
            pay_stack.append(tree.payloads[v])
        todo.append((v, True))
        if v >= tree.size:
            leaf = v - tree.size
            key = tuple(sorted(stack))
            if memo and key in cache:
                out[leaf] = cache[key]
            else:
                res = predicate(list(pay_stack)) if use_payloads else predicate(key)
                if memo:
                    cache[key] = res
                out[leaf] = res
        else:
            todo.append((2 * v + 1, False))
            todo.append((2 * v, False))
    return out
