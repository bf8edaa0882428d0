"""Directed-graph helpers on integer vertices 0..n-1 given as adjacency lists."""

from __future__ import annotations

from collections import deque
from math import gcd
from typing import Mapping, Sequence


def strongly_connected_components(adj: Mapping[int, Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.  Components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in sorted(adj):
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def on_cycle(adj: Mapping[int, Sequence[int]]) -> set[int]:
    """Vertices lying on at least one directed cycle (self-loops included)."""
    out: set[int] = set()
    for comp in strongly_connected_components(adj):
        if len(comp) > 1:
            out.update(comp)
        elif comp[0] in adj.get(comp[0], ()):
            out.add(comp[0])
    return out


def shortest_cycle_through(adj: Mapping[int, Sequence[int]], v: int) -> list[int] | None:
    """Vertices of a shortest cycle v -> ... -> v (without repeating v), or None."""
    if v in adj.get(v, ()):
        return [v]
    parent = {v: None}
    q = deque([v])
    while q:
        u = q.popleft()
        for w in adj.get(u, ()):
            if w == v:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if w not in parent:
                parent[w] = u
                q.append(w)
    return None


def reachable(adj: Mapping[int, Sequence[int]], sources) -> set[int]:
    """Vertices reachable from ``sources`` by paths of length >= 1."""
    seen: set[int] = set()
    q = deque()
    for s in sources:
        for w in adj.get(s, ()):
            if w not in seen:
                seen.add(w)
                q.append(w)
    while q:
        u = q.popleft()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def cyclic_classes(adj: Mapping[int, Sequence[int]], comp: Sequence[int]) -> tuple[int, list[list[int]]]:
    """Period of an irreducible component and its cyclic classes."""
    cs = set(comp)
    root = comp[0]
    level = {root: 0}
    q = deque([root])
    period = 0
    while q:
        u = q.popleft()
        for w in adj.get(u, ()):
            if w not in cs:
                continue
            if w not in level:
                level[w] = level[u] + 1
                q.append(w)
            else:
                period = gcd(period, level[u] + 1 - level[w])
    period = abs(period) or 1
    classes = [[] for _ in range(period)]
    for v in sorted(cs):
        classes[level[v] % period].append(v)
    return period, classes
