"""Purely graphical queries: d-separation and Markov blankets.

d-separation uses the standard active-trail reachability walk over
(node, direction) pairs, so no path enumeration happens even on dense
graphs.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .errors import OverlappingSets
from .network import Network


def markov_blanket(net: Network, name: str) -> set[str]:
    """Parents, children and co-parents of ``name`` (excluding itself)."""
    net.variable(name)
    blanket: set[str] = set(net.parents(name)) | set(net.children(name))
    for child in net.children(name):
        blanket.update(net.parents(child))
    blanket.discard(name)
    return blanket


def d_separated(net: Network, x: Iterable[str], y: Iterable[str],
                z: Iterable[str] = ()) -> bool:
    """True iff every undirected path between x and y is blocked given z.

    Chain and fork nodes block when observed; colliders block unless they
    or a descendant are observed.
    """
    xs, ys, zs = set(x), set(y), set(z)
    for name in xs | ys | zs:
        net.variable(name)
    overlap = (xs & ys) | (xs & zs) | (ys & zs)
    if overlap:
        raise OverlappingSets(
            "query sets must be pairwise disjoint", overlap=sorted(overlap)
        )
    if not xs or not ys:
        return True

    # ancestors of the conditioning set activate colliders
    z_anc = net.ancestors(zs) | zs

    UP, DOWN = 0, 1  # arrived from a child / from a parent
    queue: deque[tuple[str, int]] = deque((s, UP) for s in sorted(xs))
    visited: set[tuple[str, int]] = set()
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in zs and node in ys:
            return False
        if direction == UP and node not in zs:
            for parent in net.parents(node):
                queue.append((parent, UP))
            for child in net.children(node):
                queue.append((child, DOWN))
        elif direction == DOWN:
            if node not in zs:
                for child in net.children(node):
                    queue.append((child, DOWN))
            if node in z_anc:
                for parent in net.parents(node):
                    queue.append((parent, UP))
    return True
