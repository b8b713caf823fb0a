"""Shortest-path helpers on the directed uplink graph.

Two flavours are used by the engines: cheapest path under the per-bit
objective cost (exact engine) and minimum-hop with energy-cost then
smallest-node-id tie-breaking (heuristic).  Both are deterministic.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable

from .power import ModelParams, link_cost_per_bit
from .topology import NetworkInstance


class Unreachable(ValueError):
    """No path between the requested endpoints."""


def _dijkstra(instance: NetworkInstance, params: ModelParams, src: int,
              allowed: set[int] | None, key) -> dict[int, tuple]:
    """Settle every reachable node; returns node -> (key_tuple, path).

    ``key(link) -> tuple`` gives the additive edge weight.  Ties are broken
    by the lexicographically smallest node-id path, which makes the result
    independent of heap insertion order.
    """
    zero = tuple(0 for _ in key(instance.links[0])) if instance.links else ()
    best: dict[int, tuple] = {}
    heap = [(zero, (src,))]
    while heap:
        weight, path = heapq.heappop(heap)
        node = path[-1]
        if node in best:
            continue
        best[node] = (weight, path)
        for link in instance.out_links[node]:
            if link.dst in best:
                continue
            if allowed is not None and link.dst not in allowed:
                continue
            w = tuple(a + b for a, b in zip(weight, key(link)))
            heapq.heappush(heap, (w, path + (link.dst,)))
    return best


def cheapest_paths(instance: NetworkInstance, params: ModelParams, src: int,
                   allowed: set[int] | None = None) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Per-bit-cost shortest paths from ``src`` to every reachable node."""
    res = _dijkstra(instance, params, src, allowed,
                    key=lambda ln: (link_cost_per_bit(ln, params),))
    return {n: (w[0], path) for n, (w, path) in res.items()}


def cheapest_path(instance: NetworkInstance, params: ModelParams, src: int,
                  dst: int, allowed: set[int] | None = None) -> tuple[float, tuple[int, ...]]:
    res = cheapest_paths(instance, params, src, allowed)
    if dst not in res:
        raise Unreachable(f"no path {src} -> {dst}")
    return res[dst]


def min_hop_path(instance: NetworkInstance, params: ModelParams, src: int,
                 dst: int, allowed: set[int] | None = None) -> tuple[int, float, tuple[int, ...]]:
    """Minimum-hop path, ties broken by total per-bit cost, then by the
    smallest-node-id path.  Returns (hops, cost, path)."""
    res = _dijkstra(instance, params, src, allowed,
                    key=lambda ln: (1, link_cost_per_bit(ln, params)))
    if dst not in res:
        raise Unreachable(f"no path {src} -> {dst}")
    (hops, cost), path = res[dst]
    return hops, cost, path
