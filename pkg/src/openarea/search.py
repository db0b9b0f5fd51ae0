"""Lowest-cost path search over visibility graphs.

A* is the primary search; its heuristic is straight-line distance times the
minimum weight-per-meter over all links, which never overestimates because
weights are length-proportional. Dijkstra is kept as the cross-check
implementation. Equal-cost ties resolve to the lexicographically smallest
node-id sequence so results are deterministic.
"""

from __future__ import annotations

import heapq
import math
from typing import Literal

from .errors import NoPathExists
from .visibility import VisibilityGraph


def dijkstra_distances(graph: VisibilityGraph, source: int) -> dict[int, float]:
    dist = {n.id: math.inf for n in graph.nodes}
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, link in graph.neighbors(u):
            nd = d + link.weight
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def astar_cost(graph: VisibilityGraph, s_id: int, t_id: int) -> float:
    rate = graph.min_weight_per_meter
    points = {n.id: n.point for n in graph.nodes}
    target = points[t_id]

    def h(v: int) -> float:
        return points[v].distance_to(target) * rate

    best = {n.id: math.inf for n in graph.nodes}
    best[s_id] = 0.0
    heap = [(h(s_id), 0.0, s_id)]
    while heap:
        f, g, u = heapq.heappop(heap)
        if u == t_id:
            return g
        if g > best[u]:
            continue
        for v, link in graph.neighbors(u):
            ng = g + link.weight
            if ng < best[v]:
                best[v] = ng
                heapq.heappush(heap, (ng + h(v), ng, v))
    return math.inf


def shortest_path(graph: VisibilityGraph, s_id: int, t_id: int,
                  method: Literal["astar", "dijkstra"] = "astar"
                  ) -> tuple[list[int], float]:
    """Minimal-weight path from s_id to t_id as (node ids, cost)."""
    if s_id == t_id:
        return [s_id], 0.0
    dist_s = dijkstra_distances(graph, s_id)
    total = dist_s[t_id]
    if math.isinf(total):
        raise NoPathExists(f"no path between nodes {s_id} and {t_id}")
    if method == "astar":
        total = astar_cost(graph, s_id, t_id)
    dist_t = dijkstra_distances(graph, t_id)
    tol = 1e-12 * (1.0 + abs(total))
    path = [s_id]
    visited = {s_id}
    current = s_id
    while current != t_id:
        choices = []
        for v, link in graph.neighbors(current):
            if v in visited and v != t_id:
                continue
            g = dist_s[current] + link.weight
            if abs(g - dist_s[v]) <= tol and abs(g + dist_t[v] - total) <= tol:
                choices.append(v)
        if not choices:
            raise NoPathExists("shortest-path reconstruction failed")
        current = min(choices)
        visited.add(current)
        path.append(current)
    return path, total
