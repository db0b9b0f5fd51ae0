"""Iterative MBR-refinement routing.

Starts from the direct origin-destination link and, whenever the current
best path collides with an obstacle, activates that obstacle: its bounding
box corners join the node set and links crossing its polygon are excluded
from then on. Obstacles the path never meets never contribute nodes. If no
path exists over the active nodes (non-convex boundary, or bounding boxes
sealing a corridor that the real obstacles leave open), the exact-vertex
graph over all polygon vertices is used instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .costs import CostModel
from .errors import NoPathExists
from .geometry import (
    Containment,
    Point,
    mbr_intersects_segment,
    point_in_ring,
    segment_avoids_ring,
    segment_ring_contacts,
    Segment,
)
from .scene import Obstacle, SceneModel
from .search import shortest_path
from .trajectories import dhaus, trajectory_from_points
from .visibility import (
    NodeKind,
    VisibilityGraph,
    build_full_graph,
    check_terminal,
    link_pairs,
    merge_points,
    weigh_links,
)


@dataclass(frozen=True)
class IterationRecord:
    activated: tuple[str, ...]
    nodes: int
    links: int
    cost: Optional[float]
    colliding: Optional[str]


@dataclass
class HierarchicalResult:
    node_ids: list[int]
    polyline: list[Point]
    cost: float
    trace: list[IterationRecord]
    fallback_used: bool
    graph: VisibilityGraph

    @property
    def iterations(self) -> int:
        return len(self.trace)


def _corner_admissible(c: Point, scene: SceneModel, area_index: int) -> bool:
    if point_in_ring(c, scene.areas[area_index].outer) is Containment.OUTSIDE:
        return False
    for obs in scene.obstacles_in_area(area_index):
        if point_in_ring(c, obs.boundary) is Containment.INSIDE:
            return False
    return True


def _first_collision(graph: VisibilityGraph, path_ids: list[int],
                     obstacles: tuple[Obstacle, ...],
                     skip: set[str]) -> Optional[Obstacle]:
    """First obstacle the path meets, by arc length of first contact."""
    points = {n.id: n.point for n in graph.nodes}
    for u, v in zip(path_ids[:-1], path_ids[1:]):
        seg = Segment(points[u], points[v])
        best = None
        best_t = None
        for obs in obstacles:
            if obs.id in skip:
                continue
            if not mbr_intersects_segment(obs.mbr, seg):
                continue
            if segment_avoids_ring(seg, obs.boundary):
                continue
            contacts = segment_ring_contacts(seg, obs.boundary)
            t = contacts[0] if contacts else 0.0
            if best is None or t < best_t:
                best, best_t = obs, t
        if best is not None:
            return best
    return None


def route_hierarchical(scene: SceneModel, area_index: int, s: Point, t: Point,
                       model: CostModel) -> HierarchicalResult:
    check_terminal(scene, area_index, s, "origin")
    check_terminal(scene, area_index, t, "destination")
    outer_poly = scene.outer_only(area_index)
    obstacles = scene.obstacles_in_area(area_index)
    specs: list[tuple[Point, NodeKind]] = [(s, NodeKind.TERMINAL), (t, NodeKind.TERMINAL)]
    activated: list[Obstacle] = []
    trace: list[IterationRecord] = []

    for _ in range(len(obstacles) + 1):
        nodes = merge_points(specs)
        blockers = [o.boundary for o in activated]
        links = weigh_links(link_pairs(nodes, outer_poly, blockers), scene, model)
        graph = VisibilityGraph(nodes, links)
        s_id, t_id = graph.find_node(s), graph.find_node(t)
        try:
            path_ids, cost = shortest_path(graph, s_id, t_id)
        except NoPathExists:
            return _fallback(scene, area_index, s, t, model, trace, activated)
        hit = _first_collision(graph, path_ids, obstacles, {o.id for o in activated})
        trace.append(IterationRecord(tuple(o.id for o in activated),
                                     len(nodes), len(links), cost,
                                     hit.id if hit else None))
        if hit is None:
            return HierarchicalResult(
                path_ids, [graph.nodes[i].point for i in path_ids], cost,
                trace, False, graph)
        activated.append(hit)
        corners = [c for c in hit.mbr.corners()
                   if _corner_admissible(c, scene, area_index)]
        if not corners:
            # occluded box: use the obstacle's own vertices instead
            corners = [v for v in hit.boundary.vertices
                       if _corner_admissible(v, scene, area_index)]
        specs += [(c, NodeKind.MBR_CORNER) for c in corners]

    return _fallback(scene, area_index, s, t, model, trace, activated)


def _fallback(scene, area_index, s, t, model, trace, activated) -> HierarchicalResult:
    graph = build_full_graph(scene, area_index, s, t, model)
    s_id, t_id = graph.find_node(s), graph.find_node(t)
    path_ids, cost = shortest_path(graph, s_id, t_id)
    trace.append(IterationRecord(tuple(o.id for o in activated),
                                 len(graph.nodes), len(graph.links), cost, None))
    return HierarchicalResult(path_ids, [graph.nodes[i].point for i in path_ids],
                              cost, trace, True, graph)


@dataclass
class BenchReport:
    full_nodes: int
    full_links: int
    full_iterations: int
    full_cost: float
    full_ms: float
    hier_nodes: int
    hier_links: int
    hier_iterations: int
    hier_cost: float
    hier_ms: float
    hier_fallback: bool
    dhaus_between_paths: float

    def to_dict(self, include_ms: bool = True) -> dict:
        d = {
            "full_nodes": self.full_nodes,
            "full_links": self.full_links,
            "full_iterations": self.full_iterations,
            "full_cost": round(self.full_cost, 9),
            "hier_nodes": self.hier_nodes,
            "hier_links": self.hier_links,
            "hier_iterations": self.hier_iterations,
            "hier_cost": round(self.hier_cost, 9),
            "hier_fallback": self.hier_fallback,
            "dhaus_between_paths": round(self.dhaus_between_paths, 9),
        }
        if include_ms:
            d["full_ms"] = round(self.full_ms, 3)
            d["hier_ms"] = round(self.hier_ms, 3)
        return d

    def to_rows(self, include_ms: bool = True) -> list[dict]:
        """One flat record per algorithm run."""
        rows = []
        for alg, nodes, links, iters, cost, ms in (
            ("full", self.full_nodes, self.full_links, self.full_iterations,
             self.full_cost, self.full_ms),
            ("hier", self.hier_nodes, self.hier_links, self.hier_iterations,
             self.hier_cost, self.hier_ms),
        ):
            row = {
                "algorithm": alg,
                "nodes": nodes,
                "links": links,
                "iterations": iters,
                "cost": round(cost, 9),
                "dhaus_between_paths": round(self.dhaus_between_paths, 9),
            }
            if include_ms:
                row["ms"] = round(ms, 3)
            rows.append(row)
        return rows


def compare_algorithms(scene: SceneModel, s: Point, t: Point, model: CostModel,
                       area_index: int = 0) -> BenchReport:
    """Run both algorithms on the same request and report size, cost, time,
    and the geometric deviation between the two paths."""
    t0 = time.perf_counter()
    full_graph = build_full_graph(scene, area_index, s, t, model)
    full_path, full_cost = shortest_path(full_graph, full_graph.find_node(s),
                                         full_graph.find_node(t))
    full_ms = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    hier = route_hierarchical(scene, area_index, s, t, model)
    hier_ms = (time.perf_counter() - t0) * 1000.0

    full_points = [full_graph.nodes[i].point for i in full_path]
    deviation = dhaus(trajectory_from_points(full_points),
                      trajectory_from_points(hier.polyline))
    return BenchReport(
        full_nodes=len(full_graph.nodes), full_links=len(full_graph.links),
        full_iterations=1, full_cost=full_cost, full_ms=full_ms,
        hier_nodes=len(hier.graph.nodes), hier_links=len(hier.graph.links),
        hier_iterations=hier.iterations, hier_cost=hier.cost, hier_ms=hier_ms,
        hier_fallback=hier.fallback_used, dhaus_between_paths=deviation)
