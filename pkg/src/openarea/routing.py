"""End-to-end routing: in-area search, gate handling for out-of-area
terminals, and connector stitching across multiple area polygons.

A terminal outside every area is resolved through entrance gates: the leg
from the terminal to each candidate gate is priced over the external street
network when one is supplied (joining it at the nearest network node),
otherwise as the straight line to the gate center; the gate minimizing
external-plus-internal total wins. Terminals in different polygons route
over per-area graphs joined by connector pathways; with no connector and
exactly one gate, both graphs are joined through that single gate node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

from .costs import CostModel, LinkFeatures, link_features, link_weight
from .errors import (
    NoPathExists,
    ParseError,
    RoutingError,
    TerminalInsideObstacle,
    TerminalUnreachable,
    ValidationError,
)
from .geometry import Containment, EPS_GEOM, Point, point_in_ring
from .hierarchical import route_hierarchical
from .scene import Gate, SceneModel
from .search import shortest_path
from .visibility import Link, NodeKind, VisibilityGraph, build_full_graph, link_pairs, merge_points, weigh_links


@dataclass(frozen=True)
class RouteStep:
    start: Point
    end: Point
    length_m: float
    weight: float
    kind: str  # "area" | "external" | "connector"
    features: Optional[LinkFeatures] = None


@dataclass
class RouteResult:
    polyline: list[Point]
    total_cost: float
    total_length_m: float
    steps: list[RouteStep]
    algorithm: str
    iterations: int
    graph_nodes: int
    graph_links: int
    gates_used: list[str] = dc_field(default_factory=list)
    trace: Optional[list] = None
    fallback_used: bool = False


class ExternalNetwork:
    """Pre-built weighted directed graph with a gate-to-node mapping."""

    def __init__(self, nodes: dict[str, Point], links: Sequence[tuple[str, str, float]],
                 gate_map: dict[str, str]):
        self.points = nodes
        self.gate_map = gate_map
        self.adj: dict[str, list[tuple[str, float]]] = {k: [] for k in nodes}
        for u, v, w in links:
            if u not in nodes or v not in nodes:
                raise ValidationError(f"network link references unknown node {u!r} or {v!r}")
            if w < 0:
                raise ValidationError("network link weights must be >= 0")
            self.adj[u].append((v, float(w)))
        for nid in gate_map.values():
            if nid not in nodes:
                raise ValidationError(f"gate_map references unknown node {nid!r}")

    @classmethod
    def load(cls, source) -> "ExternalNetwork":
        if isinstance(source, dict):
            doc = source
        else:
            try:
                path = Path(source)
                doc = json.loads(path.read_text() if path.exists() else str(source))
            except (OSError, json.JSONDecodeError, ValueError) as exc:
                raise ParseError(f"cannot read network: {exc}") from exc
        try:
            nodes = {str(n["id"]): Point(float(n["x"]), float(n["y"]))
                     for n in doc["nodes"]}
            links = [(str(l["from"]), str(l["to"]), float(l["weight"]))
                     for l in doc.get("links", [])]
            gate_map = {str(k): str(v) for k, v in doc.get("gate_map", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad network document: {exc}") from exc
        return cls(nodes, links, gate_map)

    def nearest_node(self, p: Point) -> str:
        return min(self.points, key=lambda k: (self.points[k].distance_to(p), k))

    def path(self, src: str, dst: str) -> tuple[list[str], float]:
        import heapq

        dist = {k: math.inf for k in self.points}
        prev: dict[str, Optional[str]] = {}
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if u == dst:
                break
            for v, w in self.adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if math.isinf(dist[dst]):
            raise NoPathExists(f"no network path {src} -> {dst}")
        ids = [dst]
        while ids[-1] != src:
            ids.append(prev[ids[-1]])
        return ids[::-1], dist[dst]


@dataclass
class _Leg:
    entry: Point
    area_index: Optional[int]
    cost: float
    polyline: list[Point]
    steps: list[RouteStep]
    gate_id: Optional[str]


def _external_steps(points: list[Point], weights: list[float]) -> list[RouteStep]:
    steps = []
    for a, b, w in zip(points[:-1], points[1:], weights):
        if a.distance_to(b) < EPS_GEOM and w == 0:
            continue
        steps.append(RouteStep(a, b, a.distance_to(b), w, "external"))
    return steps


def _leg_via_network(p: Point, gate: Gate, network: ExternalNetwork,
                     to_gate: bool) -> Optional[_Leg]:
    if gate.id not in network.gate_map:
        return None
    gate_node = network.gate_map[gate.id]
    join = network.nearest_node(p)
    try:
        ids, net_cost = (network.path(join, gate_node) if to_gate
                         else network.path(gate_node, join))
    except NoPathExists:
        return None
    node_pts = [network.points[i] for i in ids]
    if to_gate:
        pts = [p] + node_pts + [gate.center]
    else:
        pts = [gate.center] + node_pts + [p]
    enter = p.distance_to(network.points[join])
    attach = gate.center.distance_to(network.points[gate_node])
    hop_weights = []
    for u, v in zip(ids[:-1], ids[1:]):
        hop_weights.append(min(w for to, w in network.adj[u] if to == v))
    weights = ([enter] + hop_weights + [attach]) if to_gate else ([attach] + hop_weights + [enter])
    cost = enter + net_cost + attach
    # drop consecutive duplicate points
    clean_pts, clean_ws = [pts[0]], []
    for q, w in zip(pts[1:], weights):
        if q.distance_to(clean_pts[-1]) < EPS_GEOM:
            continue
        clean_pts.append(q)
        clean_ws.append(w)
    return _Leg(gate.center, gate.area_index, cost, clean_pts,
                _external_steps(clean_pts, clean_ws), gate.id)


def _terminal_legs(scene: SceneModel, p: Point, network: Optional[ExternalNetwork],
                   to_terminal: bool, label: str) -> list[_Leg]:
    """Ways to resolve a terminal: directly if inside an area, else via each
    candidate gate (network-priced when available, straight line otherwise)."""
    obs = scene.inside_obstacle(p)
    if obs is not None:
        raise TerminalInsideObstacle(f"{label} is inside obstacle {obs.id}")
    area_index = scene.locate(p)
    if area_index is not None:
        return [_Leg(p, area_index, 0.0, [p], [], None)]
    if not scene.gates:
        raise TerminalUnreachable(f"{label} lies in no area and the scene has no gates")
    legs = []
    for gate in scene.gates:
        if network is not None:
            leg = _leg_via_network(p, gate, network, to_gate=not to_terminal)
            if leg is not None:
                legs.append(leg)
        else:
            d = p.distance_to(gate.center)
            pts = [p, gate.center] if not to_terminal else [gate.center, p]
            legs.append(_Leg(gate.center, gate.area_index, d, pts,
                             _external_steps(pts, [d]), gate.id))
    if not legs:
        raise TerminalUnreachable(f"{label} cannot reach any gate")
    return legs


def _steps_from_graph_path(graph: VisibilityGraph, path_ids: list[int],
                           kind: str = "area") -> list[RouteStep]:
    by_pair = {}
    for link in graph.links:
        by_pair[(link.u, link.v)] = link
        by_pair[(link.v, link.u)] = link
    steps = []
    for u, v in zip(path_ids[:-1], path_ids[1:]):
        link = by_pair[(u, v)]
        a = graph.nodes[u].point
        b = graph.nodes[v].point
        steps.append(RouteStep(a, b, link.length_m, link.weight, kind, link.features))
    return steps


def _route_in_area(scene: SceneModel, area_index: int, s: Point, t: Point,
                   algorithm: str, model: CostModel,
                   gates_as_nodes: bool = True):
    """(polyline, cost, steps, iterations, trace, fallback, nodes, links)."""
    if s.distance_to(t) < EPS_GEOM:
        return [s], 0.0, [], 1, None, False, 0, 0
    if algorithm == "hier":
        r = route_hierarchical(scene, area_index, s, t, model)
        steps = _steps_from_graph_path(r.graph, r.node_ids)
        return (r.polyline, r.cost, steps, r.iterations, r.trace,
                r.fallback_used, len(r.graph.nodes), len(r.graph.links))
    extra = [(g.center, NodeKind.GATE) for g in scene.gates_in_area(area_index)] \
        if gates_as_nodes else []
    graph = build_full_graph(scene, area_index, s, t, model, extra=extra)
    path_ids, cost = shortest_path(graph, graph.find_node(s), graph.find_node(t))
    polyline = [graph.nodes[i].point for i in path_ids]
    return (polyline, cost, _steps_from_graph_path(graph, path_ids), 1, None,
            False, len(graph.nodes), len(graph.links))


def _stitched_route(scene: SceneModel, s: Point, s_area: int, t: Point,
                    t_area: int, model: CostModel):
    """Route across polygons: per-area graphs joined by connector links,
    falling back to the single-gate join when connectors are absent."""
    specs: list[tuple[Point, NodeKind]] = [(s, NodeKind.TERMINAL), (t, NodeKind.TERMINAL)]
    for area in scene.areas:
        specs += [(p, NodeKind.BOUNDARY) for p in area.outer.vertices]
        for hole in area.holes:
            specs += [(p, NodeKind.HOLE) for p in hole.vertices]
    for g in scene.gates:
        specs.append((g.center, NodeKind.GATE))
    for c in scene.connectors:
        specs.append((c.a, NodeKind.BOUNDARY))
        specs.append((c.b, NodeKind.BOUNDARY))
    nodes = merge_points(specs)

    links: list[Link] = []
    seen_pairs = set()
    for ai, area in enumerate(scene.areas):
        members = [n for n in nodes
                   if point_in_ring(n.point, area.outer) is not Containment.OUTSIDE]
        for u, v, seg in link_pairs(members, area):
            if (u, v) in seen_pairs:
                continue
            seen_pairs.add((u, v))
            links.extend(weigh_links([(u, v, seg)], scene, model))
    for c in scene.connectors:
        u = next(n.id for n in nodes if n.point.distance_to(c.a) < EPS_GEOM)
        v = next(n.id for n in nodes if n.point.distance_to(c.b) < EPS_GEOM)
        key = (min(u, v), max(u, v))
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        feats = link_features(c, scene, model.sample_step_m)
        w = link_weight(feats, model)
        if math.isfinite(w):
            links.append(Link(key[0], key[1], c, c.length, feats, w))

    graph = VisibilityGraph(nodes, links)
    s_id, t_id = graph.find_node(s), graph.find_node(t)
    try:
        path_ids, cost = shortest_path(graph, s_id, t_id)
    except NoPathExists:
        if len(scene.gates) != 1:
            raise
        raise NoPathExists(
            "areas are not joined by connectors and the single-gate join "
            "also fails") from None
    polyline = [graph.nodes[i].point for i in path_ids]
    steps = _steps_from_graph_path(graph, path_ids)
    gate_ids = [g.id for g in scene.gates
                if any(graph.nodes[i].point.distance_to(g.center) < EPS_GEOM
                       for i in path_ids)]
    return polyline, cost, steps, gate_ids, len(nodes), len(links)


def route(scene: SceneModel, origin: Point, destination: Point,
          algorithm: str = "full", model: Optional[CostModel] = None,
          network: Optional[ExternalNetwork] = None) -> RouteResult:
    """Lowest-cost route between two terminals, resolving gates and
    connectors as needed."""
    if algorithm not in ("full", "hier"):
        raise ValidationError(f"unknown algorithm {algorithm!r}")
    if origin.distance_to(destination) < EPS_GEOM:
        raise ValidationError("origin and destination coincide")
    model = model or CostModel()

    origin_legs = _terminal_legs(scene, origin, network, to_terminal=False, label="origin")
    dest_legs = _terminal_legs(scene, destination, network, to_terminal=True,
                               label="destination")

    best: Optional[RouteResult] = None
    for o_leg in origin_legs:
        for d_leg in dest_legs:
            try:
                candidate = _assemble(scene, o_leg, d_leg, algorithm, model)
            except RoutingError:
                # e.g. an unreachable gate option; other combos may still work
                continue
            if best is None or candidate.total_cost < best.total_cost - 1e-12:
                best = candidate
    if best is None:
        raise NoPathExists("no route between origin and destination")
    return best


def _assemble(scene, o_leg: _Leg, d_leg: _Leg, algorithm: str,
              model: CostModel) -> RouteResult:
    gates_used = [g for g in (o_leg.gate_id, d_leg.gate_id) if g]
    if o_leg.area_index == d_leg.area_index:
        (polyline, cost, steps, iterations, trace, fallback,
         n_nodes, n_links) = _route_in_area(scene, o_leg.area_index, o_leg.entry,
                                            d_leg.entry, algorithm, model)
    else:
        polyline, cost, steps, join_gates, n_nodes, n_links = _stitched_route(
            scene, o_leg.entry, o_leg.area_index, d_leg.entry, d_leg.area_index, model)
        iterations, trace, fallback = 1, None, False
        gates_used += [g for g in join_gates if g not in gates_used]

    full_polyline = list(o_leg.polyline)
    for p in polyline + d_leg.polyline:
        if p.distance_to(full_polyline[-1]) >= EPS_GEOM:
            full_polyline.append(p)
    all_steps = o_leg.steps + steps + d_leg.steps
    total_cost = o_leg.cost + cost + d_leg.cost
    total_length = sum(st.length_m for st in all_steps)
    return RouteResult(
        polyline=full_polyline, total_cost=total_cost, total_length_m=total_length,
        steps=all_steps, algorithm=algorithm, iterations=iterations,
        graph_nodes=n_nodes, graph_links=n_links, gates_used=gates_used,
        trace=trace, fallback_used=fallback)
