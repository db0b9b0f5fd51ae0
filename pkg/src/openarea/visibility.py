"""On-demand graph over an open area.

Nodes are the terminals plus every boundary and obstacle vertex (plus any
extra points the caller injects, e.g. gate centers); links are all node
pairs whose straight segment lies completely inside the area, weighted by
the cost model. Pair generation is the plain O(n^2) loop with an MBR
prescreen; open-area scenes stay small enough that this wins on simplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .costs import CostModel, link_features, link_weight
from .errors import TerminalInsideObstacle, TerminalOutsideArea
from .geometry import (
    EPS_GEOM,
    Containment,
    Point,
    PolygonWithHoles,
    Ring,
    Segment,
    point_in_ring,
    segment_avoids_ring,
    segment_within_area,
)
from .scene import SceneModel


class NodeKind(Enum):
    TERMINAL = "terminal"
    BOUNDARY = "boundary"
    HOLE = "hole"
    MBR_CORNER = "mbr_corner"
    GATE = "gate"


# merge priority when points coincide: terminals beat everything
_KIND_RANK = {NodeKind.TERMINAL: 0, NodeKind.GATE: 1, NodeKind.MBR_CORNER: 2,
              NodeKind.BOUNDARY: 3, NodeKind.HOLE: 4}


@dataclass(frozen=True)
class Node:
    id: int
    point: Point
    kind: NodeKind


@dataclass(frozen=True)
class Link:
    u: int
    v: int
    geometry: Segment
    length_m: float
    features: object
    weight: float


@dataclass
class VisibilityGraph:
    nodes: list[Node]
    links: list[Link]
    adjacency: dict[int, tuple[int, ...]] = dc_field(default_factory=dict)

    def __post_init__(self):
        if not self.adjacency:
            adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
            for li, link in enumerate(self.links):
                adj[link.u].append(li)
                adj[link.v].append(li)
            self.adjacency = {k: tuple(v) for k, v in adj.items()}

    def neighbors(self, node_id: int) -> Iterator[tuple[int, Link]]:
        for li in self.adjacency[node_id]:
            link = self.links[li]
            yield (link.v if link.u == node_id else link.u), link

    def find_node(self, p: Point, tol: float = EPS_GEOM) -> Optional[int]:
        for n in self.nodes:
            if n.point.distance_to(p) <= tol:
                return n.id
        return None

    @property
    def min_weight_per_meter(self) -> float:
        if not self.links:
            return 0.0
        return min(l.weight / l.length_m for l in self.links)


def merge_points(specs: Iterable[tuple[Point, NodeKind]]) -> list[Node]:
    """Assign dense ids, merging coincident points; the strongest kind wins."""
    nodes: list[Node] = []
    for p, kind in specs:
        for i, existing in enumerate(nodes):
            if existing.point.distance_to(p) < EPS_GEOM:
                if _KIND_RANK[kind] < _KIND_RANK[existing.kind]:
                    nodes[i] = Node(existing.id, existing.point, kind)
                break
        else:
            nodes.append(Node(len(nodes), p, kind))
    return nodes


def check_terminal(scene: SceneModel, area_index: int, p: Point, label: str) -> None:
    area = scene.areas[area_index]
    if point_in_ring(p, area.outer) is Containment.OUTSIDE:
        raise TerminalOutsideArea(f"{label} ({p.x}, {p.y}) is outside the area")
    for obs in scene.obstacles_in_area(area_index):
        if point_in_ring(p, obs.boundary) is Containment.INSIDE:
            raise TerminalInsideObstacle(f"{label} ({p.x}, {p.y}) is inside obstacle {obs.id}")


def link_pairs(nodes: Sequence[Node], poly: PolygonWithHoles,
               blockers: Sequence[Ring] = ()) -> Iterator[tuple[int, int, Segment]]:
    """Yield (u, v, segment) for every pair whose segment lies inside poly
    and enters none of the blocker rings, u < v."""
    area_mbr = poly.mbr()
    pad = 1e-9 * (1 + area_mbr.diameter)
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            a, b = nodes[i].point, nodes[j].point
            if a.distance_to(b) < EPS_GEOM:
                continue
            if (max(a.x, b.x) < area_mbr.lo.x - pad or min(a.x, b.x) > area_mbr.hi.x + pad
                    or max(a.y, b.y) < area_mbr.lo.y - pad or min(a.y, b.y) > area_mbr.hi.y + pad):
                continue
            seg = Segment(a, b)
            # node points are pre-validated inside or on the area
            if not segment_within_area(seg, poly, check_endpoints=False):
                continue
            if any(not segment_avoids_ring(seg, ring) for ring in blockers):
                continue
            yield nodes[i].id, nodes[j].id, seg


def candidate_links(nodes: Sequence[Node], scene: SceneModel,
                    area_index: int) -> list[Segment]:
    """Segments between all mutually visible node pairs, emitted once each."""
    return [seg for _, _, seg in link_pairs(nodes, scene.areas[area_index])]


def weigh_links(pairs: Iterable[tuple[int, int, Segment]], scene: SceneModel,
                model: CostModel) -> list[Link]:
    links = []
    for u, v, seg in pairs:
        feats = link_features(seg, scene, model.sample_step_m)
        w = link_weight(feats, model)
        if math.isinf(w):
            continue
        links.append(Link(u, v, seg, seg.length, feats, w))
    return links


def build_full_graph(scene: SceneModel, area_index: int, s: Point, t: Point,
                     model: CostModel,
                     extra: Sequence[tuple[Point, NodeKind]] = ()) -> VisibilityGraph:
    """Graph over {s, t}, all boundary and obstacle vertices, and any extra
    points, fully linked by the completely-inside rule."""
    check_terminal(scene, area_index, s, "origin")
    check_terminal(scene, area_index, t, "destination")
    area = scene.areas[area_index]
    specs: list[tuple[Point, NodeKind]] = [(s, NodeKind.TERMINAL), (t, NodeKind.TERMINAL)]
    specs += [(p, NodeKind.BOUNDARY) for p in area.outer.vertices]
    for hole in area.holes:
        specs += [(p, NodeKind.HOLE) for p in hole.vertices]
    specs += list(extra)
    nodes = merge_points(specs)
    links = weigh_links(link_pairs(nodes, area), scene, model)
    return VisibilityGraph(nodes, links)
