import itertools

import numpy as np
import pytest

from openarea.costs import pure_length_model
from openarea.errors import TerminalInsideObstacle, TerminalOutsideArea
from openarea.geometry import Point, Segment, segment_within_area
from openarea.scene import load_scene
from openarea.visibility import (
    NodeKind,
    build_full_graph,
    candidate_links,
    merge_points,
)

from scenes import random_scene, sample_free_point, scene_doc, square_scene

MODEL = pure_length_model()


def unit_square_scene():
    return load_scene(scene_doc(areas=[[(0, 0), (1, 0), (1, 1), (0, 1)]]))


class TestBuildFullGraph:
    def test_convex_square_complete(self):
        scene = unit_square_scene()
        g = build_full_graph(scene, 0, Point(0.25, 0.25), Point(0.75, 0.75), MODEL)
        assert len(g.nodes) == 6
        assert len(g.links) == 15
        # brute-force oracle over all pairs
        expected = sum(
            1 for a, b in itertools.combinations([n.point for n in g.nodes], 2)
            if segment_within_area(Segment(a, b), scene.areas[0]))
        assert len(g.links) == expected

    def test_l_shape_notch(self):
        scene = load_scene(scene_doc(areas=[[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]]))
        s, t = Point(1.5, 0.5), Point(0.5, 1.5)
        g = build_full_graph(scene, 0, s, t, MODEL)
        pairs = {(min(l.u, l.v), max(l.u, l.v)) for l in g.links}
        sid = g.find_node(s)
        tid = g.find_node(t)
        cid = g.find_node(Point(1, 1))
        assert (min(sid, tid), max(sid, tid)) not in pairs
        assert (min(sid, cid), max(sid, cid)) in pairs
        assert (min(cid, tid), max(cid, tid)) in pairs

    def test_hole_blocks_direct_link(self):
        scene = load_scene(square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])]))
        s, t = Point(1, 5), Point(9, 5)
        g = build_full_graph(scene, 0, s, t, MODEL)
        sid, tid = g.find_node(s), g.find_node(t)
        pairs = {(min(l.u, l.v), max(l.u, l.v)) for l in g.links}
        assert (min(sid, tid), max(sid, tid)) not in pairs
        # s sees the two near hole corners
        for corner in (Point(4, 4), Point(4, 6)):
            cid = g.find_node(corner)
            assert (min(sid, cid), max(sid, cid)) in pairs

    def test_terminal_errors(self):
        scene = load_scene(square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])]))
        with pytest.raises(TerminalOutsideArea):
            build_full_graph(scene, 0, Point(-1, 5), Point(9, 5), MODEL)
        with pytest.raises(TerminalInsideObstacle):
            build_full_graph(scene, 0, Point(5, 5), Point(9, 5), MODEL)

    def test_terminal_merges_with_vertex(self):
        scene = unit_square_scene()
        g = build_full_graph(scene, 0, Point(0, 0), Point(1, 1), MODEL)
        assert len(g.nodes) == 4
        assert sum(1 for n in g.nodes if n.kind is NodeKind.TERMINAL) == 2

    def test_every_link_passes_within_check(self):
        scene = load_scene(random_scene(41, n_obstacles=3)[0])
        rng = np.random.default_rng(8)
        s = sample_free_point(scene, rng, clearance=2.0)
        t = sample_free_point(scene, rng, clearance=2.0)
        g = build_full_graph(scene, 0, s, t, MODEL)
        for link in g.links:
            assert segment_within_area(link.geometry, scene.areas[0])

    def test_graph_symmetry(self):
        scene = load_scene(square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])]))
        g = build_full_graph(scene, 0, Point(1, 5), Point(9, 5), MODEL)
        for li, link in enumerate(g.links):
            assert li in g.adjacency[link.u]
            assert li in g.adjacency[link.v]

    def test_link_length_matches_geometry(self):
        scene = unit_square_scene()
        g = build_full_graph(scene, 0, Point(0.2, 0.3), Point(0.7, 0.8), MODEL)
        for link in g.links:
            d = link.geometry.a.distance_to(link.geometry.b)
            assert abs(link.length_m - d) <= 1e-9
            assert link.weight >= 0


class TestCandidateLinks:
    def test_two_visible_nodes(self):
        scene = unit_square_scene()
        nodes = merge_points([(Point(0.2, 0.2), NodeKind.TERMINAL),
                              (Point(0.8, 0.8), NodeKind.TERMINAL)])
        assert len(candidate_links(nodes, scene, 0)) == 1

    def test_blocked_pair(self):
        scene = load_scene(square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])]))
        nodes = merge_points([(Point(1, 5), NodeKind.TERMINAL),
                              (Point(9, 5), NodeKind.TERMINAL)])
        assert candidate_links(nodes, scene, 0) == []

    def test_convex_complete_count(self):
        scene = unit_square_scene()
        rng = np.random.default_rng(2)
        pts = [(Point(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)), NodeKind.GATE)
               for _ in range(7)]
        nodes = merge_points(pts)
        k = len(nodes)
        assert len(candidate_links(nodes, scene, 0)) == k * (k - 1) // 2

    def test_emitted_once_with_ordered_ids(self):
        scene = unit_square_scene()
        g = build_full_graph(scene, 0, Point(0.4, 0.4), Point(0.6, 0.6), MODEL)
        seen = set()
        for link in g.links:
            assert link.u < link.v
            assert (link.u, link.v) not in seen
            seen.add((link.u, link.v))


class TestMonotonicity:
    def test_adding_node_preserves_links(self):
        scene = load_scene(square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])]))
        g1 = build_full_graph(scene, 0, Point(1, 5), Point(9, 5), MODEL)
        g2 = build_full_graph(scene, 0, Point(1, 5), Point(9, 5), MODEL,
                              extra=[(Point(2, 2), NodeKind.GATE)])
        def key(link):
            a, b = link.geometry.a, link.geometry.b
            return tuple(sorted([(a.x, a.y), (b.x, b.y)]))
        links1 = {key(l) for l in g1.links}
        links2 = {key(l) for l in g2.links}
        assert links1 <= links2
