import math

import pytest

from openarea.costs import (
    CostModel,
    DEFAULT_COEFFICIENTS,
    LinkFeatures,
    WeightCoefficients,
    link_features,
    link_weight,
    load_cost_config,
    pure_length_model,
    split_atomic,
)
from openarea.geometry import Point, Segment
from openarea.scene import load_scene

from scenes import square_scene


def seg(ax, ay, bx, by):
    return Segment(Point(ax, ay), Point(bx, by))


@pytest.fixture
def zoned_scene():
    return load_scene(square_scene(
        side=10,
        zones=[
            ("slope", 8.0, [(2, 0), (4, 0), (4, 10), (2, 10)]),
            ("width", 0.9, [(5, 0), (10, 0), (10, 10), (5, 10)]),
            ("width", 2.0, [(0, 0), (5, 0), (5, 10), (0, 10)]),
        ],
        defaults={"slope": 0.0, "width": 2.0, "surface": 1.0, "weather": 1.0},
    ))


class TestCoefficients:
    def test_sum_enforced(self):
        with pytest.raises(ValueError):
            WeightCoefficients(0.5, 0.5, 0.5, 0, 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            WeightCoefficients(1.2, -0.2, 0, 0, 0)

    def test_defaults_valid(self):
        assert sum(DEFAULT_COEFFICIENTS.as_tuple()) == pytest.approx(1.0)


class TestLinkFeatures:
    def test_defaults_outside_zones(self):
        scene = load_scene(square_scene(side=10))
        f = link_features(seg(1, 1, 9, 9), scene)
        assert f.length_m == pytest.approx(8 * math.sqrt(2))
        assert f.max_slope == 0.0
        assert f.min_width == 2.0
        assert f.worst_surface == 1.0
        assert f.weather == 1.0

    def test_worst_slope_any_portion(self, zoned_scene):
        f = link_features(seg(0.5, 5, 9.5, 5), zoned_scene)
        assert f.max_slope == 8.0

    def test_narrowest_width(self, zoned_scene):
        f = link_features(seg(0.5, 5, 9.5, 5), zoned_scene)
        assert f.min_width == 0.9

    def test_sliver_zone_not_missed(self):
        # zone much narrower than the sampling step still registers
        scene = load_scene(square_scene(
            side=10, zones=[("slope", 9.0, [(4.7, 0), (4.8, 0), (4.8, 10), (4.7, 10)])]))
        f = link_features(seg(0.5, 5, 9.5, 5), scene, step=1.0)
        assert f.max_slope == 9.0


class TestLinkWeight:
    def test_zero_penalties_give_length(self):
        f = LinkFeatures(7.5, 0.0, 2.0, 1.0, 1.0)
        for coeffs in (WeightCoefficients(1, 0, 0, 0, 0), DEFAULT_COEFFICIENTS):
            assert link_weight(f, CostModel(coefficients=coeffs)) == pytest.approx(7.5)

    def test_slope_at_ceiling_doubles(self):
        m = CostModel(coefficients=WeightCoefficients(0.5, 0.5, 0, 0, 0))
        f = LinkFeatures(3.0, 10.0, 2.0, 1.0, 1.0)
        assert link_weight(f, m) == pytest.approx(6.0)

    def test_width_under_floor_inadmissible(self):
        f = LinkFeatures(3.0, 0.0, 0.5, 1.0, 1.0)
        assert math.isinf(link_weight(f, CostModel()))

    def test_slope_over_ceiling_inadmissible(self):
        f = LinkFeatures(3.0, 11.0, 2.0, 1.0, 1.0)
        assert math.isinf(link_weight(f, CostModel()))

    def test_monotone_in_penalties(self):
        m = CostModel(coefficients=DEFAULT_COEFFICIENTS)
        base = LinkFeatures(5.0, 2.0, 1.2, 0.8, 0.9)
        w0 = link_weight(base, m)
        assert link_weight(LinkFeatures(5.0, 4.0, 1.2, 0.8, 0.9), m) >= w0
        assert link_weight(LinkFeatures(5.0, 2.0, 1.0, 0.8, 0.9), m) >= w0
        assert link_weight(LinkFeatures(5.0, 2.0, 1.2, 0.5, 0.9), m) >= w0
        assert link_weight(LinkFeatures(5.0, 2.0, 1.2, 0.8, 0.6), m) >= w0

    def test_linear_in_length(self):
        m = CostModel(coefficients=DEFAULT_COEFFICIENTS)
        w1 = link_weight(LinkFeatures(4.0, 3.0, 1.1, 0.7, 0.8), m)
        w2 = link_weight(LinkFeatures(8.0, 3.0, 1.1, 0.7, 0.8), m)
        assert w2 == pytest.approx(2 * w1)


class TestSplitAtomic:
    def test_single_zone_one_piece(self, zoned_scene):
        pieces = split_atomic(seg(2.5, 5, 3.5, 5), zoned_scene)
        assert len(pieces) == 1

    def test_one_crossing_two_pieces(self):
        scene = load_scene(square_scene(
            side=10, zones=[("slope", 5.0, [(0, 0), (5, 0), (5, 10), (0, 10)])]))
        pieces = split_atomic(seg(1, 5, 9, 5), scene)
        assert len(pieces) == 2
        assert pieces[0].b.x == pytest.approx(5.0)

    def test_k_crossings_k_plus_one_pieces(self, zoned_scene):
        # crossing-count oracle: exact intersections with zone edges at
        # x = 2, 4, 5 over the span 0.5..9.5
        pieces = split_atomic(seg(0.5, 5, 9.5, 5), zoned_scene)
        assert len(pieces) == 4

    def test_lengths_sum_and_concatenate(self, zoned_scene):
        s = seg(0.5, 5, 9.5, 5)
        pieces = split_atomic(s, zoned_scene)
        assert sum(p.length for p in pieces) == pytest.approx(s.length, abs=1e-9)
        assert pieces[0].a == s.a and pieces[-1].b == s.b
        for p, q in zip(pieces[:-1], pieces[1:]):
            assert p.b == q.a

    def test_piece_aggregate_matches_whole(self, zoned_scene):
        s = seg(0.5, 5, 9.5, 5)
        whole = link_features(s, zoned_scene)
        pieces = split_atomic(s, zoned_scene)
        feats = [link_features(p, zoned_scene) for p in pieces]
        assert max(f.max_slope for f in feats) == whole.max_slope
        assert min(f.min_width for f in feats) == whole.min_width
        assert min(f.worst_surface for f in feats) == whole.worst_surface
        assert min(f.weather for f in feats) == whole.weather


class TestConfig:
    def test_round_trip(self, tmp_path):
        m = CostModel(coefficients=WeightCoefficients(0.2, 0.3, 0.1, 0.3, 0.1),
                      max_slope_pct=8.0)
        path = tmp_path / "cost.json"
        import json
        path.write_text(json.dumps(m.to_dict()))
        loaded = load_cost_config(path)
        assert loaded == m

    def test_defaults_when_empty(self):
        m = load_cost_config({})
        assert m.coefficients == DEFAULT_COEFFICIENTS
        assert m.min_width_m == 0.75

    def test_pure_length_helper(self):
        m = pure_length_model()
        assert m.coefficients.length == 1.0
