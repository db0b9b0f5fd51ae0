"""Obstacle-avoiding, accessibility-aware routing across open areas."""

__version__ = "0.1.0"

from .costs import CostModel, LinkFeatures, WeightCoefficients, link_features, link_weight
from .geometry import MBR, Containment, Point, PolygonWithHoles, Ring, Segment
from .hierarchical import compare_algorithms, route_hierarchical
from .routing import ExternalNetwork, RouteResult, route
from .scene import SceneModel, export_geometry, load_scene
from .search import shortest_path
from .trajectories import Trajectory, compare_routes, cpd, dhaus, lcss_distance, simplify_dp
from .visibility import VisibilityGraph, build_full_graph

__all__ = [
    "CostModel", "LinkFeatures", "WeightCoefficients", "link_features", "link_weight",
    "MBR", "Containment", "Point", "PolygonWithHoles", "Ring", "Segment",
    "compare_algorithms", "route_hierarchical",
    "ExternalNetwork", "RouteResult", "route",
    "SceneModel", "export_geometry", "load_scene",
    "shortest_path",
    "Trajectory", "compare_routes", "cpd", "dhaus", "lcss_distance", "simplify_dp",
    "VisibilityGraph", "build_full_graph",
    "__version__",
]
