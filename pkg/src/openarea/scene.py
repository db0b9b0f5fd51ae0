"""Scene loading, validation, feature fields, and GeoJSON serialization.

A scene file is a GeoJSON FeatureCollection. Features carry a "role"
property:

  role="area"       Polygon; interior rings become synthetic obstacles
  role="obstacle"   Polygon with property obstacle_id
  role="gate"       Point with property gate_id (within 1 m of an area edge)
  role="connector"  LineString joining area boundaries/gates
  role="zone"       Polygon with properties field (slope|width|surface|weather)
                    and value

Top-level foreign members: "defaults" maps field name to its default value,
"crs" is "local-m" (planar meters, the default) or "wgs84" (lon/lat,
projected onto a local tangent plane at load). Exports always write
"local-m" with coordinates rounded to 1e-9.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

from .errors import OpenAreaError, ParseError, ValidationError
from .geometry import (
    EPS_CONTACT,
    Containment,
    MBR,
    Point,
    PolygonWithHoles,
    Ring,
    Segment,
    mbr_of,
    point_in_polygon,
    point_in_ring,
)

FIELD_NAMES = ("slope", "width", "surface", "weather")
# worst direction per field: slope worsens upward, the rest downward
FIELD_TAKES_MAX = {"slope": True, "width": False, "surface": False, "weather": False}
FIELD_DEFAULTS = {"slope": 0.0, "width": 2.0, "surface": 1.0, "weather": 1.0}
FIELD_RANGES = {
    "slope": (0.0, math.inf),
    "width": (1e-9, math.inf),
    "surface": (0.0, 1.0),
    "weather": (0.0, 1.0),
}

GATE_SNAP_M = 1.0
_EARTH_RADIUS_M = 6_371_000.0
_EXPORT_DECIMALS = 9


@dataclass(frozen=True)
class Obstacle:
    id: str
    boundary: Ring
    mbr: MBR
    area_index: int
    attributes: dict = dc_field(default_factory=dict)


@dataclass(frozen=True)
class Gate:
    id: str
    center: Point
    area_index: int


@dataclass(frozen=True)
class FeatureField:
    name: str
    zones: tuple[tuple[PolygonWithHoles, float], ...]
    default: float

    def sample(self, p: Point) -> float:
        return sample_field(self, p)


def sample_field(field: FeatureField, p: Point) -> float:
    """Worst applicable zone value at p, else the field default.

    Zones are closed: a point on a zone edge counts as covered. Overlaps
    resolve to the worst value (max for slope, min otherwise).
    """
    take_max = FIELD_TAKES_MAX[field.name]
    value = None
    for poly, zone_value in field.zones:
        m = poly.mbr()
        if not (m.lo.x - EPS_CONTACT <= p.x <= m.hi.x + EPS_CONTACT
                and m.lo.y - EPS_CONTACT <= p.y <= m.hi.y + EPS_CONTACT):
            continue
        if point_in_polygon(p, poly) is Containment.OUTSIDE:
            continue
        if value is None:
            value = zone_value
        else:
            value = max(value, zone_value) if take_max else min(value, zone_value)
    return field.default if value is None else value


@dataclass(frozen=True)
class SceneModel:
    areas: tuple[PolygonWithHoles, ...]
    obstacles: tuple[Obstacle, ...]
    gates: tuple[Gate, ...]
    connectors: tuple[Segment, ...]
    fields: tuple[FeatureField, ...]
    area_ids: tuple[str, ...]
    projection_origin: Optional[tuple[float, float]] = None  # (lon0, lat0)

    def field(self, name: str) -> FeatureField:
        for f in self.fields:
            if f.name == name:
                return f
        return FeatureField(name, (), FIELD_DEFAULTS[name])

    def obstacles_in_area(self, area_index: int) -> tuple[Obstacle, ...]:
        return tuple(o for o in self.obstacles if o.area_index == area_index)

    def outer_only(self, area_index: int) -> PolygonWithHoles:
        return PolygonWithHoles(self.areas[area_index].outer)

    def gates_in_area(self, area_index: int) -> tuple[Gate, ...]:
        return tuple(g for g in self.gates if g.area_index == area_index)

    def locate(self, p: Point) -> Optional[int]:
        """Index of the area containing p (inside or on boundary), else None.
        Points inside an obstacle are not in any area."""
        for i, area in enumerate(self.areas):
            if point_in_polygon(p, area) is not Containment.OUTSIDE:
                return i
        return None

    def inside_obstacle(self, p: Point) -> Optional[Obstacle]:
        for obs in self.obstacles:
            if point_in_ring(p, obs.boundary) is Containment.INSIDE:
                return obs
        return None

    def project(self, lon: float, lat: float) -> Point:
        if self.projection_origin is None:
            raise ValidationError("scene was loaded in planar meters; no projection defined")
        return _project(lon, lat, *self.projection_origin)


def _project(lon: float, lat: float, lon0: float, lat0: float) -> Point:
    x = math.radians(lon - lon0) * math.cos(math.radians(lat0)) * _EARTH_RADIUS_M
    y = math.radians(lat - lat0) * _EARTH_RADIUS_M
    return Point(x, y)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def load_scene(source) -> SceneModel:
    """Load and validate a scene from a path, JSON string, or parsed dict."""
    doc = _read_document(source)
    if doc.get("type") != "FeatureCollection":
        raise ParseError("scene document must be a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ParseError("FeatureCollection without a features list")

    crs = doc.get("crs", "local-m")
    if crs not in ("local-m", "wgs84"):
        raise ParseError(f"unsupported crs {crs!r}")
    origin = None
    if crs == "wgs84":
        coords = _all_positions(features)
        if not coords:
            raise ParseError("wgs84 scene with no coordinates")
        lon0 = sum(c[0] for c in coords) / len(coords)
        lat0 = sum(c[1] for c in coords) / len(coords)
        origin = (lon0, lat0)

    def to_point(pos) -> Point:
        if (not isinstance(pos, (list, tuple)) or len(pos) < 2
                or not all(isinstance(v, (int, float)) for v in pos[:2])):
            raise ParseError(f"bad coordinate {pos!r}")
        if origin is not None:
            return _project(pos[0], pos[1], *origin)
        return Point(float(pos[0]), float(pos[1]))

    raw_areas: list[tuple[str, list[list[Point]]]] = []
    raw_obstacles: list[tuple[str, list[Point], dict]] = []
    raw_gates: list[tuple[str, Point]] = []
    raw_connectors: list[list[Point]] = []
    raw_zones: list[tuple[str, float, list[Point]]] = []

    for i, feat in enumerate(features):
        props = feat.get("properties") or {}
        geom = feat.get("geometry") or {}
        role = props.get("role")
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if role == "area":
            if gtype != "Polygon":
                raise ParseError(f"area feature {i} must be a Polygon")
            rings = [[to_point(p) for p in ring] for ring in coords]
            raw_areas.append((str(props.get("area_id", f"area{len(raw_areas)}")), rings))
        elif role == "obstacle":
            if gtype != "Polygon":
                raise ParseError(f"obstacle feature {i} must be a Polygon")
            if len(coords) != 1:
                raise ValidationError(
                    f"obstacle {props.get('obstacle_id', i)} must not have interior rings")
            attrs = {k: v for k, v in props.items() if k not in ("role", "obstacle_id")}
            raw_obstacles.append((str(props.get("obstacle_id", f"obstacle{len(raw_obstacles)}")),
                                  [to_point(p) for p in coords[0]], attrs))
        elif role == "gate":
            if gtype != "Point":
                raise ParseError(f"gate feature {i} must be a Point")
            raw_gates.append((str(props.get("gate_id", f"gate{len(raw_gates)}")),
                              to_point(coords)))
        elif role == "connector":
            if gtype != "LineString" or len(coords) < 2:
                raise ParseError(f"connector feature {i} must be a LineString")
            raw_connectors.append([to_point(p) for p in coords])
        elif role == "zone":
            if gtype != "Polygon":
                raise ParseError(f"zone feature {i} must be a Polygon")
            fname = props.get("field")
            if fname not in FIELD_NAMES:
                raise ParseError(f"zone feature {i} has unknown field {fname!r}")
            value = props.get("value")
            if not isinstance(value, (int, float)):
                raise ParseError(f"zone feature {i} missing numeric value")
            raw_zones.append((fname, float(value), [to_point(p) for p in coords[0]]))
        elif role is None:
            raise ParseError(f"feature {i} has no role property")
        else:
            raise ParseError(f"feature {i} has unknown role {role!r}")

    if not raw_areas:
        raise ValidationError("scene defines no area polygon")
    for kind, ids in (("area", [a[0] for a in raw_areas]),
                      ("obstacle", [o[0] for o in raw_obstacles]),
                      ("gate", [g[0] for g in raw_gates])):
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValidationError(f"duplicate {kind} ids: {sorted(dupes)}")
    raw_areas.sort(key=lambda a: a[0])
    raw_obstacles.sort(key=lambda o: o[0])
    raw_gates.sort(key=lambda g: g[0])

    return _assemble(raw_areas, raw_obstacles, raw_gates, raw_connectors,
                     raw_zones, doc.get("defaults") or {}, origin)


def _read_document(source) -> dict:
    if isinstance(source, dict):
        return source
    try:
        if isinstance(source, (str, Path)) and "\n" not in str(source) and Path(source).exists():
            text = Path(source).read_text()
        else:
            text = str(source)
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ParseError(f"cannot read scene document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("scene document is not a JSON object")
    return doc


def _all_positions(features) -> list:
    out = []

    def walk(c):
        if isinstance(c, (list, tuple)):
            if len(c) >= 2 and all(isinstance(v, (int, float)) for v in c[:2]):
                out.append(c)
            else:
                for item in c:
                    walk(item)

    for feat in features:
        walk((feat.get("geometry") or {}).get("coordinates"))
    return out


def _assemble(raw_areas, raw_obstacles, raw_gates, raw_connectors, raw_zones,
              defaults, origin) -> SceneModel:
    try:
        outers = []
        inline_obstacles = []
        for area_id, rings in raw_areas:
            outers.append(Ring(rings[0]))
            for k, inner in enumerate(rings[1:]):
                inline_obstacles.append((f"{area_id}-hole{k}", inner, {}))
    except OpenAreaError as exc:
        raise ValidationError(f"bad area ring: {exc}") from exc

    obstacle_specs = list(raw_obstacles) + inline_obstacles
    obstacles: list[Obstacle] = []
    holes_per_area: dict[int, list[Ring]] = {i: [] for i in range(len(outers))}
    for obs_id, pts, attrs in obstacle_specs:
        try:
            ring = Ring(pts)
        except OpenAreaError as exc:
            raise ValidationError(f"obstacle {obs_id}: {exc}") from exc
        area_idx = None
        for i, outer in enumerate(outers):
            if all(point_in_ring(v, outer) is Containment.INSIDE for v in ring.vertices):
                area_idx = i
                break
        if area_idx is None:
            raise ValidationError(f"obstacle {obs_id} is not strictly inside any area")
        holes_per_area[area_idx].append(ring)
        obstacles.append(Obstacle(obs_id, ring, mbr_of(ring), area_idx, attrs))

    areas = []
    area_ids = tuple(a[0] for a in raw_areas)
    for i, outer in enumerate(outers):
        try:
            areas.append(PolygonWithHoles(outer, holes_per_area[i]))
        except OpenAreaError as exc:
            raise ValidationError(f"area {area_ids[i]}: {exc}") from exc
    # normalized hole rings replace the raw ones so both representations match
    norm: list[Obstacle] = []
    by_area: dict[int, list[Obstacle]] = {i: [] for i in range(len(areas))}
    for obs in obstacles:
        by_area[obs.area_index].append(obs)
    for i, area in enumerate(areas):
        for obs, hole in zip(by_area[i], area.holes):
            norm.append(Obstacle(obs.id, hole, mbr_of(hole), i, obs.attributes))
    norm.sort(key=lambda o: o.id)

    gates: list[Gate] = []
    for gate_id, center in raw_gates:
        area_idx = _nearest_boundary_area(center, areas, GATE_SNAP_M)
        if area_idx is None:
            raise ValidationError(f"gate {gate_id} is more than {GATE_SNAP_M} m from every area boundary")
        gates.append(Gate(gate_id, center, area_idx))

    connectors: list[Segment] = []
    for pts in raw_connectors:
        for a, b in zip(pts[:-1], pts[1:]):
            try:
                segment = Segment(a, b)
            except ValueError as exc:
                raise ValidationError(f"degenerate connector: {exc}") from exc
            connectors.append(segment)
    for segment in connectors:
        for endpoint in (segment.a, segment.b):
            if not _on_some_boundary(endpoint, areas, gates):
                raise ValidationError(
                    f"connector endpoint ({endpoint.x}, {endpoint.y}) lies on no area boundary or gate")

    fields: list[FeatureField] = []
    for name in FIELD_NAMES:
        zones = []
        for fname, value, pts in raw_zones:
            if fname != name:
                continue
            lo, hi = FIELD_RANGES[name]
            if not (lo <= value <= hi):
                raise ValidationError(f"zone value {value} out of range for field {name}")
            try:
                zones.append((PolygonWithHoles(Ring(pts)), value))
            except OpenAreaError as exc:
                raise ValidationError(f"bad zone ring for field {name}: {exc}") from exc
        default = defaults.get(name, FIELD_DEFAULTS[name])
        if not isinstance(default, (int, float)):
            raise ParseError(f"default for field {name} must be numeric")
        lo, hi = FIELD_RANGES[name]
        if not (lo <= float(default) <= hi):
            raise ValidationError(f"default {default} out of range for field {name}")
        if zones or name in defaults:
            fields.append(FeatureField(name, tuple(zones), float(default)))

    return SceneModel(tuple(areas), tuple(norm), tuple(gates), tuple(connectors),
                      tuple(fields), area_ids, origin)


def _nearest_boundary_area(p: Point, areas, tol: float) -> Optional[int]:
    best = None
    best_d = tol
    for i, area in enumerate(areas):
        for e in area.outer.edges():
            d = _point_segment_distance(p, e)
            if d <= best_d:
                best_d = d
                best = i
    return best


def _on_some_boundary(p: Point, areas, gates) -> bool:
    for area in areas:
        if point_in_ring(p, area.outer) is Containment.ON_BOUNDARY:
            return True
    return any(g.center.distance_to(p) <= GATE_SNAP_M for g in gates)


def _point_segment_distance(p: Point, s: Segment) -> float:
    vx, vy = s.b.x - s.a.x, s.b.y - s.a.y
    den = vx * vx + vy * vy
    t = max(0.0, min(1.0, ((p.x - s.a.x) * vx + (p.y - s.a.y) * vy) / den))
    return math.hypot(p.x - (s.a.x + t * vx), p.y - (s.a.y + t * vy))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _r(v: float) -> float:
    return round(float(v), _EXPORT_DECIMALS)


def _ring_coords(ring: Ring) -> list:
    pts = [[_r(p.x), _r(p.y)] for p in ring.vertices]
    pts.append(pts[0])
    return pts


def scene_to_geojson(scene: SceneModel) -> dict:
    features = []
    for i, area in enumerate(scene.areas):
        features.append({
            "type": "Feature",
            "properties": {"role": "area", "area_id": scene.area_ids[i]},
            "geometry": {"type": "Polygon", "coordinates": [_ring_coords(area.outer)]},
        })
    for obs in scene.obstacles:
        features.append({
            "type": "Feature",
            "properties": {"role": "obstacle", "obstacle_id": obs.id, **obs.attributes},
            "geometry": {"type": "Polygon", "coordinates": [_ring_coords(obs.boundary)]},
        })
    for gate in scene.gates:
        features.append({
            "type": "Feature",
            "properties": {"role": "gate", "gate_id": gate.id},
            "geometry": {"type": "Point", "coordinates": [_r(gate.center.x), _r(gate.center.y)]},
        })
    for seg in scene.connectors:
        features.append({
            "type": "Feature",
            "properties": {"role": "connector"},
            "geometry": {"type": "LineString",
                         "coordinates": [[_r(seg.a.x), _r(seg.a.y)], [_r(seg.b.x), _r(seg.b.y)]]},
        })
    defaults = {}
    for f in scene.fields:
        defaults[f.name] = _r(f.default)
        for poly, value in f.zones:
            features.append({
                "type": "Feature",
                "properties": {"role": "zone", "field": f.name, "value": _r(value)},
                "geometry": {"type": "Polygon", "coordinates": [_ring_coords(poly.outer)]},
            })
    doc = {"type": "FeatureCollection", "crs": "local-m", "features": features}
    if defaults:
        doc["defaults"] = defaults
    return doc


def export_geometry(obj) -> dict:
    """Serialize a scene, visibility graph, or route result to GeoJSON."""
    if isinstance(obj, SceneModel):
        return scene_to_geojson(obj)
    if hasattr(obj, "polyline"):  # route result
        props = {
            "role": "route",
            "total_cost": _r(obj.total_cost),
            "total_length_m": _r(obj.total_length_m),
            "algorithm": obj.algorithm,
            "iterations": obj.iterations,
        }
        if getattr(obj, "gates_used", None):
            props["gates_used"] = list(obj.gates_used)
        return {
            "type": "FeatureCollection",
            "crs": "local-m",
            "features": [{
                "type": "Feature",
                "properties": props,
                "geometry": {"type": "LineString",
                             "coordinates": [[_r(p.x), _r(p.y)] for p in obj.polyline]},
            }],
        }
    if hasattr(obj, "links"):  # visibility graph
        features = []
        for node in obj.nodes:
            features.append({
                "type": "Feature",
                "properties": {"role": "node", "node_id": node.id, "kind": node.kind.value},
                "geometry": {"type": "Point",
                             "coordinates": [_r(node.point.x), _r(node.point.y)]},
            })
        for link in obj.links:
            features.append({
                "type": "Feature",
                "properties": {"role": "link", "from": link.u, "to": link.v,
                               "length_m": _r(link.length_m), "weight": _r(link.weight)},
                "geometry": {"type": "LineString",
                             "coordinates": [[_r(link.geometry.a.x), _r(link.geometry.a.y)],
                                             [_r(link.geometry.b.x), _r(link.geometry.b.y)]]},
            })
        return {"type": "FeatureCollection", "crs": "local-m", "features": features}
    raise TypeError(f"cannot export object of type {type(obj).__name__}")


def dump_geojson(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
