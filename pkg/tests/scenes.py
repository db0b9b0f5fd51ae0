"""Scene-document builders and seeded random scene generation for tests."""

from __future__ import annotations

import math

import numpy as np


def feature(role, geom_type, coords, **props):
    return {
        "type": "Feature",
        "properties": {"role": role, **props},
        "geometry": {"type": geom_type, "coordinates": coords},
    }


def scene_doc(areas=None, obstacles=None, gates=None, connectors=None,
              zones=None, defaults=None, crs="local-m"):
    """Assemble a scene FeatureCollection.

    areas: list of ring-lists (or a single ring for the exterior-only case)
    obstacles: list of (id, ring)
    gates: list of (id, (x, y))
    connectors: list of [(x, y), ...]
    zones: list of (field, value, ring)
    """
    features = []
    for i, rings in enumerate(areas or []):
        if rings and isinstance(rings[0][0], (int, float)):
            rings = [rings]
        coords = [[list(map(float, p)) for p in ring] for ring in rings]
        for ring in coords:
            if ring[0] != ring[-1]:
                ring.append(list(ring[0]))
        features.append(feature("area", "Polygon", coords, area_id=f"area{i}"))
    for obs_id, ring in obstacles or []:
        coords = [list(map(float, p)) for p in ring]
        if coords[0] != coords[-1]:
            coords.append(list(coords[0]))
        features.append(feature("obstacle", "Polygon", [coords], obstacle_id=obs_id))
    for gate_id, (x, y) in gates or []:
        features.append(feature("gate", "Point", [float(x), float(y)], gate_id=gate_id))
    for pts in connectors or []:
        features.append(feature("connector", "LineString",
                                [list(map(float, p)) for p in pts]))
    for fname, value, ring in zones or []:
        coords = [list(map(float, p)) for p in ring]
        if coords[0] != coords[-1]:
            coords.append(list(coords[0]))
        features.append(feature("zone", "Polygon", [coords], field=fname, value=value))
    doc = {"type": "FeatureCollection", "crs": crs, "features": features}
    if defaults:
        doc["defaults"] = dict(defaults)
    return doc


def square_scene(side=10.0, obstacles=None, **kwargs):
    ring = [(0, 0), (side, 0), (side, side), (0, side)]
    return scene_doc(areas=[ring], obstacles=obstacles, **kwargs)


def _convex_area(rng, size, max_vertices):
    k = int(rng.integers(6, max(7, min(max_vertices, 24))))
    angles = (np.arange(k) + rng.uniform(0.2, 0.8, k)) * (2 * math.pi / k)
    radii = rng.uniform(0.6, 1.0, k) * size / 2
    pts = np.column_stack([radii * np.cos(angles) + size / 2,
                           radii * np.sin(angles) + size / 2])
    hull = _convex_hull(pts)
    return [tuple(p) for p in hull]


def _convex_hull(pts):
    pts = sorted(map(tuple, pts))
    if len(pts) <= 2:
        return np.array(pts)

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _rectilinear_area(rng, size):
    # staircase rectangle: a square with up to 3 notches cut from its sides
    x0, y0, x1, y1 = 0.0, 0.0, size, size
    ring = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    notch_w = size * rng.uniform(0.15, 0.3)
    notch_d = size * rng.uniform(0.15, 0.3)
    cx = rng.uniform(size * 0.3, size * 0.6)
    # cut a notch from the top edge
    ring = [(x0, y0), (x1, y0), (x1, y1),
            (cx + notch_w, y1), (cx + notch_w, y1 - notch_d),
            (cx, y1 - notch_d), (cx, y1), (x0, y1)]
    return ring


def _point_in_convex(p, ring):
    n = len(ring)
    for i in range(n):
        if _cross(ring[i], ring[(i + 1) % n], p) < 0:
            return False
    return True


def random_scene(seed, n_obstacles=None, size=100.0, rectilinear=None,
                 max_vertices=24, rect_only=False):
    """Seeded random scene dict plus a metadata dict for the oracles.

    Areas are convex or rectilinear; obstacles are axis-aligned rectangles or
    small convex polygons kept clear of the boundary and of each other.
    """
    rng = np.random.default_rng(seed)
    if rectilinear is None:
        rectilinear = bool(rng.integers(0, 2))
    ring = _rectilinear_area(rng, size) if rectilinear else _convex_area(rng, size, max_vertices)
    if n_obstacles is None:
        n_obstacles = int(rng.integers(0, 6))

    margin = size * 0.08
    placed = []
    attempts = 0
    while len(placed) < n_obstacles and attempts < 200:
        attempts += 1
        w = rng.uniform(size * 0.05, size * 0.18)
        h = rng.uniform(size * 0.05, size * 0.18)
        cx = rng.uniform(margin + w, size - margin - w)
        cy = rng.uniform(margin + h, size - margin - h)
        if rect_only or rng.integers(0, 2):
            rect = [(cx - w / 2, cy - h / 2), (cx + w / 2, cy - h / 2),
                    (cx + w / 2, cy + h / 2), (cx - w / 2, cy + h / 2)]
        else:
            k = int(rng.integers(3, 7))
            angles = (np.arange(k) + rng.uniform(0.2, 0.8, k)) * (2 * math.pi / k)
            rr = min(w, h) / 2
            rect = [(cx + rr * math.cos(a), cy + rr * math.sin(a)) for a in angles]
            rect = [tuple(p) for p in _convex_hull(np.array(rect))]
            if len(rect) < 3:
                continue
        # keep obstacles inside the area with clearance and apart from each other
        if not all(_point_in_convex(p, ring) if not rectilinear else True for p in rect):
            continue
        if rectilinear and any(not _point_in_rectilinear(p, ring) for p in rect):
            continue
        if _min_ring_dist(rect, ring) < margin / 2:
            continue
        if any(_boxes_close(rect, other, size * 0.04) for other in placed):
            continue
        placed.append(rect)

    doc = scene_doc(areas=[ring],
                    obstacles=[(f"obs{i}", r) for i, r in enumerate(placed)])
    return doc, {"ring": ring, "obstacles": placed, "size": size, "rng": rng}


def _point_in_rectilinear(p, ring):
    # even-odd test, good enough for generator-side filtering
    x, y = p
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


def _min_ring_dist(pts, ring):
    best = math.inf
    n = len(ring)
    for px, py in pts:
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            vx, vy = x2 - x1, y2 - y1
            den = vx * vx + vy * vy or 1.0
            t = max(0.0, min(1.0, ((px - x1) * vx + (py - y1) * vy) / den))
            best = min(best, math.hypot(px - (x1 + t * vx), py - (y1 + t * vy)))
    return best


def _boxes_close(a, b, gap):
    ax0 = min(p[0] for p in a) - gap
    ax1 = max(p[0] for p in a) + gap
    ay0 = min(p[1] for p in a) - gap
    ay1 = max(p[1] for p in a) + gap
    bx0 = min(p[0] for p in b)
    bx1 = max(p[0] for p in b)
    by0 = min(p[1] for p in b)
    by1 = max(p[1] for p in b)
    return not (ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0)


def sample_free_point(scene_model, rng, clearance=0.0, area_index=0):
    """Random point inside the area, outside obstacles, with clearance from
    every ring."""
    from openarea.geometry import Containment, Point, point_in_polygon

    area = scene_model.areas[area_index]
    m = area.mbr()
    for _ in range(10_000):
        p = Point(rng.uniform(m.lo.x, m.hi.x), rng.uniform(m.lo.y, m.hi.y))
        if point_in_polygon(p, area) is not Containment.INSIDE:
            continue
        if clearance > 0:
            ok = True
            for ring in area.rings():
                d = _min_ring_dist([(p.x, p.y)], [tuple(v) for v in ring.xy])
                if d < clearance:
                    ok = False
                    break
            if not ok:
                continue
        return p
    raise RuntimeError("could not sample a free point")
