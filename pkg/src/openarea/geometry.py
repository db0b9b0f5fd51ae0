"""Planar geometric primitives and predicates.

Coordinates are planar meters; geographic input is projected before it
reaches this module. Two tolerances are used throughout: EPS_GEOM (1e-9 m)
is the arithmetic noise floor for predicates, EPS_CONTACT (1e-6 m) decides
boundary contact, a modeling question rather than an arithmetic one.

Containment convention: ring boundaries are traversable, so a segment lying
along a boundary edge counts as inside. A segment whose interior passes
through a ring vertex without running along an adjacent edge pinches the
free space to zero width at that vertex and is rejected; endpoints at
vertices are fine. Routes consequently bend at vertices instead of grazing
them, at identical cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import HoleOutsideOuter, OverlappingRings, SelfIntersectingRing

EPS_GEOM = 1e-9
EPS_CONTACT = 1e-6

# Bisection ladder for containment sampling: depth 4 gives 15 interior
# sample points, comfortably above the contractual minimum of 9.
_LADDER = tuple(i / 16.0 for i in range(1, 16))


class Containment(Enum):
    INSIDE = "inside"
    ON_BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a.distance_to(self.b) < EPS_GEOM:
            raise ValueError(f"zero-length segment at ({self.a.x}, {self.a.y})")

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)

    def point_at(self, t: float) -> Point:
        return Point(self.a.x + t * (self.b.x - self.a.x),
                     self.a.y + t * (self.b.y - self.a.y))

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


def orient(a: Point, b: Point, c: Point) -> float:
    """Twice the signed area of triangle abc (positive = c left of ab)."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _orient_sign(a: Point, b: Point, c: Point, eps: float) -> int:
    """Sign of orient(), zero when c is within eps of the line ab."""
    v = orient(a, b, c)
    ab = a.distance_to(b)
    if abs(v) <= eps * ab:
        return 0
    return 1 if v > 0 else -1


class Ring:
    """Closed polygon ring. Implicitly closed; consecutive duplicate
    vertices are collapsed; self-intersecting input is rejected."""

    __slots__ = ("vertices", "_xy")

    def __init__(self, vertices: Sequence[Point], validate: bool = True):
        pts = [v if isinstance(v, Point) else Point(*v) for v in vertices]
        cleaned: list[Point] = []
        for p in pts:
            if not cleaned or cleaned[-1].distance_to(p) >= EPS_GEOM:
                cleaned.append(p)
        # drop an explicit closing vertex
        while len(cleaned) > 1 and cleaned[0].distance_to(cleaned[-1]) < EPS_GEOM:
            cleaned.pop()
        if len(cleaned) < 3:
            raise SelfIntersectingRing("ring needs at least 3 distinct vertices")
        self.vertices: tuple[Point, ...] = tuple(cleaned)
        self._xy = np.array([(p.x, p.y) for p in self.vertices], dtype=float)
        if validate:
            self._check_simple()

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def __len__(self) -> int:
        return len(self.vertices)

    def signed_area(self) -> float:
        x = self._xy[:, 0]
        y = self._xy[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def is_ccw(self) -> bool:
        return self.signed_area() > 0

    def reversed(self) -> "Ring":
        r = Ring.__new__(Ring)
        r.vertices = tuple(reversed(self.vertices))
        r._xy = self._xy[::-1].copy()
        return r

    def edges(self) -> Iterator[Segment]:
        n = len(self.vertices)
        for i in range(n):
            yield Segment(self.vertices[i], self.vertices[(i + 1) % n])

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(start, end) coordinate arrays for all edges, shape (n, 2) each."""
        return self._xy, np.roll(self._xy, -1, axis=0)

    def _check_simple(self):
        n = len(self.vertices)
        a, b = self.edge_arrays()
        for i in range(n):
            p, q = self.vertices[i], self.vertices[(i + 1) % n]
            # spike: next edge folds straight back over this one
            r = self.vertices[(i + 2) % n]
            if _orient_sign(p, q, r, EPS_GEOM) == 0:
                if (q.x - p.x) * (r.x - q.x) + (q.y - p.y) * (r.y - q.y) < 0:
                    raise SelfIntersectingRing(
                        f"spike at vertex ({q.x}, {q.y})")
            # non-adjacent edges must stay strictly apart
            js = [j for j in range(i + 2, n) if not (i == 0 and j == n - 1)]
            if not js:
                continue
            idx = np.array(js)
            if _segments_too_close(p, q, a[idx], b[idx], EPS_GEOM):
                raise SelfIntersectingRing(
                    f"edges near vertex ({p.x}, {p.y}) intersect")


def _segments_too_close(p: Point, q: Point, a: np.ndarray, b: np.ndarray,
                        eps: float) -> bool:
    """True if segment pq properly crosses or comes within eps of any
    segment a[i]b[i]."""
    if _proper_mask(p, q, a, b, eps).any():
        return True
    # minimum endpoint-to-segment distances cover all non-crossing cases
    d = np.minimum.reduce([
        _dist_points_to_segment(a, p, q),
        _dist_points_to_segment(b, p, q),
        _dist_point_to_segments(p, a, b),
        _dist_point_to_segments(q, a, b),
    ])
    return bool((d <= eps).any())


def _dist_points_to_segment(pts: np.ndarray, a: Point, b: Point) -> np.ndarray:
    ax, ay, bx, by = a.x, a.y, b.x, b.y
    vx, vy = bx - ax, by - ay
    den = vx * vx + vy * vy
    t = ((pts[:, 0] - ax) * vx + (pts[:, 1] - ay) * vy) / den
    t = np.clip(t, 0.0, 1.0)
    dx = pts[:, 0] - (ax + t * vx)
    dy = pts[:, 1] - (ay + t * vy)
    return np.hypot(dx, dy)


def _dist_point_to_segments(p: Point, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    v = b - a
    den = np.einsum("ij,ij->i", v, v)
    den = np.where(den == 0, 1.0, den)
    w = np.array([p.x, p.y]) - a
    t = np.clip(np.einsum("ij,ij->i", w, v) / den, 0.0, 1.0)
    proj = a + t[:, None] * v
    return np.hypot(p.x - proj[:, 0], p.y - proj[:, 1])


def _proper_mask(p: Point, q: Point, a: np.ndarray, b: np.ndarray,
                 eps: float) -> np.ndarray:
    """Boolean mask of segments a[i]b[i] whose interior crosses pq's interior."""
    px, py, qx, qy = p.x, p.y, q.x, q.y
    rx, ry = qx - px, qy - py
    rlen = math.hypot(rx, ry)
    # orientation of each edge endpoint relative to pq
    d1 = rx * (a[:, 1] - py) - ry * (a[:, 0] - px)
    d2 = rx * (b[:, 1] - py) - ry * (b[:, 0] - px)
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    elen = np.hypot(ex, ey)
    d3 = ex * (py - a[:, 1]) - ey * (px - a[:, 0])
    d4 = ex * (qy - a[:, 1]) - ey * (qx - a[:, 0])
    tol_pq = eps * rlen
    tol_e = eps * np.where(elen == 0, 1.0, elen)
    s1 = np.where(np.abs(d1) <= tol_pq, 0, np.sign(d1))
    s2 = np.where(np.abs(d2) <= tol_pq, 0, np.sign(d2))
    s3 = np.where(np.abs(d3) <= tol_e, 0, np.sign(d3))
    s4 = np.where(np.abs(d4) <= tol_e, 0, np.sign(d4))
    return (s1 * s2 < 0) & (s3 * s4 < 0)


@dataclass(frozen=True)
class MBR:
    lo: Point
    hi: Point

    def __post_init__(self):
        if self.lo.x > self.hi.x or self.lo.y > self.hi.y:
            raise ValueError("MBR lo must not exceed hi")

    def corners(self) -> tuple[Point, Point, Point, Point]:
        return (Point(self.lo.x, self.lo.y), Point(self.hi.x, self.lo.y),
                Point(self.hi.x, self.hi.y), Point(self.lo.x, self.hi.y))

    def expanded(self, margin: float) -> "MBR":
        return MBR(Point(self.lo.x - margin, self.lo.y - margin),
                   Point(self.hi.x + margin, self.hi.y + margin))

    @property
    def diameter(self) -> float:
        return self.lo.distance_to(self.hi)


def mbr_of(ring: Ring) -> MBR:
    xy = ring.xy
    return MBR(Point(float(xy[:, 0].min()), float(xy[:, 1].min())),
               Point(float(xy[:, 0].max()), float(xy[:, 1].max())))


def mbr_of_points(points: Sequence[Point]) -> MBR:
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return MBR(Point(min(xs), min(ys)), Point(max(xs), max(ys)))


def mbr_intersects_segment(m: MBR, s: Segment) -> bool:
    """Slab clipping, inclusive of boundary contact."""
    t0, t1 = 0.0, 1.0
    p = (s.a.x, s.a.y)
    d = (s.b.x - s.a.x, s.b.y - s.a.y)
    lo = (m.lo.x, m.lo.y)
    hi = (m.hi.x, m.hi.y)
    for axis in (0, 1):
        if d[axis] == 0.0:
            if p[axis] < lo[axis] or p[axis] > hi[axis]:
                return False
            continue
        ta = (lo[axis] - p[axis]) / d[axis]
        tb = (hi[axis] - p[axis]) / d[axis]
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    return True


class PolygonWithHoles:
    """Outer ring (CCW) with zero or more hole rings (CW).

    Construction normalizes orientation and validates that holes are
    strictly inside the outer ring and pairwise disjoint.
    """

    __slots__ = ("outer", "holes", "_edges_a", "_edges_b", "_vert_info")

    def __init__(self, outer: Ring, holes: Sequence[Ring] = ()):
        self.outer = outer if outer.is_ccw else outer.reversed()
        self.holes: tuple[Ring, ...] = tuple(
            h.reversed() if h.is_ccw else h for h in holes)
        self._edges_a = None
        self._edges_b = None
        self._vert_info = None
        self._validate_holes()

    def rings(self) -> tuple[Ring, ...]:
        return (self.outer,) + self.holes

    def mbr(self) -> MBR:
        return mbr_of(self.outer)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._edges_a is None:
            starts, ends = [], []
            for ring in self.rings():
                a, b = ring.edge_arrays()
                starts.append(a)
                ends.append(b)
            self._edges_a = np.vstack(starts)
            self._edges_b = np.vstack(ends)
        return self._edges_a, self._edges_b

    def vertex_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(vertex, previous, next) coordinate arrays over all rings."""
        if self._vert_info is None:
            vs, ps, ns = [], [], []
            for ring in self.rings():
                xy = ring.xy
                vs.append(xy)
                ps.append(np.roll(xy, 1, axis=0))
                ns.append(np.roll(xy, -1, axis=0))
            self._vert_info = (np.vstack(vs), np.vstack(ps), np.vstack(ns))
        return self._vert_info

    def _validate_holes(self):
        oa, ob = self.outer.edge_arrays()
        for i, hole in enumerate(self.holes):
            codes = _classify_against_ring(hole.xy, self.outer, EPS_CONTACT)
            if (codes != 1).any():
                raise HoleOutsideOuter(f"hole {i} not strictly inside outer ring")
            for e in hole.edges():
                if _segments_too_close(e.a, e.b, oa, ob, EPS_GEOM):
                    raise HoleOutsideOuter(f"hole {i} touches the outer ring")
        for i in range(len(self.holes)):
            hi_a, hi_b = self.holes[i].edge_arrays()
            for j in range(i + 1, len(self.holes)):
                hj = self.holes[j]
                if (_classify_against_ring(hj.xy, self.holes[i], EPS_GEOM) == 1).any() or \
                   (_classify_against_ring(self.holes[i].xy, hj, EPS_GEOM) == 1).any():
                    raise OverlappingRings(f"holes {i} and {j} overlap")
                for e in hj.edges():
                    if _segments_too_close(e.a, e.b, hi_a, hi_b, EPS_GEOM):
                        raise OverlappingRings(f"holes {i} and {j} touch")


def normalize_orientation(poly: PolygonWithHoles) -> PolygonWithHoles:
    """Return the polygon with outer CCW and holes CW. Idempotent."""
    return PolygonWithHoles(poly.outer, poly.holes)


def _classify_xy(pts: np.ndarray, a: np.ndarray, b: np.ndarray,
                 eps: float) -> np.ndarray:
    """Classify points against closed edge loops given as combined arrays.

    Even-odd over all edges at once (parity is unaffected by which ring an
    edge belongs to). Returns int codes per point: 0 outside, 1 inside,
    2 on boundary (within eps of any edge).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    vx, vy = bx - ax, by - ay
    den = vx * vx + vy * vy
    t = np.clip(((px - ax) * vx + (py - ay) * vy) / den, 0.0, 1.0)
    dist2 = (px - (ax + t * vx)) ** 2 + (py - (ay + t * vy)) ** 2
    on_boundary = (dist2 <= eps * eps).any(axis=1)
    cond = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_int = ax + (py - ay) * vx / vy
    crossings = np.count_nonzero(cond & (px < x_int), axis=1)
    codes = np.where(crossings % 2 == 1, 1, 0)
    codes[on_boundary] = 2
    return codes


def _classify_points(pts: np.ndarray, rings: Sequence[Ring],
                     eps: float) -> np.ndarray:
    starts, ends = [], []
    for ring in rings:
        a, b = ring.edge_arrays()
        starts.append(a)
        ends.append(b)
    return _classify_xy(pts, np.vstack(starts), np.vstack(ends), eps)


def _classify_against_ring(pts: np.ndarray, ring: Ring, eps: float) -> np.ndarray:
    a, b = ring.edge_arrays()
    return _classify_xy(pts, a, b, eps)


def point_in_polygon(p: Point, poly: PolygonWithHoles,
                     eps: float = EPS_CONTACT) -> Containment:
    """Inside iff p is within the outer ring and in no hole; OnBoundary iff
    within eps of any ring edge (takes precedence)."""
    a, b = poly.edge_arrays()
    code = int(_classify_xy(np.array([[p.x, p.y]]), a, b, eps)[0])
    return (Containment.OUTSIDE, Containment.INSIDE, Containment.ON_BOUNDARY)[code]


def point_in_ring(p: Point, ring: Ring, eps: float = EPS_CONTACT) -> Containment:
    code = int(_classify_against_ring(np.array([[p.x, p.y]]), ring, eps)[0])
    return (Containment.OUTSIDE, Containment.INSIDE, Containment.ON_BOUNDARY)[code]


def segments_properly_intersect(s1: Segment, s2: Segment,
                                eps: float = EPS_GEOM) -> bool:
    """True iff the segment interiors cross. Shared endpoints, touches and
    collinear overlap are not proper intersections."""
    a = np.array([[s2.a.x, s2.a.y]])
    b = np.array([[s2.b.x, s2.b.y]])
    return bool(_proper_mask(s1.a, s1.b, a, b, eps)[0])


def segment_ring_contacts(seg: Segment, ring: Ring,
                          eps: float = EPS_CONTACT) -> list[float]:
    """Parameters t in [0, 1] along seg where it meets the ring.

    Transversal crossings and touches contribute one parameter; a collinear
    overlap with an edge contributes the clipped overlap interval endpoints.
    """
    a, b = ring.edge_arrays()
    return _contacts_on_arrays(seg, a, b, eps)


def _contacts_on_arrays(seg: Segment, a: np.ndarray, b: np.ndarray,
                        eps: float) -> list[float]:
    px, py = seg.a.x, seg.a.y
    rx, ry = seg.b.x - px, seg.b.y - py
    rlen = math.hypot(rx, ry)
    qx = a[:, 0] - px
    qy = a[:, 1] - py
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    elen = np.hypot(ex, ey)
    denom = rx * ey - ry * ex
    out: list[float] = []
    eps_t = eps / rlen
    parallel = np.abs(denom) <= EPS_GEOM * rlen * np.where(elen == 0, 1.0, elen)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qx * ey - qy * ex) / denom
        u = (qx * ry - qy * rx) / denom
    eps_u = eps / np.where(elen == 0, 1.0, elen)
    hit = (~parallel & (t >= -eps_t) & (t <= 1 + eps_t)
           & (u >= -eps_u) & (u <= 1 + eps_u))
    out.extend(np.clip(t[hit], 0.0, 1.0).tolist())
    # collinear overlaps: edge start within eps of the segment's support line
    if parallel.any():
        line_dist = np.abs(qx * ry - qy * rx) / rlen
        coll = parallel & (line_dist <= eps)
        if coll.any():
            den = rlen * rlen
            ta = (qx[coll] * rx + qy[coll] * ry) / den
            tb = ((b[coll, 0] - px) * rx + (b[coll, 1] - py) * ry) / den
            lo = np.minimum(ta, tb)
            hi = np.maximum(ta, tb)
            keep = (hi >= -eps_t) & (lo <= 1 + eps_t)
            out.extend(np.clip(lo[keep], 0.0, 1.0).tolist())
            out.extend(np.clip(hi[keep], 0.0, 1.0).tolist())
    return sorted(out)


def _pinched_at_vertex(seg: Segment, poly_or_ring, eps: float) -> bool:
    """True if seg's interior passes through a ring vertex without being
    collinear with one of the vertex's adjacent edges."""
    if isinstance(poly_or_ring, Ring):
        xy = poly_or_ring.xy
        verts = (xy, np.roll(xy, 1, axis=0), np.roll(xy, -1, axis=0))
    else:
        verts = poly_or_ring.vertex_arrays()
    v, prev_v, next_v = verts
    px, py = seg.a.x, seg.a.y
    rx, ry = seg.b.x - px, seg.b.y - py
    rlen = math.hypot(rx, ry)
    t = ((v[:, 0] - px) * rx + (v[:, 1] - py) * ry) / (rlen * rlen)
    dx = v[:, 0] - (px + t * rx)
    dy = v[:, 1] - (py + t * ry)
    eps_t = eps / rlen
    on_interior = (np.hypot(dx, dy) <= eps) & (t > eps_t) & (t < 1 - eps_t)
    if not on_interior.any():
        return False
    # collinear with an adjacent edge <=> the edge's far vertex also lies on
    # the segment's support line
    for i in np.nonzero(on_interior)[0]:
        ok = False
        for other in (prev_v[i], next_v[i]):
            d = abs((other[0] - px) * ry - (other[1] - py) * rx) / rlen
            if d <= eps:
                ok = True
                break
        if not ok:
            return True
    return False


def _sample_params_xy(seg: Segment, a: np.ndarray, b: np.ndarray,
                      eps: float) -> np.ndarray:
    params = {0.0, 1.0}
    params.update(_LADDER)
    params.update(_contacts_on_arrays(seg, a, b, eps))
    ts = np.array(sorted(params))
    mids = (ts[:-1] + ts[1:]) / 2.0
    return np.unique(np.concatenate([ts[1:-1], mids]))


def segment_within_area(seg: Segment, poly: PolygonWithHoles,
                        eps: float = EPS_CONTACT,
                        check_endpoints: bool = True) -> bool:
    """True iff seg lies completely inside the closed polygon.

    Rejects proper crossings of any ring, interior passes through a ring
    vertex that do not run along the boundary, and any sample point (contact
    interval midpoints plus a fixed bisection ladder) falling outside.
    check_endpoints=False skips the endpoint test when the caller has
    already classified both endpoints.
    """
    a, b = poly.edge_arrays()
    if check_endpoints:
        pts = np.array([[seg.a.x, seg.a.y], [seg.b.x, seg.b.y]])
        if (_classify_xy(pts, a, b, eps) == 0).any():
            return False
    if _proper_mask(seg.a, seg.b, a, b, EPS_GEOM).any():
        return False
    if _pinched_at_vertex(seg, poly, eps):
        return False
    ts = _sample_params_xy(seg, a, b, eps)
    samples = np.column_stack([seg.a.x + ts * (seg.b.x - seg.a.x),
                               seg.a.y + ts * (seg.b.y - seg.a.y)])
    return not (_classify_xy(samples, a, b, eps) == 0).any()


def segment_avoids_ring(seg: Segment, ring: Ring,
                        eps: float = EPS_CONTACT) -> bool:
    """True iff seg does not enter the ring's interior.

    Running along the ring boundary is allowed; proper crossings, interior
    samples, and non-collinear passes through a ring vertex are not. The
    same conventions as segment_within_area, seen from outside.
    """
    a, b = ring.edge_arrays()
    if _proper_mask(seg.a, seg.b, a, b, EPS_GEOM).any():
        return False
    if _pinched_at_vertex(seg, ring, eps):
        return False
    pts = np.array([[seg.a.x, seg.a.y], [seg.b.x, seg.b.y]])
    if (_classify_against_ring(pts, ring, eps) == 1).any():
        return False
    ts = _sample_params_xy(seg, a, b, eps)
    samples = np.column_stack([seg.a.x + ts * (seg.b.x - seg.a.x),
                               seg.a.y + ts * (seg.b.y - seg.a.y)])
    return not (_classify_against_ring(samples, ring, eps) == 1).any()
