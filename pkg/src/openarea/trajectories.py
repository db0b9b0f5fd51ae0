"""Trajectory preprocessing and similarity measures.

Three measures compare a candidate route against an observed trajectory:
closest-pair distance (the minimum point-to-point separation), an
LCSS-based distance (fraction of points that cannot be matched within a
spatial threshold), and a segment-Hausdorff distance averaged over the
first and last segment pairs (parallel displacement of the non-shared
vertices plus the angular component |L2|*sin(theta), the perpendicular
component vanishing at the shared vertex).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from .errors import EndpointsNotShared, ParseError
from .geometry import Point, Segment

SHARE_TOL_M = 1.0


@dataclass(frozen=True)
class Trajectory:
    points: tuple[Point, ...]
    times: tuple[float, ...]
    scores: Optional[tuple[float, ...]] = None  # one per inter-sample segment

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if len(self.times) != len(self.points):
            raise ValueError("one timestamp per sample required")
        if any(b <= a for a, b in zip(self.times[:-1], self.times[1:])):
            raise ValueError("timestamps must be strictly increasing")
        if self.scores is not None:
            if len(self.scores) != len(self.points) - 1:
                raise ValueError("one score per segment required")
            if any(not (0 <= s <= 5) for s in self.scores):
                raise ValueError("scores must lie in [0, 5]")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.points])

    def length_m(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.points[:-1], self.points[1:]))


def trajectory_from_points(points: Sequence, interval_s: float = 2.0) -> Trajectory:
    """Wrap a polyline as a trajectory with synthetic evenly spaced times."""
    pts = tuple(p if isinstance(p, Point) else Point(*p) for p in points)
    return Trajectory(pts, tuple(i * interval_s for i in range(len(pts))))


def load_trajectory_csv(path, projector=None) -> Trajectory:
    """Read a `t,x,y[,score]` CSV.

    t is ISO-8601 or epoch seconds. The score on row i (i >= 1) belongs to
    the segment from row i-1 to row i; row 0's score cell is ignored. When a
    projector is given, x,y are treated as lon,lat and projected.
    """
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                if row and any(cell.strip() for cell in row):
                    rows.append(row)
    except (OSError, csv.Error, StopIteration) as exc:
        raise ParseError(f"cannot read trajectory {path}: {exc}") from exc
    cols = [c.strip().lower() for c in header]
    if cols[:3] != ["t", "x", "y"]:
        raise ParseError(f"trajectory header must start with t,x,y; got {header}")
    has_score = len(cols) > 3 and cols[3] == "score"
    points, times, scores = [], [], []
    for i, row in enumerate(rows):
        try:
            times.append(_parse_time(row[0]))
            x, y = float(row[1]), float(row[2])
            points.append(projector(x, y) if projector else Point(x, y))
            if has_score and i >= 1:
                cell = row[3].strip() if len(row) > 3 else ""
                scores.append(float(cell) if cell else None)
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad trajectory row {i + 2}: {row}") from exc
    score_tuple = None
    if has_score and scores and all(s is not None for s in scores):
        score_tuple = tuple(scores)
    try:
        return Trajectory(tuple(points), tuple(times), score_tuple)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _parse_time(cell: str) -> float:
    cell = cell.strip()
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(cell).timestamp()
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {cell!r}") from exc


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

def simplify_dp(traj: Trajectory, tol: float) -> Trajectory:
    """Douglas-Peucker simplification keeping endpoints and timestamps.

    Every dropped point lies within tol of the simplified polyline.
    """
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    pts = traj.xy
    n = len(pts)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        seg = pts[lo:hi + 1]
        d = _deviations(seg[1:-1], pts[lo], pts[hi])
        k = int(np.argmax(d))
        if d[k] > tol:
            mid = lo + 1 + k
            keep[mid] = True
            stack.append((lo, mid))
            stack.append((mid, hi))
    idx = np.nonzero(keep)[0]
    return Trajectory(tuple(traj.points[i] for i in idx),
                      tuple(traj.times[i] for i in idx))


def _deviations(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    v = b - a
    norm = math.hypot(*v)
    if norm == 0:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    return np.abs((pts[:, 0] - a[0]) * v[1] - (pts[:, 1] - a[1]) * v[0]) / norm


# ---------------------------------------------------------------------------
# similarity measures
# ---------------------------------------------------------------------------

def cpd(a: Trajectory, b: Trajectory) -> float:
    """Closest-pair distance: min over all sample pairs."""
    pa, pb = a.xy, b.xy
    d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2)
    return float(math.sqrt(d2.min()))


def lcss_distance(a: Trajectory, b: Trajectory, eps: float) -> float:
    """1 - LCSS(a, b) / min(|a|, |b|), matching points within eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    pa, pb = a.xy, b.xy
    n, m = len(pa), len(pb)
    close = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2) <= eps * eps
    table = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(1, n + 1):
        row = table[i]
        prev = table[i - 1]
        for j in range(1, m + 1):
            if close[i - 1, j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
    return 1.0 - table[n, m] / min(n, m)


def _angle_term(u: Segment, v: Segment) -> float:
    """|shorter segment| * sin(angle between the segments)."""
    ux, uy = u.b.x - u.a.x, u.b.y - u.a.y
    vx, vy = v.b.x - v.a.x, v.b.y - v.a.y
    lu, lv = math.hypot(ux, uy), math.hypot(vx, vy)
    sin_theta = abs(ux * vy - uy * vx) / (lu * lv)
    return min(lu, lv) * sin_theta


def dhaus(a: Trajectory, b: Trajectory, w1: float = 1.0, w2: float = 1.0,
          share_tol: float = SHARE_TOL_M) -> float:
    """Average of the first-pair and last-pair segment distances.

    Each pair shares a vertex (starts for the first segments, ends for the
    last; b is translated so the shared vertices coincide). Pair value is
    w1 * |non-shared vertex gap| + w2 * |L2| * sin(theta).
    """
    first_a = Segment(a.points[0], a.points[1])
    last_a = Segment(a.points[-2], a.points[-1])
    first_b = Segment(b.points[0], b.points[1])
    last_b = Segment(b.points[-2], b.points[-1])
    if a.points[0].distance_to(b.points[0]) > share_tol:
        raise EndpointsNotShared(
            f"start points differ by {a.points[0].distance_to(b.points[0]):.3f} m")
    if a.points[-1].distance_to(b.points[-1]) > share_tol:
        raise EndpointsNotShared(
            f"end points differ by {a.points[-1].distance_to(b.points[-1]):.3f} m")
    # translate b's shared endpoint onto a's
    fb = _translate(first_b, a.points[0].x - first_b.a.x, a.points[0].y - first_b.a.y)
    lb = _translate(last_b, a.points[-1].x - last_b.b.x, a.points[-1].y - last_b.b.y)
    pair_first = w1 * first_a.b.distance_to(fb.b) + w2 * _angle_term(first_a, fb)
    pair_last = w1 * last_a.a.distance_to(lb.a) + w2 * _angle_term(last_a, lb)
    return (pair_first + pair_last) / 2.0


def _translate(seg: Segment, dx: float, dy: float) -> Segment:
    return Segment(Point(seg.a.x + dx, seg.a.y + dy), Point(seg.b.x + dx, seg.b.y + dy))


def dhaus_full(s1: Segment, s2: Segment, w_perp: float = 1.0, w_par: float = 1.0,
               w_ang: float = 1.0) -> float:
    """Three-component segment distance for arbitrary segment pairs:
    perpendicular, parallel, and angular terms over the projection of the
    shorter segment onto the longer."""
    if s1.length < s2.length:
        s1, s2 = s2, s1
    ax, ay = s1.a.x, s1.a.y
    vx, vy = s1.b.x - ax, s1.b.y - ay
    den = vx * vx + vy * vy
    t1 = ((s2.a.x - ax) * vx + (s2.a.y - ay) * vy) / den
    t2 = ((s2.b.x - ax) * vx + (s2.b.y - ay) * vy) / den
    p1 = Point(ax + t1 * vx, ay + t1 * vy)
    p2 = Point(ax + t2 * vx, ay + t2 * vy)
    l_perp1 = s2.a.distance_to(p1)
    l_perp2 = s2.b.distance_to(p2)
    if l_perp1 + l_perp2 > 0:
        d_perp = (l_perp1 ** 2 + l_perp2 ** 2) / (l_perp1 + l_perp2)
    else:
        d_perp = 0.0
    d_par = min(s1.a.distance_to(p1), s1.b.distance_to(p2))
    d_ang = _angle_term(s1, s2)
    return w_perp * d_perp + w_par * d_par + w_ang * d_ang


def resample(points: Sequence[Point], step: float) -> list[Point]:
    """Points at arc-length spacing <= step along a polyline, endpoints kept."""
    pts = [p if isinstance(p, Point) else Point(*p) for p in points]
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        d = a.distance_to(b)
        n = max(1, math.ceil(d / step))
        for i in range(1, n + 1):
            t = i / n
            out.append(Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
    return out


# ---------------------------------------------------------------------------
# route comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateScores:
    cpd_m: float
    lcss: float
    dhaus_m: float


@dataclass(frozen=True)
class SimilarityReport:
    baseline: str
    scores: dict[str, CandidateScores]
    closeness_pct: dict[str, dict[str, Optional[float]]]

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "candidates": {
                name: {
                    "cpd_m": s.cpd_m,
                    "lcss_distance": s.lcss,
                    "dhaus_m": s.dhaus_m,
                    "closer_than_baseline_pct": self.closeness_pct[name],
                }
                for name, s in sorted(self.scores.items())
            },
        }


def compare_routes(actual: Trajectory, candidates: dict[str, Trajectory],
                   baseline: str, lcss_eps: float = 2.0, w1: float = 1.0,
                   w2: float = 1.0, share_tol: float = SHARE_TOL_M) -> SimilarityReport:
    """Score every candidate against the actual trajectory and report
    relative closeness versus the named baseline per measure."""
    if baseline not in candidates:
        raise ValueError(f"baseline {baseline!r} is not among the candidates")
    scores = {}
    for name, cand in candidates.items():
        scores[name] = CandidateScores(
            cpd_m=cpd(actual, cand),
            lcss=lcss_distance(actual, cand, lcss_eps),
            dhaus_m=dhaus(actual, cand, w1, w2, share_tol),
        )
    base = scores[baseline]
    closeness = {}
    for name, s in scores.items():
        closeness[name] = {
            "cpd": _closeness(base.cpd_m, s.cpd_m),
            "lcss": _closeness(base.lcss, s.lcss),
            "dhaus": _closeness(base.dhaus_m, s.dhaus_m),
        }
    return SimilarityReport(baseline, scores, closeness)


def _closeness(baseline_value: float, candidate_value: float) -> Optional[float]:
    """(baseline - candidate) / baseline as a percentage; None when the
    baseline is zero and the ratio is undefined."""
    if baseline_value == 0:
        return 0.0 if candidate_value == 0 else None
    return 100.0 * (baseline_value - candidate_value) / baseline_value
