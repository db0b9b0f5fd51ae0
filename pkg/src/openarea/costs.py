"""Link features and the five-factor link weight.

A link's traversal cost is its length scaled by a blend of unit-interval
penalties for slope, width, surface condition, and weather, each taken at
the worst value found along the link. Pure-length coefficients (1,0,0,0,0)
reproduce the raw length, so shortest-distance routing is the zero-penalty
special case and straight-line A* heuristics stay admissible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError
from .geometry import Segment, segment_ring_contacts
from .scene import SceneModel

COEFF_SLOTS = ("length", "slope", "width", "surface", "weather")


@dataclass(frozen=True)
class LinkFeatures:
    length_m: float
    max_slope: float      # percent grade
    min_width: float      # meters
    worst_surface: float  # in [0, 1], 1 = best
    weather: float        # in [0, 1], 1 = best

    def __post_init__(self):
        if self.length_m <= 0:
            raise ValueError("link length must be positive")
        if self.max_slope < 0 or self.min_width <= 0:
            raise ValueError("slope must be >= 0 and width > 0")
        if not (0 <= self.worst_surface <= 1 and 0 <= self.weather <= 1):
            raise ValueError("surface and weather scores must lie in [0, 1]")


@dataclass(frozen=True)
class WeightCoefficients:
    length: float
    slope: float
    width: float
    surface: float
    weather: float

    def __post_init__(self):
        vals = self.as_tuple()
        if any(v < 0 for v in vals):
            raise ValueError("coefficients must be non-negative")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"coefficients must sum to 1, got {sum(vals)}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.length, self.slope, self.width, self.surface, self.weather)


PURE_LENGTH = WeightCoefficients(1.0, 0.0, 0.0, 0.0, 0.0)
# defaults mirror the learned ordering: surface and slope dominate
DEFAULT_COEFFICIENTS = WeightCoefficients(0.15, 0.25, 0.20, 0.30, 0.10)


@dataclass(frozen=True)
class CostModel:
    coefficients: WeightCoefficients = DEFAULT_COEFFICIENTS
    max_slope_pct: float = 10.0   # steeper links are inadmissible
    ref_width_m: float = 1.5      # width at or above this carries no penalty
    sample_step_m: float = 1.0    # feature sampling interval along links
    min_width_m: float = 0.75     # narrower links are inadmissible

    def __post_init__(self):
        if min(self.max_slope_pct, self.ref_width_m, self.sample_step_m,
               self.min_width_m) <= 0:
            raise ValueError("cost model thresholds must be positive")

    def to_dict(self) -> dict:
        return {
            "coefficients": dict(zip(COEFF_SLOTS, self.coefficients.as_tuple())),
            "max_slope_pct": self.max_slope_pct,
            "ref_width_m": self.ref_width_m,
            "sample_step_m": self.sample_step_m,
            "min_width_m": self.min_width_m,
        }


def pure_length_model(sample_step_m: float = 1.0) -> CostModel:
    return CostModel(coefficients=PURE_LENGTH, sample_step_m=sample_step_m)


def load_cost_config(source) -> CostModel:
    """Read a CostModel from a flat JSON config (path, JSON string or dict)."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            path = Path(source)
            text = path.read_text() if path.exists() else str(source)
            doc = json.loads(text)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise ParseError(f"cannot read cost config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("cost config must be a JSON object")
    try:
        co = doc.get("coefficients", {})
        coeffs = WeightCoefficients(*(float(co[k]) for k in COEFF_SLOTS)) \
            if co else DEFAULT_COEFFICIENTS
        return CostModel(
            coefficients=coeffs,
            max_slope_pct=float(doc.get("max_slope_pct", 10.0)),
            ref_width_m=float(doc.get("ref_width_m", 1.5)),
            sample_step_m=float(doc.get("sample_step_m", 1.0)),
            min_width_m=float(doc.get("min_width_m", 0.75)),
        )
    except KeyError as exc:
        raise ParseError(f"cost config missing coefficient {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"bad cost config: {exc}") from exc


def _zone_crossing_params(seg: Segment, scene: SceneModel) -> list[float]:
    params = set()
    for f in scene.fields:
        for poly, _ in f.zones:
            for ring in poly.rings():
                for t in segment_ring_contacts(seg, ring):
                    if 1e-12 < t < 1 - 1e-12:
                        params.add(round(t, 12))
    return sorted(params)


def _sample_ts(seg: Segment, scene: SceneModel, step: float) -> list[float]:
    n = max(1, math.ceil(seg.length / step))
    ts = {i / n for i in range(n + 1)}
    cuts = [0.0] + _zone_crossing_params(seg, scene) + [1.0]
    # midpoint of every constant-feature piece, so slivers are never missed
    ts.update((a + b) / 2 for a, b in zip(cuts[:-1], cuts[1:]))
    ts.update(cuts)
    return sorted(ts)


def link_features(seg: Segment, scene: SceneModel, step: float = 1.0) -> LinkFeatures:
    """Worst-case feature aggregation along seg.

    Samples at spacing <= step (endpoints included) plus the midpoint of
    every constant-feature piece between zone crossings: slope is the max
    sample, the others the min.
    """
    slope_f = scene.field("slope")
    width_f = scene.field("width")
    surface_f = scene.field("surface")
    weather_f = scene.field("weather")
    max_slope = -math.inf
    min_width = math.inf
    worst_surface = math.inf
    worst_weather = math.inf
    for t in _sample_ts(seg, scene, step):
        p = seg.point_at(t)
        max_slope = max(max_slope, slope_f.sample(p))
        min_width = min(min_width, width_f.sample(p))
        worst_surface = min(worst_surface, surface_f.sample(p))
        worst_weather = min(worst_weather, weather_f.sample(p))
    return LinkFeatures(seg.length, max_slope, min_width, worst_surface, worst_weather)


def link_weight(f: LinkFeatures, model: CostModel) -> float:
    """Blend the penalties into a length-proportional weight.

    Inadmissible links (slope over the ceiling or width under the floor) get
    an infinite weight and are dropped from graphs.
    """
    if f.max_slope > model.max_slope_pct or f.min_width < model.min_width_m:
        return math.inf
    c = model.coefficients
    p_slope = min(f.max_slope / model.max_slope_pct, 1.0)
    p_width = min(max(1.0 - f.min_width / model.ref_width_m, 0.0), 1.0)
    p_surface = 1.0 - f.worst_surface
    p_weather = 1.0 - f.weather
    blend = (c.length
             + c.slope * p_slope
             + c.width * p_width
             + c.surface * p_surface
             + c.weather * p_weather)
    # learned coefficient vectors may zero the length slot
    return f.length_m * blend / max(c.length, 1e-6)


def split_atomic(seg: Segment, scene: SceneModel, step: float = 1.0) -> list[Segment]:
    """Partition seg at feature-zone boundaries into constant-feature pieces.

    Pieces are ordered from seg.a to seg.b and concatenate back to seg.
    """
    params = [0.0] + _zone_crossing_params(seg, scene) + [1.0]
    pieces = []
    for a, b in zip(params[:-1], params[1:]):
        if (b - a) * seg.length < 1e-9:
            continue
        start = seg.point_at(a) if pieces == [] else pieces[-1].b
        end = seg.b if b == 1.0 else seg.point_at(b)
        pieces.append(Segment(start, end))
    return pieces or [seg]
