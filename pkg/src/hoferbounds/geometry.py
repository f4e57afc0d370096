"""Rotated diameters, their axis crossings, and conversion to weighted meanders.

The flow rotates the disk ``{r <= 1 - eps}`` rigidly by the angle ``pi t``
and tapers the angle to zero across the annulus ``1 - eps <= r <= 1``.  The
image of the horizontal diameter is a straight segment through the origin
joined to two spiral arms, one per endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np
from shapely.geometry import LineString

from .meander import (
    HALF,
    Color,
    Meander,
    MeanderError,
    Side,
    WeightedMeander,
    _classes,
    extract_regions,
    region_id,
    validate_meander,
    validate_weights,
)

DEGENERACY_OFFSET = 1e-3
AXIS_TOL = 1e-12
WEIGHT_DENOMINATOR = 10**6


class GeometryError(MeanderError):
    pass


def cosine_ramp(u: np.ndarray) -> np.ndarray:
    """1 at ``u = 0`` falling to 0 at ``u = 1`` with zero slope at both ends."""
    return 0.5 * (1.0 + np.cos(np.pi * np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class RotationParams:
    t: float
    eps: float = 0.05
    ramp: Callable[[np.ndarray], np.ndarray] = cosine_ramp
    samples: int = 4000  # points on each spiral arm

    def __post_init__(self) -> None:
        if self.t < 0:
            raise GeometryError("rotation amount t must be >= 0")
        if not 0 < self.eps < 1:
            raise GeometryError("eps must lie in (0, 1)")
        if self.samples < 2:
            raise GeometryError("need at least two samples per arm")
        u = np.linspace(0.0, 1.0, 257)
        values = np.asarray(self.ramp(u), dtype=float)
        if abs(values[0] - 1) > 1e-12 or abs(values[-1]) > 1e-12:
            raise GeometryError("ramp must go from 1 at u=0 to 0 at u=1")
        if (np.diff(values) > 1e-12).any():
            raise GeometryError("ramp must be nonincreasing")

    def angle(self, r: np.ndarray) -> np.ndarray:
        """Rotation angle at radius ``r``."""
        r = np.asarray(r, dtype=float)
        u = np.clip((r - (1 - self.eps)) / self.eps, 0.0, 1.0)
        return math.pi * self.t * np.asarray(self.ramp(u), dtype=float)

    def nondegenerate(self) -> "RotationParams":
        """Shift ``t`` by a small offset when ``2t`` is an integer."""
        if self.t > 0 and abs(2 * self.t - round(2 * self.t)) < 1e-9:
            return RotationParams(self.t + DEGENERACY_OFFSET, self.eps, self.ramp, self.samples)
        return self


@dataclass(frozen=True, eq=False)
class Polyline:
    """Curve from ``(-1, 0)`` to ``(1, 0)`` given by its vertices."""

    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise GeometryError("polyline needs at least two 2D points")
        object.__setattr__(self, "points", pts)

    def is_embedded(self) -> bool:
        return LineString(self.points).is_simple

    def check(self, tol: float = 1e-9) -> None:
        pts = self.points
        if abs(pts[0, 1]) > tol or abs(pts[-1, 1]) > tol:
            raise GeometryError("endpoints must lie on the axis")
        if pts[0, 0] > pts[-1, 0]:
            raise GeometryError("curve must run from the left endpoint to the right one")
        if (np.hypot(pts[1:-1, 0], pts[1:-1, 1]) >= 1 + tol).any():
            raise GeometryError("interior points must lie in the disk")
        if not self.is_embedded():
            raise GeometryError("curve is not embedded")


def straight_diameter(samples: int = 3) -> Polyline:
    x = np.linspace(-1.0, 1.0, max(samples, 2))
    return Polyline(np.column_stack([x, np.zeros_like(x)]))


def rotated_diameter(p: RotationParams) -> Polyline:
    """Image of the horizontal diameter under the rotation flow."""
    inner = 1 - p.eps
    if p.t == 0:
        return straight_diameter()
    r = np.linspace(inner, 1.0, p.samples)
    theta = p.angle(r)
    arm = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    # the segment through the origin is straight: no interior vertices needed
    pts = np.concatenate([-arm[::-1], arm])
    if np.abs(pts[1:-1, 1]).min() <= AXIS_TOL:
        raise GeometryError(f"t={p.t}: a curve vertex lies on the axis (degenerate t)")
    step = float(np.max(np.hypot(*np.diff(pts, axis=0).T)[1:-1])) if len(pts) > 3 else 0.0
    return Polyline(pts, resolution=step)


def _crossings(c: Polyline, tol: float = AXIS_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Segment indices and x-coordinates of the interior axis crossings."""
    y = c.points[1:-1, 1]
    if len(y) == 0 or (np.abs(c.points[:, 1]) <= tol).all():
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if (np.abs(y) <= tol).any():
        raise GeometryError("curve vertex on the axis: tangency or degenerate crossing")
    seg = np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:])) + 1  # segment seg..seg+1
    p0, p1 = c.points[seg], c.points[seg + 1]
    xs = p0[:, 0] + (p1[:, 0] - p0[:, 0]) * p0[:, 1] / (p0[:, 1] - p1[:, 1])
    return seg, xs


def count_axis_crossings(c: Polyline, tol: float = AXIS_TOL) -> int:
    return len(_crossings(c, tol)[0])


def polyline_meander(c: Polyline, tol: float = AXIS_TOL) -> Meander:
    seg, xs = _crossings(c, tol)
    if len(seg) == 0:
        raise GeometryError("curve does not cross the axis transversely")
    if len(np.unique(xs)) != len(xs):
        raise GeometryError("two crossings at the same axis point")
    rank = np.argsort(np.argsort(xs)) + 1
    start = Side.SOUTH if c.points[1, 1] < 0 else Side.NORTH
    m = Meander(len(xs), start, tuple(int(v) for v in rank))
    report = validate_meander(m)
    if not report:
        raise GeometryError("crossing pattern is not a meander: " + "; ".join(report.messages))
    return m


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def face_areas(c: Polyline, m: Meander | None = None) -> dict[str, float]:
    """Normalized areas of the regions cut out by the curve and the axis.

    Every arc of the curve closes up with the axis chord under it; a region
    is the part of its arc's enclosure not enclosed by the arcs nested
    directly inside.  Roots take what is left of their half-disk.
    """
    c.check()
    m = polyline_meander(c) if m is None else m
    seg, xs = _crossings(c)
    cuts = [c.points[0]] + [np.array([x, 0.0]) for x in xs] + [c.points[-1]]
    starts = [0, *(seg + 1).tolist()]
    ends = [*seg.tolist(), len(c.points) - 1]
    arcs = m.arcs()
    enclosed = []
    for k in range(len(arcs)):
        body = c.points[starts[k]:ends[k] + 1]
        enclosed.append(_shoelace(np.vstack([cuts[k], body, cuts[k + 1]])))
    areas: dict[str, float] = {}
    direct_children = {k: [] for k in range(len(arcs))}
    top = {Side.NORTH: [], Side.SOUTH: []}
    for k, arc in enumerate(arcs):
        parent = None
        for j, other in enumerate(arcs):
            if j != k and other.side is arc.side and other.left < arc.left and arc.right < other.right:
                if parent is None or arcs[parent].right - arcs[parent].left > other.right - other.left:
                    parent = j
        (direct_children[parent] if parent is not None else top[arc.side]).append(k)
    for k, arc in enumerate(arcs):
        inside = enclosed[k] - sum(enclosed[j] for j in direct_children[k])
        areas[region_id(arc.left, arc.side)] = inside / math.pi
    for side, root in ((Side.NORTH, "rootW"), (Side.SOUTH, "rootB")):
        areas[root] = (math.pi / 2 - sum(enclosed[k] for k in top[side])) / math.pi
    return areas


def project_weights(m: Meander, areas: dict[str, float]) -> tuple[dict[str, Fraction], float]:
    """Exact weights near ``areas`` that satisfy the four half-area sums.

    Non-root areas are rounded to rationals; the north-black and south-white
    classes (which must have equal totals) are rescaled to their common mean,
    and each root takes the rest of its half-disk.  Returns the weights and
    the largest change from the input areas.
    """
    regions = extract_regions(m)
    classes = _classes(regions)
    weights = {
        rid: Fraction(areas[rid]).limit_denominator(WEIGHT_DENOMINATOR)
        for rid in regions.ids() if not regions.by_id()[rid].is_root
    }
    nb = classes[(Side.NORTH, Color.BLACK)]
    sw = classes[(Side.SOUTH, Color.WHITE)]
    sum_nb = sum((weights[r] for r in nb), Fraction(0))
    sum_sw = sum((weights[r] for r in sw), Fraction(0))
    if nb and sw:
        mean = (sum_nb + sum_sw) / 2
        for ids, total in ((nb, sum_nb), (sw, sum_sw)):
            for r in ids:
                weights[r] = weights[r] * mean / total
    for r in regions.regions:
        if r.is_root:
            others = sum((weights[o.id] for o in regions.regions
                          if o.side is r.side and not o.is_root), Fraction(0))
            weights[r.id] = HALF - others
    change = max(abs(float(weights[rid]) - areas[rid]) for rid in weights)
    return weights, change


def polyline_to_weighted_meander(c: Polyline) -> WeightedMeander:
    m = polyline_meander(c)
    weights, _ = project_weights(m, face_areas(c, m))
    wm = WeightedMeander(m, weights)
    report = validate_weights(wm)
    if not report:
        raise GeometryError("projected weights invalid: " + "; ".join(report.messages))
    return wm


@dataclass
class SandwichRow:
    t: float
    n: int
    upper_cost: Fraction
    lower_rate: float
    lower_line: float


@dataclass
class SandwichTable:
    rows: list[SandwichRow]
    lower_rate: float
    upper_slope: float
    holds: bool = field(init=False)

    def __post_init__(self) -> None:
        self.holds = self.lower_rate <= self.upper_slope

    def to_csv(self) -> str:
        lines = ["t,n,upper_cost,lower_rate,lower_line"]
        for r in self.rows:
            lines.append(f"{r.t:.6g},{r.n},{float(r.upper_cost):.10g},{r.lower_rate:.10g},{r.lower_line:.10g}")
        return "\n".join(lines) + "\n"


def fit_upper_slope(ts: Iterable[float], costs: Iterable) -> float:
    """Least-squares slope of cost against t over the upper half of the t range."""
    ts = np.asarray(list(ts), dtype=float)
    costs = np.asarray([float(c) for c in costs])
    middle = 0.5 * (ts.min() + ts.max())
    keep = ts >= middle
    if keep.sum() < 2:
        raise ValueError("need at least two t values in the upper half of the range")
    return float(np.polyfit(ts[keep], costs[keep], 1)[0])


def sandwich_experiment(t_values: Iterable[float], A=Fraction(1, 2), eps: float = 0.05,
                        samples: int = 4000) -> SandwichTable:
    """Planner upper bounds on rotated diameters against the quasimorphism rate."""
    from .reeb import radial_quasimorphism, smoothed_profile
    from .transferplan import make_plan

    rate = float(radial_quasimorphism(smoothed_profile(eps), A).lower_bound_rate)
    rows = []
    for t in sorted(t_values):
        p = RotationParams(t, eps, samples=samples).nondegenerate()
        wm = polyline_to_weighted_meander(rotated_diameter(p))
        cost = make_plan(wm).total_cost
        rows.append(SandwichRow(p.t, wm.n, cost, rate, rate * p.t))
    slope = fit_upper_slope([r.t for r in rows], [r.upper_cost for r in rows])
    return SandwichTable(rows, rate, slope)
