"""Combinatorial types of diameters transverse to the standard diameter.

A diameter ``L`` that meets the horizontal diameter ``L0`` transversely is
recorded, up to the stabilizer of ``L0``, by

* ``n``: the number of transverse crossings,
* ``start_side``: the half-disk ``L`` enters right after leaving ``L0`` at
  the departure point ``a``,
* ``order``: the left-to-right positions (``1..n``) of the crossings in the
  order the curve visits them.

Positions ``0`` and ``n + 1`` stand for the departure point ``a`` and the
landing point ``b``.  The curve between consecutive visits is an *arc* lying
in one half-disk; arcs alternate sides starting from ``start_side``.

Regions (connected components of the complement of ``L0 u L``) are named
canonically: the two regions touching the boundary circle are ``rootW``
(north) and ``rootB`` (south); every other region lies directly under a
unique arc ``(p, q)`` on side ``s`` and is called ``e<p><s>``, ``p`` being
the leftmost axis segment on its boundary.  Axis segment ``i`` runs between
positions ``i`` and ``i + 1``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Mapping, Sequence

HALF = Fraction(1, 2)
DEFAULT_ENUMERATION_CAP = 10
ROOT_WHITE = "rootW"
ROOT_BLACK = "rootB"


class MeanderError(ValueError):
    """Raised when an operation's precondition on a meander is violated."""


class InfeasibleWeightsError(MeanderError):
    """No strictly positive weighting satisfies the half-area constraints."""


class Side(str, Enum):
    NORTH = "N"
    SOUTH = "S"

    def flip(self) -> "Side":
        return Side.SOUTH if self is Side.NORTH else Side.NORTH


class Color(str, Enum):
    BLACK = "B"
    WHITE = "W"

    def flip(self) -> "Color":
        return Color.WHITE if self is Color.BLACK else Color.BLACK


@dataclass
class ValidationReport:
    ok: bool
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, message: str) -> None:
        self.ok = False
        self.messages.append(message)


@dataclass(frozen=True)
class Arc:
    """One piece of the curve between consecutive axis points, in one half-disk."""

    step: int  # position along the curve, 0 for the arc leaving a
    side: Side
    start: int
    end: int

    @property
    def left(self) -> int:
        return min(self.start, self.end)

    @property
    def right(self) -> int:
        return max(self.start, self.end)


@dataclass(frozen=True)
class Meander:
    n: int
    start_side: Side
    order: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_side", Side(self.start_side))
        object.__setattr__(self, "order", tuple(int(p) for p in self.order))

    @property
    def end_side(self) -> Side:
        """Side of the arc that lands at b."""
        return self.start_side if self.n % 2 == 0 else self.start_side.flip()

    def points(self) -> list[int]:
        """Axis positions in visiting order, including a (0) and b (n+1)."""
        return [0, *self.order, self.n + 1]

    def arcs(self) -> list[Arc]:
        pts = self.points()
        side = self.start_side
        out = []
        for step in range(len(pts) - 1):
            out.append(Arc(step, side, pts[step], pts[step + 1]))
            side = side.flip()
        return out

    def mirror(self) -> "Meander":
        """Left-right reflection: the curve is traversed from b to a."""
        flipped = tuple(self.n + 1 - p for p in reversed(self.order))
        return Meander(self.n, self.end_side, flipped)

    def reflect(self) -> "Meander":
        """Reflection across the axis: north and south (and colors) swap."""
        return Meander(self.n, self.start_side.flip(), self.order)


def _label(pos: int, n: int) -> str:
    if pos == 0:
        return "a"
    if pos == n + 1:
        return "b"
    return str(pos)


def _arc_label(arc: Arc, n: int) -> str:
    return f"({_label(arc.start, n)},{_label(arc.end, n)})"


def validate_meander(m: Meander) -> ValidationReport:
    """Check that ``order`` is a permutation and that arcs on each side nest.

    Uses one left-to-right stack sweep per side; the first interleaving pair
    found is named in the report.
    """
    report = ValidationReport(True)
    if m.n < 0:
        report.fail(f"negative crossing count {m.n}")
        return report
    if len(m.order) != m.n:
        report.fail(f"order has length {len(m.order)}, expected {m.n}")
        return report
    if sorted(m.order) != list(range(1, m.n + 1)):
        report.fail(f"order {list(m.order)} is not a permutation of 1..{m.n}")
        return report

    for side in (Side.NORTH, Side.SOUTH):
        arc_at: dict[int, Arc] = {}
        for arc in m.arcs():
            if arc.side is side:
                arc_at[arc.start] = arc
                arc_at[arc.end] = arc
        stack: list[Arc] = []
        for pos in range(m.n + 2):
            arc = arc_at.get(pos)
            if arc is None:
                continue
            if pos == arc.left:
                stack.append(arc)
                continue
            top = stack.pop()
            if top is not arc:
                name = "North" if side is Side.NORTH else "South"
                first, second = sorted((top, arc), key=lambda x: x.left)
                report.fail(
                    f"{name} arcs {_arc_label(first, m.n)} and "
                    f"{_arc_label(second, m.n)} interleave"
                )
                return report
    return report


def _interleave(x: tuple[int, int], y: tuple[int, int]) -> bool:
    (a, b), (c, d) = sorted(x), sorted(y)
    return a < c < b < d or c < a < d < b


def enumerate_meanders(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Meander]:
    """All valid meanders with ``n`` crossings, sorted by (start_side, order)."""
    if n < 0:
        raise MeanderError(f"n must be nonnegative, got {n}")
    if n > cap:
        raise MeanderError(f"n={n} exceeds the enumeration cap {cap}")

    found: list[Meander] = []
    for start in (Side.NORTH, Side.SOUTH):
        arcs: dict[Side, list[tuple[int, int]]] = {Side.NORTH: [], Side.SOUTH: []}
        order: list[int] = []
        used = [False] * (n + 2)

        def fits(side: Side, arc: tuple[int, int]) -> bool:
            return not any(_interleave(arc, other) for other in arcs[side])

        def extend(prev: int, side: Side) -> None:
            if len(order) == n:
                if fits(side, (prev, n + 1)):
                    found.append(Meander(n, start, tuple(order)))
                return
            for nxt in range(1, n + 1):
                if used[nxt] or not fits(side, (prev, nxt)):
                    continue
                used[nxt] = True
                order.append(nxt)
                arcs[side].append((prev, nxt))
                extend(nxt, side.flip())
                arcs[side].pop()
                order.pop()
                used[nxt] = False

        extend(0, start)
    return found


def iter_meanders(max_n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Meander]:
    for n in range(max_n + 1):
        yield from enumerate_meanders(n, cap)


# ---------------------------------------------------------------------------
# Regions


@dataclass(frozen=True)
class Region:
    id: str
    side: Side
    color: Color
    incident_edges: tuple[int, ...]
    is_root: bool

    @property
    def leftmost_edge(self) -> int | None:
        return self.incident_edges[0] if self.incident_edges else None


@dataclass(frozen=True)
class Edge:
    index: int
    north_region: str
    south_region: str


@dataclass(frozen=True)
class RegionSet:
    n: int
    regions: tuple[Region, ...]
    edges: tuple[Edge, ...]

    def by_id(self) -> dict[str, Region]:
        return {r.id: r for r in self.regions}

    def region_at(self, edge: int, side: Side) -> str:
        e = self.edges[edge]
        return e.north_region if side is Side.NORTH else e.south_region

    def root(self, color: Color) -> Region:
        return self.by_id()[ROOT_WHITE if color is Color.WHITE else ROOT_BLACK]

    def ids(self) -> list[str]:
        return [r.id for r in self.regions]


def region_id(edge: int, side: Side) -> str:
    return f"e{edge}{side.value}"


def _root_id(side: Side) -> str:
    return ROOT_WHITE if side is Side.NORTH else ROOT_BLACK


def _require_valid(m: Meander) -> None:
    report = validate_meander(m)
    if not report:
        raise MeanderError("invalid meander: " + "; ".join(report.messages))


def extract_regions(m: Meander) -> RegionSet:
    """Complementary regions of ``L0 u L`` with colors, sides and axis edges.

    The north root is white.  Color flips across every arc of ``L`` and is
    unchanged across axis segments.
    """
    _require_valid(m)
    at_segment: dict[Side, list[str]] = {}
    colors: dict[str, Color] = {ROOT_WHITE: Color.WHITE, ROOT_BLACK: Color.BLACK}
    sides: dict[str, Side] = {ROOT_WHITE: Side.NORTH, ROOT_BLACK: Side.SOUTH}

    for side in (Side.NORTH, Side.SOUTH):
        ends: dict[int, Arc] = {}
        for arc in m.arcs():
            if arc.side is side:
                ends[arc.start] = arc
                ends[arc.end] = arc
        stack = [_root_id(side)]
        labels = []
        for pos in range(m.n + 1):
            arc = ends.get(pos)
            if arc is not None:
                if pos == arc.left:
                    rid = region_id(pos, side)
                    colors[rid] = colors[stack[-1]].flip()
                    sides[rid] = side
                    stack.append(rid)
                else:
                    stack.pop()
            labels.append(stack[-1])
        at_segment[side] = labels

    edges = tuple(
        Edge(i, at_segment[Side.NORTH][i], at_segment[Side.SOUTH][i])
        for i in range(m.n + 1)
    )
    incident: dict[str, list[int]] = {rid: [] for rid in colors}
    for e in edges:
        incident[e.north_region].append(e.index)
        incident[e.south_region].append(e.index)

    def sort_key(rid: str) -> tuple:
        if rid == ROOT_WHITE:
            return (0, 0, "")
        if rid == ROOT_BLACK:
            return (0, 1, "")
        return (1, incident[rid][0], sides[rid].value)

    regions = tuple(
        Region(rid, sides[rid], colors[rid], tuple(incident[rid]),
               rid in (ROOT_WHITE, ROOT_BLACK))
        for rid in sorted(colors, key=sort_key)
    )
    return RegionSet(m.n, regions, edges)


# ---------------------------------------------------------------------------
# Weights


@dataclass(frozen=True)
class WeightedMeander:
    meander: Meander
    weights: Mapping[str, Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "weights", {k: Fraction(v) for k, v in dict(self.weights).items()}
        )

    @property
    def n(self) -> int:
        return self.meander.n

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))


def class_sums(regions: RegionSet, weights: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Sums of weights over the North, South, White and Black regions."""
    sums = {"N": Fraction(0), "S": Fraction(0), "W": Fraction(0), "B": Fraction(0)}
    for r in regions.regions:
        w = weights.get(r.id, Fraction(0))
        sums[r.side.value] += w
        sums[r.color.value] += w
    return sums


def validate_weights(wm: WeightedMeander) -> ValidationReport:
    report = ValidationReport(True)
    regions = extract_regions(wm.meander)
    expected = set(regions.ids())
    given = set(wm.weights)
    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        report.fail(f"weight keys mismatch: missing {missing}, unexpected {extra}")
        return report
    for rid in regions.ids():
        w = wm.weights[rid]
        if not 0 < w < HALF:
            report.fail(f"weight of {rid} is {w}, outside (0, 1/2)")
    for name, total in class_sums(regions, wm.weights).items():
        if total != HALF:
            report.fail(f"{name} regions sum to {total}, expected 1/2")
    return report


def _classes(regions: RegionSet) -> dict[tuple[Side, Color], list[str]]:
    out: dict[tuple[Side, Color], list[str]] = {
        (s, c): [] for s in Side for c in Color
    }
    for r in regions.regions:
        out[(r.side, r.color)].append(r.id)
    return out


def _check_feasible(m: Meander, classes) -> None:
    nb = classes[(Side.NORTH, Color.BLACK)]
    sw = classes[(Side.SOUTH, Color.WHITE)]
    if bool(nb) != bool(sw):
        raise InfeasibleWeightsError(
            f"meander n={m.n} start={m.start_side.value}: north-black and "
            "south-white classes must both be empty or both nonempty"
        )


def _spread(ids: Sequence[str], total: Fraction, draws: Sequence[int]) -> dict[str, Fraction]:
    denom = sum(draws)
    return {rid: total * Fraction(d, denom) for rid, d in zip(ids, draws)}


def sample_weights(m: Meander, seed: int) -> WeightedMeander:
    """Seeded exact weights strictly inside the half-area polytope.

    North weights come from a seeded simplex scaled to 1/2; south weights
    are drawn the same way and each color class is rescaled so the white
    and black totals also come out at 1/2.
    """
    regions = extract_regions(m)
    classes = _classes(regions)
    _check_feasible(m, classes)
    rng = random.Random(seed)

    north = [r.id for r in regions.regions if r.side is Side.NORTH]
    draws = [rng.randint(1, 10**6) for _ in north]
    weights = _spread(north, HALF, draws)
    north_white = sum((weights[r] for r in classes[(Side.NORTH, Color.WHITE)]), Fraction(0))
    north_black = HALF - north_white

    for color, total in ((Color.WHITE, north_black), (Color.BLACK, north_white)):
        ids = classes[(Side.SOUTH, color)]
        if ids:
            weights.update(_spread(ids, total, [rng.randint(1, 10**6) for _ in ids]))
    return WeightedMeander(m, weights)


def uniform_weights(m: Meander) -> WeightedMeander:
    """Deterministic weights: each nonempty side/color class gets an equal share."""
    regions = extract_regions(m)
    classes = _classes(regions)
    _check_feasible(m, classes)
    mixed = bool(classes[(Side.NORTH, Color.BLACK)])
    weights: dict[str, Fraction] = {}
    for (side, color), ids in classes.items():
        if not ids:
            continue
        total = Fraction(1, 4) if mixed else HALF
        for rid in ids:
            weights[rid] = total / len(ids)
    return WeightedMeander(m, weights)


# ---------------------------------------------------------------------------
# Leaf reduction


def _segment_image(i: int, p: int) -> int:
    if i <= p - 1:
        return i
    if i <= p + 1:
        return p - 1
    return i - 2


def reduce_leaf(wm: WeightedMeander, leaf: str, target: str) -> WeightedMeander:
    """Delete a leaf region together with its two crossings.

    The leaf's weight moves to ``target`` (a same-colored vertex at graph
    distance 2); the two opposite-colored regions flanking the leaf merge.
    Move costs are taken in the infimum limit, so no other weight changes.
    """
    m = wm.meander
    regions = extract_regions(m)
    by_id = regions.by_id()
    if leaf not in by_id:
        raise MeanderError(f"unknown leaf region {leaf!r}")
    if target not in by_id:
        raise MeanderError(f"unknown target region {target!r}")
    lr = by_id[leaf]
    if lr.is_root:
        raise MeanderError(f"leaf {leaf} is a root")
    if len(lr.incident_edges) != 1:
        raise MeanderError(f"{leaf} is not a leaf: edges {list(lr.incident_edges)}")
    (p,) = lr.incident_edges
    parent = regions.region_at(p, lr.side.flip())
    if by_id[parent].is_root:
        raise MeanderError(f"leaf {leaf} has depth 1 (adjacent to the root)")
    if target == leaf or by_id[target].color is not lr.color:
        raise MeanderError(f"target {target} is not a same-colored vertex at distance 2")
    pr = by_id[parent]
    neighbours = set()
    for i in pr.incident_edges:
        neighbours.add(regions.region_at(i, pr.side.flip()))
    if target not in neighbours:
        raise MeanderError(f"target {target} is not at graph distance 2 from {leaf}")
    if not 1 <= p <= m.n - 1:
        raise MeanderError(f"leaf {leaf} touches a or b")
    k = next(
        (j for j in range(m.n - 1) if {m.order[j], m.order[j + 1]} == {p, p + 1}),
        None,
    )
    if k is None:
        raise MeanderError(f"crossings {p},{p + 1} of {leaf} are not adjacent along L")

    kept = m.order[:k] + m.order[k + 2:]
    reduced = Meander(m.n - 2, m.start_side, tuple(x - 2 if x > p + 1 else x for x in kept))
    new_regions = extract_regions(reduced)
    new_by_id = new_regions.by_id()

    weights: dict[str, Fraction] = {rid: Fraction(0) for rid in new_by_id}
    image: dict[str, str] = {}
    for r in regions.regions:
        if r.id == leaf:
            continue
        images = {
            new_regions.region_at(_segment_image(i, p), r.side)
            for i in r.incident_edges
            if i != p
        }
        if not images:
            if not r.is_root:
                raise AssertionError(f"non-root region {r.id} has no surviving edges")
            images = {r.id}
        if len(images) != 1:
            raise AssertionError(f"region {r.id} splits into {sorted(images)}")
        (img,) = images
        if new_by_id[img].color is not r.color:
            raise AssertionError(f"region {r.id} changed color")
        image[r.id] = img
        weights[img] += wm.weights[r.id]
    weights[image[target]] += wm.weights[leaf]
    if any(w == 0 for w in weights.values()):
        raise AssertionError("reduced meander has a region without preimage")
    return WeightedMeander(reduced, weights)


# ---------------------------------------------------------------------------
# Keys and text format


def _frac(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def canonical_key(obj: Meander | WeightedMeander) -> bytes:
    if isinstance(obj, WeightedMeander):
        m = obj.meander
        regions = extract_regions(m)
        tail = ";".join(f"{rid}={_frac(obj.weights[rid])}" for rid in regions.ids())
    else:
        m, tail = obj, None
    key = f"M{m.n}{m.start_side.value}:{','.join(map(str, m.order))}"
    if tail is not None:
        key += "|" + tail
    return key.encode("ascii")


def to_json(obj: Meander | WeightedMeander) -> dict:
    m = obj.meander if isinstance(obj, WeightedMeander) else obj
    data: dict = {"n": m.n, "start_side": m.start_side.value, "order": list(m.order)}
    if isinstance(obj, WeightedMeander):
        data["weights"] = {
            rid: _frac(obj.weights[rid]) for rid in extract_regions(m).ids()
        }
    return data


def from_json(data: Mapping) -> Meander | WeightedMeander:
    try:
        m = Meander(int(data["n"]), Side(data["start_side"]), tuple(data["order"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise MeanderError(f"malformed meander record: {exc}") from exc
    if "weights" not in data:
        return m
    return WeightedMeander(m, {k: Fraction(v) for k, v in data["weights"].items()})


def load(path: str | Path) -> Meander | WeightedMeander:
    return from_json(json.loads(Path(path).read_text()))


def dump(obj: Meander | WeightedMeander, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json(obj)) + "\n")
