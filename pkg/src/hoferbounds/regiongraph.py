"""The region graph of a diameter and its two rooted trees.

Vertices are the complementary regions of ``L0 u L``; two regions are
adjacent when they share a segment of ``L0``.  Edges keep their left-to-right
order along ``L0``, which makes isomorphism testing a matter of comparing
canonical encodings.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from .meander import (
    HALF,
    Color,
    Meander,
    MeanderError,
    Side,
    WeightedMeander,
    canonical_key,
    extract_regions,
    region_id,
    validate_weights,
)


@dataclass(frozen=True)
class Vertex:
    id: str
    color: Color
    side: Side
    weight: Fraction | None
    is_root: bool


@dataclass(frozen=True)
class RegionGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[str, str], ...]  # (north, south) per L0 segment
    provenance: bytes = b""

    @property
    def n(self) -> int:
        return len(self.edges) - 1

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def by_id(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    def incident(self, vid: str) -> list[int]:
        return [i for i, e in enumerate(self.edges) if vid in e]

    def neighbours(self, vid: str) -> list[str]:
        out = []
        for north, south in self.edges:
            if north == vid:
                out.append(south)
            elif south == vid:
                out.append(north)
        return out

    def roots(self, color: Color) -> list[Vertex]:
        return [v for v in self.vertices if v.is_root and v.color is color]


@dataclass(frozen=True)
class RootedTree:
    color: Color
    root: str
    parent: dict[str, str | None]
    depth: dict[str, int]
    children: dict[str, list[str]]
    edge_count: int

    @property
    def height(self) -> int:
        return max(self.depth.values())

    def leaves(self) -> list[str]:
        return [v for v, kids in self.children.items() if not kids and v != self.root]


class GraphError(MeanderError):
    pass


def build_graph(source: Meander | WeightedMeander, validate: bool = True) -> RegionGraph:
    """Region graph of a (weighted) meander; plain meanders get no weights."""
    if isinstance(source, WeightedMeander):
        if validate:
            report = validate_weights(source)
            if not report:
                raise GraphError("invalid weights: " + "; ".join(report.messages))
        m, weights = source.meander, source.weights
    else:
        m, weights = source, None
    regions = extract_regions(m)
    vertices = tuple(
        Vertex(r.id, r.color, r.side, None if weights is None else weights[r.id], r.is_root)
        for r in regions.regions
    )
    edges = tuple((e.north_region, e.south_region) for e in regions.edges)
    return RegionGraph(vertices, edges, canonical_key(source))


def tree_view(g: RegionGraph, color: Color) -> RootedTree:
    """Breadth-first rooted tree of one color class, children in edge order."""
    roots = g.roots(color)
    if len(roots) != 1:
        raise GraphError(f"expected one {color.name.lower()} root, found {len(roots)}")
    root = roots[0].id
    adjacency: dict[str, list[str]] = {v.id: [] for v in g.vertices if v.color is color}
    edge_count = 0
    colors = {v.id: v.color for v in g.vertices}
    for north, south in g.edges:
        if colors[north] is color and colors[south] is color:
            adjacency[north].append(south)
            adjacency[south].append(north)
            edge_count += 1
    parent: dict[str, str | None] = {root: None}
    depth = {root: 0}
    children: dict[str, list[str]] = {root: []}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in adjacency[v]:
            if u in parent:
                continue
            parent[u] = v
            depth[u] = depth[v] + 1
            children[u] = []
            children[v].append(u)
            queue.append(u)
    return RootedTree(color, root, parent, depth, children, edge_count)


# ---------------------------------------------------------------------------
# Invariants


@dataclass
class GraphReport:
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __bool__(self) -> bool:
        return self.ok

    def record(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks[name] = self.checks.get(name, True) and passed
        if not passed and detail:
            self.details.setdefault(name, detail)

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def check_graph_invariants(g: RegionGraph) -> GraphReport:
    """Check the structural properties every region graph must have."""
    report = GraphReport()
    n = g.n
    ids = [v.id for v in g.vertices]
    by_id = g.by_id()

    report.record("vertex_count", len(ids) == n + 3,
                  f"{len(ids)} vertices for n={n}")
    report.record("unique_ids", len(set(ids)) == len(ids), "duplicate vertex ids")

    for color in Color:
        count = len(g.roots(color))
        report.record("roots", count == 1, f"{count} {color.name.lower()} roots")

    forest = _UnionFind(ids)
    for i, (north, south) in enumerate(g.edges):
        a, b = by_id[north], by_id[south]
        report.record("monochrome_edges", a.color is b.color,
                      f"edge {i} joins {north} and {south} of different colors")
        report.record("sides", a.side is Side.NORTH and b.side is Side.SOUTH,
                      f"edge {i} is not north-over-south")
        report.record("forest", forest.union(north, south),
                      f"edge {i} closes a cycle through {north} and {south}")
        if i > 0:
            prev = by_id[g.edges[i - 1][0]].color
            report.record("alternation", prev is not a.color,
                          f"edges {i - 1} and {i} share color")
    for color in Color:
        members = {forest.find(v.id) for v in g.vertices if v.color is color}
        report.record("forest", len(members) == 1,
                      f"{color.name.lower()} class has {len(members)} components")

    blacks = sum(v.color is Color.BLACK for v in g.vertices)
    whites = len(ids) - blacks
    report.record("color_balance", abs(blacks - whites) <= 1,
                  f"{blacks} black vs {whites} white")

    if all(v.weight is not None for v in g.vertices):
        sums = {"N": Fraction(0), "S": Fraction(0), "W": Fraction(0), "B": Fraction(0)}
        for v in g.vertices:
            sums[v.side.value] += v.weight
            sums[v.color.value] += v.weight
            report.record("weights", v.weight > 0, f"{v.id} has weight {v.weight}")
        for name, total in sums.items():
            report.record("weights", total == HALF, f"{name} sum is {total}")

    if report.checks.get("roots") and report.checks.get("forest"):
        for color in Color:
            tree = tree_view(g, color)
            report.record("depth", tree.height <= tree.edge_count,
                          f"{color.name.lower()} depth exceeds edge count")
            report.record("depth", 2 * tree.edge_count <= n + 2,
                          f"{color.name.lower()} tree has {tree.edge_count} edges, n={n}")
    else:
        report.record("depth", False, "tree views unavailable")
    return report


# ---------------------------------------------------------------------------
# Surgery


def _id_key(v: Vertex, leftmost: int | None) -> tuple:
    if v.is_root:
        return (0, 0 if v.color is Color.WHITE else 1, 0, "")
    return (1, 0, leftmost if leftmost is not None else 10**9, v.side.value)


def _canonicalize(vertices: list[Vertex], edges: list[tuple[str, str]], provenance: bytes) -> RegionGraph:
    leftmost: dict[str, int] = {}
    for i, (north, south) in enumerate(edges):
        leftmost.setdefault(north, i)
        leftmost.setdefault(south, i)
    rename = {}
    for v in vertices:
        if v.is_root:
            rename[v.id] = v.id
        else:
            rename[v.id] = region_id(leftmost[v.id], v.side)
    new_vertices = [
        replace(v, id=rename[v.id])
        for v in sorted(vertices, key=lambda v: _id_key(v, leftmost.get(v.id)))
    ]
    new_edges = tuple((rename[a], rename[b]) for a, b in edges)
    return RegionGraph(tuple(new_vertices), new_edges, provenance)


def delete_leaf_surgery(g: RegionGraph, leaf: str, target: str) -> RegionGraph:
    """Remove a depth >= 2 leaf, pass its weight to ``target`` and merge the
    two opposite-colored vertices that flank its edge."""
    by_id = g.by_id()
    if leaf not in by_id or target not in by_id:
        raise GraphError(f"unknown vertex among {leaf!r}, {target!r}")
    lv = by_id[leaf]
    if lv.is_root:
        raise GraphError(f"leaf {leaf} is a root")
    incident = g.incident(leaf)
    if len(incident) != 1:
        raise GraphError(f"{leaf} is not a leaf: edges {incident}")
    (p,) = incident
    parent = g.neighbours(leaf)[0]
    if by_id[parent].is_root:
        raise GraphError(f"leaf {leaf} has depth 1 (adjacent to the root)")
    if target == leaf or by_id[target].color is not lv.color or target not in g.neighbours(parent):
        raise GraphError(f"target {target} is not a same-colored vertex at distance 2")
    if not 1 <= p <= g.n - 1:
        raise GraphError(f"leaf edge {p} has no neighbouring edges on both sides")

    far = 1 if lv.side is Side.NORTH else 0  # index of the opposite side in an edge
    near = 1 - far
    alpha, beta = g.edges[p - 1][far], g.edges[p + 1][far]
    hub = g.edges[p - 1][near]
    if g.edges[p + 1][near] != hub:
        raise AssertionError("edges flanking the leaf do not share their leaf-side vertex")
    if alpha == beta:
        raise AssertionError("flanking vertices coincide")

    def rank(vid: str) -> tuple:
        v = by_id[vid]
        return _id_key(v, None if v.is_root else g.incident(vid)[0])

    keep, drop = sorted((alpha, beta), key=rank)
    merged_root = by_id[alpha].is_root or by_id[beta].is_root
    vertices = []
    for v in g.vertices:
        if v.id in (leaf, drop):
            continue
        weight = v.weight
        if v.id == keep:
            weight = _add(weight, by_id[drop].weight)
            v = replace(v, is_root=merged_root)
        if v.id == target:
            weight = _add(weight, lv.weight)
        vertices.append(replace(v, weight=weight))

    def sub(vid: str) -> str:
        return keep if vid == drop else vid

    edges = [tuple(map(sub, e)) for e in g.edges[: p - 1]]
    edges.append(tuple(map(sub, g.edges[p - 1])))
    edges.extend(tuple(map(sub, e)) for e in g.edges[p + 2:])
    return _canonicalize(vertices, edges, g.provenance)


def _add(a: Fraction | None, b: Fraction | None) -> Fraction | None:
    if a is None or b is None:
        return None
    return a + b


# ---------------------------------------------------------------------------
# Encoding and export


def _fmt(w: Fraction | None) -> str:
    return "-" if w is None else f"{w.numerator}/{w.denominator}"


def encode(g: RegionGraph) -> str:
    """Single-line canonical encoding, independent of vertex ids and order.

    Format: ``G n=<n> V=<vertex>,... E=<north>-<south>,...`` where vertices
    are numbered roots first (white, black), then by first appearance along
    the ordered edges; each vertex token is ``<color><side>[r]:<weight>``.
    """
    by_id = g.by_id()
    ordered: list[str] = []
    roots = sorted((v for v in g.vertices if v.is_root),
                   key=lambda v: (v.color is not Color.WHITE, v.side.value, _fmt(v.weight)))
    ordered.extend(v.id for v in roots)
    for north, south in g.edges:
        for vid in (north, south):
            if vid not in ordered:
                ordered.append(vid)
    stray = sorted(
        (v for v in g.vertices if v.id not in ordered),
        key=lambda v: (v.color.value, v.side.value, _fmt(v.weight)),
    )
    ordered.extend(v.id for v in stray)
    number = {vid: i for i, vid in enumerate(ordered)}
    vtoks = []
    for vid in ordered:
        v = by_id[vid]
        vtoks.append(f"{v.color.value}{v.side.value}{'r' if v.is_root else ''}:{_fmt(v.weight)}")
    etoks = [f"{number[a]}-{number[b]}" for a, b in g.edges]
    return f"G n={g.n} V={','.join(vtoks)} E={','.join(etoks)}"


def to_dot(g: RegionGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        fill = "black" if v.color is Color.BLACK else "white"
        font = "white" if v.color is Color.BLACK else "black"
        label = v.id if v.weight is None else f"{v.id}\\n{_fmt(v.weight)}"
        shape = "doublecircle" if v.is_root else "circle"
        lines.append(
            f'  "{v.id}" [label="{label}", shape={shape}, style=filled, '
            f"fillcolor={fill}, fontcolor={font}];"
        )
    for i, (north, south) in enumerate(g.edges):
        lines.append(f'  "{north}" -- "{south}" [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
