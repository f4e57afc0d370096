"""Leaf-deletion plans that push a diameter back onto the standard one.

The planner repeatedly removes the deepest black leaf, moving its area two
steps toward the black root at a cost equal to the area moved.  Once the
black tree is a star, a single push sends the remaining black petals to the
root.  Costs are exact rationals taken at the infimum (no epsilon terms).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .meander import (
    HALF,
    ROOT_BLACK,
    ROOT_WHITE,
    Color,
    MeanderError,
    WeightedMeander,
    canonical_key,
    reduce_leaf,
    validate_weights,
)
from .regiongraph import RegionGraph, build_graph, tree_view

TRANSFER = "transfer"
FINAL_PUSH = "final_push"
PUSH_MODES = ("black", "max")


@dataclass(frozen=True)
class Move:
    kind: str
    cost: Fraction
    leaf: str | None = None
    via: str | None = None
    target: str | None = None


@dataclass(frozen=True)
class Plan:
    source: str
    n: int
    moves: tuple[Move, ...]
    push: str = "black"

    @property
    def total_cost(self) -> Fraction:
        return sum((m.cost for m in self.moves), Fraction(0))

    @property
    def bound(self) -> Fraction:
        return linear_bound(self.n)

    @property
    def certified(self) -> bool:
        return self.total_cost <= self.bound

    def transfers(self) -> list[Move]:
        return [m for m in self.moves if m.kind == TRANSFER]


@dataclass(frozen=True)
class Terminal:
    """The standard diameter: both halves of the disk, each of area 1/2."""

    weights: dict = field(default_factory=lambda: {ROOT_WHITE: HALF, ROOT_BLACK: HALF})
    n: int = 0

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))


@dataclass(frozen=True)
class Certificate:
    ok: bool
    cost: Fraction
    bound: Fraction
    margin: Fraction
    sharp_ok: bool  # cost <= n/8 + 1/2; informational only

    def line(self) -> str:
        return f"COST {_fmt(self.cost)} BOUND {_fmt(self.bound)} {'OK' if self.ok else 'FAIL'}"


class PlanError(MeanderError):
    def __init__(self, message: str, move_index: int | None = None):
        super().__init__(message if move_index is None else f"move {move_index}: {message}")
        self.move_index = move_index


def linear_bound(n: int) -> Fraction:
    return Fraction(n, 8) + 1


def _fmt(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def deletable_leaves(g: RegionGraph) -> list[tuple[str, str, str, int]]:
    """Black leaves of depth >= 2 as (leaf, parent, grandparent, depth)."""
    tree = tree_view(g, Color.BLACK)
    out = []
    for leaf in tree.leaves():
        d = tree.depth[leaf]
        if d >= 2:
            via = tree.parent[leaf]
            out.append((leaf, via, tree.parent[via], d))
    return out


def _leftmost(g: RegionGraph, vid: str) -> int:
    return g.incident(vid)[0]


def deepest_first(g: RegionGraph, candidates):
    return min(candidates, key=lambda c: (-c[3], _leftmost(g, c[0])))


def push_cost(wm: WeightedMeander, push: str = "black") -> Fraction:
    g = build_graph(wm, validate=False)
    black = sum((v.weight for v in g.vertices if v.color is Color.BLACK and not v.is_root), Fraction(0))
    if push == "black":
        return black
    if push == "max":
        white = sum((v.weight for v in g.vertices if v.color is Color.WHITE and not v.is_root), Fraction(0))
        return max(black, white)
    raise ValueError(f"unknown push mode {push!r}; expected one of {PUSH_MODES}")


def make_plan(
    wm: WeightedMeander,
    push: str = "black",
    validate: bool = True,
    choose: Callable = deepest_first,
) -> Plan:
    """Plan the leaf deletions and final push for ``wm``.

    ``choose`` picks one of the candidates from :func:`deletable_leaves`;
    the default is deepest leaf first, ties to the smallest leftmost edge.
    """
    if push not in PUSH_MODES:
        raise ValueError(f"unknown push mode {push!r}; expected one of {PUSH_MODES}")
    if validate:
        report = validate_weights(wm)
        if not report:
            raise PlanError("invalid weighted meander: " + "; ".join(report.messages))
    state = wm
    moves = []
    while True:
        g = build_graph(state, validate=False)
        candidates = deletable_leaves(g)
        if not candidates:
            break
        leaf, via, target, _ = choose(g, candidates)
        moves.append(Move(TRANSFER, state.weights[leaf], leaf, via, target))
        state = reduce_leaf(state, leaf, target)
    moves.append(Move(FINAL_PUSH, push_cost(state, push)))
    return Plan(canonical_key(wm).decode(), wm.n, tuple(moves), push)


def execute_plan(wm: WeightedMeander, plan: Plan, validate: bool = True) -> list:
    """Replay ``plan`` and return every intermediate state, ending in Terminal."""
    if plan.source != canonical_key(wm).decode():
        raise PlanError("plan was made for a different weighted meander")
    trace: list = [wm]
    state = wm
    for index, move in enumerate(plan.moves):
        if move.kind == TRANSFER:
            if index == len(plan.moves) - 1:
                raise PlanError("plan does not end with a final push", index)
            if state.weights.get(move.leaf) != move.cost:
                raise PlanError(f"cost {move.cost} differs from weight of {move.leaf}", index)
            try:
                nxt = reduce_leaf(state, move.leaf, move.target)
            except MeanderError as exc:
                raise PlanError(str(exc), index) from exc
            if nxt.n != state.n - 2:
                raise PlanError("crossing count did not drop by 2", index)
            if validate and not validate_weights(nxt):
                raise PlanError("intermediate weights invalid: "
                                + "; ".join(validate_weights(nxt).messages), index)
            if nxt.total() != state.total():
                raise PlanError("total weight not conserved", index)
            state = nxt
            trace.append(state)
        elif move.kind == FINAL_PUSH:
            if index != len(plan.moves) - 1:
                raise PlanError("final push before the last move", index)
            g = build_graph(state, validate=False)
            if tree_view(g, Color.BLACK).height > 1:
                raise PlanError("black tree is not a star at the final push", index)
            if move.cost != push_cost(state, plan.push):
                raise PlanError(f"final push cost {move.cost} is wrong", index)
            trace.append(Terminal())
        else:
            raise PlanError(f"unknown move kind {move.kind!r}", index)
    return trace


def closed_form_cost(g: RegionGraph) -> Fraction:
    """Sum over black non-root vertices of weight * ceil(depth / 2)."""
    tree = tree_view(g, Color.BLACK)
    total = Fraction(0)
    for v in g.vertices:
        if v.color is Color.BLACK and not v.is_root:
            total += v.weight * ((tree.depth[v.id] + 1) // 2)
    return total


def bound_certificate(plan: Plan | Fraction, n: int | None = None) -> Certificate:
    if isinstance(plan, Plan):
        cost = plan.total_cost
        n = plan.n if n is None else n
    else:
        cost = Fraction(plan)
        if n is None:
            raise TypeError("n is required when certifying a bare cost")
    bound = linear_bound(n)
    return Certificate(cost <= bound, cost, bound, bound - cost,
                       cost <= Fraction(n, 8) + HALF)


def all_deletion_costs(wm: WeightedMeander, push: str = "black") -> set[Fraction]:
    """Total costs over every admissible deletion order (exhaustive)."""
    costs: set[Fraction] = set()

    def walk(state: WeightedMeander, spent: Fraction) -> None:
        g = build_graph(state, validate=False)
        candidates = deletable_leaves(g)
        if not candidates:
            costs.add(spent + push_cost(state, push))
            return
        for leaf, _, target, _ in candidates:
            walk(reduce_leaf(state, leaf, target), spent + state.weights[leaf])

    walk(wm, Fraction(0))
    return costs


# ---------------------------------------------------------------------------
# Serialization


def plan_to_json(plan: Plan) -> dict:
    moves = []
    for m in plan.moves:
        rec = {"kind": m.kind, "cost": _fmt(m.cost)}
        if m.kind == TRANSFER:
            rec.update(leaf=m.leaf, via=m.via, target=m.target)
        moves.append(rec)
    return {
        "source": plan.source,
        "n": plan.n,
        "push": plan.push,
        "moves": moves,
        "total_cost": _fmt(plan.total_cost),
        "bound": _fmt(plan.bound),
        "certified": plan.certified,
    }


def plan_from_json(data: dict) -> Plan:
    moves = tuple(
        Move(m["kind"], Fraction(m["cost"]), m.get("leaf"), m.get("via"), m.get("target"))
        for m in data["moves"]
    )
    return Plan(data["source"], int(data["n"]), moves, data.get("push", "black"))


def dump_plan(plan: Plan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan_to_json(plan), indent=1) + "\n")


def load_plan(path: str | Path) -> Plan:
    return plan_from_json(json.loads(Path(path).read_text()))


def sweep(meanders: Sequence, seeds: Sequence[int]):
    """Yield (meander, seed, plan, closed form) for every weighted instance."""
    from .meander import sample_weights

    for m in meanders:
        for seed in seeds:
            wm = sample_weights(m, seed)
            plan = make_plan(wm)
            yield m, seed, plan, closed_form_cost(build_graph(wm))
