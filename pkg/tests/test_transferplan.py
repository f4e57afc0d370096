from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hoferbounds.meander import (
    Color,
    Meander,
    Side,
    WeightedMeander,
    canonical_key,
    iter_meanders,
    sample_weights,
    uniform_weights,
)
from hoferbounds.regiongraph import build_graph, tree_view
from hoferbounds.transferplan import (
    FINAL_PUSH,
    TRANSFER,
    Move,
    Plan,
    PlanError,
    Terminal,
    all_deletion_costs,
    bound_certificate,
    closed_form_cost,
    dump_plan,
    execute_plan,
    load_plan,
    make_plan,
    plan_from_json,
    plan_to_json,
    push_cost,
)

from test_meander import SPIRAL_W

WEIGHTED = [m for m in iter_meanders(8) if m.n]


def test_spiral_plan():
    plan = make_plan(SPIRAL_W)
    assert plan.moves == (
        Move(TRANSFER, F(1, 8), "e2S", "e0N", "rootB"),
        Move(FINAL_PUSH, F(1, 8)),
    )
    assert plan.total_cost == F(1, 4)
    assert plan.bound == F(11, 8)
    cert = bound_certificate(plan)
    assert cert.ok and cert.margin == F(9, 8)
    assert cert.line() == "COST 1/4 BOUND 11/8 OK"
    assert closed_form_cost(build_graph(SPIRAL_W)) == F(1, 4)


def test_spiral_replay():
    trace = execute_plan(SPIRAL_W, make_plan(SPIRAL_W))
    assert [getattr(s, "n") for s in trace] == [3, 1, 0]
    assert isinstance(trace[-1], Terminal)
    assert all(s.total() == 1 for s in trace)
    assert trace == execute_plan(SPIRAL_W, make_plan(SPIRAL_W))


def test_n0_plan_is_a_single_push():
    # weights for n=0 cannot satisfy all four sums; the structural plan still works
    wm = WeightedMeander(Meander(0, Side.NORTH, ()),
                         {"e0N": F(1, 4), "rootW": F(1, 4), "rootB": F(1, 2)})
    plan = make_plan(wm, validate=False)
    assert plan.moves == (Move(FINAL_PUSH, F(1, 4)),)
    with pytest.raises(PlanError):
        make_plan(wm)


def test_two_petal_star():
    wm = uniform_weights(Meander(2, Side.NORTH, (1, 2)))
    black = [v for v in build_graph(wm).vertices if v.color is Color.BLACK and not v.is_root]
    assert [v.weight for v in black] == [F(1, 8), F(1, 8)]
    plan = make_plan(wm)
    assert plan.moves == (Move(FINAL_PUSH, F(1, 4)),)
    assert closed_form_cost(build_graph(wm)) == F(1, 4)


def test_max_push_mode():
    wm = sample_weights(Meander(2, Side.NORTH, (1, 2)), 4)
    assert push_cost(wm, "max") >= push_cost(wm, "black")
    assert make_plan(wm, push="max").push == "max"
    with pytest.raises(ValueError):
        make_plan(wm, push="white")


@pytest.mark.parametrize("m", WEIGHTED, ids=lambda m: canonical_key(m).decode())
def test_plan_identity_bound_and_replay(m):
    for seed in range(3):
        wm = sample_weights(m, seed)
        plan = make_plan(wm)
        assert plan.total_cost == closed_form_cost(build_graph(wm))
        assert bound_certificate(plan).ok
        assert bound_certificate(plan).sharp_ok
        trace = execute_plan(wm, plan)
        assert [s.n for s in trace[:-1]] == list(range(m.n, m.n % 2 - 1, -2))[: len(trace) - 1]
        assert tree_view(build_graph(trace[-2]), Color.BLACK).height <= 1


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(WEIGHTED), st.integers(0, 2**31))
def test_cost_is_closed_form_property(m, seed):
    wm = sample_weights(m, seed)
    assert make_plan(wm).total_cost == closed_form_cost(build_graph(wm))


@pytest.mark.parametrize("m", [m for m in iter_meanders(6) if m.n], ids=lambda m: canonical_key(m).decode())
def test_every_deletion_order_costs_the_same(m):
    wm = sample_weights(m, 5)
    assert all_deletion_costs(wm) == {make_plan(wm).total_cost}


def test_cost_is_linear_in_weights():
    m = WEIGHTED[-1]
    a, b = sample_weights(m, 1), sample_weights(m, 2)
    mix = WeightedMeander(m, {k: (a.weights[k] + b.weights[k]) / 2 for k in a.weights})
    assert make_plan(mix).total_cost == (make_plan(a).total_cost + make_plan(b).total_cost) / 2


def test_tampered_plan_rejected():
    plan = make_plan(SPIRAL_W)
    bad = Plan(plan.source, plan.n, (Move(TRANSFER, F(1, 4), "e2S", "e0N", "rootB"), plan.moves[1]))
    with pytest.raises(PlanError, match="move 0"):
        execute_plan(SPIRAL_W, bad)
    early = Plan(plan.source, plan.n, (Move(FINAL_PUSH, F(1, 4)),))
    with pytest.raises(PlanError, match="not a star"):
        execute_plan(SPIRAL_W, early)
    with pytest.raises(PlanError, match="different"):
        execute_plan(sample_weights(SPIRAL_W.meander, 0), plan)


def test_bare_cost_certificate():
    assert bound_certificate(F(2), 8).ok
    assert not bound_certificate(F(5, 2), 8).ok
    with pytest.raises(TypeError):
        bound_certificate(F(1))


def test_plan_serialization(tmp_path):
    plan = make_plan(sample_weights(WEIGHTED[-1], 3))
    assert plan_from_json(plan_to_json(plan)) == plan
    path = tmp_path / "plan.json"
    dump_plan(plan, path)
    assert load_plan(path) == plan
    data = plan_to_json(plan)
    assert data["certified"] is True and "/" in data["total_cost"]
