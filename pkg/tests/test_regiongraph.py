import random
from dataclasses import replace
from fractions import Fraction as F

import pydot
import pytest

from hoferbounds.meander import (
    Color,
    Meander,
    Side,
    canonical_key,
    enumerate_meanders,
    iter_meanders,
    reduce_leaf,
    sample_weights,
    uniform_weights,
)
from hoferbounds.regiongraph import (
    GraphError,
    RegionGraph,
    Vertex,
    build_graph,
    check_graph_invariants,
    delete_leaf_surgery,
    encode,
    to_dot,
    tree_view,
)
from hoferbounds.transferplan import deletable_leaves

from test_meander import SPIRAL, SPIRAL_W

ALL = list(iter_meanders(8))


def test_n0_graph():
    g = build_graph(Meander(0, Side.NORTH, ()))
    assert len(g.vertices) == 3
    assert g.edges == (("e0N", "rootB"),)
    white = tree_view(g, Color.WHITE)
    assert white.depth == {"rootW": 0}


def test_spiral_trees():
    g = build_graph(SPIRAL_W)
    black = tree_view(g, Color.BLACK)
    white = tree_view(g, Color.WHITE)
    assert black.depth == {"rootB": 0, "e0N": 1, "e2S": 2}
    assert white.depth == {"rootW": 0, "e1S": 1, "e1N": 2}
    assert len(g.edges) == 4
    assert black.leaves() == ["e2S"]


def test_two_stars():
    g = build_graph(Meander(2, Side.NORTH, (1, 2)))
    assert len(g.vertices) == 5
    assert tree_view(g, Color.BLACK).height == 1
    assert tree_view(g, Color.WHITE).height == 1


@pytest.mark.parametrize("m", ALL, ids=lambda m: canonical_key(m).decode())
def test_graph_properties(m):
    g = build_graph(sample_weights(m, 3)) if m.n else build_graph(m)
    report = check_graph_invariants(g)
    assert report, report.details
    trees = [tree_view(g, c) for c in Color]
    assert sum(len(t.depth) for t in trees) == m.n + 3
    for t in trees:
        assert t.height <= t.edge_count <= F(m.n, 2) + 1


def test_two_white_roots_fail():
    g = build_graph(SPIRAL_W)
    vs = tuple(replace(v, is_root=True) if v.id == "e1N" else v for v in g.vertices)
    report = check_graph_invariants(RegionGraph(vs, g.edges))
    assert "roots" in report.failed()


def test_monochrome_cycle_fails_forest():
    vs = (
        Vertex("rootW", Color.WHITE, Side.NORTH, None, True),
        Vertex("rootB", Color.BLACK, Side.SOUTH, None, True),
        Vertex("x", Color.BLACK, Side.NORTH, None, False),
        Vertex("y", Color.WHITE, Side.SOUTH, None, False),
    )
    edges = (("x", "rootB"), ("rootW", "y"), ("x", "rootB"))
    report = check_graph_invariants(RegionGraph(vs, edges))
    assert "forest" in report.failed()


def test_spiral_commutation():
    g = build_graph(SPIRAL_W)
    surgered = delete_leaf_surgery(g, "e2S", "rootB")
    assert encode(surgered) == encode(build_graph(reduce_leaf(SPIRAL_W, "e2S", "rootB")))
    assert len(surgered.vertices) == len(g.vertices) - 2
    assert check_graph_invariants(surgered)


@pytest.mark.parametrize("m", [m for m in iter_meanders(6) if m.n], ids=lambda m: canonical_key(m).decode())
def test_commutation_including_white_leaves(m):
    wm = sample_weights(m, 11)
    g = build_graph(wm)
    for color in Color:
        tree = tree_view(g, color)
        for leaf in tree.leaves():
            if tree.depth[leaf] < 2:
                continue
            target = tree.parent[tree.parent[leaf]]
            lhs = build_graph(reduce_leaf(wm, leaf, target))
            rhs = delete_leaf_surgery(g, leaf, target)
            assert encode(lhs) == encode(rhs)
            assert lhs.vertices == rhs.vertices  # ids are canonical too


def test_surgery_preconditions():
    g = build_graph(SPIRAL_W)
    with pytest.raises(GraphError, match="not a leaf"):
        delete_leaf_surgery(g, "e0N", "rootB")
    with pytest.raises(GraphError, match="depth 1"):
        delete_leaf_surgery(build_graph(uniform_weights(Meander(1, Side.NORTH, (1,)))), "e0N", "rootB")
    with pytest.raises(GraphError, match="distance 2"):
        delete_leaf_surgery(g, "e2S", "rootW")


@pytest.mark.parametrize("n", range(0, 9))
def test_encoding_injective(n):
    encs = [encode(build_graph(uniform_weights(m)) if n else build_graph(m))
            for m in enumerate_meanders(n)]
    assert len(set(encs)) == len(encs)


def test_encoding_ignores_vertex_order():
    g = build_graph(sample_weights(enumerate_meanders(7)[5], 1))
    vs = list(g.vertices)
    random.Random(0).shuffle(vs)
    assert encode(RegionGraph(tuple(vs), g.edges)) == encode(g)


def test_encoding_format():
    assert encode(build_graph(SPIRAL_W)) == (
        "G n=3 V=WNr:1/4,BSr:1/4,BN:1/8,WN:1/8,WS:1/8,BS:1/8 E=2-1,3-4,2-5,0-4")


def test_dot_parses():
    text = to_dot(build_graph(SPIRAL_W))
    (graph,) = pydot.graph_from_dot_data(text)
    assert len(graph.get_nodes()) == 6
    labels = sorted(e.get("label").strip('"') for e in graph.get_edges())
    assert labels == ["0", "1", "2", "3"]


def test_deletable_leaves_of_spiral():
    assert deletable_leaves(build_graph(SPIRAL_W)) == [("e2S", "e0N", "rootB", 2)]
