import json

import pytest

from app.graph_core import DirectedGraph
from app.paths import EPPath


E1_GRAPH = {
    "vertices": ["u", "w"],
    "edges": [
        {"id": "a", "range": "w", "source": "w"},
        {"id": "e", "range": "u", "source": "w"},
    ],
}


@pytest.fixture
def e1() -> DirectedGraph:
    """Loop a at w with exit e into u."""
    return DirectedGraph.build(["u", "w"], [("a", "w", "w"), ("e", "u", "w")])


@pytest.fixture
def e1_json() -> str:
    return json.dumps(E1_GRAPH)


@pytest.fixture
def loop_x(e1) -> EPPath:
    """a^∞"""
    return EPPath.of(e1, (), ("a",))


@pytest.fixture
def exit_x(e1) -> EPPath:
    """e·a^∞"""
    return EPPath.of(e1, ("e",), ("a",))


@pytest.fixture
def two_cycle() -> DirectedGraph:
    """c0: w1 <- w2, c1: w2 <- w1, exit f from w2 into v."""
    return DirectedGraph.build(
        ["v", "w1", "w2"],
        [("c0", "w1", "w2"), ("c1", "w2", "w1"), ("f", "v", "w2")],
    )


@pytest.fixture
def acyclic_chain() -> DirectedGraph:
    return DirectedGraph.build(["v1", "v2", "v3"], [("e1", "v1", "v2"), ("e2", "v2", "v3")])


@pytest.fixture
def condition_k_graph() -> DirectedGraph:
    """Two loops at one vertex: every return path has an entrance."""
    return DirectedGraph.build(["w"], [("a", "w", "w"), ("b", "w", "w")])


@pytest.fixture
def mixed_graph() -> DirectedGraph:
    """Loop b at p has an entrance d from q; loop c at q has none."""
    return DirectedGraph.build(
        ["p", "q"],
        [("b", "p", "p"), ("c", "q", "q"), ("d", "p", "q")],
    )


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GROUPOID_DIM_OUTPUT", str(tmp_path / "bundles"))
    return tmp_path / "bundles"
