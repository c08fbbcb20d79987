import io

import pytest

from xplab.family import FamilyParams, build_G
from xplab.multigraph import UNBOUNDED, MultiGraph
from xplab.nodes import (SINK, SOURCE, format_label, highway, parse_label,
                         pathnode)


def test_labels_round_trip():
    for node in (SOURCE, SINK, highway(2, -10), pathnode(3, -12, 1)):
        assert parse_label(format_label(node)) == node
    assert format_label(highway(2, -10)) == "H:2:-10"
    assert format_label(pathnode(3, -12, 1)) == "P:3:-12:1"
    assert parse_label("a") == "a"  # ad-hoc string nodes round-trip
    with pytest.raises(ValueError):
        parse_label("H:1")


def test_one_edge_class_per_pair():
    g = MultiGraph()
    g.add_edge("a", "b", 3)
    with pytest.raises(ValueError):
        g.add_edge("b", "a", 5)
    with pytest.raises(ValueError):
        g.add_edge("a", "a")
    with pytest.raises(ValueError):
        g.add_edge("a", "c", 0)


def test_set_multiplicity_requires_existing_edge():
    g = MultiGraph()
    g.add_edge("a", "b", UNBOUNDED)
    g.set_multiplicity("a", "b", 7)
    assert g.multiplicity("b", "a") == 7
    with pytest.raises(KeyError):
        g.set_multiplicity("a", "c", 1)


def test_bfs_and_diameter():
    g = MultiGraph()
    for a, b in [("a", "b"), ("b", "c"), ("c", "d")]:
        g.add_edge(a, b, 1)
    assert g.bfs_distances("a")["d"] == 3
    assert g.diameter() == 3
    assert g.shortest_path("a", "d") == ["a", "b", "c", "d"]
    assert g.is_connected()
    g.add_node("lonely")
    assert not g.is_connected()


def test_json_round_trip_with_huge_and_unbounded():
    params = FamilyParams(1, 2, 2)
    g = build_G(params)
    g.set_multiplicity(pathnode(1, 0, 1), pathnode(1, 1, 1), 12 ** 80)
    obj = g.to_json_obj()
    back = MultiGraph.from_json_obj(obj)
    assert back.node_count() == g.node_count()
    assert back.multiplicity(pathnode(1, 0, 1), pathnode(1, 1, 1)) == 12 ** 80
    assert back.multiplicity(highway(1, 0), highway(1, 1)) == 1
    assert back.multiplicity(SOURCE, pathnode(1, -2, 2)) is UNBOUNDED


def test_json_exponent_records():
    g = MultiGraph()
    g.add_edge("a", "b", 7 ** 30)
    obj = g.to_json_obj(exponent_hints={frozenset(("a", "b")): (7, 30)})
    assert obj["edges"][0]["multiplicity"] == {"base": 7, "exponent": 30}
    back = MultiGraph.from_json_obj(obj)
    assert back.multiplicity("a", "b") == 7 ** 30
