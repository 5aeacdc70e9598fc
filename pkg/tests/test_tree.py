from hypothesis import given

from msdt.dataset import BLUE, RED, Cut
from msdt.search import greedy_upper_bound
from msdt.tree import (Leaf, Node, from_dict, from_json, is_perfect, predict, size, to_dict,
                       to_dot, to_json)

from conftest import instances

STUMP = Node(Cut(0, 1.0), Leaf(RED), Node(Cut(1, 0.5), Leaf(BLUE), Leaf(RED)))


def test_size_and_predict():
    assert size(STUMP) == 2
    assert size(Leaf(RED)) == 0
    assert predict(STUMP, (1.0, 9.0)) is RED
    assert predict(STUMP, (2.0, 0.5)) is BLUE
    assert predict(STUMP, (2.0, 0.6)) is RED


def test_json_schema():
    assert to_dict(STUMP)["cut"] == {"dim": 0, "thr": 1.0}
    assert to_dict(Leaf(BLUE)) == {"class": "blue"}
    assert from_json(to_json(STUMP)) == STUMP
    assert from_dict({"class": "red"}) == Leaf(RED)


def test_dot_uses_feature_names():
    dot = to_dot(STUMP, ["age", "height"])
    assert "age <= 1" in dot and "height <= 0.5" in dot
    assert dot.count("->") == 4


@given(instances())
def test_greedy_tree_round_trips_and_is_perfect(ds):
    tree = greedy_upper_bound(ds)
    assert is_perfect(from_json(to_json(tree)), ds)
