"""Plain decision trees and their JSON / Graphviz forms."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

from .dataset import ClassLabel, Cut, DataSet


@dataclass(frozen=True)
class Leaf:
    label: ClassLabel


@dataclass(frozen=True)
class Node:
    cut: Cut
    left: "DecisionTree"
    right: "DecisionTree"


DecisionTree = Union[Leaf, Node]


def size(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + size(tree.left) + size(tree.right)


def predict(tree: DecisionTree, x: Sequence[float]) -> ClassLabel:
    while isinstance(tree, Node):
        tree = tree.left if x[tree.cut.dim] <= tree.cut.thr else tree.right
    return tree.label


def is_perfect(tree: DecisionTree, ds: DataSet) -> bool:
    return all(predict(tree, x) == y for x, y in zip(ds.X, ds.labels))


def to_dict(tree: DecisionTree) -> dict:
    if isinstance(tree, Leaf):
        return {"class": str(tree.label)}
    return {
        "cut": {"dim": tree.cut.dim, "thr": tree.cut.thr},
        "left": to_dict(tree.left),
        "right": to_dict(tree.right),
    }


def from_dict(obj: dict) -> DecisionTree:
    if "class" in obj:
        return Leaf(ClassLabel[obj["class"].upper()])
    cut = Cut(int(obj["cut"]["dim"]), float(obj["cut"]["thr"]))
    return Node(cut, from_dict(obj["left"]), from_dict(obj["right"]))


def to_json(tree: DecisionTree, **kwargs) -> str:
    return json.dumps(to_dict(tree), **kwargs)


def from_json(text: str) -> DecisionTree:
    return from_dict(json.loads(text))


def to_dot(tree: DecisionTree, feature_names: Sequence[str] | None = None) -> str:
    lines = ["digraph tree {", "  node [fontname=Helvetica];"]
    counter = 0

    def walk(t: DecisionTree) -> int:
        nonlocal counter
        me = counter
        counter += 1
        if isinstance(t, Leaf):
            colour = "red" if t.label == ClassLabel.RED else "blue"
            lines.append(f'  n{me} [label="{t.label}", shape=box, color={colour}];')
            return me
        name = feature_names[t.cut.dim] if feature_names else f"d{t.cut.dim}"
        lines.append(f'  n{me} [label="{name} <= {t.cut.thr:g}"];')
        lo, hi = walk(t.left), walk(t.right)
        lines.append(f'  n{me} -> n{lo} [label="yes"];')
        lines.append(f'  n{me} -> n{hi} [label="no"];')
        return me

    walk(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
