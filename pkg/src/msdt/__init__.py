"""Exact minimum-size perfect decision trees by witness-tree branch and bound."""
from .dataset import BLUE, RED, ClassLabel, Cut, DataSet, load_csv, parse_csv
from .oracle import brute_force_min_size, random_instance
from .reduction import reduce_all
from .search import (SearchConfig, Status, Strategy, greedy_upper_bound, solve_bsdt,
                     solve_msdt)
from .tree import Leaf, Node, is_perfect, predict

__all__ = [
    "BLUE", "RED", "ClassLabel", "Cut", "DataSet", "Leaf", "Node", "SearchConfig", "Status",
    "Strategy", "brute_force_min_size", "greedy_upper_bound", "is_perfect", "load_csv",
    "parse_csv", "predict", "random_instance", "reduce_all", "solve_bsdt", "solve_msdt",
]
